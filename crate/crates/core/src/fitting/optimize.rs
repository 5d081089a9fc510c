//! Bounded nonlinear least squares: Nelder–Mead simplex followed by a
//! finite-difference Levenberg–Marquardt polish.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Stopping rules shared by both stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub max_iterations: usize,
    /// Relative residual change regarded as stalled.
    pub rss_tolerance: f64,
    /// Consecutive stalled iterations needed to stop.
    pub stall_iterations: usize,
    /// Cosine between residual and Jacobian columns below which the point
    /// is stationary.
    pub gradient_tolerance: f64,
    /// Relative spread of simplex residuals that hands over to the polish.
    pub simplex_tolerance: f64,
    /// Finite-difference step as a fraction of each parameter's range.
    pub fd_step: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            rss_tolerance: 1e-10,
            stall_iterations: 5,
            gradient_tolerance: 1e-8,
            simplex_tolerance: 1e-6,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Solution {
    /// 1-σ errors from s²·(JᵀJ)⁻¹.
    pub fn uncertainties(&self) -> Vec<f64> {
        let m = self.residuals.len();
        let p = self.x.len();
        let s2 = if m > p { self.rss / (m - p) as f64 } else { 0.0 };
        let jtj = self.jacobian.transpose() * &self.jacobian;
        let cov = jtj.clone().try_inverse().or_else(|| jtj.pseudo_inverse(1e-14).ok());
        match cov {
            Some(c) => (0..p).map(|i| (c[(i, i)].max(0.0) * s2).sqrt()).collect(),
            None => vec![f64::INFINITY; p],
        }
    }
}

pub struct Problem<'a> {
    residuals: &'a dyn Fn(&[f64]) -> Result<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn rss_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

impl<'a> Problem<'a> {
    pub fn new(
        residuals: &'a dyn Fn(&[f64]) -> Result<Vec<f64>>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid("bounds", "need one (lower, upper) pair per parameter"));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::invalid("bounds", format!("invalid interval [{l}, {u}]")));
            }
        }
        Ok(Self {
            residuals,
            lower,
            upper,
        })
    }

    fn clamp(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = (self.residuals)(x)?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("residuals", "non-finite model output"));
        }
        Ok(r)
    }

    /// Central differences, one-sided at the bounds.
    fn jacobian(&self, x: &[f64], r: &[f64], step: f64) -> Result<DMatrix<f64>> {
        let m = r.len();
        let p = x.len();
        let mut j = DMatrix::zeros(m, p);
        for k in 0..p {
            let h = step * (self.upper[k] - self.lower[k]);
            let (lo, hi) = (
                (x[k] - h).max(self.lower[k]),
                (x[k] + h).min(self.upper[k]),
            );
            let mut xa = x.to_vec();
            let mut xb = x.to_vec();
            xa[k] = lo;
            xb[k] = hi;
            let ra = if lo == x[k] { r.to_vec() } else { self.eval(&xa)? };
            let rb = if hi == x[k] { r.to_vec() } else { self.eval(&xb)? };
            for i in 0..m {
                j[(i, k)] = (rb[i] - ra[i]) / (hi - lo);
            }
        }
        Ok(j)
    }

    fn stationary(&self, j: &DMatrix<f64>, r: &[f64], tol: f64) -> bool {
        let rn = rss_of(r).sqrt();
        if rn == 0.0 {
            return true;
        }
        let rv = DVector::from_column_slice(r);
        (0..j.ncols()).all(|k| {
            let col = j.column(k);
            let cn = col.norm();
            cn == 0.0 || (col.dot(&rv)).abs() / (cn * rn) < tol
        })
    }

    pub fn solve(&self, x0: &[f64], settings: &Settings) -> Result<Solution> {
        if x0.len() != self.lower.len() {
            return Err(Error::invalid("initial", "length does not match bounds"));
        }
        for (k, v) in x0.iter().enumerate() {
            if !(self.lower[k] <= *v && *v <= self.upper[k]) {
                return Err(Error::invalid("initial", format!("parameter {k} = {v} outside its bounds")));
            }
        }
        let mut x = x0.to_vec();
        let mut r = self.eval(&x)?;
        let mut j = self.jacobian(&x, &r, settings.fd_step)?;
        if self.stationary(&j, &r, settings.gradient_tolerance) {
            return Ok(Solution {
                rss: rss_of(&r),
                x,
                residuals: r,
                jacobian: j,
                iterations: 0,
                converged: true,
            });
        }

        let (xs, used) = self.simplex(&x, settings)?;
        let mut iterations = used;
        if rss_of(&self.eval(&xs)?) < rss_of(&r) {
            x = xs;
            r = self.eval(&x)?;
            j = self.jacobian(&x, &r, settings.fd_step)?;
        }

        // Levenberg–Marquardt polish
        let p = x.len();
        let mut rss = rss_of(&r);
        let mut lambda = 1e-3;
        let mut stalled = 0;
        let mut converged = false;
        while iterations < settings.max_iterations {
            if self.stationary(&j, &r, settings.gradient_tolerance) {
                converged = true;
                break;
            }
            iterations += 1;
            let jtj = j.transpose() * &j;
            let g = j.transpose() * DVector::from_column_slice(&r);
            let mut a = jtj.clone();
            for k in 0..p {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let step = a.lu().solve(&(-g));
            let mut accepted = false;
            if let Some(step) = step {
                let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                self.clamp(&mut trial);
                if let Ok(rt) = self.eval(&trial) {
                    let rss_t = rss_of(&rt);
                    if rss_t < rss {
                        let change = (rss - rss_t) / rss.max(f64::MIN_POSITIVE);
                        let moved = trial
                            .iter()
                            .zip(&x)
                            .enumerate()
                            .map(|(k, (a, b))| (a - b).abs() / (self.upper[k] - self.lower[k]))
                            .fold(0.0, f64::max);
                        x = trial;
                        r = rt;
                        rss = rss_t;
                        j = self.jacobian(&x, &r, settings.fd_step)?;
                        lambda = (lambda / 10.0).max(1e-12);
                        accepted = true;
                        if change < settings.rss_tolerance || moved < 1e-12 {
                            stalled += 1;
                        } else {
                            stalled = 0;
                        }
                    }
                }
            }
            if !accepted {
                lambda *= 10.0;
                stalled += 1;
                if lambda > 1e12 {
                    converged = true;
                    break;
                }
            }
            if stalled >= settings.stall_iterations {
                converged = true;
                break;
            }
        }
        Ok(Solution {
            x,
            residuals: r,
            rss,
            jacobian: j,
            iterations,
            converged,
        })
    }

    /// Nelder–Mead in coordinates scaled to the unit box.
    fn simplex(&self, x0: &[f64], settings: &Settings) -> Result<(Vec<f64>, usize)> {
        let p = x0.len();
        let to_x = |u: &[f64]| -> Vec<f64> {
            u.iter()
                .enumerate()
                .map(|(k, v)| self.lower[k] + v.clamp(0.0, 1.0) * (self.upper[k] - self.lower[k]))
                .collect()
        };
        let cost = |u: &[f64]| -> Result<f64> { Ok(rss_of(&self.eval(&to_x(u))?)) };
        let u0: Vec<f64> = x0
            .iter()
            .enumerate()
            .map(|(k, v)| (v - self.lower[k]) / (self.upper[k] - self.lower[k]))
            .collect();
        let mut pts = vec![u0.clone()];
        for k in 0..p {
            let mut u = u0.clone();
            u[k] += if u[k] < 0.9 { 0.05 } else { -0.05 };
            pts.push(u);
        }
        let mut vals = pts.iter().map(|u| cost(u)).collect::<Result<Vec<f64>>>()?;
        let mut iterations = 0;
        let mut stalled = 0;
        let mut best_prev = f64::INFINITY;
        while iterations < settings.max_iterations / 2 {
            let mut order: Vec<usize> = (0..=p).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();
            let (best, worst) = (vals[0], vals[p]);
            if worst - best <= settings.simplex_tolerance * best.abs() + f64::MIN_POSITIVE {
                break;
            }
            if (best_prev - best) <= settings.rss_tolerance * best {
                stalled += 1;
                if stalled >= 10 * settings.stall_iterations {
                    break;
                }
            } else {
                stalled = 0;
            }
            best_prev = best;
            iterations += 1;

            let centroid: Vec<f64> = (0..p).map(|k| pts[..p].iter().map(|u| u[k]).sum::<f64>() / p as f64).collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[p])
                    .map(|(c, w)| (c + t * (c - w)).clamp(0.0, 1.0))
                    .collect()
            };
            let xr = along(1.0);
            let fr = cost(&xr)?;
            if fr < vals[0] {
                let xe = along(2.0);
                let fe = cost(&xe)?;
                if fe < fr {
                    pts[p] = xe;
                    vals[p] = fe;
                } else {
                    pts[p] = xr;
                    vals[p] = fr;
                }
                continue;
            }
            if fr < vals[p - 1] {
                pts[p] = xr;
                vals[p] = fr;
                continue;
            }
            let (xc, fc) = if fr < vals[p] {
                let xc = along(0.5);
                let fc = cost(&xc)?;
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = cost(&xc)?;
                (xc, fc)
            };
            if fc < vals[p].min(fr) {
                pts[p] = xc;
                vals[p] = fc;
                continue;
            }
            for i in 1..=p {
                pts[i] = pts[0].iter().zip(&pts[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
                vals[i] = cost(&pts[i])?;
            }
        }
        let best = (0..=p).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
        Ok((to_x(&pts[best]), iterations))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_decay() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * (-1.3 * t).exp() + 0.1).collect();
        let f = |p: &[f64]| -> Result<Vec<f64>> {
            Ok(t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() + p[2] - y).collect())
        };
        let prob = Problem::new(&f, vec![0.0, 0.0, -1.0], vec![10.0, 10.0, 1.0]).unwrap();
        let s = prob.solve(&[1.0, 3.0, 0.5], &Settings::default()).unwrap();
        assert!(s.converged);
        assert!((s.x[0] - 2.5).abs() < 1e-6 && (s.x[1] - 1.3).abs() < 1e-6, "{:?}", s.x);
        assert!(s.rss < 1e-16);
    }

    #[test]
    fn exact_start_takes_no_iterations() {
        let f = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![p[0] - 1.0, 2.0 * (p[0] - 1.0)]) };
        let prob = Problem::new(&f, vec![0.0], vec![2.0]).unwrap();
        let s = prob.solve(&[1.0], &Settings::default()).unwrap();
        assert_eq!(s.iterations, 0);
        assert!(s.converged);
    }

    #[test]
    fn respects_bounds() {
        let f = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![p[0] - 5.0, p[1] + 1.0]) };
        let prob = Problem::new(&f, vec![0.0, 0.0], vec![3.0, 3.0]).unwrap();
        let s = prob.solve(&[1.0, 1.0], &Settings::default()).unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-9 && s.x[1].abs() < 1e-9, "{:?}", s.x);
        assert!(prob.solve(&[4.0, 1.0], &Settings::default()).is_err());
    }

    #[test]
    fn linear_uncertainties_match_closed_form() {
        // y = a + b x with unit scatter: σ_b² = s² / Σ(x − x̄)²
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, x)| 1.0 + 0.5 * x + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let f = |p: &[f64]| -> Result<Vec<f64>> { Ok(x.iter().zip(&y).map(|(x, y)| p[0] + p[1] * x - y).collect()) };
        let prob = Problem::new(&f, vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        let s = prob.solve(&[0.0, 0.0], &Settings::default()).unwrap();
        let mean = x.iter().sum::<f64>() / 20.0;
        let sxx: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let s2 = s.rss / 18.0;
        let sb = s.uncertainties()[1];
        assert!((sb / (s2 / sxx).sqrt() - 1.0).abs() < 1e-5);
    }
}
