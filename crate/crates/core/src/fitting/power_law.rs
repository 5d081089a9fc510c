//! Fine-structure series fits of the form A/(n − δ)³.

use serde::{Deserialize, Serialize};

use super::optimize::{Problem, Settings};
use crate::error::{Error, Result};

/// One measured D3/2–D5/2 interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingPoint {
    pub n: u32,
    /// MHz
    pub splitting: f64,
    /// MHz; uniform weighting when absent.
    pub sigma: Option<f64>,
}

impl SplittingPoint {
    pub fn new(n: u32, splitting: f64) -> Self {
        Self {
            n,
            splitting,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// GHz
    pub a_ghz: f64,
    pub a_uncertainty: f64,
    pub delta: f64,
    /// Zero when δ was held fixed.
    pub delta_uncertainty: f64,
    pub delta_fixed: bool,
    /// Data minus model, MHz.
    pub residuals: Vec<f64>,
    /// Σ (residual/σ)².
    pub chi_squared: f64,
    /// Index of the point with the largest weighted residual.
    pub outlier: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl PowerLawFit {
    /// Model splitting at `n`, MHz.
    pub fn splitting(&self, n: f64) -> f64 {
        1e3 * self.a_ghz / (n - self.delta).powi(3)
    }
}

fn basis(n: u32, delta: f64) -> f64 {
    1e3 / (n as f64 - delta).powi(3)
}

/// Weighted least squares for splitting = A/(n − δ)³ (A in GHz, splitting in
/// MHz). With `fix_delta` the problem is linear in A. Uncertainties are
/// scaled by the reduced χ².
pub fn fit_power_law(points: &[SplittingPoint], fix_delta: Option<f64>) -> Result<PowerLawFit> {
    let min_points = if fix_delta.is_some() { 2 } else { 3 };
    if points.len() < min_points {
        return Err(Error::invalid(
            "points",
            format!("need at least {min_points} points, got {}", points.len()),
        ));
    }
    for p in points {
        if !p.splitting.is_finite() {
            return Err(Error::invalid("splitting", format!("non-finite value at n={}", p.n)));
        }
        if let Some(s) = p.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid("sigma", format!("must be positive at n={}", p.n)));
            }
        }
    }
    let mut distinct: Vec<u32> = points.iter().map(|p| p.n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < min_points {
        return Err(Error::DegenerateDesign(format!(
            "{} distinct n values; need {min_points}",
            distinct.len()
        )));
    }
    let n_min = distinct[0] as f64;
    let weight = |p: &SplittingPoint| 1.0 / p.sigma.unwrap_or(1.0);

    let linear = |delta: f64| -> (f64, f64) {
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for p in points {
            let w = weight(p);
            let x = w * basis(p.n, delta);
            sxy += x * w * p.splitting;
            sxx += x * x;
        }
        (sxy / sxx, sxx)
    };

    let dof = points.len() - if fix_delta.is_some() { 1 } else { 2 };
    let finish = |a: f64, delta: f64| -> (Vec<f64>, f64, usize) {
        let residuals: Vec<f64> = points.iter().map(|p| p.splitting - a * basis(p.n, delta)).collect();
        let weighted: Vec<f64> = points.iter().zip(&residuals).map(|(p, r)| weight(p) * r).collect();
        let chi2 = weighted.iter().map(|r| r * r).sum();
        let outlier = weighted
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        (residuals, chi2, outlier)
    };

    if let Some(delta) = fix_delta {
        if !(delta > 0.0 && delta < 5.0) {
            return Err(Error::invalid("delta", format!("must lie in (0, 5), got {delta}")));
        }
        if n_min <= delta {
            return Err(Error::invalid("n", "every n must exceed the quantum defect"));
        }
        let (a, sxx) = linear(delta);
        let (residuals, chi2, outlier) = finish(a, delta);
        let s2 = if dof > 0 { chi2 / dof as f64 } else { 0.0 };
        return Ok(PowerLawFit {
            a_ghz: a,
            a_uncertainty: (s2 / sxx).sqrt(),
            delta,
            delta_uncertainty: 0.0,
            delta_fixed: true,
            residuals,
            chi_squared: chi2,
            outlier,
            iterations: 0,
            converged: true,
        });
    }

    let delta_max = (n_min - 0.5).min(4.999);
    if delta_max <= 1e-6 {
        return Err(Error::invalid("n", "n values too small for a free quantum defect"));
    }
    let delta0 = 1.35f64.min(0.5 * delta_max);
    let (a0, _) = linear(delta0);
    if !(a0 > 0.0) {
        return Err(Error::invalid("splitting", "data do not support a positive coefficient"));
    }
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        Ok(points
            .iter()
            .map(|p| weight(p) * (x[0] * basis(p.n, x[1]) - p.splitting))
            .collect())
    };
    let problem = Problem::new(&residuals, vec![a0 / 100.0, 1e-6], vec![a0 * 100.0, delta_max])?;
    let settings = Settings {
        fd_step: 1e-8,
        ..Settings::default()
    };
    let sol = problem.solve(&[a0, delta0], &settings)?;
    let sigma = sol.uncertainties();
    let (residuals, chi2, outlier) = finish(sol.x[0], sol.x[1]);
    Ok(PowerLawFit {
        a_ghz: sol.x[0],
        a_uncertainty: sigma[0],
        delta: sol.x[1],
        delta_uncertainty: sigma[1],
        delta_fixed: false,
        residuals,
        chi_squared: chi2,
        outlier,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    const NS: [u32; 12] = [26, 30, 36, 41, 45, 52, 60, 67, 75, 80, 88, 96];

    fn exact(a: f64, delta: f64) -> Vec<SplittingPoint> {
        NS.iter()
            .map(|&n| SplittingPoint::new(n, 1e3 * a / (n as f64 - delta).powi(3)))
            .collect()
    }

    #[test]
    fn exact_points_fixed_delta() {
        let fit = fit_power_law(&exact(11.5e3, 1.35), Some(1.35)).unwrap();
        assert!((fit.a_ghz / 11.5e3 - 1.0).abs() < 1e-12);
        assert!(fit.a_uncertainty < 1e-6);
    }

    #[test]
    fn exact_points_free_delta() {
        let fit = fit_power_law(&exact(11.5e3, 1.35), None).unwrap();
        assert!((fit.a_ghz / 11.5e3 - 1.0).abs() < 1e-9, "{}", fit.a_ghz);
        assert!((fit.delta - 1.35).abs() < 1e-9, "{}", fit.delta);
        assert!(fit.converged);
    }

    #[test]
    fn perturbed_point_is_flagged() {
        let mut pts = exact(11.5e3, 1.35);
        let i75 = NS.iter().position(|&n| n == 75).unwrap();
        pts[i75].splitting += 10.0;
        let fit = fit_power_law(&pts, Some(1.35)).unwrap();
        assert!(fit.a_ghz > 11.5e3);
        assert_eq!(fit.outlier, i75);
    }

    #[test]
    fn noisy_recovery_fixed_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let pts: Vec<SplittingPoint> = exact(11.5e3, 1.35)
            .into_iter()
            .map(|p| SplittingPoint::new(p.n, p.splitting * (1.0 + noise.sample(&mut rng))))
            .collect();
        let fit = fit_power_law(&pts, Some(1.35)).unwrap();
        assert!((fit.a_ghz - 11.5e3).abs() < 0.04 * 11.5e3, "{}", fit.a_ghz);
        assert!(fit.a_uncertainty > 0.0);
    }

    #[test]
    fn degenerate_designs() {
        let same = vec![SplittingPoint::new(45, 138.0); 4];
        assert!(matches!(fit_power_law(&same, Some(1.35)), Err(Error::DegenerateDesign(_))));
        assert!(matches!(fit_power_law(&same, None), Err(Error::DegenerateDesign(_))));
        assert!(fit_power_law(&same[..1], Some(1.35)).is_err());
        let two = [SplittingPoint::new(45, 138.0), SplittingPoint::new(60, 55.0)];
        assert!(fit_power_law(&two, Some(1.35)).is_ok());
        assert!(fit_power_law(&two, None).is_err());
    }

    #[test]
    fn weights_follow_sigma() {
        let mut pts = exact(11.5e3, 1.35);
        pts[0].splitting *= 1.1;
        let unweighted = fit_power_law(&pts, Some(1.35)).unwrap();
        pts[0].sigma = Some(1e3);
        for p in &mut pts[1..] {
            p.sigma = Some(0.1);
        }
        let weighted = fit_power_law(&pts, Some(1.35)).unwrap();
        assert!((weighted.a_ghz - 11.5e3).abs() < (unweighted.a_ghz - 11.5e3).abs());
    }
}
