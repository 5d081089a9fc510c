//! Quadrature rules for the thermal velocity average.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Hermite rule for ∫ e^{−x²} f(x) dx.
pub fn gauss_hermite(n: usize) -> Rule {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // ascending order
    x.reverse();
    w.reverse();
    Rule { nodes: x, weights: w }
}

/// Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    Rule { nodes: x, weights: w }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    left: f64,
    right: f64,
    score: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Estimated Gauss–Legendre error on a panel: the Bernstein-ellipse bound
/// ρ^{−2q} of the nearest pole, times the Gaussian weight on the panel.
fn panel_score(left: f64, right: f64, sigma: f64, poles: &[Complex64], order: usize) -> f64 {
    let mid = 0.5 * (left + right);
    let half = 0.5 * (right - left);
    let nearest = if left > 0.0 {
        left
    } else if right < 0.0 {
        -right
    } else {
        0.0
    };
    let gauss = (-0.5 * (nearest / sigma).powi(2)).exp();
    let mut worst = 0.0f64;
    for &z in poles {
        let u = (z - mid) / half;
        let r = u + ((u - 1.0).sqrt() * (u + 1.0).sqrt());
        let rho = r.norm().max(1.0 / r.norm());
        worst = worst.max(rho.powi(-2 * order as i32));
    }
    // the Gaussian itself needs panels no wider than about σ
    let smooth = (0.5 * half / sigma).powi(2 * order as i32);
    gauss * worst.max(smooth)
}

/// Split [−half_width, half_width] into `panels` intervals, bisecting
/// greedily wherever the estimated error is largest.
pub(crate) fn graded_panels(
    half_width: f64,
    sigma: f64,
    poles: &[Complex64],
    panels: usize,
    order: usize,
) -> Vec<(f64, f64)> {
    let initial = ((2.0 * half_width / sigma).ceil() as usize).clamp(2, panels.max(2));
    let width = 2.0 * half_width / initial as f64;
    let mut heap = BinaryHeap::with_capacity(panels + 1);
    let mut seq = 0;
    for k in 0..initial {
        let left = -half_width + k as f64 * width;
        let right = if k + 1 == initial {
            half_width
        } else {
            -half_width + (k + 1) as f64 * width
        };
        heap.push(Panel {
            left,
            right,
            score: panel_score(left, right, sigma, poles, order),
            seq,
        });
        seq += 1;
    }
    while heap.len() < panels {
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.left + p.right);
        for (l, r) in [(p.left, mid), (mid, p.right)] {
            heap.push(Panel {
                left: l,
                right: r,
                score: panel_score(l, r, sigma, poles, order),
                seq,
            });
            seq += 1;
        }
    }
    let mut out: Vec<(f64, f64)> = heap.into_iter().map(|p| (p.left, p.right)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        for n in [8, 32, 64, 96, 128] {
            let r = gauss_hermite(n);
            let m0: f64 = r.weights.iter().sum();
            let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x * x).sum();
            let m4: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(4)).sum();
            assert!((m0 / sqrt_pi - 1.0).abs() < 1e-12, "n={n} m0={m0}");
            assert!((m2 / (0.5 * sqrt_pi) - 1.0).abs() < 1e-12);
            assert!((m4 / (0.75 * sqrt_pi) - 1.0).abs() < 1e-12);
            assert!(r.nodes.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn hermite_known_nodes() {
        // n = 3: 0, ±sqrt(3/2); weights √π·(2/3, 1/6, 1/6)
        let r = gauss_hermite(3);
        assert!((r.nodes[2] - 1.5f64.sqrt()).abs() < 1e-14);
        assert!(r.nodes[1].abs() < 1e-14);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((r.weights[1] - 2.0 / 3.0 * sqrt_pi).abs() < 1e-14);
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(8);
        for p in 0..16 {
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn graded_panels_refine_near_poles() {
        let poles = [Complex64::new(37.0, 0.05)];
        let panels = graded_panels(1000.0, 170.0, &poles, 64, 8);
        assert_eq!(panels.len(), 64);
        assert_eq!(panels[0].0, -1000.0);
        assert_eq!(panels[63].1, 1000.0);
        for w in panels.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        let containing = panels.iter().find(|p| p.0 <= 37.0 && p.1 >= 37.0).unwrap();
        assert!(containing.1 - containing.0 < 0.5, "{containing:?}");
    }

    #[test]
    fn graded_panels_deterministic() {
        let poles = [Complex64::new(-3.0, 1.0), Complex64::new(80.0, 0.3)];
        assert_eq!(
            graded_panels(1352.0, 169.0, &poles, 128, 8),
            graded_panels(1352.0, 169.0, &poles, 128, 8)
        );
    }
}
