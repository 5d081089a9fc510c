//! Weak-probe susceptibility of a single velocity class.
//!
//! For one intermediate hyperfine level at offset `o` and upper lines `j`
//!
//! ```text
//! χ(v) = −i σ γ₂ N / [ γ₂ − i(Δp − o − kp·v) + Σⱼ (Ωⱼ/2)² / (γ₃ − i(Δp + Δc − Δⱼ − K·v)) ]
//! ```
//!
//! with σ = 3λp²/4π and K = kp + s·kc (s = −1 when the beams
//! counter-propagate). Contributions of the intermediate levels are summed
//! with their normalised weights. The hyperfine offset enters the one-photon
//! detuning only: `Δc` is measured from the reference intermediate level, so
//! the ground → Rydberg two-photon detuning is the same for every path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atomdata::LadderScheme;
use crate::error::{Error, Result};
use crate::units::doppler_rate;

/// Complex susceptibility in the normalisation of the closed form above;
/// `−Im χ` is the absorption coefficient in 1/m.
pub type ComplexSusceptibility = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    CoPropagating,
    #[default]
    CounterPropagating,
}

impl Geometry {
    /// Sign multiplying the coupling wavevector along the probe axis.
    pub fn sign(self) -> f64 {
        match self {
            Geometry::CoPropagating => 1.0,
            Geometry::CounterPropagating => -1.0,
        }
    }
}

/// Probe and coupling laser parameters. Frequencies in 2π·MHz, wavelengths in m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPair {
    pub lambda_p: f64,
    pub lambda_c: f64,
    /// Probe Rabi frequency. Metadata only: the weak-probe form does not use it.
    pub omega_p: f64,
    pub omega_c: f64,
    pub delta_p: f64,
    pub delta_c: f64,
    pub geometry: Geometry,
}

impl FieldPair {
    pub const PROBE_WAVELENGTH: f64 = 780.24e-9;

    pub fn new(lambda_c: f64, omega_c: f64) -> Self {
        Self {
            lambda_p: Self::PROBE_WAVELENGTH,
            lambda_c,
            omega_p: 0.0,
            omega_c,
            delta_p: 0.0,
            delta_c: 0.0,
            geometry: Geometry::CounterPropagating,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_p.is_finite() && self.lambda_p > 0.0) {
            return Err(Error::invalid("lambda_p", "must be positive"));
        }
        if !(self.lambda_c.is_finite() && self.lambda_c > 0.0) {
            return Err(Error::invalid("lambda_c", "must be positive"));
        }
        if !(self.omega_c.is_finite() && self.omega_c >= 0.0) {
            return Err(Error::invalid("omega_c", "must be non-negative"));
        }
        if !(self.delta_p.is_finite() && self.delta_c.is_finite()) {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(())
    }

    /// Probe Doppler coefficient kp in 2π·MHz per m/s.
    pub fn probe_doppler(&self) -> f64 {
        doppler_rate(self.lambda_p, 1.0)
    }

    /// Two-photon Doppler coefficient kp + s·kc in 2π·MHz per m/s.
    pub fn two_photon_doppler(&self) -> f64 {
        doppler_rate(self.lambda_p, 1.0) + self.geometry.sign() * doppler_rate(self.lambda_c, 1.0)
    }

    /// Absorption cross-section prefactor 3λp²/4π in m².
    pub fn cross_section(&self) -> f64 {
        3.0 * self.lambda_p * self.lambda_p / (4.0 * std::f64::consts::PI)
    }
}

/// An upper-state line as seen by the coupling field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingLine {
    /// Offset from the reference upper level, 2π·MHz.
    pub offset: f64,
    /// Coupling strength relative to Ωc², i.e. (relative Rabi factor)².
    pub strength: f64,
}

/// Flattened line data for fast evaluation of the susceptibility kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSet {
    /// (offset, normalised weight) of intermediate levels with weight > 0.
    pub intermediate: Vec<(f64, f64)>,
    pub upper: Vec<CouplingLine>,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl LineSet {
    /// Every upper component of the scheme, with strength relative_rabi².
    pub fn from_scheme(scheme: &LadderScheme) -> Self {
        let upper = scheme
            .upper()
            .iter()
            .map(|u| CouplingLine {
                offset: u.offset,
                strength: u.relative_rabi * u.relative_rabi,
            })
            .collect();
        Self::with_upper(scheme, upper)
    }

    /// Only the reference upper level, coupled with the nominal Ωc.
    pub fn single_upper(scheme: &LadderScheme) -> Self {
        Self::with_upper(
            scheme,
            vec![CouplingLine {
                offset: 0.0,
                strength: 1.0,
            }],
        )
    }

    /// Scheme's intermediate structure with an explicit set of upper lines.
    pub fn with_upper(scheme: &LadderScheme, upper: Vec<CouplingLine>) -> Self {
        let intermediate = scheme
            .intermediate()
            .iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| (c.offset, c.weight))
            .collect();
        let upper = upper.into_iter().filter(|l| l.strength > 0.0).collect();
        Self {
            intermediate,
            upper,
            gamma2: scheme.gamma2(),
            gamma3: scheme.gamma3(),
        }
    }
}

/// Precomputed per-(Δp, Δc) constants of the susceptibility kernel.
#[derive(Debug, Clone)]
pub struct Kernel<'a> {
    lines: &'a LineSet,
    delta_p: f64,
    two_photon: f64,
    probe_doppler: f64,
    two_photon_doppler: f64,
    quarter_omega_sq: f64,
    amplitude: f64,
}

impl<'a> Kernel<'a> {
    pub fn new(lines: &'a LineSet, fields: &FieldPair, density: f64, delta_p: f64, delta_c: f64) -> Self {
        Self {
            lines,
            delta_p,
            two_photon: delta_p + delta_c,
            probe_doppler: fields.probe_doppler(),
            two_photon_doppler: fields.two_photon_doppler(),
            quarter_omega_sq: 0.25 * fields.omega_c * fields.omega_c,
            amplitude: fields.cross_section() * lines.gamma2 * density,
        }
    }

    /// χ for atoms moving with axial velocity `v` (m/s).
    #[inline]
    pub fn eval(&self, v: f64) -> Complex64 {
        let lines = self.lines;
        let mut coupling = Complex64::new(0.0, 0.0);
        if self.quarter_omega_sq > 0.0 {
            let residual = self.two_photon - self.two_photon_doppler * v;
            for line in &lines.upper {
                let denom = Complex64::new(lines.gamma3, -(residual - line.offset));
                coupling += self.quarter_omega_sq * line.strength / denom;
            }
        }
        let one_photon = self.delta_p - self.probe_doppler * v;
        let mut sum = Complex64::new(0.0, 0.0);
        for &(offset, weight) in &lines.intermediate {
            let denom = Complex64::new(lines.gamma2, -(one_photon - offset)) + coupling;
            sum += weight / denom;
        }
        Complex64::new(0.0, -self.amplitude) * sum
    }

    /// Complex velocities at which the integrand has poles, used to place
    /// quadrature panels. One-photon poles for every intermediate level plus
    /// the dressed two-photon pair of each (intermediate, upper) path.
    pub fn poles(&self) -> Vec<Complex64> {
        let lines = self.lines;
        let i = Complex64::i();
        let kp = self.probe_doppler;
        let k2 = self.two_photon_doppler;
        let mut out = Vec::with_capacity(lines.intermediate.len() * (1 + 2 * lines.upper.len()));
        for &(offset, _) in &lines.intermediate {
            // a + b v with a = γ₂ − i(Δp − o), b = i kp
            let a = Complex64::new(lines.gamma2, -(self.delta_p - offset));
            let b = i * kp;
            out.push(-a / b);
            if self.quarter_omega_sq == 0.0 {
                continue;
            }
            for line in &lines.upper {
                let c = self.quarter_omega_sq * line.strength;
                let d = Complex64::new(lines.gamma3, -(self.two_photon - line.offset));
                let e = i * k2;
                // (a + b v)(d + e v) + c = 0
                let qa = b * e;
                let qb = a * e + b * d;
                let qc = a * d + c;
                if qa.norm() <= 1e-12 * (qb.norm() + qc.norm()) {
                    if qb.norm() > 0.0 {
                        out.push(-qc / qb);
                    }
                    continue;
                }
                let disc = (qb * qb - 4.0 * qa * qc).sqrt();
                let q = if (qb.conj() * disc).re >= 0.0 {
                    -0.5 * (qb + disc)
                } else {
                    -0.5 * (qb - disc)
                };
                out.push(q / qa);
                if q.norm() > 0.0 {
                    out.push(qc / q);
                }
            }
        }
        out
    }
}

/// Single-coupling-term susceptibility of velocity class `v` using the
/// reference upper level and the nominal Ωc.
pub fn chi_v(scheme: &LadderScheme, fields: &FieldPair, density: f64, v: f64) -> ComplexSusceptibility {
    let lines = LineSet::single_upper(scheme);
    Kernel::new(&lines, fields, density, fields.delta_p, fields.delta_c).eval(v)
}

/// Susceptibility with one coupling term per upper component, Ωⱼ = relative_rabiⱼ·Ωc.
pub fn chi_v_multi(scheme: &LadderScheme, fields: &FieldPair, density: f64, v: f64) -> ComplexSusceptibility {
    let lines = LineSet::from_scheme(scheme);
    Kernel::new(&lines, fields, density, fields.delta_p, fields.delta_c).eval(v)
}

/// Absorption coefficient (1/m) corresponding to a susceptibility value.
#[inline]
pub fn absorption_coefficient(chi: ComplexSusceptibility) -> f64 {
    -chi.im
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomdata::{build_ladder, FineLabel, HyperfineComponent, UpperComponent};
    use crate::units::mhz;
    use proptest::prelude::*;

    const LAMBDA_C: f64 = 480.38e-9;

    fn single_line(gamma3: f64, upper: Vec<UpperComponent>) -> LadderScheme {
        LadderScheme::new(
            "g",
            vec![HyperfineComponent {
                f: 4,
                offset: 0.0,
                weight: 1.0,
            }],
            upper,
            mhz(3.0),
            gamma3,
            45,
        )
        .unwrap()
    }

    fn reference_only() -> Vec<UpperComponent> {
        vec![UpperComponent {
            label: FineLabel::D5_2,
            offset: 0.0,
            relative_rabi: 1.0,
        }]
    }

    #[test]
    fn bare_two_level_on_resonance() {
        let scheme = single_line(mhz(0.3), reference_only());
        let fields = FieldPair::new(LAMBDA_C, 0.0);
        let n = 1e15;
        let chi = chi_v(&scheme, &fields, n, 0.0);
        let expected = -fields.cross_section() * n;
        assert!(chi.re.abs() < 1e-20);
        assert!((chi.im / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn strong_coupling_suppression_at_two_photon_resonance() {
        let (g2, g3) = (mhz(3.0), mhz(0.3));
        let scheme = single_line(g3, reference_only());
        let omega = mhz(60.0);
        let mut fields = FieldPair::new(LAMBDA_C, omega);
        let v = 12.0;
        let k2 = fields.two_photon_doppler();
        let kp = fields.probe_doppler();
        // one-photon resonant too, so the bare value is the on-resonance one
        fields.delta_p = kp * v;
        fields.delta_c = k2 * v - fields.delta_p;
        let chi = chi_v(&scheme, &fields, 1.0, v);
        let bare = fields.cross_section();
        let factor = g2 * g3 / (0.25 * omega * omega + g2 * g3);
        assert!((chi.norm() / bare / factor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regression_fig3a_parameters() {
        // Oracle: direct complex arithmetic of the closed form in Python,
        // γ₂ = 2π·3, γ₃ = 2π·0.3, Ωc = 2π·3.5 (rad/µs), Δ = v = 0, N = 1, λp = 780.24 nm.
        let scheme = single_line(mhz(0.3), reference_only());
        let fields = FieldPair::new(LAMBDA_C, mhz(3.5));
        let chi = chi_v(&scheme, &fields, 1.0, 0.0);
        let expected_im = -1.0 / (1.0 + (0.25 * 3.5 * 3.5) / (3.0 * 0.3)) * fields.cross_section();
        assert!(chi.re.abs() < 1e-30);
        assert!((chi.im / expected_im - 1.0).abs() < 1e-13);
        assert!((chi.im / -3.300_965_971_215_699_4e-14 - 1.0).abs() < 1e-9, "{}", chi.im);
    }

    #[test]
    fn multi_reduces_to_single() {
        let scheme = single_line(mhz(0.3), reference_only());
        let mut fields = FieldPair::new(LAMBDA_C, mhz(3.5));
        fields.delta_p = mhz(7.0);
        fields.delta_c = mhz(-2.0);
        for v in [-200.0, -3.0, 0.0, 5.5, 90.0] {
            let a = chi_v(&scheme, &fields, 1e15, v);
            let b = chi_v_multi(&scheme, &fields, 1e15, v);
            assert!((a - b).norm() <= 1e-14 * a.norm());
        }
    }

    #[test]
    fn zero_rabi_component_is_inert() {
        let with_dark = single_line(
            mhz(0.3),
            vec![
                UpperComponent {
                    label: FineLabel::D5_2,
                    offset: 0.0,
                    relative_rabi: 1.0,
                },
                UpperComponent {
                    label: FineLabel::D3_2,
                    offset: mhz(138.3),
                    relative_rabi: 0.0,
                },
            ],
        );
        let plain = single_line(mhz(0.3), reference_only());
        let fields = FieldPair::new(LAMBDA_C, mhz(3.5));
        for v in [-20.0, 0.0, 1.0] {
            assert_eq!(chi_v_multi(&with_dark, &fields, 1.0, v), chi_v(&plain, &fields, 1.0, v));
        }
    }

    #[test]
    fn poles_are_roots_of_the_denominator() {
        let scheme = build_ladder(45, mhz(138.3), &[0.2, 0.3, 0.5], mhz(0.3)).unwrap();
        let lines = LineSet::single_upper(&scheme);
        let fields = FieldPair::new(LAMBDA_C, mhz(3.5));
        let kernel = Kernel::new(&lines, &fields, 1.0, mhz(10.0), mhz(-4.0));
        // single upper line: every pole of each path must zero that path's denominator
        for (idx, &(offset, _)) in lines.intermediate.iter().enumerate() {
            let poles = &kernel.poles()[idx * 3..idx * 3 + 3];
            for (k, z) in poles.iter().enumerate() {
                let a = Complex64::new(lines.gamma2, -(mhz(10.0) - offset)) + Complex64::i() * fields.probe_doppler() * z;
                let d = Complex64::new(lines.gamma3, -mhz(6.0)) + Complex64::i() * fields.two_photon_doppler() * z;
                let value = if k == 0 { a } else { a * d + 0.25 * fields.omega_c.powi(2) };
                assert!(value.norm() < 1e-9 * (1.0 + a.norm() * d.norm()), "{k} {value}");
            }
        }
    }

    proptest! {
        #[test]
        fn passive_for_all_detunings(
            dp in -500.0f64..500.0,
            dc in -300.0f64..300.0,
            v in -800.0f64..800.0,
            omega in 0.0f64..30.0,
            fs in 0.0f64..200.0,
        ) {
            let scheme = build_ladder(45, mhz(fs), &[0.2, 0.3, 0.5], mhz(0.3)).unwrap();
            let mut fields = FieldPair::new(LAMBDA_C, mhz(omega));
            fields.delta_p = mhz(dp);
            fields.delta_c = mhz(dc);
            let chi = chi_v_multi(&scheme, &fields, 1e15, v);
            prop_assert!(chi.re.is_finite() && chi.im.is_finite());
            prop_assert!(absorption_coefficient(chi) >= 0.0);
        }

        #[test]
        fn linear_in_density(v in -500.0f64..500.0, n in 1e10f64..1e18) {
            let scheme = build_ladder(45, mhz(138.3), &[0.2, 0.3, 0.5], mhz(0.3)).unwrap();
            let fields = FieldPair::new(LAMBDA_C, mhz(3.5));
            let one = chi_v_multi(&scheme, &fields, n, v);
            let two = chi_v_multi(&scheme, &fields, 2.0 * n, v);
            prop_assert_eq!(two, 2.0 * one);
        }

        #[test]
        fn eit_suppression_monotone_in_coupling(v in -300.0f64..300.0, o1 in 0.0f64..20.0, o2 in 0.0f64..20.0) {
            let scheme = single_line(mhz(0.3), reference_only());
            let (lo, hi) = if o1 <= o2 { (o1, o2) } else { (o2, o1) };
            let at = |omega: f64| {
                let mut fields = FieldPair::new(LAMBDA_C, mhz(omega));
                // one- and two-photon resonance for this class
                fields.delta_p = fields.probe_doppler() * v;
                fields.delta_c = fields.two_photon_doppler() * v - fields.delta_p;
                chi_v(&scheme, &fields, 1.0, v).im.abs()
            };
            prop_assert!(at(hi) <= at(lo) * (1.0 + 1e-12));
        }
    }
}
