//! Quadratic Stark structure of the Rydberg doublet in dc and rf fields.
//!
//! Fields are in V/cm and polarizabilities in MHz/(V/cm)², so that
//! shift = −½·α·E² comes out in MHz. An rf field E0·sin φ is treated
//! quasi-statically: the spectrum is the mean of dc spectra over evenly
//! spaced phases.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atomdata::{FineLabel, LadderScheme};
use crate::doppler::{EitModel, Evaluator};
use crate::error::{Error, Result};
use crate::spectrum::{ScanAxis, Spectrum, SpectrumMode};
use crate::susceptibility::{CouplingLine, LineSet};
use crate::units::mhz;

/// Scalar polarizability of one |mJ| sub-level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polarizability {
    pub label: FineLabel,
    /// 2|mJ| (1, 3 or 5).
    pub two_mj: u8,
    /// MHz/(V/cm)²
    pub alpha: f64,
}

/// Complete |mJ|-resolved polarizabilities of both fine-structure levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Polarizability>", into = "Vec<Polarizability>")]
pub struct PolarizabilitySet {
    entries: Vec<Polarizability>,
}

impl PolarizabilitySet {
    pub fn new(mut entries: Vec<Polarizability>) -> Result<Self> {
        for e in &entries {
            if !e.alpha.is_finite() {
                return Err(Error::IncompletePolarizabilities(format!(
                    "non-finite alpha for {} |mJ|={}/2",
                    e.label, e.two_mj
                )));
            }
        }
        for label in [FineLabel::D5_2, FineLabel::D3_2] {
            let mut found: Vec<u8> = entries.iter().filter(|e| e.label == label).map(|e| e.two_mj).collect();
            found.sort_unstable();
            let want: Vec<u8> = (1..=label.two_j()).step_by(2).collect();
            if found != want {
                return Err(Error::IncompletePolarizabilities(format!(
                    "{label} needs 2|mJ| = {want:?}, got {found:?}"
                )));
            }
        }
        entries.sort_by_key(|e| (e.label.two_j(), e.two_mj));
        Ok(Self { entries })
    }

    /// D5/2 values for |mJ| = 1/2, 3/2, 5/2 and D3/2 values for 1/2, 3/2.
    pub fn from_values(d52: [f64; 3], d32: [f64; 2]) -> Result<Self> {
        let mut entries = Vec::with_capacity(5);
        for (i, a) in d52.into_iter().enumerate() {
            entries.push(Polarizability {
                label: FineLabel::D5_2,
                two_mj: 2 * i as u8 + 1,
                alpha: a,
            });
        }
        for (i, a) in d32.into_iter().enumerate() {
            entries.push(Polarizability {
                label: FineLabel::D3_2,
                two_mj: 2 * i as u8 + 1,
                alpha: a,
            });
        }
        Self::new(entries)
    }

    /// Order-of-magnitude values for n ≈ 45, MHz/(V/cm)². Used when no
    /// measured set is configured.
    pub fn illustrative() -> Self {
        Self::from_values([2000.0, 1200.0, 400.0], [1600.0, 800.0]).expect("valid set")
    }

    pub fn entries(&self) -> &[Polarizability] {
        &self.entries
    }

    pub fn for_label(&self, label: FineLabel) -> impl Iterator<Item = &Polarizability> {
        self.entries.iter().filter(move |e| e.label == label)
    }
}

impl TryFrom<Vec<Polarizability>> for PolarizabilitySet {
    type Error = Error;

    fn try_from(v: Vec<Polarizability>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PolarizabilitySet> for Vec<Polarizability> {
    fn from(s: PolarizabilitySet) -> Self {
        s.entries
    }
}

/// Sinusoidal rf field E(φ) = E0·sin φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfField {
    /// V/cm
    pub e0: f64,
    /// MHz; only needs to be fast compared with the scan.
    pub frequency: f64,
    pub phase_samples: usize,
}

impl RfField {
    pub const DEFAULT_PHASE_SAMPLES: usize = 64;

    pub fn new(e0: f64, frequency: f64) -> Self {
        Self {
            e0,
            frequency,
            phase_samples: Self::DEFAULT_PHASE_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e0 >= 0.0 && self.e0.is_finite()) {
            return Err(Error::invalid("e0", "must be finite and >= 0"));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::invalid("frequency", "must be positive"));
        }
        if self.phase_samples < 16 {
            return Err(Error::invalid(
                "phase_samples",
                format!("must be >= 16, got {}", self.phase_samples),
            ));
        }
        Ok(())
    }

    /// Distinct E² values over one cycle with their multiplicities.
    fn field_squares(&self) -> Vec<(f64, usize)> {
        let n = self.phase_samples;
        let mut e2: Vec<f64> = (0..n)
            .map(|k| (self.e0 * (2.0 * PI * k as f64 / n as f64).sin()).powi(2))
            .collect();
        e2.sort_by(f64::total_cmp);
        let tol = 1e-12 * self.e0 * self.e0;
        let mut out: Vec<(f64, usize)> = Vec::new();
        for v in e2 {
            match out.last_mut() {
                Some((last, count)) if v - *last <= tol => *count += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

/// Quadratic Stark shift −½·α·E², 2π·MHz.
pub fn stark_shift(alpha: f64, field: f64) -> f64 {
    mhz(-0.5 * alpha * field * field)
}

/// Polarizability whose shift magnitude at `field` equals `splitting_mhz`.
pub fn calibrate_polarizability(splitting_mhz: f64, field: f64) -> Result<f64> {
    if !(field > 0.0 && field.is_finite()) {
        return Err(Error::invalid("field", "must be positive"));
    }
    if !splitting_mhz.is_finite() {
        return Err(Error::invalid("splitting", "must be finite"));
    }
    Ok(2.0 * splitting_mhz / (field * field))
}

/// Upper lines in a dc field of `field` V/cm.
///
/// Each fine-structure component is split into its |mJ| sub-lines with the
/// parent coupling strength shared equally; coincident sub-lines are merged.
/// With `screened` set the field inside the cell is taken to be zero.
pub fn dc_stark_lines(
    scheme: &LadderScheme,
    polarizabilities: &PolarizabilitySet,
    field: f64,
    screened: bool,
) -> Result<Vec<CouplingLine>> {
    if !field.is_finite() {
        return Err(Error::invalid("field", "must be finite"));
    }
    let field = if screened { 0.0 } else { field };
    let mut lines = Vec::new();
    for u in scheme.upper() {
        let strength = u.relative_rabi * u.relative_rabi;
        if field == 0.0 {
            lines.push(CouplingLine {
                offset: u.offset,
                strength,
            });
            continue;
        }
        let subs: Vec<f64> = polarizabilities.for_label(u.label).map(|p| p.alpha).collect();
        let share = strength / subs.len() as f64;
        let mut split: Vec<CouplingLine> = Vec::with_capacity(subs.len());
        for alpha in subs {
            let offset = u.offset + stark_shift(alpha, field);
            match split.iter_mut().find(|l| l.offset == offset) {
                Some(l) => l.strength += share,
                None => split.push(CouplingLine { offset, strength: share }),
            }
        }
        lines.extend(split);
    }
    Ok(lines)
}

/// Coupling-scan ΔT in a dc field.
pub fn dc_stark_spectrum(
    model: &EitModel,
    polarizabilities: &PolarizabilitySet,
    field: f64,
    screened: bool,
    coupling_axis: &[f64],
) -> Result<Spectrum> {
    dc_stark_scan(model, polarizabilities, field, screened, coupling_axis, SpectrumMode::DeltaT)
}

/// Coupling scan in a dc field, as ΔT or as bare probe transmission.
pub fn dc_stark_scan(
    model: &EitModel,
    polarizabilities: &PolarizabilitySet,
    field: f64,
    screened: bool,
    coupling_axis: &[f64],
    mode: SpectrumMode,
) -> Result<Spectrum> {
    let lines = dc_stark_lines(&model.scheme, polarizabilities, field, screened)?;
    let eval = Evaluator::with_lines(model, LineSet::with_upper(&model.scheme, lines))?;
    match mode {
        SpectrumMode::DeltaT => eval.delta_t_scan(ScanAxis::CouplingDetuning, coupling_axis),
        SpectrumMode::Transmission => eval.scan(ScanAxis::CouplingDetuning, coupling_axis, false),
    }
}

/// Coupling-scan ΔT averaged over one cycle of an rf field.
pub fn rf_averaged_spectrum(
    model: &EitModel,
    polarizabilities: &PolarizabilitySet,
    rf: &RfField,
    coupling_axis: &[f64],
) -> Result<Spectrum> {
    rf_averaged_scan(model, polarizabilities, rf, coupling_axis, SpectrumMode::DeltaT)
}

pub fn rf_averaged_scan(
    model: &EitModel,
    polarizabilities: &PolarizabilitySet,
    rf: &RfField,
    coupling_axis: &[f64],
    mode: SpectrumMode,
) -> Result<Spectrum> {
    rf.validate()?;
    let total = rf.phase_samples as f64;
    let mut acc = vec![0.0; coupling_axis.len()];
    for (e2, count) in rf.field_squares() {
        let s = dc_stark_scan(model, polarizabilities, e2.sqrt(), false, coupling_axis, mode)?;
        for (a, v) in acc.iter_mut().zip(s.values()) {
            *a += count as f64 * v;
        }
    }
    for a in &mut acc {
        *a /= total;
    }
    Ok(Spectrum::new(coupling_axis.to_vec(), acc, ScanAxis::CouplingDetuning, mode)?
        .with_fingerprint(model.fingerprint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomdata::build_ladder;
    use crate::units::to_mhz;
    use proptest::prelude::*;

    fn scheme() -> LadderScheme {
        build_ladder(70, mhz(35.0), &[0.0, 0.0, 1.0], mhz(0.3)).unwrap()
    }

    fn pols() -> PolarizabilitySet {
        PolarizabilitySet::from_values([4.0, 12.0, 24.0], [6.0, 18.0]).unwrap()
    }

    #[test]
    fn shift_law() {
        assert_eq!(stark_shift(3.0, 0.0), 0.0);
        let a = stark_shift(3.0, 0.7);
        assert!((stark_shift(3.0, 1.4) / a - 4.0).abs() < 1e-14);
        assert!(a < 0.0);
    }

    #[test]
    fn calibration_reproduces_anchor() {
        let alpha = calibrate_polarizability(2.5, 0.05).unwrap();
        assert!((alpha / 2000.0 - 1.0).abs() < 1e-14);
        assert!((to_mhz(stark_shift(alpha, 0.05)).abs() / 2.5 - 1.0).abs() < 1e-14);
        assert!(calibrate_polarizability(2.5, 0.0).is_err());
    }

    #[test]
    fn incomplete_sets_rejected() {
        let mut e = pols().entries().to_vec();
        e.pop();
        assert!(matches!(
            PolarizabilitySet::new(e.clone()),
            Err(Error::IncompletePolarizabilities(_))
        ));
        e.push(Polarizability {
            label: FineLabel::D3_2,
            two_mj: 5,
            alpha: 1.0,
        });
        assert!(PolarizabilitySet::new(e).is_err());
        assert!(PolarizabilitySet::from_values([1.0, f64::NAN, 2.0], [1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_field_is_unsplit() {
        let s = scheme();
        let lines = dc_stark_lines(&s, &pols(), 0.0, false).unwrap();
        assert_eq!(lines, LineSet::from_scheme(&s).upper);
        let screened = dc_stark_lines(&s, &pols(), 50.0, true).unwrap();
        assert_eq!(screened, lines);
    }

    #[test]
    fn five_sub_lines() {
        let lines = dc_stark_lines(&scheme(), &pols(), 1.0, false).unwrap();
        assert_eq!(lines.len(), 5);
        let degenerate = PolarizabilitySet::from_values([4.0, 4.0, 24.0], [6.0, 6.0]).unwrap();
        let merged = dc_stark_lines(&scheme(), &degenerate, 1.0, false).unwrap();
        assert_eq!(merged.len(), 3);
        assert_eq!(merged[0].strength, 2.0 / 3.0);
    }

    #[test]
    fn phase_squares_cover_cycle() {
        let rf = RfField::new(0.3, 90.0);
        let sq = rf.field_squares();
        assert_eq!(sq.iter().map(|(_, c)| c).sum::<usize>(), 64);
        // sin² takes 17 distinct values on 64 equally spaced phases
        assert_eq!(sq.len(), 17);
        let mean: f64 = sq.iter().map(|(e2, c)| e2 * *c as f64).sum::<f64>() / 64.0;
        assert!((mean / (0.5 * 0.09) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rf_validation() {
        let mut rf = RfField::new(0.3, 90.0);
        rf.phase_samples = 8;
        assert!(rf.validate().is_err());
        assert!(RfField::new(-1.0, 90.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn quadratic_positions(e in 0.01f64..3.0) {
            let s = scheme();
            let p = pols();
            let base = dc_stark_lines(&s, &p, 0.0, false).unwrap();
            let one = dc_stark_lines(&s, &p, e, false).unwrap();
            let two = dc_stark_lines(&s, &p, 2.0 * e, false).unwrap();
            prop_assert_eq!(one.len(), 5);
            for (i, (a, b)) in one.iter().zip(&two).enumerate() {
                let parent = base[if i < 3 { 0 } else { 1 }].offset;
                let d1 = a.offset - parent;
                let d2 = b.offset - parent;
                prop_assert!((d2 - 4.0 * d1).abs() <= 1e-9 * d2.abs());
            }
        }

        #[test]
        fn strength_conserved(e in 0.0f64..3.0, a in prop::array::uniform3(0.0f64..50.0)) {
            let s = scheme();
            let p = PolarizabilitySet::from_values(a, [a[0], a[2]]).unwrap();
            let lines = dc_stark_lines(&s, &p, e, false).unwrap();
            let total: f64 = lines.iter().map(|l| l.strength).sum();
            let want: f64 = s.upper().iter().map(|u| u.relative_rabi.powi(2)).sum();
            prop_assert!((total - want).abs() < 1e-12);
        }
    }
}
