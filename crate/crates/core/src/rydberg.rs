//! Quantum-defect description of the nd Rydberg series.

use serde::{Deserialize, Serialize};

use crate::atomdata::PhysicalConstants;
use crate::error::{Error, Result};
use crate::units::mhz;

/// Fine-structure and term-energy parameters of the nd series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RydbergModel {
    /// Fine-structure coefficient A in A/n*³, GHz.
    pub a_ghz: f64,
    /// Quantum defect δ, n* = n − δ.
    pub delta: f64,
    /// Ionisation limit above the ground state, 1/m.
    pub ionization_wavenumber: f64,
    /// Term energy of the intermediate 5p state, 1/m.
    pub intermediate_term_energy: f64,
    /// Mass-corrected Rydberg constant, 1/m.
    pub rydberg_constant: f64,
    /// Use n* rather than bare n in the Rabi-frequency scaling.
    pub effective_n_rabi: bool,
}

impl Default for RydbergModel {
    fn default() -> Self {
        Self {
            a_ghz: 11.5e3,
            delta: 1.35,
            ionization_wavenumber: 3_369_079.8,
            intermediate_term_energy: 1_281_654.5,
            rydberg_constant: PhysicalConstants::default().reduced_rydberg(),
            effective_n_rabi: true,
        }
    }
}

impl RydbergModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_ghz > 0.0 && self.a_ghz.is_finite()) {
            return Err(Error::invalid("a_ghz", "must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 5.0) {
            return Err(Error::invalid("delta", format!("must lie in (0, 5), got {}", self.delta)));
        }
        if !(self.rydberg_constant > 0.0) {
            return Err(Error::invalid("rydberg_constant", "must be positive"));
        }
        if !(self.ionization_wavenumber > self.intermediate_term_energy && self.intermediate_term_energy > 0.0) {
            return Err(Error::invalid(
                "ionization_wavenumber",
                "must exceed the intermediate term energy",
            ));
        }
        Ok(())
    }

    fn effective_n(&self, n: f64) -> Result<f64> {
        self.validate()?;
        if !(n > self.delta) || !n.is_finite() {
            return Err(Error::invalid("n", format!("must exceed the quantum defect {}, got {n}", self.delta)));
        }
        Ok(n - self.delta)
    }

    /// D3/2–D5/2 interval A/n*³, 2π·MHz.
    pub fn fs_splitting(&self, n: u32) -> Result<f64> {
        let ns = self.effective_n(n as f64)?;
        Ok(mhz(self.a_ghz * 1e3 / ns.powi(3)))
    }

    /// Vacuum wavelength of the 5p → nd transition, m.
    pub fn coupling_wavelength(&self, n: u32) -> Result<f64> {
        let ns = self.effective_n(n as f64)?;
        let term = self.ionization_wavenumber - self.rydberg_constant / (ns * ns);
        Ok(1.0 / (term - self.intermediate_term_energy))
    }

    /// Wavelength of the 5p → series-limit transition, m.
    pub fn series_limit_wavelength(&self) -> f64 {
        1.0 / (self.ionization_wavenumber - self.intermediate_term_energy)
    }

    /// Coupling Rabi frequency at `n` given `omega_ref` at `n_ref`.
    pub fn rabi_scale(&self, omega_ref: f64, n_ref: u32, n: u32) -> Result<f64> {
        let (a, b) = if self.effective_n_rabi {
            (self.effective_n(n_ref as f64)?, self.effective_n(n as f64)?)
        } else {
            self.validate()?;
            if n_ref == 0 || n == 0 {
                return Err(Error::invalid("n", "must be positive"));
            }
            (n_ref as f64, n as f64)
        };
        Ok(omega_ref * (a / b).powf(1.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::to_mhz;
    use proptest::prelude::*;

    #[test]
    fn splittings() {
        let m = RydbergModel::default();
        // 11.5e6 MHz / 43.65³ and / 94.65³
        assert!((to_mhz(m.fs_splitting(45).unwrap()) - 138.275_455_007_897).abs() < 1e-6);
        assert!((to_mhz(m.fs_splitting(96).unwrap()) - 13.562_382_400_978).abs() < 1e-6);
        let double = RydbergModel { a_ghz: 23e3, ..m };
        assert_eq!(double.fs_splitting(60).unwrap(), 2.0 * m.fs_splitting(60).unwrap());
        assert!(m.fs_splitting(1).is_err());
    }

    #[test]
    fn wavelengths_in_measured_band() {
        let m = RydbergModel::default();
        let l26 = m.coupling_wavelength(26).unwrap();
        let l124 = m.coupling_wavelength(124).unwrap();
        assert!((482.5e-9..=483.9e-9).contains(&l26), "{l26}");
        assert!((479.2e-9..=479.6e-9).contains(&l124), "{l124}");
        assert!(m.series_limit_wavelength() < l124);
        // Rydberg–Ritz value for 45d
        assert!((m.coupling_wavelength(45).unwrap() - 480.384_502_08e-9).abs() < 1e-16);
    }

    #[test]
    fn rabi_scaling() {
        let m = RydbergModel::default();
        let o = m.rabi_scale(mhz(3.5), 45, 80).unwrap();
        assert!((to_mhz(o) - 1.447_092_610_99).abs() < 1e-9, "{}", to_mhz(o));
        assert_eq!(m.rabi_scale(mhz(3.5), 45, 45).unwrap(), mhz(3.5));
        assert!(m.rabi_scale(mhz(3.5), 45, 100_000).unwrap() < mhz(1e-4));
        let bare = RydbergModel {
            effective_n_rabi: false,
            ..m
        };
        let ob = bare.rabi_scale(mhz(3.5), 45, 80).unwrap();
        assert!((ob / mhz(3.5) - (45.0f64 / 80.0).powf(1.5)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_models() {
        let m = RydbergModel {
            delta: 5.5,
            ..Default::default()
        };
        assert!(m.fs_splitting(45).is_err());
        let m = RydbergModel {
            a_ghz: 0.0,
            ..Default::default()
        };
        assert!(m.coupling_wavelength(45).is_err());
    }

    proptest! {
        #[test]
        fn fs_times_cube_constant(n in 10u32..400) {
            let m = RydbergModel::default();
            let c = m.fs_splitting(n).unwrap() * (n as f64 - m.delta).powi(3);
            prop_assert!((c / mhz(11.5e6) - 1.0).abs() < 1e-12);
            prop_assert!(m.fs_splitting(n + 1).unwrap() < m.fs_splitting(n).unwrap());
        }

        #[test]
        fn wavelength_decreasing(n in 5u32..400) {
            let m = RydbergModel::default();
            let a = m.coupling_wavelength(n).unwrap();
            let b = m.coupling_wavelength(n + 1).unwrap();
            prop_assert!(b < a);
            prop_assert!(b > m.series_limit_wavelength());
        }

        #[test]
        fn rabi_composes(n1 in 10u32..200, n2 in 10u32..200, n3 in 10u32..200) {
            let m = RydbergModel::default();
            let direct = m.rabi_scale(mhz(3.5), n1, n3).unwrap();
            let via = m.rabi_scale(m.rabi_scale(mhz(3.5), n1, n2).unwrap(), n2, n3).unwrap();
            prop_assert!((via / direct - 1.0).abs() < 1e-12);
        }
    }
}
