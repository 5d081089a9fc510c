//! TOML run configuration.
//!
//! Every table and key is optional; missing values fall back to the ⁸⁵Rb
//! defaults. Frequencies are plain MHz, lengths m, temperatures K,
//! polarizabilities MHz/(V/cm)².
//!
//! ```toml
//! gamma3_mhz = 0.3
//! reference_offset_mhz = 500.0
//!
//! [levels]
//! intermediate_offsets_mhz = [-184.041, -120.64, 0.0]
//! intermediate_weights = [0.1235, 0.4321, 0.4444]
//! d32_relative_rabi = 0.5
//!
//! [cell]
//! length = 0.075
//! temperature = 293.0
//! number_density = 2.19e15     # or: isotope_fraction = 0.7217
//!
//! [rydberg]
//! a_ghz = 11500.0
//! delta = 1.35
//!
//! [grid]
//! method = "graded"            # "gauss-hermite" | "trapezoid"
//! node_count = 512
//!
//! [[polarizabilities]]
//! label = "D5/2"
//! two_mj = 1
//! alpha = 2000.0
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atomdata::{vapor_density, LevelData, PhysicalConstants, VaporCell};
use crate::doppler::{EitModel, VelocityGrid};
use crate::error::{Error, Result};
use crate::rydberg::RydbergModel;
use crate::stark::PolarizabilitySet;
use crate::susceptibility::FieldPair;
use crate::units::mhz;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellConfig {
    /// m
    pub length: f64,
    /// K
    pub temperature: f64,
    /// 1/m³; takes precedence over `isotope_fraction`.
    pub number_density: Option<f64>,
    /// Derive the density from the saturated vapour pressure.
    pub isotope_fraction: Option<f64>,
}

impl Default for CellConfig {
    fn default() -> Self {
        let cell = VaporCell::default();
        Self {
            length: cell.length,
            temperature: cell.temperature,
            number_density: None,
            isotope_fraction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Upper-state width γ₃, MHz.
    pub gamma3_mhz: f64,
    /// Coupling detuning of the ΔT reference trace, MHz.
    pub reference_offset_mhz: f64,
    pub levels: LevelData,
    pub constants: PhysicalConstants,
    pub cell: CellConfig,
    pub rydberg: RydbergModel,
    pub grid: VelocityGrid,
    pub polarizabilities: Option<PolarizabilitySet>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            gamma3_mhz: 0.3,
            reference_offset_mhz: EitModel::DEFAULT_REFERENCE_OFFSET_MHZ,
            levels: LevelData::rb85(),
            constants: PhysicalConstants::default(),
            cell: CellConfig::default(),
            rydberg: RydbergModel::default(),
            grid: VelocityGrid::default(),
            polarizabilities: None,
        }
    }
}

impl std::str::FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
            .map_err(|e: Error| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn vapor_cell(&self) -> Result<VaporCell> {
        let c = &self.cell;
        let density = match (c.number_density, c.isotope_fraction) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set either cell.number_density or cell.isotope_fraction, not both".to_owned(),
                ))
            }
            (Some(n), None) => n,
            (None, Some(f)) => vapor_density(c.temperature, f)?,
            (None, None) => VaporCell::DEFAULT_DENSITY,
        };
        VaporCell::new(c.length, c.temperature, density)
    }

    /// Model for Rydberg level `n` with nominal coupling Rabi frequency
    /// `omega_c_mhz`. The fine-structure splitting and coupling wavelength
    /// come from the Rydberg model unless `fs_mhz` overrides the former.
    pub fn model(&self, n: u32, omega_c_mhz: f64, fs_mhz: Option<f64>) -> Result<EitModel> {
        if !(omega_c_mhz >= 0.0 && omega_c_mhz.is_finite()) {
            return Err(Error::invalid("omega_c", "must be finite and >= 0"));
        }
        let fs = match fs_mhz {
            Some(f) => mhz(f),
            None => self.rydberg.fs_splitting(n)?,
        };
        let scheme = self
            .levels
            .build_ladder(n, fs, &self.levels.intermediate_weights, mhz(self.gamma3_mhz))?;
        let fields = FieldPair::new(self.rydberg.coupling_wavelength(n)?, mhz(omega_c_mhz));
        let mut model = EitModel::new(scheme, fields, self.vapor_cell()?);
        model.grid = self.grid;
        model.constants = self.constants;
        model.reference_offset = mhz(self.reference_offset_mhz);
        model.validate()?;
        Ok(model)
    }
}
