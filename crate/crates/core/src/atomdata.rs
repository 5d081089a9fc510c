//! Level structure, constants and vapour-cell parameters for the
//! ⁸⁵Rb 5s → 5p₃/₂ → nd ladder.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::mhz;

/// Physical constants used by the velocity distribution and term energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// J/K
    pub boltzmann_constant: f64,
    /// kg, mass of the probed atom
    pub atomic_mass: f64,
    /// m/s
    pub speed_of_light: f64,
    /// Infinite-mass Rydberg constant, 1/m
    pub rydberg_constant: f64,
    /// kg
    pub electron_mass: f64,
}

impl PhysicalConstants {
    pub const RB85_MASS: f64 = 84.911_789_738 * 1.660_539_066_60e-27;

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("boltzmann_constant", self.boltzmann_constant),
            ("atomic_mass", self.atomic_mass),
            ("speed_of_light", self.speed_of_light),
            ("rydberg_constant", self.rydberg_constant),
            ("electron_mass", self.electron_mass),
        ];
        for (name, value) in all {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    /// One-dimensional thermal velocity spread sqrt(k_B T / m) in m/s.
    pub fn thermal_velocity(&self, temperature: f64) -> f64 {
        (self.boltzmann_constant * temperature / self.atomic_mass).sqrt()
    }

    /// Rydberg constant corrected for the finite nuclear mass, 1/m.
    pub fn reduced_rydberg(&self) -> f64 {
        self.rydberg_constant / (1.0 + self.electron_mass / self.atomic_mass)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            boltzmann_constant: 1.380_649e-23,
            atomic_mass: Self::RB85_MASS,
            speed_of_light: 299_792_458.0,
            rydberg_constant: 10_973_731.568_160,
            electron_mass: 9.109_383_701_5e-31,
        }
    }
}

/// One hyperfine level of the intermediate manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineComponent {
    pub f: u8,
    /// Energy offset from the manifold reference, 2π·MHz.
    pub offset: f64,
    /// Relative line strength, normalised within the manifold.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FineLabel {
    #[serde(rename = "D3/2")]
    D3_2,
    #[serde(rename = "D5/2")]
    D5_2,
}

impl FineLabel {
    /// Total angular momentum J as twice its value.
    pub fn two_j(self) -> u8 {
        match self {
            FineLabel::D3_2 => 3,
            FineLabel::D5_2 => 5,
        }
    }
}

impl fmt::Display for FineLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FineLabel::D3_2 => f.write_str("D3/2"),
            FineLabel::D5_2 => f.write_str("D5/2"),
        }
    }
}

/// One fine-structure component of the Rydberg state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperComponent {
    pub label: FineLabel,
    /// Offset from the D5/2 line, 2π·MHz.
    pub offset: f64,
    /// Factor multiplying the nominal coupling Rabi frequency.
    pub relative_rabi: f64,
}

/// The three-rung level system: ground, intermediate hyperfine levels and
/// Rydberg fine-structure components.
///
/// Constructed through [`LadderScheme::new`], which checks the invariants and
/// normalises the intermediate weights. Immutable afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderScheme {
    ground_label: String,
    intermediate: Vec<HyperfineComponent>,
    upper: Vec<UpperComponent>,
    gamma2: f64,
    gamma3: f64,
    principal_n: u32,
}

impl LadderScheme {
    pub fn new(
        ground_label: impl Into<String>,
        intermediate: Vec<HyperfineComponent>,
        upper: Vec<UpperComponent>,
        gamma2: f64,
        gamma3: f64,
        principal_n: u32,
    ) -> Result<Self> {
        if !(gamma2.is_finite() && gamma2 > 0.0) {
            return Err(Error::invalid("gamma2", format!("must be positive, got {gamma2}")));
        }
        if !(gamma3.is_finite() && gamma3 > 0.0) {
            return Err(Error::invalid("gamma3", format!("must be positive, got {gamma3}")));
        }
        if intermediate.is_empty() {
            return Err(Error::invalid("intermediate", "at least one hyperfine component required"));
        }
        if upper.is_empty() {
            return Err(Error::invalid("upper", "at least one fine-structure component required"));
        }
        for pair in intermediate.windows(2) {
            if !(pair[1].f > pair[0].f && pair[1].offset > pair[0].offset) {
                return Err(Error::invalid(
                    "intermediate",
                    "F numbers and offsets must be strictly increasing",
                ));
            }
        }
        let mut total = 0.0;
        for c in &intermediate {
            if !(c.weight.is_finite() && c.weight >= 0.0) || !c.offset.is_finite() {
                return Err(Error::invalid("weights", format!("bad component F'={}", c.f)));
            }
            total += c.weight;
        }
        if total <= 0.0 {
            return Err(Error::invalid("weights", "at least one weight must be positive"));
        }
        let intermediate = intermediate
            .into_iter()
            .map(|c| HyperfineComponent {
                weight: c.weight / total,
                ..c
            })
            .collect();

        // The first component is the reference line; a degenerate doublet
        // may put a second component at zero as well.
        if upper[0].offset != 0.0 {
            return Err(Error::invalid("upper", "reference component must have offset 0"));
        }
        for u in &upper {
            if !u.offset.is_finite() || !(0.0..=2.0).contains(&u.relative_rabi) {
                return Err(Error::invalid(
                    "relative_rabi",
                    format!("{} factor {} outside [0, 2]", u.label, u.relative_rabi),
                ));
            }
        }
        Ok(Self {
            ground_label: ground_label.into(),
            intermediate,
            upper,
            gamma2,
            gamma3,
            principal_n,
        })
    }

    pub fn ground_label(&self) -> &str {
        &self.ground_label
    }

    pub fn intermediate(&self) -> &[HyperfineComponent] {
        &self.intermediate
    }

    pub fn upper(&self) -> &[UpperComponent] {
        &self.upper
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn gamma3(&self) -> f64 {
        self.gamma3
    }

    pub fn principal_n(&self) -> u32 {
        self.principal_n
    }

    pub fn with_gamma3(&self, gamma3: f64) -> Result<Self> {
        Self::new(
            self.ground_label.clone(),
            self.intermediate.clone(),
            self.upper.clone(),
            self.gamma2,
            gamma3,
            self.principal_n,
        )
    }

    /// Replace the offset of every non-reference upper component.
    pub fn with_fs_splitting(&self, fs_splitting: f64) -> Result<Self> {
        if !(fs_splitting.is_finite() && fs_splitting >= 0.0) {
            return Err(Error::invalid("fs_splitting", "must be non-negative"));
        }
        let upper = self
            .upper
            .iter()
            .enumerate()
            .map(|(i, u)| UpperComponent {
                offset: if i == 0 { 0.0 } else { fs_splitting },
                ..*u
            })
            .collect();
        Self::new(
            self.ground_label.clone(),
            self.intermediate.clone(),
            upper,
            self.gamma2,
            self.gamma3,
            self.principal_n,
        )
    }

    /// Fine-structure splitting (offset of the last upper component).
    pub fn fs_splitting(&self) -> f64 {
        self.upper.last().map_or(0.0, |u| u.offset)
    }

    /// Distinct (intermediate offset, upper offset) pairs that carry
    /// non-zero line strength.
    pub fn two_photon_lines(&self) -> Vec<(f64, f64)> {
        let mut lines: Vec<(f64, f64)> = Vec::new();
        for c in self.intermediate.iter().filter(|c| c.weight > 0.0) {
            for u in self.upper.iter().filter(|u| u.relative_rabi > 0.0) {
                let pair = (c.offset, u.offset);
                if !lines.contains(&pair) {
                    lines.push(pair);
                }
            }
        }
        lines
    }

    pub fn line_count(&self) -> usize {
        self.two_photon_lines().len()
    }
}

/// Configurable level data for the ladder: hyperfine structure of the
/// intermediate manifold and coupling factors of the Rydberg doublet.
///
/// All frequencies here are plain MHz; [`LevelData::build_ladder`] converts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelData {
    pub ground_label: String,
    pub intermediate_f: Vec<u8>,
    pub intermediate_offsets_mhz: Vec<f64>,
    pub intermediate_weights: Vec<f64>,
    /// Natural linewidth (FWHM) of the intermediate state. The coherence
    /// damping rate entering the susceptibility is half of this.
    pub intermediate_linewidth_mhz: f64,
    pub d52_relative_rabi: f64,
    pub d32_relative_rabi: f64,
}

impl LevelData {
    /// ⁸⁵Rb 5s₁/₂(F=3) → 5p₃/₂(F'=2,3,4). Offsets relative to F'=4;
    /// weights are the F=3 → F' relative transition strengths.
    pub fn rb85() -> Self {
        Self {
            ground_label: "5s 2S1/2 (F=3)".to_owned(),
            intermediate_f: vec![2, 3, 4],
            intermediate_offsets_mhz: vec![-(63.401 + 120.640), -120.640, 0.0],
            intermediate_weights: vec![10.0 / 81.0, 35.0 / 81.0, 36.0 / 81.0],
            intermediate_linewidth_mhz: 6.0,
            d52_relative_rabi: 1.0,
            d32_relative_rabi: 0.5,
        }
    }

    /// Coherence damping rate γ₂ of the intermediate state, 2π·MHz.
    pub fn gamma2(&self) -> f64 {
        mhz(0.5 * self.intermediate_linewidth_mhz)
    }

    /// Assemble the 3 × 2 ladder for Rydberg level `n`.
    ///
    /// `fs_splitting` and `gamma3` are in 2π·MHz; `weights` must match the
    /// number of intermediate components.
    pub fn build_ladder(
        &self,
        n: u32,
        fs_splitting: f64,
        weights: &[f64],
        gamma3: f64,
    ) -> Result<LadderScheme> {
        if n < 10 {
            return Err(Error::invalid("n", format!("must be >= 10, got {n}")));
        }
        if !(fs_splitting.is_finite() && fs_splitting >= 0.0) {
            return Err(Error::invalid("fs_splitting", "must be non-negative"));
        }
        if weights.is_empty() {
            return Err(Error::invalid("weights", "empty"));
        }
        if weights.len() != self.intermediate_f.len()
            || self.intermediate_offsets_mhz.len() != self.intermediate_f.len()
        {
            return Err(Error::invalid(
                "weights",
                format!(
                    "expected {} entries, got {}",
                    self.intermediate_f.len(),
                    weights.len()
                ),
            ));
        }
        let intermediate = self
            .intermediate_f
            .iter()
            .zip(&self.intermediate_offsets_mhz)
            .zip(weights)
            .map(|((&f, &offset), &weight)| HyperfineComponent {
                f,
                offset: mhz(offset),
                weight,
            })
            .collect();
        let upper = vec![
            UpperComponent {
                label: FineLabel::D5_2,
                offset: 0.0,
                relative_rabi: self.d52_relative_rabi,
            },
            UpperComponent {
                label: FineLabel::D3_2,
                offset: fs_splitting,
                relative_rabi: self.d32_relative_rabi,
            },
        ];
        LadderScheme::new(
            self.ground_label.clone(),
            intermediate,
            upper,
            self.gamma2(),
            gamma3,
            n,
        )
    }
}

impl Default for LevelData {
    fn default() -> Self {
        Self::rb85()
    }
}

/// [`LevelData::build_ladder`] with the shipped ⁸⁵Rb structure.
pub fn build_ladder(n: u32, fs_splitting: f64, weights: &[f64], gamma3: f64) -> Result<LadderScheme> {
    LevelData::rb85().build_ladder(n, fs_splitting, weights, gamma3)
}

/// Vapour-cell geometry and thermodynamic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VaporCell {
    /// m
    pub length: f64,
    /// K
    pub temperature: f64,
    /// Atoms per m³ in the probed ground level.
    pub number_density: f64,
}

impl VaporCell {
    /// Density giving a 5 % peak ΔT on the F'=4 → 45d D5/2 line at
    /// Ωc = 2π·3.5 MHz with the default structure and a 75 mm cell.
    pub const DEFAULT_DENSITY: f64 = 2.19e15;

    pub fn new(length: f64, temperature: f64, number_density: f64) -> Result<Self> {
        let cell = Self {
            length,
            temperature,
            number_density,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::invalid("length", "must be positive"));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid("temperature", "must be positive"));
        }
        if !(self.number_density.is_finite() && self.number_density > 0.0) {
            return Err(Error::invalid("number_density", "must be positive"));
        }
        Ok(())
    }
}

impl Default for VaporCell {
    fn default() -> Self {
        Self {
            length: 0.075,
            temperature: 293.0,
            number_density: Self::DEFAULT_DENSITY,
        }
    }
}

/// Melting point of rubidium, K.
const RB_MELTING_POINT: f64 = 312.46;

/// Saturated rubidium vapour pressure in Pa (Nesmeyanov correlation).
pub fn vapor_pressure(temperature: f64) -> Result<f64> {
    if !(temperature > 250.0 && temperature < 400.0) {
        return Err(Error::invalid(
            "temperature",
            format!("{temperature} K outside the 250-400 K correlation range"),
        ));
    }
    let t = temperature;
    let log10_torr = if t < RB_MELTING_POINT {
        -94.048_26 - 1961.258 / t - 0.037_716_87 * t + 42.575_26 * t.log10()
    } else {
        15.882_53 - 4529.635 / t + 0.000_586_63 * t - 2.991_38 * t.log10()
    };
    Ok(10f64.powf(log10_torr) * 133.322_368)
}

/// Number density (1/m³) of one isotope in saturated vapour.
pub fn vapor_density(temperature: f64, isotope_fraction: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&isotope_fraction) {
        return Err(Error::invalid("isotope_fraction", "must lie in [0, 1]"));
    }
    let p = vapor_pressure(temperature)?;
    let k_b = PhysicalConstants::default().boltzmann_constant;
    Ok(isotope_fraction * p / (k_b * temperature))
}
