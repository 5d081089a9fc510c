//! Least-squares fits of the velocity-averaged model to a measured spectrum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::optimize::{Problem, Settings};
use crate::doppler::{EitModel, Evaluator};
use crate::error::{Error, Result};
use crate::spectrum::{Spectrum, SpectrumMode};

/// Quantities that can be adjusted in a spectrum fit. Frequencies are
/// 2π·MHz; amplitude_scale and baseline are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParameter {
    OmegaC,
    DeltaC,
    Gamma3,
    FsSplitting,
    AmplitudeScale,
    Baseline,
}

impl FitParameter {
    pub const ALL: [FitParameter; 6] = [
        FitParameter::OmegaC,
        FitParameter::DeltaC,
        FitParameter::Gamma3,
        FitParameter::FsSplitting,
        FitParameter::AmplitudeScale,
        FitParameter::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitParameter::OmegaC => "omega_c",
            FitParameter::DeltaC => "delta_c",
            FitParameter::Gamma3 => "gamma3",
            FitParameter::FsSplitting => "fs_splitting",
            FitParameter::AmplitudeScale => "amplitude_scale",
            FitParameter::Baseline => "baseline",
        }
    }

    /// True for parameters carried in 2π·MHz.
    pub fn is_frequency(self) -> bool {
        !matches!(self, FitParameter::AmplitudeScale | FitParameter::Baseline)
    }
}

impl fmt::Display for FitParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("parameter", format!("unknown fit parameter '{s}'")))
    }
}

/// A free parameter with its starting value and box constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub parameter: FitParameter,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ParameterSpec {
    pub fn new(parameter: FitParameter, initial: f64, lower: f64, upper: f64) -> Self {
        Self {
            parameter,
            initial,
            lower,
            upper,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitProblem {
    pub data: Spectrum,
    /// Supplies every parameter that is not free.
    pub model: EitModel,
    pub free: Vec<ParameterSpec>,
    /// Used when amplitude_scale is not free.
    pub amplitude_scale: f64,
    /// Used when baseline is not free.
    pub baseline: f64,
    pub settings: Settings,
}

impl FitProblem {
    pub fn new(data: Spectrum, model: EitModel, free: Vec<ParameterSpec>) -> Self {
        Self {
            data,
            model,
            free,
            amplitude_scale: 1.0,
            baseline: 0.0,
            settings: Settings {
                fd_step: 1e-4,
                ..Settings::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.free.is_empty() {
            return Err(Error::invalid("free", "at least one free parameter is required"));
        }
        for (i, p) in self.free.iter().enumerate() {
            if self.free[..i].iter().any(|q| q.parameter == p.parameter) {
                return Err(Error::invalid("free", format!("{} listed twice", p.parameter)));
            }
            if !(p.lower <= p.initial && p.initial <= p.upper && p.lower < p.upper) {
                return Err(Error::invalid(
                    "bounds",
                    format!("{}: initial {} outside [{}, {}]", p.parameter, p.initial, p.lower, p.upper),
                ));
            }
            if p.parameter == FitParameter::Gamma3 && !(p.lower > 0.0) {
                return Err(Error::invalid("bounds", "gamma3 lower bound must be positive"));
            }
            if matches!(p.parameter, FitParameter::OmegaC | FitParameter::FsSplitting) && p.lower < 0.0 {
                return Err(Error::invalid("bounds", format!("{} must stay non-negative", p.parameter)));
            }
        }
        if self.data.len() < 10 * self.free.len() {
            return Err(Error::invalid(
                "data",
                format!(
                    "{} samples for {} free parameters; need at least 10 per parameter",
                    self.data.len(),
                    self.free.len()
                ),
            ));
        }
        self.model.validate()
    }

    /// Model prediction on the data axis for the given free-parameter values.
    pub fn predict(&self, values: &[f64]) -> Result<Vec<f64>> {
        let mut model = self.model.clone();
        let mut amplitude = self.amplitude_scale;
        let mut baseline = self.baseline;
        for (spec, &v) in self.free.iter().zip(values) {
            match spec.parameter {
                FitParameter::OmegaC => model.fields.omega_c = v,
                FitParameter::DeltaC => model.fields.delta_c = v,
                FitParameter::Gamma3 => model.scheme = model.scheme.with_gamma3(v)?,
                FitParameter::FsSplitting => model.scheme = model.scheme.with_fs_splitting(v)?,
                FitParameter::AmplitudeScale => amplitude = v,
                FitParameter::Baseline => baseline = v,
            }
        }
        let ev = Evaluator::new(&model)?;
        let axis = self.data.axis();
        let s = match self.data.mode() {
            SpectrumMode::DeltaT => ev.delta_t_scan(self.data.scan(), axis)?,
            SpectrumMode::Transmission => ev.scan(self.data.scan(), axis, false)?,
        };
        Ok(s.values().iter().map(|v| amplitude * v + baseline).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedParameter {
    pub parameter: FitParameter,
    pub value: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<FittedParameter>,
    pub residual_sum_of_squares: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best-fit model on the data axis.
    pub model_values: Vec<f64>,
}

impl FitResult {
    pub fn get(&self, parameter: FitParameter) -> Option<&FittedParameter> {
        self.parameters.iter().find(|p| p.parameter == parameter)
    }

    pub fn value(&self, parameter: FitParameter) -> Option<f64> {
        self.get(parameter).map(|p| p.value)
    }

    pub fn values(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.value).collect()
    }
}

pub fn fit_spectrum(problem: &FitProblem) -> Result<FitResult> {
    problem.validate()?;
    let data = problem.data.values();
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        Ok(problem.predict(x)?.iter().zip(data).map(|(m, d)| m - d).collect())
    };
    let lower = problem.free.iter().map(|p| p.lower).collect();
    let upper = problem.free.iter().map(|p| p.upper).collect();
    let initial: Vec<f64> = problem.free.iter().map(|p| p.initial).collect();
    let solution = Problem::new(&residuals, lower, upper)?.solve(&initial, &problem.settings)?;
    let sigma = solution.uncertainties();
    let parameters = problem
        .free
        .iter()
        .zip(&solution.x)
        .zip(&sigma)
        .map(|((spec, &value), &uncertainty)| FittedParameter {
            parameter: spec.parameter,
            value,
            uncertainty,
        })
        .collect();
    let model_values = solution.residuals.iter().zip(data).map(|(r, d)| r + d).collect();
    Ok(FitResult {
        parameters,
        residual_sum_of_squares: solution.rss,
        iterations: solution.iterations,
        converged: solution.converged,
        model_values,
    })
}
