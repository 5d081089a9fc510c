//! Spectrum fits and fine-structure series fits.

pub mod optimize;
mod power_law;
mod spectrum_fit;

pub use optimize::Settings;
pub use power_law::{fit_power_law, PowerLawFit, SplittingPoint};
pub use spectrum_fit::{fit_spectrum, FitParameter, FitProblem, FitResult, FittedParameter, ParameterSpec};
