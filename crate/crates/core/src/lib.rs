//! Ladder-EIT spectra of Rydberg states in a thermal vapour.

pub mod atomdata;
pub mod config;
pub mod doppler;
pub mod error;
pub mod fitting;
pub mod io;
pub mod quadrature;
pub mod rydberg;
pub mod spectrum;
pub mod stark;
pub mod susceptibility;
pub mod units;

pub use atomdata::{
    build_ladder, FineLabel, HyperfineComponent, LadderScheme, LevelData, PhysicalConstants,
    UpperComponent, VaporCell,
};
pub use config::Config;
pub use doppler::{
    delta_t_spectrum, doppler_average, spectrum_coupling_scan, spectrum_probe_scan, transmission,
    ConvergenceReport, EitModel, Evaluator, Quadrature, VelocityGrid,
};
pub use error::{Error, Result};
pub use fitting::{
    fit_power_law, fit_spectrum, FitParameter, FitProblem, FitResult, ParameterSpec, PowerLawFit,
    SplittingPoint,
};
pub use io::{load_spectrum_csv, write_spectrum_csv};
pub use rydberg::RydbergModel;
pub use spectrum::{find_peaks, linspace, Peak, ScanAxis, Spectrum, SpectrumMode};
pub use stark::{
    calibrate_polarizability, dc_stark_lines, dc_stark_scan, rf_averaged_scan, rf_averaged_spectrum,
    stark_shift, Polarizability,
    PolarizabilitySet, RfField,
};
pub use susceptibility::{ComplexSusceptibility, FieldPair, Geometry, LineSet};
pub use units::{mhz, to_mhz};
