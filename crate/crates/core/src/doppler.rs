//! Thermal velocity averaging and spectrum synthesis.
//!
//! The susceptibility of each velocity class is integrated against the
//! one-dimensional Maxwell–Boltzmann density along the beam axis, turned into
//! an absorption coefficient and propagated through the cell with
//! Beer–Lambert. ΔT spectra subtract a reference trace whose coupling laser is
//! detuned far above resonance.
//!
//! The EIT feature is very narrow in velocity space: a width of γ₃/|kp − kc|
//! is well below 1 m/s against a thermal spread of ~170 m/s. The default
//! [`Quadrature::Graded`] rule therefore places Gauss–Legendre panels around
//! the complex poles of the integrand; fixed Gauss–Hermite and trapezoid rules
//! are kept for diagnostics and cross-checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atomdata::{LadderScheme, PhysicalConstants, VaporCell};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_hermite, gauss_legendre, graded_panels, Rule};
use crate::spectrum::{check_axis, ScanAxis, Spectrum, SpectrumMode};
use crate::susceptibility::{absorption_coefficient, ComplexSusceptibility, FieldPair, Kernel, LineSet};
use crate::units::mhz;

/// Gauss–Legendre order inside each graded panel.
const PANEL_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Pole-adapted composite Gauss–Legendre.
    Graded,
    GaussHermite,
    Trapezoid,
}

/// Velocity quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VelocityGrid {
    pub method: Quadrature,
    /// Total number of velocity nodes.
    pub node_count: usize,
    /// Integration half-range in units of the thermal spread (graded and
    /// trapezoid rules).
    pub span: f64,
}

impl VelocityGrid {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 32 {
            return Err(Error::invalid("node_count", format!("must be >= 32, got {}", self.node_count)));
        }
        if self.method != Quadrature::GaussHermite && !(self.span >= 5.0) {
            return Err(Error::invalid("span", format!("must be >= 5, got {}", self.span)));
        }
        Ok(())
    }

    pub fn with_node_count(self, node_count: usize) -> Self {
        Self { node_count, ..self }
    }

    pub fn gauss_hermite(node_count: usize) -> Self {
        Self {
            method: Quadrature::GaussHermite,
            node_count,
            span: 8.0,
        }
    }

    pub fn trapezoid(node_count: usize, span: f64) -> Self {
        Self {
            method: Quadrature::Trapezoid,
            node_count,
            span,
        }
    }
}

impl Default for VelocityGrid {
    fn default() -> Self {
        Self {
            method: Quadrature::Graded,
            node_count: 512,
            span: 8.0,
        }
    }
}

/// Everything needed to synthesise a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EitModel {
    pub scheme: LadderScheme,
    pub fields: FieldPair,
    pub cell: VaporCell,
    pub grid: VelocityGrid,
    pub constants: PhysicalConstants,
    /// Coupling detuning added for the ΔT reference trace, 2π·MHz.
    pub reference_offset: f64,
}

impl EitModel {
    pub const DEFAULT_REFERENCE_OFFSET_MHZ: f64 = 500.0;

    pub fn new(scheme: LadderScheme, fields: FieldPair, cell: VaporCell) -> Self {
        Self {
            scheme,
            fields,
            cell,
            grid: VelocityGrid::default(),
            constants: PhysicalConstants::default(),
            reference_offset: mhz(Self::DEFAULT_REFERENCE_OFFSET_MHZ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fields.validate()?;
        self.cell.validate()?;
        self.grid.validate()?;
        self.constants.validate()
    }

    /// Thermal velocity spread sqrt(kT/m), m/s.
    pub fn thermal_velocity(&self) -> f64 {
        self.constants.thermal_velocity(self.cell.temperature)
    }

    /// Short stable hash of every model parameter.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("model serialises");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..8])
    }
}

/// Velocity rule with the Maxwell–Boltzmann density folded into the weights.
#[derive(Debug, Clone)]
enum Integrator {
    Fixed(Rule),
    Graded {
        base: Rule,
        panels: usize,
        half_width: f64,
        sigma: f64,
    },
}

impl Integrator {
    fn new(grid: &VelocityGrid, sigma: f64) -> Self {
        let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
        match grid.method {
            Quadrature::GaussHermite => {
                let r = gauss_hermite(grid.node_count);
                let scale = 2f64.sqrt() * sigma;
                Integrator::Fixed(Rule {
                    nodes: r.nodes.iter().map(|x| scale * x).collect(),
                    weights: r.weights.iter().map(|w| w / PI.sqrt()).collect(),
                })
            }
            Quadrature::Trapezoid => {
                let n = grid.node_count;
                let half = grid.span * sigma;
                let h = 2.0 * half / (n - 1) as f64;
                let nodes: Vec<f64> = (0..n).map(|i| -half + h * i as f64).collect();
                let weights = nodes
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let end = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                        end * h * norm * (-0.5 * (v / sigma).powi(2)).exp()
                    })
                    .collect();
                Integrator::Fixed(Rule { nodes, weights })
            }
            Quadrature::Graded => Integrator::Graded {
                base: gauss_legendre(PANEL_ORDER),
                panels: (grid.node_count / PANEL_ORDER).max(2),
                half_width: grid.span * sigma,
                sigma,
            },
        }
    }

    fn integrate(&self, kernel: &Kernel<'_>) -> Complex64 {
        match self {
            Integrator::Fixed(rule) => rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&v, &w)| w * kernel.eval(v))
                .sum(),
            Integrator::Graded {
                base,
                panels,
                half_width,
                sigma,
            } => {
                let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
                let poles = kernel.poles();
                let mut total = Complex64::new(0.0, 0.0);
                for (left, right) in graded_panels(*half_width, *sigma, &poles, *panels, PANEL_ORDER) {
                    let mid = 0.5 * (left + right);
                    let half = 0.5 * (right - left);
                    let mut part = Complex64::new(0.0, 0.0);
                    for (x, w) in base.nodes.iter().zip(&base.weights) {
                        let v = mid + half * x;
                        part += w * (-0.5 * (v / sigma).powi(2)).exp() * kernel.eval(v);
                    }
                    total += half * norm * part;
                }
                total
            }
        }
    }
}

/// Velocity-averaged susceptibility evaluator for a fixed model and line set.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    model: &'a EitModel,
    lines: LineSet,
    integrator: Integrator,
}

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a EitModel) -> Result<Self> {
        Self::with_lines(model, LineSet::from_scheme(&model.scheme))
    }

    pub fn with_lines(model: &'a EitModel, lines: LineSet) -> Result<Self> {
        model.validate()?;
        let integrator = Integrator::new(&model.grid, model.thermal_velocity());
        Ok(Self {
            model,
            lines,
            integrator,
        })
    }

    pub fn chi(&self, delta_p: f64, delta_c: f64) -> ComplexSusceptibility {
        let kernel = Kernel::new(
            &self.lines,
            &self.model.fields,
            self.model.cell.number_density,
            delta_p,
            delta_c,
        );
        self.integrator.integrate(&kernel)
    }

    pub fn transmission(&self, delta_p: f64, delta_c: f64) -> f64 {
        beer_lambert(self.chi(delta_p, delta_c), self.model.cell.length)
    }

    /// Transmission along `axis`; the other laser stays at its configured
    /// detuning. `reference` adds the far-detuned coupling offset.
    pub fn scan(&self, scan: ScanAxis, axis: &[f64], reference: bool) -> Result<Spectrum> {
        check_axis(axis)?;
        let f = &self.model.fields;
        let shift = if reference { self.model.reference_offset } else { 0.0 };
        let values: Vec<f64> = axis
            .par_iter()
            .map(|&x| match scan {
                ScanAxis::ProbeDetuning => self.transmission(x, f.delta_c + shift),
                ScanAxis::CouplingDetuning => self.transmission(f.delta_p, x + shift),
            })
            .collect();
        Ok(Spectrum::new(axis.to_vec(), values, scan, SpectrumMode::Transmission)?
            .with_fingerprint(self.model.fingerprint()))
    }

    /// ΔT = T(on) − T(reference) along `axis`.
    pub fn delta_t_scan(&self, scan: ScanAxis, axis: &[f64]) -> Result<Spectrum> {
        let on = self.scan(scan, axis, false)?;
        let reference = self.scan(scan, axis, true)?;
        crate::spectrum::delta_t(&on, &reference)
    }
}

#[inline]
fn beer_lambert(chi: ComplexSusceptibility, length: f64) -> f64 {
    (-absorption_coefficient(chi) * length).exp()
}

/// ∫ χ(v) N(v) dv at probe detuning `delta_p` and the model's coupling detuning.
pub fn doppler_average(model: &EitModel, delta_p: f64) -> Result<ComplexSusceptibility> {
    Ok(Evaluator::new(model)?.chi(delta_p, model.fields.delta_c))
}

/// Beer–Lambert transmission T = exp(−α L) with α = −Im χ.
pub fn transmission(
    chi_profile: &[ComplexSusceptibility],
    axis: &[f64],
    scan: ScanAxis,
    cell_length: f64,
) -> Result<Spectrum> {
    if !(cell_length > 0.0) {
        return Err(Error::invalid("cell_length", "must be positive"));
    }
    if let Some(i) = chi_profile.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::invalid("chi", format!("non-finite value at index {i}")));
    }
    let values = chi_profile.iter().map(|&c| beer_lambert(c, cell_length)).collect();
    Spectrum::new(axis.to_vec(), values, scan, SpectrumMode::Transmission)
}

pub fn spectrum_probe_scan(model: &EitModel, probe_axis: &[f64]) -> Result<Spectrum> {
    Evaluator::new(model)?.scan(ScanAxis::ProbeDetuning, probe_axis, false)
}

pub fn spectrum_coupling_scan(model: &EitModel, coupling_axis: &[f64]) -> Result<Spectrum> {
    Evaluator::new(model)?.scan(ScanAxis::CouplingDetuning, coupling_axis, false)
}

/// ΔT spectrum (coupling on resonance minus far-detuned reference).
pub fn delta_t_spectrum(model: &EitModel, scan: ScanAxis, axis: &[f64]) -> Result<Spectrum> {
    Evaluator::new(model)?.delta_t_scan(scan, axis)
}

/// Result of a node-doubling check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub node_count: usize,
    /// Largest change on doubling, relative to the largest magnitude.
    pub relative_change: f64,
}

impl ConvergenceReport {
    pub const CONTRACT: f64 = 1e-4;
    pub const DIAGNOSTIC: f64 = 1e-3;

    /// Meets the doubling contract.
    pub fn converged(&self) -> bool {
        self.relative_change < Self::CONTRACT
    }

    /// False when the grid is badly under-resolved.
    pub fn acceptable(&self) -> bool {
        self.relative_change <= Self::DIAGNOSTIC
    }
}

/// Compare χ at `node_count` and `2 · node_count` for one probe detuning.
pub fn doppler_convergence(model: &EitModel, delta_p: f64) -> Result<ConvergenceReport> {
    let coarse = doppler_average(model, delta_p)?;
    let mut fine_model = model.clone();
    fine_model.grid.node_count *= 2;
    let fine = doppler_average(&fine_model, delta_p)?;
    Ok(ConvergenceReport {
        node_count: model.grid.node_count,
        relative_change: (coarse - fine).norm() / fine.norm(),
    })
}

/// Compare ΔT spectra computed with `coarse` and `fine` node counts.
pub fn spectrum_convergence(
    model: &EitModel,
    scan: ScanAxis,
    axis: &[f64],
    coarse: usize,
    fine: usize,
) -> Result<ConvergenceReport> {
    let mut m = model.clone();
    m.grid.node_count = coarse;
    let a = delta_t_spectrum(&m, scan, axis)?;
    m.grid.node_count = fine;
    let b = delta_t_spectrum(&m, scan, axis)?;
    Ok(ConvergenceReport {
        node_count: coarse,
        relative_change: a.max_abs_difference(&b)? / b.max_abs_value().max(f64::MIN_POSITIVE),
    })
}
