//! Sampled spectra and peak analysis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanAxis {
    ProbeDetuning,
    CouplingDetuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMode {
    Transmission,
    DeltaT,
}

impl fmt::Display for ScanAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanAxis::ProbeDetuning => "probe-detuning",
            ScanAxis::CouplingDetuning => "coupling-detuning",
        })
    }
}

impl FromStr for ScanAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "probe-detuning" | "probe" => Ok(ScanAxis::ProbeDetuning),
            "coupling-detuning" | "coupling" => Ok(ScanAxis::CouplingDetuning),
            other => Err(format!("unknown scan axis `{other}`")),
        }
    }
}

impl fmt::Display for SpectrumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumMode::Transmission => "transmission",
            SpectrumMode::DeltaT => "delta-t",
        })
    }
}

impl FromStr for SpectrumMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "transmission" => Ok(SpectrumMode::Transmission),
            "delta-t" => Ok(SpectrumMode::DeltaT),
            other => Err(format!("unknown spectrum mode `{other}`")),
        }
    }
}

/// Transmission or ΔT sampled on a strictly increasing detuning axis
/// (2π·MHz).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    axis: Vec<f64>,
    values: Vec<f64>,
    scan: ScanAxis,
    mode: SpectrumMode,
    fingerprint: Option<String>,
}

impl Spectrum {
    pub fn new(axis: Vec<f64>, values: Vec<f64>, scan: ScanAxis, mode: SpectrumMode) -> Result<Self> {
        if axis.len() != values.len() {
            return Err(Error::invalid("values", "length differs from axis"));
        }
        check_axis(&axis)?;
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite value at index {bad}")));
        }
        if mode == SpectrumMode::Transmission && values.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::invalid("values", "transmission outside (0, 1]"));
        }
        Ok(Self {
            axis,
            values,
            scan,
            mode,
            fingerprint: None,
        })
    }

    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.fingerprint = Some(fingerprint.into());
        self
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scan(&self) -> ScanAxis {
        self.scan
    }

    pub fn mode(&self) -> SpectrumMode {
        self.mode
    }

    pub fn fingerprint(&self) -> Option<&str> {
        self.fingerprint.as_deref()
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// Largest absolute pointwise difference from `other`, which must share the axis.
    pub fn max_abs_difference(&self, other: &Spectrum) -> Result<f64> {
        if self.axis != other.axis {
            return Err(Error::AxisMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn check_axis(axis: &[f64]) -> Result<()> {
    if let Some(bad) = axis.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid("axis", format!("non-finite value at index {bad}")));
    }
    if let Some(i) = axis.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "axis",
            format!("not strictly increasing at index {}", i + 1),
        ));
    }
    Ok(())
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Pointwise difference `on − reference`, tagged as ΔT.
pub fn delta_t(on: &Spectrum, reference: &Spectrum) -> Result<Spectrum> {
    if on.axis != reference.axis || on.scan != reference.scan {
        return Err(Error::AxisMismatch);
    }
    let values = on
        .values
        .iter()
        .zip(&reference.values)
        .map(|(a, b)| a - b)
        .collect();
    let mut out = Spectrum::new(on.axis.clone(), values, on.scan, SpectrumMode::DeltaT)?;
    out.fingerprint = on.fingerprint.clone();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Refined position on the scan axis, 2π·MHz.
    pub position: f64,
    pub height: f64,
    /// Full width at half of `height`, 2π·MHz; `None` when a half-maximum
    /// crossing lies outside the sampled range.
    pub fwhm: Option<f64>,
    pub index: usize,
}

/// Local maxima higher than `min_height`, with parabolic sub-sample
/// refinement and linearly interpolated FWHM.
pub fn find_peaks(spectrum: &Spectrum, min_height: f64) -> Vec<Peak> {
    let x = &spectrum.axis;
    let y = &spectrum.values;
    let n = y.len();
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }
    let mut i = 1;
    while i < n - 1 {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            // walk across a flat top
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[i] > min_height {
                let top = (i + j) / 2;
                peaks.push(refine(x, y, top));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

fn refine(x: &[f64], y: &[f64], i: usize) -> Peak {
    let (mut position, mut height) = (x[i], y[i]);
    if i > 0 && i + 1 < y.len() {
        let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
        let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
        // vertex of the parabola through three (possibly uneven) samples
        let d0 = (y1 - y0) / (x1 - x0);
        let d1 = (y2 - y1) / (x2 - x1);
        let a = (d1 - d0) / (x2 - x0);
        if a < 0.0 {
            let b = d0 - a * (x0 + x1);
            let c = y0 - a * x0 * x0 - b * x0;
            let xv = -b / (2.0 * a);
            if xv >= x0 && xv <= x2 {
                position = xv;
                height = a * xv * xv + b * xv + c;
            }
        }
    }
    let half = 0.5 * height;
    let left = (1..=i).rev().find(|&k| y[k - 1] <= half).map(|k| {
        let (xa, ya, xb, yb) = (x[k - 1], y[k - 1], x[k], y[k]);
        xa + (half - ya) / (yb - ya) * (xb - xa)
    });
    let right = (i..y.len() - 1).find(|&k| y[k + 1] <= half).map(|k| {
        let (xa, ya, xb, yb) = (x[k], y[k], x[k + 1], y[k + 1]);
        xa + (half - ya) / (yb - ya) * (xb - xa)
    });
    Peak {
        position,
        height,
        fwhm: left.zip(right).map(|(l, r)| r - l),
        index: i,
    }
}
