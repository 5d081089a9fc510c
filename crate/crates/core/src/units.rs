//! Frequency unit helpers.
//!
//! Internally every frequency-like quantity (detunings, Rabi frequencies,
//! decay rates, line offsets) is an angular frequency in rad/µs, i.e. the
//! number printed as `2π·MHz`. External surfaces take plain MHz and convert
//! exactly once.

use std::f64::consts::TAU;

/// Plain MHz to angular rad/µs.
#[inline]
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

/// Angular rad/µs back to plain MHz.
#[inline]
pub fn to_mhz(w: f64) -> f64 {
    w / TAU
}

/// Doppler shift k·v in rad/µs for a wavelength in metres and velocity in m/s.
#[inline]
pub fn doppler_rate(wavelength: f64, v: f64) -> f64 {
    TAU / wavelength * v * 1e-6
}
