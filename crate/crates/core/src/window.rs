//! Flat-top (trapezoidal) lag window and its frequency-side kernel.
//!
//! The weight function is flat at 1 over scaled lags |t| <= c and falls
//! linearly to 0 at |t| = 1:
//!
//!   w(t) = 1                          for |t| in [0, c]
//!   w(t) = (1 - |t|) / (1 - c)        for c < |t| <= 1
//!   w(t) = 0                          for |t| > 1
//!
//! The flat stretch is what drives the bias of the resulting spectral
//! estimator below the usual kernel rates; the breaking point c trades the
//! width of that stretch against the steepness of the taper.

use crate::error::{Error, Result};
use crate::fft;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default breaking point of the trapezoid.
pub const DEFAULT_C_BREAK: f64 = 0.5;

/// Window shape: bandwidth `m` (number of lags kept) and breaking point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatTopConfig {
    /// Number of lags retained by the window; weights vanish at lag m.
    pub m: usize,
    /// Location of the trapezoid's shoulder, strictly inside (0, 1).
    pub c_break: f64,
}

impl FlatTopConfig {
    pub fn new(m: usize, c_break: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("window bandwidth m must be >= 1".into()));
        }
        if !(c_break > 0.0 && c_break < 1.0) || !c_break.is_finite() {
            return Err(Error::InvalidBreakpoint(c_break));
        }
        Ok(Self { m, c_break })
    }

    /// Bandwidth with the default breaking point 1/2.
    pub fn with_default_break(m: usize) -> Result<Self> {
        Self::new(m, DEFAULT_C_BREAK)
    }
}

/// The trapezoidal weight at scaled lag `t` (symmetric in t).
/// Requires a breaking point in (0, 1); callers validate via `FlatTopConfig`.
pub fn trapezoid_weight(t: f64, c_break: f64) -> f64 {
    debug_assert!(c_break > 0.0 && c_break < 1.0);
    let a = t.abs();
    if a <= c_break {
        1.0
    } else if a <= 1.0 {
        (1.0 - a) / (1.0 - c_break)
    } else {
        0.0
    }
}

/// Weights w(k/m) for k = 0..=m. The first entries are exactly 1, the last
/// is exactly 0.
pub fn lag_weights(config: &FlatTopConfig) -> Vec<f64> {
    let m = config.m as f64;
    (0..=config.m)
        .map(|k| trapezoid_weight(k as f64 / m, config.c_break))
        .collect()
}

/// The induced frequency kernel
///
///   K(omega) = (1/2pi) sum_{|k| <= m} w(k/m) e^{i k omega}
///            = (1/2pi) (1 + 2 sum_{k=1}^{m} w(k/m) cos(k omega)),
///
/// a real, even trigonometric polynomial that integrates to 1 over one
/// period. It dips negative, which is inherent to the flat-top shape.
pub fn kernel_value(omega: f64, config: &FlatTopConfig) -> f64 {
    let weights = lag_weights(config);
    fft::cosine_series(&weights, omega) / (2.0 * PI)
}

/// Kernel evaluated on many frequencies with the weights computed once.
pub fn kernel_values(omegas: &[f64], config: &FlatTopConfig) -> Vec<f64> {
    let weights = lag_weights(config);
    omegas
        .iter()
        .map(|&w| fft::cosine_series(&weights, w) / (2.0 * PI))
        .collect()
}
