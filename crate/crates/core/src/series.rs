//! Observed series and sample autocovariance.
//!
//! The autocovariance estimator divides by the full series length n rather
//! than n - k, which keeps the estimated sequence nonnegative definite (and
//! so |rho(k)| <= 1 for every lag).

use crate::error::{Error, Result};
use crate::fft;
use rustfft::num_complex::Complex;

/// A finite, real-valued observation sequence of length >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    /// Validates that the data is usable: length >= 2, every value finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "series needs at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires len >= 2
    }
}

/// Sample autocovariances gamma(0..=max_lag) and autocorrelations rho,
/// together with the length of the series they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfEstimate {
    gamma: Vec<f64>,
    rho: Vec<f64>,
    n_source: usize,
}

impl AcfEstimate {
    /// Wraps an externally known autocovariance sequence (for example the
    /// exact one of a synthetic model) so that selection rules can run on it
    /// as if it had been estimated from a series of length `n_source`.
    pub fn from_gamma(gamma: Vec<f64>, n_source: usize) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InsufficientLags {
                available: 0,
                needed: 1,
            });
        }
        if gamma[0] <= 0.0 {
            return Err(Error::DegenerateModel(gamma[0]));
        }
        if n_source < 2 {
            return Err(Error::InvalidConfig(format!(
                "source length {n_source} too short"
            )));
        }
        let rho = gamma.iter().map(|g| g / gamma[0]).collect();
        Ok(Self {
            gamma,
            rho,
            n_source,
        })
    }

    /// gamma(0..=max_lag)
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// rho(0..=max_lag); rho(0) = 1
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Length of the originating series (drives the selection threshold).
    pub fn n_source(&self) -> usize {
        self.n_source
    }

    /// Largest lag covered by this estimate.
    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// Arithmetic mean of the series.
pub fn sample_mean(series: &TimeSeries) -> f64 {
    series.values.iter().sum::<f64>() / series.len() as f64
}

/// Sample autocovariance up to `max_lag`:
///
///   gamma(k) = (1/n) sum_{i=0}^{n-1-k} (x_i - mean)(x_{i+k} - mean)
///
/// Direct O(n * max_lag) evaluation of the definition.
pub fn sample_autocovariance(series: &TimeSeries, max_lag: usize) -> Result<AcfEstimate> {
    let n = series.len();
    if max_lag > n - 1 {
        return Err(Error::LagOutOfRange { max_lag, n });
    }
    let mean = sample_mean(series);
    let dev: Vec<f64> = series.values.iter().map(|x| x - mean).collect();
    let mut gamma = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let s: f64 = dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum();
        gamma.push(s / n as f64);
    }
    finish_acf(gamma, n)
}

/// Same estimator as [`sample_autocovariance`], computed with an FFT in
/// O(n log n): mean-correct, zero-pad to at least 2n, and read the
/// autocovariances off the inverse transform of the squared spectrum.
pub fn sample_autocovariance_fast(series: &TimeSeries, max_lag: usize) -> Result<AcfEstimate> {
    let n = series.len();
    if max_lag > n - 1 {
        return Err(Error::LagOutOfRange { max_lag, n });
    }
    let mean = sample_mean(series);
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(size);
    buf.extend(series.values.iter().map(|x| Complex::new(x - mean, 0.0)));
    buf.resize(size, Complex::new(0.0, 0.0));
    fft::forward(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    fft::inverse(&mut buf);
    let scale = 1.0 / (size as f64 * n as f64);
    let gamma: Vec<f64> = buf[..=max_lag].iter().map(|v| v.re * scale).collect();
    finish_acf(gamma, n)
}

fn finish_acf(gamma: Vec<f64>, n: usize) -> Result<AcfEstimate> {
    if gamma[0] <= 0.0 {
        return Err(Error::ConstantSeries);
    }
    let rho = gamma.iter().map(|g| g / gamma[0]).collect();
    Ok(AcfEstimate {
        gamma,
        rho,
        n_source: n,
    })
}
