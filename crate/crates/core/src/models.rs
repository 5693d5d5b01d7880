//! Synthetic autocovariance models with known decay structure.
//!
//! A model describes gamma(k) in closed form; `realize` truncates it at a
//! finite lag, checks the implied spectral density on a fine grid, and if the
//! density dips negative inflates gamma(0) just enough to make the sequence
//! positive semidefinite. The result is a `ValidAcf` that the circulant
//! sampler can embed exactly.

use crate::error::{Error, Result};
use crate::fft;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative slack added to gamma(0) beyond the exact positivity correction.
const PSD_MARGIN: f64 = 1e-6;

/// One polynomially decaying oscillatory component:
/// amplitude * k^(-decay) * cos(frequency * k + phase).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub amplitude: f64,
    /// Positive integer decay exponent d in k^(-d).
    pub decay: u32,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// One geometrically decaying oscillatory component:
/// amplitude * ratio^k * cos(frequency * k + phase).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub amplitude: f64,
    /// Geometric decay ratio, 0 < |ratio| < 1.
    pub ratio: f64,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Closed-form autocovariance families.
///
/// For `Polynomial` and `Exponential`, lags 0..=k0 come from `head` (or, when
/// `head` is empty, from the term formula for k >= 1 with gamma(0) seeded as
/// the sum of amplitudes); lags beyond k0 follow the term formula. `Cutoff`
/// is a moving-average model with unit innovation variance, `Arma` a general
/// ARMA(p, q), also with unit innovation variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AcfModel {
    Polynomial {
        terms: Vec<PolyTerm>,
        #[serde(default)]
        k0: usize,
        #[serde(default)]
        head: Vec<f64>,
    },
    Exponential {
        terms: Vec<ExpTerm>,
        #[serde(default)]
        k0: usize,
        #[serde(default)]
        head: Vec<f64>,
    },
    Cutoff {
        /// MA coefficients theta_1..theta_q; theta_0 = 1 implicitly.
        theta: Vec<f64>,
    },
    Arma {
        /// AR coefficients phi_1..phi_p in x_t = sum phi_i x_{t-i} + ...
        ar: Vec<f64>,
        /// MA coefficients theta_1..theta_q.
        #[serde(default)]
        ma: Vec<f64>,
    },
}

impl AcfModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            AcfModel::Polynomial { terms, k0, head } => {
                if terms.is_empty() {
                    return Err(Error::InvalidConfig("polynomial model needs terms".into()));
                }
                for t in terms {
                    if t.amplitude <= 0.0 || !t.amplitude.is_finite() {
                        return Err(Error::InvalidConfig(format!(
                            "term amplitude must be positive, got {}",
                            t.amplitude
                        )));
                    }
                    if t.decay == 0 {
                        return Err(Error::InvalidConfig(
                            "polynomial decay exponent must be >= 1".into(),
                        ));
                    }
                    check_freq_phase(t.frequency, t.phase)?;
                }
                check_distinct_frequencies(&terms.iter().map(|t| t.frequency).collect::<Vec<_>>())?;
                check_head(head, *k0)
            }
            AcfModel::Exponential { terms, k0, head } => {
                if terms.is_empty() {
                    return Err(Error::InvalidConfig("exponential model needs terms".into()));
                }
                for t in terms {
                    if t.amplitude <= 0.0 || !t.amplitude.is_finite() {
                        return Err(Error::InvalidConfig(format!(
                            "term amplitude must be positive, got {}",
                            t.amplitude
                        )));
                    }
                    if !(t.ratio.abs() > 0.0 && t.ratio.abs() < 1.0) {
                        return Err(Error::InvalidConfig(format!(
                            "decay ratio must satisfy 0 < |ratio| < 1, got {}",
                            t.ratio
                        )));
                    }
                    check_freq_phase(t.frequency, t.phase)?;
                }
                check_head(head, *k0)
            }
            AcfModel::Cutoff { theta } => {
                if let Some(t) = theta.iter().find(|t| !t.is_finite()) {
                    return Err(Error::InvalidConfig(format!("non-finite MA coefficient {t}")));
                }
                Ok(())
            }
            AcfModel::Arma { ar, ma } => {
                if let Some(t) = ar.iter().chain(ma.iter()).find(|t| !t.is_finite()) {
                    return Err(Error::InvalidConfig(format!("non-finite ARMA coefficient {t}")));
                }
                check_stationary(ar)
            }
        }
    }

    /// gamma(0..=max_lag) straight from the closed form, no positivity fix.
    pub fn eval_acf(&self, max_lag: usize) -> Result<Vec<f64>> {
        self.validate()?;
        match self {
            AcfModel::Polynomial { terms, k0, head } => {
                let formula = |k: usize| -> f64 {
                    terms
                        .iter()
                        .map(|t| {
                            t.amplitude
                                * (k as f64).powi(-(t.decay as i32))
                                * (t.frequency * k as f64 + t.phase).cos()
                        })
                        .sum()
                };
                let base: f64 = terms.iter().map(|t| t.amplitude).sum();
                Ok(eval_with_head(head, *k0, base, formula, max_lag))
            }
            AcfModel::Exponential { terms, k0, head } => {
                let formula = |k: usize| -> f64 {
                    terms
                        .iter()
                        .map(|t| {
                            t.amplitude
                                * t.ratio.powi(k as i32)
                                * (t.frequency * k as f64 + t.phase).cos()
                        })
                        .sum()
                };
                let base: f64 = terms.iter().map(|t| t.amplitude).sum();
                Ok(eval_with_head(head, *k0, base, formula, max_lag))
            }
            AcfModel::Cutoff { theta } => {
                // gamma(k) = sum_j theta_j theta_{j+k} with theta_0 = 1
                let mut coeffs = Vec::with_capacity(theta.len() + 1);
                coeffs.push(1.0);
                coeffs.extend_from_slice(theta);
                let q = theta.len();
                Ok((0..=max_lag)
                    .map(|k| {
                        if k > q {
                            0.0
                        } else {
                            (0..=q - k).map(|j| coeffs[j] * coeffs[j + k]).sum()
                        }
                    })
                    .collect())
            }
            AcfModel::Arma { ar, ma } => arma_acf(ar, ma, max_lag),
        }
    }

    /// Number of exact zeros among gamma(1..=k0); the selection rule's
    /// lookahead must be able to step over them, so callers warn when this
    /// reaches the lookahead length.
    pub fn head_zero_count(&self) -> Result<usize> {
        let k0 = match self {
            AcfModel::Polynomial { k0, .. } | AcfModel::Exponential { k0, .. } => *k0,
            _ => return Ok(0),
        };
        if k0 == 0 {
            return Ok(0);
        }
        let gamma = self.eval_acf(k0)?;
        let scale = gamma[0].abs().max(1e-300);
        Ok(gamma[1..].iter().filter(|g| g.abs() <= 1e-12 * scale).count())
    }

    /// Smallest oscillation frequency present in the closed form, if any.
    /// Terms with frequency zero do not oscillate and are skipped.
    pub fn min_frequency(&self) -> Option<f64> {
        let freqs: Vec<f64> = match self {
            AcfModel::Polynomial { terms, .. } => terms.iter().map(|t| t.frequency).collect(),
            AcfModel::Exponential { terms, .. } => terms.iter().map(|t| t.frequency).collect(),
            _ => return None,
        };
        freqs
            .into_iter()
            .filter(|f| *f > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Truncates the model at `max_lag` lags and corrects it to positive
    /// semidefiniteness: the implied density is evaluated on a grid of
    /// 16 * max_lag points, and if its minimum is negative, gamma(0) is
    /// inflated by -2pi * min + margin, which lifts the density uniformly.
    pub fn realize(&self, max_lag: usize) -> Result<ValidAcf> {
        if max_lag == 0 {
            return Err(Error::InvalidConfig("realization needs max_lag >= 1".into()));
        }
        let mut gamma = self.eval_acf(max_lag)?;
        if gamma[0] <= 0.0 || !gamma[0].is_finite() {
            return Err(Error::DegenerateModel(gamma[0]));
        }
        let grid = density_grid(max_lag);
        let mut floor = density_min(&gamma, &grid);
        if floor < 0.0 {
            // One pass is exact up to rounding; loop defensively anyway.
            for _ in 0..4 {
                gamma[0] += -2.0 * PI * floor + PSD_MARGIN * gamma[0];
                floor = density_min(&gamma, &grid);
                if floor >= 0.0 {
                    break;
                }
            }
        }
        if floor < 0.0 {
            return Err(Error::DegenerateModel(gamma[0]));
        }
        if let Some(bad) = gamma[1..].iter().find(|g| g.abs() > gamma[0]) {
            return Err(Error::InvalidConfig(format!(
                "head value {bad} exceeds gamma(0) = {}; sequence cannot be positive definite",
                gamma[0]
            )));
        }
        Ok(ValidAcf {
            gamma,
            spectral_floor: floor,
            model: self.clone(),
        })
    }
}

fn check_freq_phase(frequency: f64, phase: f64) -> Result<()> {
    if !(0.0..=PI).contains(&frequency) {
        return Err(Error::InvalidConfig(format!(
            "oscillation frequency must lie in [0, pi], got {frequency}"
        )));
    }
    if !phase.is_finite() {
        return Err(Error::InvalidConfig(format!("non-finite phase {phase}")));
    }
    Ok(())
}

fn check_distinct_frequencies(freqs: &[f64]) -> Result<()> {
    for i in 0..freqs.len() {
        for j in (i + 1)..freqs.len() {
            if freqs[i] == freqs[j] {
                return Err(Error::InvalidConfig(format!(
                    "oscillation frequencies must be distinct, {} repeats",
                    freqs[i]
                )));
            }
        }
    }
    Ok(())
}

fn check_head(head: &[f64], k0: usize) -> Result<()> {
    if !head.is_empty() && head.len() != k0 + 1 {
        return Err(Error::InvalidConfig(format!(
            "head must cover lags 0..=k0 ({} values), got {}",
            k0 + 1,
            head.len()
        )));
    }
    if let Some(h) = head.iter().find(|h| !h.is_finite()) {
        return Err(Error::InvalidConfig(format!("non-finite head value {h}")));
    }
    Ok(())
}

fn eval_with_head(
    head: &[f64],
    k0: usize,
    base_gamma0: f64,
    formula: impl Fn(usize) -> f64,
    max_lag: usize,
) -> Vec<f64> {
    (0..=max_lag)
        .map(|k| {
            if k <= k0 {
                if head.is_empty() {
                    if k == 0 {
                        base_gamma0
                    } else {
                        formula(k)
                    }
                } else {
                    head[k]
                }
            } else {
                formula(k)
            }
        })
        .collect()
}

fn density_grid(max_lag: usize) -> Vec<f64> {
    let points = (16 * max_lag).max(512);
    (0..points)
        .map(|j| {
            if j == points - 1 {
                PI
            } else {
                j as f64 * PI / (points - 1) as f64
            }
        })
        .collect()
}

fn density_min(gamma: &[f64], grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&w| fft::cosine_series(gamma, w) / (2.0 * PI))
        .fold(f64::INFINITY, f64::min)
}

/// A truncated, positive-semidefinite autocovariance sequence together with
/// the model it came from and the grid minimum of its spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidAcf {
    gamma: Vec<f64>,
    spectral_floor: f64,
    model: AcfModel,
}

impl ValidAcf {
    /// gamma(0..=max_lag); zero beyond by convention.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }

    /// Minimum of the implied spectral density over the correction grid.
    pub fn spectral_floor(&self) -> f64 {
        self.spectral_floor
    }

    pub fn model(&self) -> &AcfModel {
        &self.model
    }

    /// The spectral density implied by the truncated sequence:
    /// f(w) = (1/2pi)(gamma(0) + 2 sum gamma(k) cos(kw)).
    pub fn spectral_density(&self, omegas: &[f64]) -> Vec<f64> {
        omegas
            .iter()
            .map(|&w| fft::cosine_series(&self.gamma, w) / (2.0 * PI))
            .collect()
    }
}

/// AR(2) coefficients whose characteristic roots are the conjugate pole pair
/// r * e^{+-ia}: (phi_1, phi_2) = (2 r cos a, -r^2). The resulting
/// autocovariance decays like r^k with an oscillation at frequency a.
pub fn ar2_from_pole(r: f64, a: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < 1.0) || !r.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "pole radius must lie in (0, 1), got {r}"
        )));
    }
    if !(a > 0.0 && a < PI) {
        return Err(Error::InvalidConfig(format!(
            "pole angle must lie in (0, pi), got {a}"
        )));
    }
    Ok((2.0 * r * a.cos(), -(r * r)))
}

/// Transfer-function spectral density of a stationary ARMA process with unit
/// innovation variance:
/// f(w) = (1/2pi) |1 + sum theta_j e^{-ijw}|^2 / |1 - sum phi_i e^{-ijw}|^2.
pub fn arma_spectral_density(ar: &[f64], ma: &[f64], omegas: &[f64]) -> Result<Vec<f64>> {
    check_stationary(ar)?;
    Ok(omegas
        .iter()
        .map(|&w| {
            let mut num_re = 1.0;
            let mut num_im = 0.0;
            for (j, t) in ma.iter().enumerate() {
                let k = (j + 1) as f64;
                num_re += t * (k * w).cos();
                num_im -= t * (k * w).sin();
            }
            let mut den_re = 1.0;
            let mut den_im = 0.0;
            for (i, p) in ar.iter().enumerate() {
                let k = (i + 1) as f64;
                den_re -= p * (k * w).cos();
                den_im += p * (k * w).sin();
            }
            (num_re * num_re + num_im * num_im)
                / (den_re * den_re + den_im * den_im)
                / (2.0 * PI)
        })
        .collect())
}

/// Schur-Cohn stability test on the AR polynomial: every reflection
/// coefficient of z^p - phi_1 z^{p-1} - ... - phi_p must have modulus < 1,
/// which is equivalent to all characteristic roots lying strictly inside the
/// unit circle (spectral radius of the companion matrix < 1).
pub(crate) fn check_stationary(ar: &[f64]) -> Result<()> {
    if ar.is_empty() {
        return Ok(());
    }
    // coefficients of the monic reversed polynomial, c_0 = 1
    let mut c: Vec<f64> = std::iter::once(1.0).chain(ar.iter().map(|p| -p)).collect();
    let mut degree = ar.len();
    while degree > 0 {
        let r = c[degree];
        if r.abs() >= 1.0 || r.is_nan() {
            return Err(Error::NonStationary);
        }
        let scale = 1.0 - r * r;
        let prev = c.clone();
        for i in 1..degree {
            c[i] = (prev[i] - r * prev[degree - i]) / scale;
        }
        degree -= 1;
    }
    Ok(())
}

/// Largest pole modulus for AR parts of order <= 2, where it has a closed
/// form. Drives the reference constant -1/ln|xi| reported next to
/// exponential-law fits.
pub(crate) fn max_pole_modulus(ar: &[f64]) -> Option<f64> {
    match ar.len() {
        1 => Some(ar[0].abs()),
        2 => {
            // roots of z^2 - phi1 z - phi2
            let disc = ar[0] * ar[0] + 4.0 * ar[1];
            if disc < 0.0 {
                Some((-ar[1]).sqrt())
            } else {
                let s = disc.sqrt();
                Some(((ar[0] + s) / 2.0).abs().max(((ar[0] - s) / 2.0).abs()))
            }
        }
        _ => None,
    }
}

/// Theoretical ARMA autocovariance via the MA(infinity) expansion:
/// gamma(k) = sum_j psi_j psi_{j+k}, with the psi recursion truncated once
/// the weights have decayed to numerical irrelevance.
fn arma_acf(ar: &[f64], ma: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check_stationary(ar)?;
    let psi = psi_weights(ar, ma);
    Ok((0..=max_lag)
        .map(|k| {
            if k >= psi.len() {
                0.0
            } else {
                (0..psi.len() - k).map(|j| psi[j] * psi[j + k]).sum()
            }
        })
        .collect())
}

fn psi_weights(ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let p = ar.len();
    let q = ma.len();
    if p == 0 {
        let mut psi = Vec::with_capacity(q + 1);
        psi.push(1.0);
        psi.extend_from_slice(ma);
        return psi;
    }
    const TAIL: usize = 32;
    const CAP: usize = 1 << 21;
    let mut psi = vec![1.0];
    let mut peak = 1.0_f64;
    let min_len = q + 64 * (p + 1);
    loop {
        let j = psi.len();
        let mut v = if j <= q { ma[j - 1] } else { 0.0 };
        for (i, phi) in ar.iter().enumerate() {
            if j > i {
                v += phi * psi[j - 1 - i];
            }
        }
        psi.push(v);
        peak = peak.max(v.abs());
        if psi.len() >= min_len {
            let tail_max = psi[psi.len() - TAIL..]
                .iter()
                .fold(0.0_f64, |m, x| m.max(x.abs()));
            if tail_max <= 1e-17 * peak {
                break;
            }
        }
        if psi.len() >= CAP {
            break;
        }
    }
    psi
}
