//! Monte Carlo experiments over the bandwidth-selection rule.
//!
//! An experiment sweeps sample sizes, draws seeded replicates from an exact
//! Gaussian sampler, runs the selection rule on each, and regresses the
//! median selected bandwidth against the sample size to estimate how the
//! bandwidth scales. Replicates are keyed by (n, replicate index) with
//! seed = seed_base + index, so results do not depend on execution order.

use crate::bandwidth::{pick_m_hat, BandwidthSelection, RuleConfig};
use crate::error::{Error, Result};
use crate::models::{max_pole_modulus, AcfModel, ValidAcf};
use crate::series::{sample_autocovariance_fast, AcfEstimate};
use crate::simulate::CirculantEmbedding;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which growth law the bandwidth medians are regressed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingLaw {
    /// ln(median M) on ln(n / ln n): slope estimates 1/(2d), the intercept
    /// exponentiates to the rate constant.
    PolynomialRate,
    /// median M on ln(n): the slope estimates the rate constant directly.
    ExponentialRate,
}

fn default_l_max() -> Option<usize> {
    None
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: AcfModel,
    /// Sample sizes, strictly increasing, each >= 64, at least 3 of them.
    pub n_values: Vec<usize>,
    /// Replicates per sample size, >= 10.
    pub replicates: usize,
    /// Replicate r draws with seed seed_base + r.
    pub seed_base: u64,
    #[serde(default)]
    pub rule: RuleConfig,
    pub law: ScalingLaw,
    /// Truncation lag for the realized autocovariance; default grows it to
    /// max(1024, 8 * noise-free cutoff at the largest n).
    #[serde(default = "default_l_max")]
    pub l_max: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.rule.validate()?;
        if self.n_values.len() < 3 {
            return Err(Error::InvalidConfig(format!(
                "scaling fits need at least 3 sample sizes, got {}",
                self.n_values.len()
            )));
        }
        for pair in self.n_values.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidConfig(
                    "sample sizes must be strictly increasing".into(),
                ));
            }
        }
        if self.n_values[0] < 64 {
            return Err(Error::InvalidConfig(format!(
                "sample sizes must be >= 64, got {}",
                self.n_values[0]
            )));
        }
        if self.replicates < 10 {
            return Err(Error::InvalidConfig(format!(
                "need at least 10 replicates, got {}",
                self.replicates
            )));
        }
        if self.l_max == Some(0) {
            return Err(Error::InvalidConfig("l_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// Selection outcome of a single replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub seed: u64,
    pub m_hat: usize,
    pub bandwidth: usize,
    pub capped: bool,
}

/// A replicate that failed outright (simulation or selection error).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

/// Everything recorded at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub outcomes: Vec<ReplicateRecord>,
    pub failures: Vec<FailureRecord>,
    /// Lower median over successful, uncapped replicates.
    pub median_m_hat: usize,
    pub median_bandwidth: usize,
    /// The rule run on the model's exact autocorrelations at this n.
    pub oracle_m_hat: usize,
    pub oracle_bandwidth: usize,
    pub capped_fraction: f64,
}

/// Least-squares fit of the medians against the chosen law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub law: ScalingLaw,
    pub slope: f64,
    pub intercept: f64,
    /// exp(intercept) for the polynomial law, the slope itself for the
    /// exponential law: the law's rate constant.
    pub fitted_constant: f64,
    /// -1/ln|xi| where the model makes the dominant geometric ratio
    /// explicit; None otherwise.
    pub reference_constant: Option<f64>,
    pub n_values: Vec<usize>,
    pub median_bandwidths: Vec<usize>,
    pub residuals: Vec<f64>,
}

/// Full experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
    pub fit: ScalingFit,
    /// Truncation lag actually used for the realized autocovariance.
    pub l_max: usize,
    pub warnings: Vec<String>,
}

/// The selection rule applied to the model's exact autocorrelations with the
/// threshold for sample size `n`: the noise-free anchor the Monte Carlo
/// medians are compared against.
pub fn oracle_selection(acf: &ValidAcf, n: usize, rule: &RuleConfig) -> Result<BandwidthSelection> {
    let estimate = AcfEstimate::from_gamma(acf.gamma().to_vec(), n)?;
    pick_m_hat(&estimate, rule)
}

/// Simulate one replicate and run the selection rule on it.
/// Deterministic in (acf, n, seed, rule).
pub fn run_replicate(
    acf: &ValidAcf,
    n: usize,
    seed: u64,
    rule: &RuleConfig,
) -> Result<BandwidthSelection> {
    let embedding = CirculantEmbedding::new(acf, n)?;
    replicate_from_embedding(&embedding, seed, rule)
}

fn replicate_from_embedding(
    embedding: &CirculantEmbedding,
    seed: u64,
    rule: &RuleConfig,
) -> Result<BandwidthSelection> {
    let n = embedding.sample_len();
    let series = embedding.sample(seed);
    // the scan never looks past max_m + k_n lags; computing more is waste
    let max_lag = (n - 1).min(rule.max_m.unwrap_or(n / 2).max(1) + rule.k_n);
    let acf = sample_autocovariance_fast(&series, max_lag)?;
    pick_m_hat(&acf, rule)
}

/// Lower median (an element of the sample) of the recorded values.
fn lower_median(sorted: &[usize]) -> usize {
    sorted[(sorted.len() - 1) / 2]
}

/// Least-squares regression of the median bandwidths on the law's regressor.
pub fn fit_scaling(
    n_values: &[usize],
    median_bandwidths: &[usize],
    law: ScalingLaw,
) -> Result<ScalingFit> {
    if n_values.len() != median_bandwidths.len() {
        return Err(Error::InvalidConfig(format!(
            "{} sample sizes but {} medians",
            n_values.len(),
            median_bandwidths.len()
        )));
    }
    if n_values.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            n_values.len()
        )));
    }
    let xs: Vec<f64> = n_values
        .iter()
        .map(|&n| {
            let nf = n as f64;
            match law {
                ScalingLaw::PolynomialRate => (nf / nf.ln()).ln(),
                ScalingLaw::ExponentialRate => nf.ln(),
            }
        })
        .collect();
    let ys: Vec<f64> = median_bandwidths
        .iter()
        .map(|&m| match law {
            ScalingLaw::PolynomialRate => (m as f64).ln(),
            ScalingLaw::ExponentialRate => m as f64,
        })
        .collect();
    let x_mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let y_mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::DegenerateFit(
            "zero variance in the regressor".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let fitted_constant = match law {
        ScalingLaw::PolynomialRate => intercept.exp(),
        ScalingLaw::ExponentialRate => slope,
    };
    Ok(ScalingFit {
        law,
        slope,
        intercept,
        fitted_constant,
        reference_constant: None,
        n_values: n_values.to_vec(),
        median_bandwidths: median_bandwidths.to_vec(),
        residuals,
    })
}

/// -1/ln|xi| when the model pins down a dominant geometric decay ratio.
fn reference_constant(model: &AcfModel) -> Option<f64> {
    let ratio = match model {
        AcfModel::Exponential { terms, .. } => terms
            .iter()
            .map(|t| t.ratio.abs())
            .fold(f64::NAN, f64::max)
            .into(),
        AcfModel::Arma { ar, ma } if ma.is_empty() => max_pole_modulus(ar),
        _ => None,
    }?;
    if ratio > 0.0 && ratio < 1.0 {
        Some(-1.0 / ratio.ln())
    } else {
        None
    }
}

/// Picks the truncation lag: max(1024, 8 * oracle cutoff at the largest n),
/// growing the provisional realization until the oracle scan is no longer
/// limited by the truncation itself.
fn resolve_l_max(config: &ExperimentConfig) -> Result<(usize, ValidAcf)> {
    let n_max = *config.n_values.last().expect("validated nonempty");
    if let Some(l) = config.l_max {
        return Ok((l, config.model.realize(l)?));
    }
    let mut l = 1024_usize;
    for _ in 0..6 {
        let acf = config.model.realize(l)?;
        let oracle = oracle_selection(&acf, n_max, &config.rule)?;
        let wanted = 1024.max(8 * oracle.m_hat);
        // a capped oracle that ran into the truncation (not max_m) needs
        // more lags to scan, not a wider window
        let lag_limited = oracle.capped
            && l - config.rule.k_n < config.rule.max_m.unwrap_or(n_max / 2).max(1);
        if wanted <= l && !lag_limited {
            return Ok((l, acf));
        }
        l = wanted.max(2 * l);
    }
    let acf = config.model.realize(l)?;
    Ok((l, acf))
}

/// Runs the full sweep. Fails when any sample size has more than 20%
/// replicate failures or more than 10% capped selections.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let (l_max, acf) = resolve_l_max(config)?;

    let mut warnings = Vec::new();
    let zeros = config.model.head_zero_count()?;
    if zeros + 1 > config.rule.k_n {
        warnings.push(format!(
            "model head has {zeros} zero lags but the lookahead is only {}; the scan can stall inside the zero run",
            config.rule.k_n
        ));
    }
    if let Some(freq) = config.model.min_frequency() {
        let floor = PI / config.rule.k_n as f64;
        if freq < floor {
            warnings.push(format!(
                "model oscillation frequency {freq:.4} is below pi/k_n = {floor:.4}; \
                 a lookahead window can sit inside one oscillation trough"
            ));
        }
    }
    for &n in &config.n_values {
        if config.rule.lookahead_warning(n) {
            warnings.push(format!(
                "lookahead k_n = {} is not small next to ln({n}) = {:.2}",
                config.rule.k_n,
                (n as f64).ln()
            ));
        }
    }

    let mut cells = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let embedding = CirculantEmbedding::new(&acf, n)?;
        let mut outcomes = Vec::with_capacity(config.replicates);
        let mut failures = Vec::new();
        for index in 0..config.replicates {
            let seed = config.seed_base.wrapping_add(index as u64);
            match replicate_from_embedding(&embedding, seed, &config.rule) {
                Ok(sel) => outcomes.push(ReplicateRecord {
                    index,
                    seed,
                    m_hat: sel.m_hat,
                    bandwidth: sel.bandwidth,
                    capped: sel.capped,
                }),
                Err(e) => failures.push(FailureRecord {
                    index,
                    seed,
                    message: e.to_string(),
                }),
            }
        }
        if failures.len() * 5 > config.replicates {
            return Err(Error::TooManyFailures {
                n,
                failed: failures.len(),
                total: config.replicates,
                first: failures[0].message.clone(),
            });
        }
        let capped = outcomes.iter().filter(|o| o.capped).count();
        let capped_fraction = capped as f64 / outcomes.len() as f64;
        if capped_fraction > 0.10 {
            return Err(Error::ExcessCapped {
                n,
                fraction: 100.0 * capped_fraction,
            });
        }
        let mut m_values: Vec<usize> = outcomes
            .iter()
            .filter(|o| !o.capped)
            .map(|o| o.m_hat)
            .collect();
        let mut bw_values: Vec<usize> = outcomes
            .iter()
            .filter(|o| !o.capped)
            .map(|o| o.bandwidth)
            .collect();
        m_values.sort_unstable();
        bw_values.sort_unstable();
        let oracle = oracle_selection(&acf, n, &config.rule)?;
        cells.push(CellResult {
            n,
            median_m_hat: lower_median(&m_values),
            median_bandwidth: lower_median(&bw_values),
            oracle_m_hat: oracle.m_hat,
            oracle_bandwidth: oracle.bandwidth,
            capped_fraction,
            outcomes,
            failures,
        });
    }

    let medians: Vec<usize> = cells.iter().map(|c| c.median_bandwidth).collect();
    let mut fit = fit_scaling(&config.n_values, &medians, config.law)?;
    fit.reference_constant = reference_constant(&config.model);
    Ok(ExperimentResult {
        cells,
        fit,
        l_max,
        warnings,
    })
}
