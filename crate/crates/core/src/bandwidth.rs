//! Automatic bandwidth selection from the sample correlogram.
//!
//! The rule scans for the smallest cutoff lag m_hat whose next `k_n`
//! autocorrelations all sit strictly below the threshold
//! c_thresh * sqrt(ln(n) / n), then widens it to the window bandwidth
//! M = ceil(m_hat / c_break) so that the window's flat stretch still covers
//! lag m_hat. Natural logarithm throughout.

use crate::error::{Error, Result};
use crate::series::AcfEstimate;
use serde::{Deserialize, Serialize};

pub const DEFAULT_C_THRESH: f64 = 2.0;
pub const DEFAULT_K_N: usize = 5;

fn default_c_thresh() -> f64 {
    DEFAULT_C_THRESH
}

fn default_k_n() -> usize {
    DEFAULT_K_N
}

fn default_c_break() -> f64 {
    crate::window::DEFAULT_C_BREAK
}

/// Tuning constants of the selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    /// Threshold constant: lags must fall below c_thresh * sqrt(ln n / n).
    #[serde(default = "default_c_thresh")]
    pub c_thresh: f64,
    /// How many consecutive lags past the candidate must stay below the
    /// threshold before the candidate is accepted.
    #[serde(default = "default_k_n")]
    pub k_n: usize,
    /// Breaking point used when widening m_hat to the window bandwidth.
    #[serde(default = "default_c_break")]
    pub c_break: f64,
    /// Upper bound for the scanned cutoff; `None` means floor(n / 2).
    #[serde(default)]
    pub max_m: Option<usize>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            c_thresh: DEFAULT_C_THRESH,
            k_n: DEFAULT_K_N,
            c_break: default_c_break(),
            max_m: None,
        }
    }
}

impl RuleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_thresh <= 0.0 || !self.c_thresh.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "c_thresh must be positive and finite, got {}",
                self.c_thresh
            )));
        }
        if self.k_n == 0 {
            return Err(Error::InvalidConfig("k_n must be >= 1".into()));
        }
        if !(self.c_break > 0.0 && self.c_break < 1.0) {
            return Err(Error::InvalidBreakpoint(self.c_break));
        }
        if self.max_m == Some(0) {
            return Err(Error::InvalidConfig("max_m must be >= 1".into()));
        }
        Ok(())
    }

    /// The lookahead is meant to be negligible next to ln(n); flag configs
    /// where it is not, so callers can warn.
    pub fn lookahead_warning(&self, n: usize) -> bool {
        self.k_n as f64 >= (n as f64).ln()
    }
}

/// c_thresh * sqrt(ln(n) / n). Requires n >= 2.
pub fn threshold(n: usize, c_thresh: f64) -> f64 {
    debug_assert!(n >= 2);
    c_thresh * ((n as f64).ln() / n as f64).sqrt()
}

/// Window bandwidth from the selected cutoff: ceil(m_hat / c_break).
/// With the default c_break = 1/2 this is exactly 2 * m_hat.
pub fn bandwidth_from_cutoff(m_hat: usize, c_break: f64) -> usize {
    debug_assert!(m_hat >= 1 && c_break > 0.0 && c_break < 1.0);
    (m_hat as f64 / c_break).ceil() as usize
}

/// One scanned lag: |rho| against the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub lag: usize,
    pub abs_rho: f64,
    pub below: bool,
}

/// Outcome of the selection rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSelection {
    /// Selected cutoff lag (capped at the scan limit when no lag qualifies).
    pub m_hat: usize,
    /// Window bandwidth M = ceil(m_hat / c_break).
    pub bandwidth: usize,
    /// Threshold the correlogram was compared against.
    pub threshold: f64,
    /// True when no cutoff qualified and m_hat is the scan cap instead.
    pub capped: bool,
    /// Per-lag diagnostics for the lags the scan examined.
    pub trace: Vec<ScanEntry>,
}

/// Runs the selection rule on an autocorrelation sequence.
///
/// m_hat is the smallest m >= 1 such that |rho(m + k)| < threshold for every
/// k = 1..=k_n (strict inequality). The scan stops at
/// cap = min(max_m, available_lags - k_n); if nothing qualifies the cap is
/// returned with `capped = true`.
pub fn pick_m_hat(acf: &AcfEstimate, config: &RuleConfig) -> Result<BandwidthSelection> {
    config.validate()?;
    let lags = acf.max_lag();
    if lags < config.k_n + 1 {
        return Err(Error::InsufficientLags {
            available: lags,
            needed: config.k_n + 1,
        });
    }
    let n = acf.n_source();
    let thresh = threshold(n, config.c_thresh);
    let max_m = config.max_m.unwrap_or(n / 2).max(1);
    let cap = max_m.min(lags - config.k_n);
    debug_assert!(cap >= 1);

    let rho = acf.rho();
    let below = |lag: usize| rho[lag].abs() < thresh;

    let mut found = None;
    for m in 1..=cap {
        if (1..=config.k_n).all(|k| below(m + k)) {
            found = Some(m);
            break;
        }
    }
    let (m_hat, capped) = match found {
        Some(m) => (m, false),
        None => (cap, true),
    };

    let trace: Vec<ScanEntry> = (1..=(m_hat + config.k_n).min(lags))
        .map(|lag| ScanEntry {
            lag,
            abs_rho: rho[lag].abs(),
            below: below(lag),
        })
        .collect();

    Ok(BandwidthSelection {
        m_hat,
        bandwidth: bandwidth_from_cutoff(m_hat, config.c_break),
        threshold: thresh,
        capped,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn acf_from_rho(rho: &[f64], n: usize) -> AcfEstimate {
        // scale by an arbitrary variance to make sure only rho matters
        let gamma: Vec<f64> = rho.iter().map(|r| r * 3.7).collect();
        AcfEstimate::from_gamma(gamma, n).unwrap()
    }

    #[test]
    fn threshold_at_n_400() {
        assert_abs_diff_eq!(threshold(400, 2.0), 0.244_774_683_068_081_64, epsilon = 1e-15);
        // closed form scales linearly in c_thresh
        assert_abs_diff_eq!(threshold(400, 1.0) * 2.0, threshold(400, 2.0), epsilon = 1e-16);
    }

    #[test]
    fn threshold_decreases_in_n() {
        let mut prev = threshold(8, 2.0);
        for n in [16, 64, 400, 10_000, 1 << 20] {
            let t = threshold(n, 2.0);
            assert!(t < prev, "threshold must shrink as n grows");
            prev = t;
        }
    }

    #[test]
    fn scan_skips_candidates_with_hot_lookahead() {
        // Documented walk-through: with threshold ~0.2448 and k_n = 3 the
        // candidates m = 1, 2 fail on lags 2 and 3 and m = 3 is selected.
        let rho = [1.0, 0.8, 0.5, 0.3, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001];
        let acf = acf_from_rho(&rho, 400);
        let cfg = RuleConfig {
            k_n: 3,
            ..RuleConfig::default()
        };
        let sel = pick_m_hat(&acf, &cfg).unwrap();
        assert_eq!(sel.m_hat, 3);
        assert_eq!(sel.bandwidth, 6);
        assert!(!sel.capped);
        assert_abs_diff_eq!(sel.threshold, 0.244_774_683_068_081_64, epsilon = 1e-15);
        // the failing lags are visible in the trace
        assert!(!sel.trace.iter().find(|e| e.lag == 2).unwrap().below);
        assert!(!sel.trace.iter().find(|e| e.lag == 3).unwrap().below);
        assert!(sel.trace.iter().filter(|e| e.lag > 3).all(|e| e.below));
    }

    #[test]
    fn scan_ignores_spikes_behind_the_window() {
        // A spike at lag 2 does not disqualify m = 2; only lags past the
        // candidate are examined.
        let rho = [1.0, 0.1, 0.3, 0.1, 0.05, 0.02, 0.01];
        let acf = acf_from_rho(&rho, 400);
        let cfg = RuleConfig {
            k_n: 2,
            ..RuleConfig::default()
        };
        let sel = pick_m_hat(&acf, &cfg).unwrap();
        assert_eq!(sel.m_hat, 2);
        assert_eq!(sel.bandwidth, 4);
    }

    #[test]
    fn white_noise_like_sequence_selects_m_1() {
        let rho = [1.0, 0.01, -0.02, 0.015, 0.0, 0.01, -0.01, 0.005];
        let acf = acf_from_rho(&rho, 400);
        let sel = pick_m_hat(&acf, &RuleConfig::default()).unwrap();
        assert_eq!(sel.m_hat, 1);
        assert_eq!(sel.bandwidth, 2);
        assert!(!sel.capped);
    }

    #[test]
    fn slowly_decaying_sequence_hits_the_cap() {
        // everything above threshold: no m qualifies, cap = lags - k_n
        let rho: Vec<f64> = (0..=20).map(|k| 1.0 / (1.0 + 0.01 * k as f64)).collect();
        let acf = acf_from_rho(&rho, 400);
        let sel = pick_m_hat(&acf, &RuleConfig::default()).unwrap();
        assert!(sel.capped);
        assert_eq!(sel.m_hat, 15); // 20 lags - k_n = 5
        assert_eq!(sel.bandwidth, 30);
    }

    #[test]
    fn explicit_max_m_caps_the_scan() {
        let rho: Vec<f64> = (0..=40).map(|k| if k == 0 { 1.0 } else { 0.9 }).collect();
        let acf = acf_from_rho(&rho, 10_000);
        let cfg = RuleConfig {
            max_m: Some(7),
            ..RuleConfig::default()
        };
        let sel = pick_m_hat(&acf, &cfg).unwrap();
        assert!(sel.capped);
        assert_eq!(sel.m_hat, 7);
    }

    #[test]
    fn too_few_lags_is_an_error() {
        let rho = [1.0, 0.5, 0.1];
        let acf = acf_from_rho(&rho, 400);
        assert_eq!(
            pick_m_hat(&acf, &RuleConfig::default()),
            Err(Error::InsufficientLags {
                available: 2,
                needed: 6
            })
        );
    }

    #[test]
    fn strictness_at_the_threshold_boundary() {
        // A lag exactly at the threshold does not count as below (strict <).
        let n = 400;
        let t = threshold(n, 2.0);
        let rho = [1.0, 0.9, t, t, t, t, t, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let acf = acf_from_rho(&rho, n);
        let sel = pick_m_hat(&acf, &RuleConfig::default()).unwrap();
        // m = 1 fails because rho(2..=6) are all exactly at the threshold
        assert!(sel.m_hat > 1);
    }

    #[test]
    fn bandwidth_rounds_up_for_non_dyadic_breakpoints() {
        assert_eq!(bandwidth_from_cutoff(3, 0.4), 8); // ceil(7.5)
        assert_eq!(bandwidth_from_cutoff(3, 0.5), 6);
        assert_eq!(bandwidth_from_cutoff(1, 0.5), 2);
        assert_eq!(bandwidth_from_cutoff(10, 0.1), 100);
    }

    #[test]
    fn rejects_bad_configs() {
        let rho = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let acf = acf_from_rho(&rho, 400);
        for cfg in [
            RuleConfig {
                c_thresh: 0.0,
                ..RuleConfig::default()
            },
            RuleConfig {
                c_thresh: f64::NAN,
                ..RuleConfig::default()
            },
            RuleConfig {
                k_n: 0,
                ..RuleConfig::default()
            },
            RuleConfig {
                c_break: 1.0,
                ..RuleConfig::default()
            },
            RuleConfig {
                max_m: Some(0),
                ..RuleConfig::default()
            },
        ] {
            assert!(pick_m_hat(&acf, &cfg).is_err());
        }
    }

    #[test]
    fn lookahead_warning_fires_for_tiny_n() {
        let cfg = RuleConfig::default();
        assert!(cfg.lookahead_warning(64)); // ln 64 ~ 4.16 <= 5
        assert!(!cfg.lookahead_warning(1000)); // ln 1000 ~ 6.9 > 5
    }
}
