//! Spectral density estimation with a flat-top lag window and an automatic,
//! correlogram-driven choice of the window bandwidth.
//!
//! The pieces, bottom to top:
//!
//! - [`series`]: sample mean and autocovariances of an observed series.
//! - [`window`]: the trapezoidal lag window and its frequency-domain kernel.
//! - [`bandwidth`]: the threshold scan over the correlogram that picks the
//!   window's flat-top cutoff, [`pick_m_hat`].
//! - [`spectrum`]: periodogram and windowed estimates on a frequency grid,
//!   plus an independent convolution route to the same estimate.
//! - [`models`]: closed-form autocovariance families (polynomial or
//!   geometric decay, hard cutoff, ARMA) realized as finite, positive
//!   semidefinite sequences.
//! - [`simulate`]: exact Gaussian sampling from a realized autocovariance by
//!   circulant embedding, and an ARMA recursion sampler.
//! - [`experiment`]: seeded Monte Carlo sweeps that regress the selected
//!   bandwidth against sample size and compare to closed-form growth rates.

pub mod bandwidth;
pub mod error;
pub mod experiment;
mod fft;
pub mod models;
pub mod series;
pub mod simulate;
pub mod spectrum;
pub mod window;

pub use bandwidth::{
    bandwidth_from_cutoff, pick_m_hat, threshold, BandwidthSelection, RuleConfig, ScanEntry,
};
pub use error::{Error, Result};
pub use experiment::{
    fit_scaling, oracle_selection, run_experiment, run_replicate, CellResult, ExperimentConfig,
    ExperimentResult, FailureRecord, ReplicateRecord, ScalingFit, ScalingLaw,
};
pub use models::{ar2_from_pole, arma_spectral_density, AcfModel, ExpTerm, PolyTerm, ValidAcf};
pub use series::{
    sample_autocovariance, sample_autocovariance_fast, sample_mean, AcfEstimate, TimeSeries,
};
pub use simulate::{default_burn_in, simulate_arma, simulate_gaussian, CirculantEmbedding};
pub use spectrum::{
    clip_nonnegative, convolution_estimate, estimate_auto, lag_window_estimate, periodogram,
    EstimatorKind, FrequencyGrid, SpectrumEstimate, SpectrumMeta,
};
pub use window::{FlatTopConfig, DEFAULT_C_BREAK};
