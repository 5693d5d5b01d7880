use thiserror::Error;

/// Errors shared across the estimation, simulation, and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Series has zero sample variance; autocorrelations are undefined.
    #[error("constant series: sample variance is zero")]
    ConstantSeries,

    /// Requested lag exceeds what the series can support.
    #[error("max_lag {max_lag} out of range for a series of length {n} (need max_lag <= n - 1)")]
    LagOutOfRange { max_lag: usize, n: usize },

    /// Window breaking point must lie strictly inside (0, 1).
    #[error("breaking point {0} outside (0, 1)")]
    InvalidBreakpoint(f64),

    /// Fewer autocovariance lags available than an operation needs.
    #[error("only {available} autocovariance lags available, need at least {needed}")]
    InsufficientLags { available: usize, needed: usize },

    /// Model autocovariance evaluates to a non-positive variance.
    #[error("degenerate model: gamma(0) = {0} is not positive")]
    DegenerateModel(f64),

    /// Circulant embedding produced an eigenvalue too negative to clip.
    #[error("circulant embedding failed: eigenvalue {min_eigenvalue:.6e} below -{tolerance:.6e}")]
    EmbeddingFailure { min_eigenvalue: f64, tolerance: f64 },

    /// Autoregressive polynomial has a root on or inside the unit circle.
    #[error("autoregressive coefficients do not define a stationary process")]
    NonStationary,

    /// Scaling-law regression cannot be computed from the given points.
    #[error("degenerate scaling fit: {0}")]
    DegenerateFit(String),

    /// A configuration value violates a documented invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A value in a series is NaN or infinite.
    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    /// Too many Monte Carlo replicates were capped by the selection rule.
    #[error("experiment quality gate: {fraction:.1}% of replicates at n = {n} hit the selection cap (limit 10%)")]
    ExcessCapped { n: usize, fraction: f64 },

    /// Too many Monte Carlo replicates failed outright.
    #[error("simulation failure: {failed} of {total} replicates at n = {n} failed ({first})")]
    TooManyFailures {
        n: usize,
        failed: usize,
        total: usize,
        first: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
