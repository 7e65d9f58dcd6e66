use thiserror::Error;

/// Errors raised while validating models or computing autocovariances.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParmaError {
    #[error("dimension mismatch in `{field}`: expected {expected}, found {found}")]
    DimensionMismatch {
        field: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-positive variance in `sigma2` at season {season}: {value}")]
    NonPositiveVariance { season: usize, value: f64 },

    #[error("non-finite coefficient in `{field}` at season {season}, index {index}")]
    NonFiniteCoefficient {
        field: &'static str,
        season: usize,
        index: usize,
    },

    #[error("companion matrix requires an autoregressive order of at least 1")]
    ArOrderZero,

    #[error("season {season} out of range 1..={period}")]
    SeasonOutOfRange { season: usize, period: usize },

    #[error("block offset {offset} out of range 0..{period}")]
    OffsetOutOfRange { offset: usize, period: usize },

    #[error("psi table covers lags 0..={available}, need at least 0..={required}")]
    PsiTableTooShort { required: usize, available: usize },

    #[error("model is not causal (monodromy spectral radius {spectral_radius})")]
    NotCausal { spectral_radius: f64 },

    #[error("singular Yule-Walker system: pivot {pivot:e} at column {column} below threshold {threshold:e}")]
    SingularSystem {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("insufficient start-up values: {0}")]
    InsufficientStartup(String),

    #[error("lag {lag} outside table range -{max_lag}..={max_lag}")]
    LagOutOfRange { lag: i64, max_lag: usize },

    #[error("MA(infinity) truncation did not converge within {cap} terms")]
    TruncationDidNotConverge { cap: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("autocovariance table covers lags 0..={available}, need at least 0..={required}")]
    TableTooShort { required: usize, available: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, ParmaError>;
