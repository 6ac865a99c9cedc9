use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or insufficient configuration (dimensions, node counts, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input file.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// A matrix that must have full row rank does not.
    #[error("rank deficient: lambda_min = {lambda_min:e} <= tolerance {tolerance:e}{hint}")]
    RankDeficient {
        lambda_min: f64,
        tolerance: f64,
        hint: String,
    },

    /// Gradient iteration blew up.
    #[error("divergence at iteration {iteration}: residual {residual:e} exceeds {threshold:e}; step size {eta:e} is likely >= 2/lambda_max = {admissible:e}")]
    Divergence {
        iteration: usize,
        residual: f64,
        threshold: f64,
        eta: f64,
        admissible: f64,
    },

    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stage label used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Divergence { .. } => "divergence",
            Error::NonFinite(_) => "non_finite",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
