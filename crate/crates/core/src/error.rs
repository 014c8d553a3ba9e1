use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("index {index} out of range for {n_sites} sites")]
    SiteOutOfRange { index: usize, n_sites: usize },

    #[error("eigensolver did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("negative temperature {0}")]
    NegativeTemperature(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("closed form not applicable: {0}")]
    Inapplicable(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("spectrum needs a complete eigendecomposition")]
    IncompleteSpectrum,

    #[error("missing temperature: {0}")]
    MissingTemperature(String),

    #[error("detailed balance violated: {0}")]
    DetailedBalance(String),

    #[error("malformed spectrum file (line {line}): {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that indicate a broken numerical contract rather than
    /// bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::InvalidState(_) | Error::Domain(_)
        )
    }

    pub fn is_data(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Io(_)
                | Error::Csv(_)
                | Error::MissingTemperature(_)
                | Error::DetailedBalance(_)
        )
    }
}
