use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grids differ: ({0}, {1}) vs ({2}, {3})")]
    GridMismatch(usize, f64, usize, f64),

    #[error("unsupported tail mass {fraction:.3e} exceeds threshold {threshold:.3e}")]
    TailMass { fraction: f64, threshold: f64 },

    #[error("{what} did not converge (residual {residual:.3e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("phase construction failed: {0}")]
    PhaseConstruction(String),

    #[error("quotient blow-up: {0}")]
    QuotientBlowUp(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
