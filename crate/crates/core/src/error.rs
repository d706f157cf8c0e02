use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("degenerate drive spectrum: Ω₁ = Ω₂ = 0 leaves no dressed splitting")]
    DegenerateSpectrum,

    #[error("step size underflow at t = {t:e} (h = {step:e}, error estimate {error_estimate:e}, tol {tol:e})")]
    Stiffness {
        t: f64,
        step: f64,
        error_estimate: f64,
        tol: f64,
    },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config: {0}")]
    ConfigInvalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
