use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A quadrature or iterative evaluation did not reach its target.
    #[error("accuracy target {target:e} not reached (achieved {achieved:e}): {context}")]
    Accuracy {
        achieved: f64,
        target: f64,
        context: String,
    },

    #[error("refused: {0}")]
    Refused(String),

    /// The small-slope guard tripped during time stepping.
    #[error("slope guard tripped at t = {time}: max |phi_x| = {max_slope}")]
    Blowup { time: f64, max_slope: f64 },

    #[error("non-finite values at t = {time}: {context}")]
    Numerical { time: f64, context: String },

    #[error("configuration rejected:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("checkpoint format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::InvalidInput(_) | Error::Domain(_) | Error::Json(_) => 2,
            Error::Blowup { .. } | Error::Numerical { .. } => 3,
            Error::Accuracy { .. } => 4,
            _ => 1,
        }
    }

    /// Short machine-readable tag for failure records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Domain(_) => "domain",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Accuracy { .. } => "accuracy",
            Error::Refused(_) => "refused",
            Error::Blowup { .. } => "blowup",
            Error::Numerical { .. } => "numerical",
            Error::Validation(_) => "validation",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
