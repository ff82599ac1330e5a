use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Raised when a derivative is requested at the origin, where `H` is not differentiable.
    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unsupported domain kind: {0}")]
    UnsupportedKind(String),

    #[error("chart window too large: {0}")]
    WindowTooLarge(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("Newton solve did not converge at epsilon = {epsilon:e} after {iterations} iterations (last residual {last:e})")]
    Convergence {
        epsilon: f64,
        iterations: usize,
        last: f64,
        residuals: Vec<f64>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
