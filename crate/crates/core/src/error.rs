use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A tensor fails symmetry or positive definiteness checks.
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    /// A linear system could not be solved.
    #[error("singular system: {0}")]
    Singular(String),
    /// Invalid configuration value; the message names the field.
    #[error("configuration error: {0}")]
    Config(String),
    /// An admissibility constraint (bounds, binary values, monotonicity) failed.
    #[error("constraint violated: {0}")]
    Constraint(String),
    /// Two discrete objects were built on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// The nonlinear momentum solve did not reach its tolerance.
    #[error("Newton solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
