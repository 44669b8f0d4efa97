use thiserror::Error;

/// Errors raised anywhere in the flutter pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlutterError {
    #[error("invalid property coefficients: {0}")]
    InvalidCoefficient(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("through-thickness integration failed: {0}")]
    Integration(String),

    #[error("degenerate crack geometry: {0}")]
    DegenerateCrack(String),

    #[error("geometric tolerance violated: {0}")]
    Geometry(String),

    #[error("element {element}: {reason}")]
    ElementGeometry { element: usize, reason: String },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("linear solver error: {0}")]
    Factorization(String),

    #[error("eigensolver did not converge after {iterations} iterations (worst relative residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("inconsistent flutter bracket: {0}")]
    Bracket(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl FlutterError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        FlutterError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for FlutterError {
    fn from(e: std::io::Error) -> Self {
        FlutterError::Io(e.to_string())
    }
}

pub type Result<T, E = FlutterError> = std::result::Result<T, E>;
