use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid too large: depth {depth} in dimension {dim} exceeds 2^{max_log2} boxes")]
    Size {
        depth: u32,
        dim: usize,
        max_log2: u32,
    },

    #[error("point {point:?} lies outside the domain {domain}")]
    Domain { point: Vec<f64>, domain: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unknown system '{0}'")]
    UnknownSystem(String),

    #[error("parameter '{name}' = {value} out of range: {reason}")]
    Parameter {
        name: String,
        value: f64,
        reason: String,
    },

    #[error("invalid system definition: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown component id {0}")]
    UnknownComponent(usize),

    #[error("component {0} has no cycle, so its period is undefined")]
    UndefinedPeriod(usize),

    #[error("attractor tracking failed: {0}")]
    Tracking(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("pseudo-orbit generation failed: {0}")]
    Generation(String),

    #[error("no delta accepted down to width {min_width:e}")]
    NoModulus { min_width: f64 },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("i/o error: {0}")]
    Io(String),
}

/// Problems found while reading an analysis configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid field '{field}': {reason}")]
    Semantic { field: String, reason: String },
}

impl ConfigError {
    pub(crate) fn semantic(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Semantic {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl Error {
    /// Bad input rather than a failed analysis.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Size { .. }
                | Error::Domain { .. }
                | Error::Dimension { .. }
                | Error::UnknownSystem(_)
                | Error::Parameter { .. }
                | Error::Validation(_)
                | Error::Precondition(_)
                | Error::UnknownComponent(_)
                | Error::Config(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
