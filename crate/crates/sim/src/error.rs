use std::io;

use thiserror::Error;

/// Configuration could not be read or violates a field constraint.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] io::Error),
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("invalid configuration field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Core(#[from] adhesive_plate_core::Error),
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] adhesive_plate_core::Error),
    /// A study precondition on the configured data does not hold.
    #[error("study hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("I/O error on {0}: {1}")]
    Io(String, #[source] io::Error),
    #[error("malformed data in {0}: {1}")]
    Format(String, String),
}
