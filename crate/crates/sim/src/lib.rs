pub mod config;
pub mod error;
pub mod problem;
pub mod report;
pub mod rescale;
pub mod simulate;
pub mod studies;

pub use error::{ConfigError, SimError};
