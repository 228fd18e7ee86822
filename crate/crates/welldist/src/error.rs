use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum WelldistError {
    /// A precondition on argument values failed.
    #[error("domain error: {0}")]
    Domain(String),
    /// A resource gate tripped before computation started.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Experiment configuration is invalid.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, WelldistError>;
