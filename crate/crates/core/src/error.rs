use thiserror::Error;

/// Errors raised by the evaluators, the simulators and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the quantity being evaluated.
    #[error("domain error: {0}")]
    Domain(String),
    /// The quantity is infinite at the requested point.
    #[error("divergent: {0}")]
    Divergent(String),
    /// A caller passed inconsistent arguments (dimension mismatch, index out of range).
    #[error("usage error: {0}")]
    Usage(String),
    /// A configuration file could not be parsed or violates a constraint.
    /// `line` is 1-based; 0 means the problem is not tied to one line.
    #[error("config error{}: {message}", at_line(*line))]
    Config { line: usize, message: String },
    /// A configuration is valid but too large to run at desk scale.
    #[error("resource limit exceeded: {0}")]
    Capacity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" (line {line})")
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: msg.into(),
        }
    }
}
