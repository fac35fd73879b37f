use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One failed check of a scenario, addressed by its dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl Issue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario validation failed ({} issue(s)):\n{}", .0.len(), join_issues(.0))]
    Validation(Vec<Issue>),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("singular profile: energy {energy} coincides with E(p) = {dispersion} at node {node} (p = {momentum})")]
    Singularity {
        energy: f64,
        node: usize,
        momentum: f64,
        dispersion: f64,
    },

    #[error("undefined observable: {0}")]
    UndefinedObservable(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Validation(_) | Error::Argument(_) | Error::Shape(_) => 2,
            Error::Unsupported(_)
            | Error::Numerical(_)
            | Error::Singularity { .. }
            | Error::UndefinedObservable(_) => 3,
            Error::Io(_) | Error::Serialization(_) => 4,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
