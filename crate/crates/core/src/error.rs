use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent user input (config files, CLI flags, parameters).
    #[error("configuration error: {0}")]
    Config(String),

    /// An enumeration or dynamic program would exceed its state budget.
    #[error("guard exceeded in {what}: requested {requested}, limit {limit}")]
    Guard {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("ambiguous open contour: found {0} open contours, expected exactly 1")]
    Ambiguity(usize),

    #[error("target has zero probability: {0}")]
    ZeroProbability(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Guard { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn guard(what: &'static str, requested: u64, limit: u64) -> Self {
        Error::Guard {
            what,
            requested,
            limit,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
