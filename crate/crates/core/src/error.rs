use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value iteration did not converge after {sweeps} sweeps (last residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("malformed mdp-v1 document at line {line}: {message}")]
    MdpFormat { line: usize, message: String },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("trial {trial}, agent `{agent}`, step {step}: {source}")]
    TrialAborted {
        trial: u64,
        agent: String,
        step: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Experiment config failures. Each kind is distinguishable by variant.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {}", path.display())]
    MissingFile { path: PathBuf },

    #[error("cannot read config {}: {source}", path.display())]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("unknown key `{key}` in section [{section}] at line {line}")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },

    #[error("`{key}` = {value} is out of range at line {line}: must be {bound}")]
    OutOfRange {
        line: usize,
        key: String,
        value: String,
        bound: String,
    },

    #[error("invalid config: {0}")]
    Invalid(String),
}
