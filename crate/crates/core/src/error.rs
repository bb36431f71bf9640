use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 config, 3 numerical non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingKey(_) | Error::Config(_) => 2,
            Error::Singular(_) | Error::NonConvergence(_) => 3,
            Error::Domain(_) | Error::Hypothesis(_) | Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
