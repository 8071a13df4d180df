use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every violation found while validating a configuration.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("invalid action {0}: expected an MCS index in 0..=7")]
    InvalidAction(usize),

    #[error("episode has ended; call reset before stepping again")]
    EpisodeEnded,

    #[error("not ready: {0}")]
    NotReady(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("checkpoint not found: {}", .0.display())]
    CheckpointNotFound(PathBuf),

    #[error("corrupt checkpoint {}: {reason}", .path.display())]
    CorruptCheckpoint { path: PathBuf, reason: String },

    #[error(
        "checkpoint fingerprint {found} does not match configuration fingerprint {expected} \
         (pass --allow-fingerprint-mismatch to load anyway)"
    )]
    FingerprintMismatch { expected: String, found: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(vec![msg.into()])
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors the CLI reports as configuration problems (exit code 1).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::FingerprintMismatch { .. })
    }
}

pub(crate) trait IoContext<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T>;
}

impl<T> IoContext<T> for std::result::Result<T, std::io::Error> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| Error::Io {
            context: ctx(),
            source,
        })
    }
}
