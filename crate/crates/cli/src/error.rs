use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot read lattice file {path}: {reason}")]
    LatticeFile { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Input(thetavoa::Error),

    #[error(transparent)]
    Numerical(thetavoa::Error),
}

impl CliError {
    /// 1 for numerical failures, 2 for anything the caller can fix by
    /// changing arguments or config.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            _ => 2,
        }
    }
}

/// Errors that mean the computation ran but did not verify.
pub fn is_numerical(e: &thetavoa::Error) -> bool {
    use thetavoa::Error::*;
    matches!(
        e,
        ImTooSmall { .. }
            | OutOfAnnulus { .. }
            | PoleAtLatticePoint { .. }
            | TailBoundViolated(_)
            | PredictionMismatch { .. }
            | IllConditioned { .. }
    )
}

impl From<thetavoa::Error> for CliError {
    fn from(e: thetavoa::Error) -> Self {
        if is_numerical(&e) {
            CliError::Numerical(e)
        } else {
            CliError::Input(e)
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
