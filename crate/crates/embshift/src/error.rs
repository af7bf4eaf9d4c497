use std::io;
use std::path::PathBuf;

use embshift_core::audit::AuditError;
use embshift_core::embstore::StoreError;
use embshift_core::seqgen::SeqGenError;
use embshift_core::simengine::ScoreError;
use embshift_core::termbank::TermBankError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    TermBank { path: PathBuf, source: TermBankError },
    #[error("{}: {source}", path.display())]
    Templates { path: PathBuf, source: SeqGenError },
    #[error("{}: {source}", path.display())]
    Store { path: PathBuf, source: StoreError },
    #[error("{}: line {line}: {reason}", path.display())]
    Corpus { path: PathBuf, line: usize, reason: String },
    #[error("{}: {reason}", path.display())]
    Report { path: PathBuf, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Generate(#[from] SeqGenError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Render(#[from] crate::render::RenderError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 1 for analysis failures, 2 for usage, parse and IO failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Score(_) | Error::Audit(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
