use thiserror::Error;

use crate::cli::tracefile::TraceFormatError;
use crate::ditl::DitlError;
use crate::lexicon::LexiconError;
use crate::parser::ParseError;
use crate::scene::SceneError;
use crate::verify::VerifyError;

/// Any failure of the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Ditl(#[from] DitlError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    TraceFormat(#[from] TraceFormatError),
    #[error("IoError: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the input was well formed but no run of the program succeeds
    /// (or the search gave up), as opposed to malformed input.
    pub fn is_search_failure(&self) -> bool {
        matches!(
            self,
            Error::Ditl(DitlError::NoSuccessfulRun { .. } | DitlError::ExplosionGuard { .. })
        )
    }

    /// Process exit status: 3 for search failures, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        if self.is_search_failure() {
            3
        } else {
            2
        }
    }
}
