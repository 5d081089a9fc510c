use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter is outside its allowed domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("spectra have different scan axes")]
    AxisMismatch,

    #[error("polarizability set is incomplete: {0}")]
    IncompletePolarizabilities(String),

    #[error("degenerate fit design: {0}")]
    DegenerateDesign(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad physics input rather than I/O or parsing.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::AxisMismatch
                | Error::IncompletePolarizabilities(_)
                | Error::DegenerateDesign(_)
        )
    }
}
