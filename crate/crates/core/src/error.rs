use std::path::PathBuf;

use thiserror::Error;

use crate::grid::Domain;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field is in the {found:?} domain, expected {expected:?}")]
    WrongDomain { expected: Domain, found: Domain },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("quadrature under-resolved: {points} points, at least {required} needed")]
    UnderResolved { points: usize, required: usize },

    #[error("no admissible partner exponent: {0}")]
    Infeasible(String),

    #[error("not enough samples: need {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("field has zero-mode content ({0:e}) that cannot be inverted")]
    ZeroModeContent(f64),

    #[error("phase-resolution guard violated: dt * max|xi|^2 / 2 = {0} >= pi")]
    PhaseGuard(f64),

    #[error("time horizon {t} exceeds the anti-wraparound limit {limit}")]
    Wraparound { t: f64, limit: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
