use thiserror::Error;

use crate::partition::Kind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("extent mismatch: expected {expected}, got {actual}")]
    Extent { expected: usize, actual: usize },

    #[error("singular operator: zero pivot at elimination step {step}")]
    Singular { step: usize },

    #[error("factorization of {kind:?} subproblem on slab {slab} failed: {source}")]
    Subproblem {
        slab: usize,
        kind: Kind,
        #[source]
        source: Box<Error>,
    },

    #[error("dense oracle is limited to {limit} unknowns, got {extent}")]
    TooLarge { extent: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Extent { expected, actual })
    }
}
