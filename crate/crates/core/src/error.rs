use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dense size cap exceeded: {entries} entries requested, cap is {cap}; use the matrix-free operators instead")]
    SizeCap { entries: u128, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} is not block diagonal: off-diagonal max magnitude {max_offdiag:.3e} exceeds {tolerance:.1e}")]
    Structure {
        what: &'static str,
        max_offdiag: f64,
        tolerance: f64,
    },

    #[error("matrix is not Hermitian positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dimension(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn length(what: &'static str, expected: usize, found: usize) -> Self {
        Error::Length {
            what,
            expected,
            found,
        }
    }
}
