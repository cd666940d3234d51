use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the subspace, operator and experiment routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ambient dimension must be positive")]
    ZeroDimension,

    #[error("basis columns are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("affine subspaces do not intersect (anchor residual {residual:.3e})")]
    EmptyIntersection { residual: f64 },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "no block witnesses gamma = {gamma} (largest usable block cosine {max_cos}){}",
        match smallest_usable_blocks {
            Some(m) => format!("; truncate at M >= {m}"),
            None => String::new(),
        }
    )]
    NoWitness {
        gamma: f64,
        max_cos: f64,
        smallest_usable_blocks: Option<usize>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
