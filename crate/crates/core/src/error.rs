use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({row}, {col}) out of range for {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("matrix not symmetric: |a({i},{j}) - a({j},{i})| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("iterative solver diverged: {0}")]
    Diverged(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("zero load vector")]
    ZeroLoadVector,

    #[error("operator not positive definite: (p, Ap)_M = {0:e}")]
    OperatorNotPositiveDefinite(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("unknown analytic source `{0}`")]
    UnknownSource(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("PGM {path:?}: {msg}")]
    Pgm { path: Option<PathBuf>, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn pgm(msg: impl Into<String>) -> Self {
        Error::Pgm {
            path: None,
            msg: msg.into(),
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
