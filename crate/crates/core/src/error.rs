use thiserror::Error;

use crate::dyadic::DyadicCube;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cube {cube} is not inside root {root}")]
    OutsideRoot { cube: DyadicCube, root: DyadicCube },

    #[error("cube {cube} is finer than the grid resolution (cell level {cell_level})")]
    BelowResolution { cube: DyadicCube, cell_level: i32 },

    #[error("parent of {0} escapes the working root")]
    ParentEscapesRoot(DyadicCube),

    #[error("grids do not share root and depth")]
    LayoutMismatch,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid epsilon collection: {0}")]
    InvalidEpsilon(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("threshold {lambda} does not exceed eps_root * avg_root|f| = {root_value}")]
    NotLocalizable { lambda: f64, root_value: f64 },

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("empty bank")]
    EmptyBank,

    #[error("malformed cube token {0:?}")]
    BadToken(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
