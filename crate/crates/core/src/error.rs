use thiserror::Error;

/// Errors raised by matrix construction, I/O and the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has no rows or no columns")]
    EmptyMatrix,

    #[error("matrix cell ({row}, {col}) holds {value:?}, expected 0 or 1")]
    NonBinaryCell { row: usize, col: usize, value: String },

    #[error("ragged matrix: row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("all-zero rows {rows:?} and columns {cols:?} must be removed before iterating")]
    EmptyLines { rows: Vec<String>, cols: Vec<String> },

    #[error("state does not match matrix: {0}")]
    ShapeMismatch(String),

    #[error("invalid engine parameter: {0}")]
    InvalidParams(String),

    #[error("infeasible block density {density} for block {block} ({rows}x{cols}): rows and columns cannot all hold the same number of ones")]
    InfeasibleDensity {
        block: u8,
        density: f64,
        rows: usize,
        cols: usize,
    },

    #[error("invalid block spec: {0}")]
    InvalidBlockSpec(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no flow records")]
    NoFlows,

    #[error("all flow values are zero")]
    ZeroFlows,

    #[error("unknown matrix name {0:?}")]
    UnknownName(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
