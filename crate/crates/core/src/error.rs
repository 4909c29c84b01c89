//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Mesh construction produced a degenerate or inverted cell.
    #[error("mesh construction failed: {0}")]
    Mesh(String),

    /// A cell average left the admissible set of the system (negative
    /// density, pressure or water height beyond tolerance).
    #[error("inadmissible state in cell {cell}: {detail}")]
    Inadmissible { cell: usize, detail: String },

    /// Inconsistent solver/experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An eigenvalue pair failed the residual contract.
    #[error("eigensolver diagnostic failure: {0}")]
    Eigensolver(String),

    /// A least-squares stencil fit was rank deficient.
    #[error("rank-deficient stencil fit for cell {0}")]
    RankDeficient(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
