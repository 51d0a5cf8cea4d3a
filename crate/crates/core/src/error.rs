use thiserror::Error;

use crate::grid::Representation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported spatial dimension {0} (expected 1 or 3)")]
    InvalidDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("representation mismatch: expected {expected:?}, found {found:?}")]
    RepresentationMismatch {
        expected: Representation,
        found: Representation,
    },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("state is not boundary-safe: tail mass {tail_mass:e} within {band_cells} cells of the edge exceeds {tolerance:e}")]
    BoundaryUnsafe {
        tail_mass: f64,
        band_cells: usize,
        tolerance: f64,
    },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid packet: {}", .0.join("; "))]
    InvalidPacket(Vec<String>),

    #[error("trace too short: {found} samples, need at least {required}")]
    TraceTooShort { found: usize, required: usize },

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
