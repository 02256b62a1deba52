//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by cloud construction, I/O, and the upsampling pipeline.
#[derive(Debug, Error)]
pub enum FsuError {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite coordinate at point index {0}")]
    NonFiniteCoordinate(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("point cloud has no colors")]
    MissingColors,

    #[error("degenerate block: fewer than 2 support points")]
    DegenerateBlock,

    #[error("untriangulatable block: fewer than 3 distinct planar points")]
    UntriangulatableBlock,

    #[error("evaluation position ({m}, {n}) lies outside the basis extent")]
    PositionOutsideExtent { m: f64, n: f64 },

    #[error(
        "inserted point ({x}, {y}, {z}) lies outside the core cell of block ({bx}, {by}, {bz})"
    )]
    PointOutsideCore {
        x: f64,
        y: f64,
        z: f64,
        bx: u32,
        by: u32,
        bz: u32,
    },

    #[error("PLY parse error at line {line}: {message}")]
    PlyParse { line: usize, message: String },

    #[error("PLY body error at byte offset {offset}: {message}")]
    PlyBody { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FsuError>;
