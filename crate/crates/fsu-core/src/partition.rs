//! Overlapped block partitioning of a normalized cloud.
//!
//! The unit cube is divided into cubic core cells of side `N`. Each point
//! belongs to exactly one core cell (half-open intervals, the topmost cell
//! closed at 1.0). Around every core cell an overlapped support shell of
//! width `M` collects the points used for model estimation; support
//! intervals are closed on both ends, so a point may sit in the support of
//! none, one, or several blocks. Points keep their original coordinates:
//! this is pure assignment, not voxelization.

use std::collections::BTreeMap;

use crate::cloud::{PointCloud, Point3, Rgb};
use crate::error::{FsuError, Result};

/// Grid coordinates of a core cell. The derived ordering (x, then y, then z)
/// fixes the deterministic merge order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId {
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

/// One core cell together with its overlapped support points.
#[derive(Debug, Clone)]
pub struct Block {
    pub id: BlockId,
    /// Lower corner of the core cell.
    pub core_min: Point3,
    /// Indices of points owned by this core cell, ascending.
    pub core_point_indices: Vec<usize>,
    /// Indices of all points in the expanded cell (core included), ascending.
    pub support_point_indices: Vec<usize>,
}

impl Block {
    /// Closed support interval test: `core_min - M <= c <= core_min + N + M`
    /// on every axis.
    pub fn support_contains(&self, p: Point3, block_size: f64, margin: f64) -> bool {
        (0..3).all(|a| {
            p[a] >= self.core_min[a] - margin && p[a] <= self.core_min[a] + block_size + margin
        })
    }
}

fn cells_per_axis(block_size: f64) -> u32 {
    ((1.0 / block_size).ceil() as u32).max(1)
}

fn core_cell_index(coord: f64, block_size: f64, cells: u32) -> u32 {
    let mut i = ((coord / block_size).floor() as i64).clamp(0, cells as i64 - 1) as u32;
    // One-step correction so the grid formula agrees with the geometric
    // half-open interval even when coord/block_size rounds across a cell
    // boundary.
    if coord < i as f64 * block_size && i > 0 {
        i -= 1;
    } else if coord >= (i + 1) as f64 * block_size && i + 1 < cells {
        i += 1;
    }
    i
}

/// Assigns every point of a normalized cloud to its core cell and gathers
/// the overlapped support membership. Cells that own no point are dropped.
pub fn partition(cloud: &PointCloud, block_size: f64, margin: f64) -> Result<Vec<Block>> {
    if !(block_size > 0.0 && block_size.is_finite()) {
        return Err(FsuError::InvalidConfig(format!(
            "block_size must be positive, got {block_size}"
        )));
    }
    if margin.is_nan() || margin < 0.0 {
        return Err(FsuError::InvalidConfig(format!(
            "support_margin must be nonnegative, got {margin}"
        )));
    }

    let cells = cells_per_axis(block_size);
    let mut blocks: BTreeMap<BlockId, Block> = BTreeMap::new();

    for (i, p) in cloud.positions().iter().enumerate() {
        let id = BlockId {
            x: core_cell_index(p[0], block_size, cells),
            y: core_cell_index(p[1], block_size, cells),
            z: core_cell_index(p[2], block_size, cells),
        };
        blocks
            .entry(id)
            .or_insert_with(|| Block {
                id,
                core_min: [
                    id.x as f64 * block_size,
                    id.y as f64 * block_size,
                    id.z as f64 * block_size,
                ],
                core_point_indices: Vec::new(),
                support_point_indices: Vec::new(),
            })
            .core_point_indices
            .push(i);
    }

    // Candidate cell range per axis for the closed support interval
    // [i*N - M, i*N + N + M]; the +/-1 padding absorbs rounding in the
    // division, and the exact predicate decides membership.
    let axis_range = |coord: f64| -> (u32, u32) {
        let lo = (((coord - margin) / block_size).floor() as i64 - 1).max(0) as u32;
        let hi = ((((coord + margin) / block_size).floor() as i64) + 1)
            .clamp(0, cells as i64 - 1) as u32;
        (lo, hi)
    };

    for (i, p) in cloud.positions().iter().enumerate() {
        let (x_lo, x_hi) = axis_range(p[0]);
        let (y_lo, y_hi) = axis_range(p[1]);
        let (z_lo, z_hi) = axis_range(p[2]);
        for x in x_lo..=x_hi {
            for y in y_lo..=y_hi {
                for z in z_lo..=z_hi {
                    let id = BlockId { x, y, z };
                    if let Some(block) = blocks.get_mut(&id) {
                        if block.support_contains(*p, block_size, margin) {
                            block.support_point_indices.push(i);
                        }
                    }
                }
            }
        }
    }

    Ok(blocks.into_values().collect())
}

/// New points produced for one block by the upsampling stages.
#[derive(Debug, Clone)]
pub struct BlockOutput {
    pub id: BlockId,
    pub core_min: Point3,
    pub positions: Vec<Point3>,
    pub colors: Option<Vec<Rgb>>,
}

/// Slack allowed when validating that inserted points sit inside their core
/// cell; matches the tolerance the geometry stage guarantees.
pub const CORE_SLACK: f64 = 1e-9;

/// Concatenates the original cloud with all per-block insertions in
/// ascending block id order, independent of the processing order of
/// `outputs`. Original points come first, preserving their input order.
pub fn merge_block_outputs(
    original: &PointCloud,
    mut outputs: Vec<BlockOutput>,
    block_size: f64,
) -> Result<PointCloud> {
    outputs.sort_by_key(|o| o.id);

    let added: usize = outputs.iter().map(|o| o.positions.len()).sum();
    let mut positions = Vec::with_capacity(original.len() + added);
    positions.extend_from_slice(original.positions());
    let mut colors = original.colors().map(|c| {
        let mut v = Vec::with_capacity(original.len() + added);
        v.extend_from_slice(c);
        v
    });

    for output in &outputs {
        if let Some(c) = &output.colors {
            if c.len() != output.positions.len() {
                return Err(FsuError::LengthMismatch {
                    left: output.positions.len(),
                    right: c.len(),
                });
            }
        }
        for &p in &output.positions {
            let inside = (0..3).all(|a| {
                p[a] >= output.core_min[a] - CORE_SLACK
                    && p[a] <= output.core_min[a] + block_size + CORE_SLACK
            });
            if !inside {
                return Err(FsuError::PointOutsideCore {
                    x: p[0],
                    y: p[1],
                    z: p[2],
                    bx: output.id.x,
                    by: output.id.y,
                    bz: output.id.z,
                });
            }
            positions.push(p);
        }
        match (&mut colors, &output.colors) {
            (Some(all), Some(c)) => all.extend_from_slice(c),
            (None, None) => {}
            (Some(_), None) => return Err(FsuError::MissingColors),
            (None, Some(_)) => {
                return Err(FsuError::InvalidConfig(
                    "colored block output for a colorless cloud".into(),
                ))
            }
        }
    }

    PointCloud::new(positions, colors)
}
