//! Attribute upsampling of one block.
//!
//! Colors are modeled per channel as sparse frequency models over the same
//! planar coordinates the geometry stage produced: points are projected to
//! 2D by dropping the modeled axis. Because the model is a global function
//! over the block extent, attribute values exist at every query position,
//! including ones outside the convex hull of the samples where triangulation
//! interpolators cannot extrapolate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::{Point3, PointCloud, Rgb};
use crate::config::FsuConfig;
use crate::error::{FsuError, Result};
use crate::fsmodel::{estimate, evaluate, ScatteredSamples};
use crate::geoup::{block_basis, AxisFrame};
use crate::partition::Block;

/// Drops the modeled coordinate of points already rotated into `frame`.
pub fn project(points_rotated: &[Point3]) -> Vec<[f64; 2]> {
    points_rotated.iter().map(|p| [p[0], p[1]]).collect()
}

fn clamp_channel(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// A block projected into the planar domain of its axis frame: the colored
/// sample positions for model fitting and the query positions to predict.
#[derive(Debug, Clone)]
pub struct ProjectedBlock {
    pub sample_positions: Vec<[f64; 2]>,
    /// One value list per channel (R, G, B), aligned with
    /// `sample_positions`.
    pub sample_colors: [Vec<f64>; 3],
    pub query_positions: Vec<[f64; 2]>,
}

impl ProjectedBlock {
    /// Projects the block's support samples and the given query points.
    pub fn new(
        block: &Block,
        cloud: &PointCloud,
        frame: &AxisFrame,
        query_points: &[Point3],
    ) -> Result<Self> {
        let colors = cloud.colors().ok_or(FsuError::MissingColors)?;
        let positions = cloud.positions();
        let sample_rotated: Vec<Point3> = block
            .support_point_indices
            .iter()
            .map(|&i| frame.to_frame(positions[i]))
            .collect();
        let query_rotated: Vec<Point3> =
            query_points.iter().map(|&p| frame.to_frame(p)).collect();
        let sample_colors = [0, 1, 2].map(|channel| {
            block
                .support_point_indices
                .iter()
                .map(|&i| colors[i][channel] as f64)
                .collect()
        });
        Ok(Self {
            sample_positions: project(&sample_rotated),
            sample_colors,
            query_positions: project(&query_rotated),
        })
    }
}

/// Fits one frequency model per color channel over the block's support
/// points and evaluates it at the new points produced by the geometry stage.
pub fn upsample_block_attributes(
    block: &Block,
    cloud: &PointCloud,
    frame: &AxisFrame,
    new_points: &[Point3],
    cfg: &FsuConfig,
) -> Result<Vec<Rgb>> {
    if new_points.is_empty() {
        cloud.colors().ok_or(FsuError::MissingColors)?;
        return Ok(Vec::new());
    }
    let projected = ProjectedBlock::new(block, cloud, frame, new_points)?;
    let (basis, weights) = block_basis(block, frame, cfg)?;

    let mut out = vec![[0u8; 3]; new_points.len()];
    for (channel, values) in projected.sample_colors.iter().enumerate() {
        let samples = ScatteredSamples::new(projected.sample_positions.clone(), values.clone())?;
        let model = estimate(
            &samples,
            &basis,
            &weights,
            cfg.max_iterations,
            cfg.residual_threshold,
        );
        let predicted = evaluate(&model, &basis, &projected.query_positions)?;
        for (slot, v) in out.iter_mut().zip(&predicted) {
            slot[channel] = clamp_channel(*v);
        }
    }
    Ok(out)
}

/// A seeded train/query split of a colored cloud for attribute-transfer
/// evaluation: the train part keeps geometry and color, the query part keeps
/// geometry only, with the ground-truth colors retained for scoring.
#[derive(Debug, Clone)]
pub struct AttributeSplit {
    pub train: PointCloud,
    pub query_positions: Vec<Point3>,
    pub query_truth_colors: Vec<Rgb>,
}

/// Splits `reference` uniformly at random, keeping `keep_fraction` of the
/// points (at least one, at most all but one) as the colored train set.
pub fn attribute_transfer_eval(
    reference: &PointCloud,
    keep_fraction: f64,
    seed: u64,
) -> Result<AttributeSplit> {
    let colors = reference.colors().ok_or(FsuError::MissingColors)?;
    if reference.len() < 2 {
        return Err(FsuError::EmptyInput);
    }
    if !(keep_fraction > 0.0 && keep_fraction < 1.0) {
        return Err(FsuError::InvalidConfig(format!(
            "keep_fraction must lie in (0, 1), got {keep_fraction}"
        )));
    }

    let n = reference.len();
    let keep = ((keep_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut train_idx = order[..keep].to_vec();
    let mut query_idx = order[keep..].to_vec();
    train_idx.sort_unstable();
    query_idx.sort_unstable();

    let positions = reference.positions();
    let train = PointCloud::new(
        train_idx.iter().map(|&i| positions[i]).collect(),
        Some(train_idx.iter().map(|&i| colors[i]).collect()),
    )?;
    Ok(AttributeSplit {
        train,
        query_positions: query_idx.iter().map(|&i| positions[i]).collect(),
        query_truth_colors: query_idx.iter().map(|&i| colors[i]).collect(),
    })
}
