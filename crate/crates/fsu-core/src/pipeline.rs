//! The sequential joint upsampling pipeline and evaluation protocols.
//!
//! `upsample` wires the stages together: normalize, partition into
//! overlapped blocks, per-block geometry then attribute upsampling (blocks
//! run in parallel; each block's randomness is seeded from the global seed
//! and its grid id, so the schedule cannot change the output), deterministic
//! reverse partitioning, denormalize.
//!
//! `attribute_protocol` implements the color evaluation scheme: the
//! reference cloud is randomly downsampled, geometry upsampling is skipped,
//! and the attribute models are scored at the held-out positions against
//! their ground-truth colors.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::attrup::{attribute_transfer_eval, upsample_block_attributes};
use crate::cloud::{normalize, Point3, PointCloud, Rgb};
use crate::config::FsuConfig;
use crate::error::{FsuError, Result};
use crate::fsmodel::{estimate, evaluate, ScatteredSamples};
use crate::geoup::{block_basis, select_axis, upsample_block_geometry};
use crate::kdtree::KdTree3;
use crate::metrics::{color_psnr, histogram_distance_colors, ColorPsnr};
use crate::partition::{merge_block_outputs, partition, BlockOutput};

/// Wall-clock stage timings in milliseconds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    pub normalize_ms: f64,
    pub partition_ms: f64,
    pub blocks_ms: f64,
    pub merge_ms: f64,
    pub denormalize_ms: f64,
    pub total_ms: f64,
}

/// Record of one pipeline run: the exact configuration used, point counts,
/// and stage timings. Paths are filled in by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub input: Option<String>,
    pub output: Option<String>,
    pub config: FsuConfig,
    pub seed: u64,
    pub points_in: usize,
    pub points_out: usize,
    pub blocks: usize,
    pub timings: StageTimings,
}

fn ms(from: Instant) -> f64 {
    from.elapsed().as_secs_f64() * 1e3
}

/// Runs the full joint upsampling pipeline. Colorless clouds run in
/// geometry-only mode. `scale_factor == 1` returns the input unchanged.
pub fn upsample(cloud: &PointCloud, cfg: &FsuConfig) -> Result<(PointCloud, RunManifest)> {
    cfg.validate()?;
    if cloud.is_empty() {
        return Err(FsuError::EmptyInput);
    }

    let total_start = Instant::now();
    let mut timings = StageTimings::default();

    if cfg.scale_factor == 1.0 {
        timings.total_ms = ms(total_start);
        let manifest = RunManifest {
            input: None,
            output: None,
            config: cfg.clone(),
            seed: cfg.seed,
            points_in: cloud.len(),
            points_out: cloud.len(),
            blocks: 0,
            timings,
        };
        return Ok((cloud.clone(), manifest));
    }

    let stage = Instant::now();
    let (normalized, transform) = normalize(cloud)?;
    timings.normalize_ms = ms(stage);

    let stage = Instant::now();
    let blocks = partition(&normalized, cfg.block_size, cfg.support_margin)?;
    timings.partition_ms = ms(stage);
    let block_count = blocks.len();

    let stage = Instant::now();
    let has_colors = normalized.has_colors();
    let outputs: Result<Vec<BlockOutput>> = blocks
        .par_iter()
        .map(|block| {
            let geometry = upsample_block_geometry(block, &normalized, cfg)?;
            let (positions, colors) = match geometry {
                Some(g) if !g.new_points.is_empty() => {
                    let colors = if has_colors {
                        Some(upsample_block_attributes(
                            block,
                            &normalized,
                            &g.frame,
                            &g.new_points,
                            cfg,
                        )?)
                    } else {
                        None
                    };
                    (g.new_points, colors)
                }
                _ => (Vec::new(), has_colors.then(Vec::new)),
            };
            Ok(BlockOutput {
                id: block.id,
                core_min: block.core_min,
                positions,
                colors,
            })
        })
        .collect();
    let outputs = outputs?;
    timings.blocks_ms = ms(stage);

    let stage = Instant::now();
    let merged = merge_block_outputs(&normalized, outputs, cfg.block_size)?;
    timings.merge_ms = ms(stage);

    // Denormalize only the inserted tail; originals pass through untouched.
    let stage = Instant::now();
    let mut positions = Vec::with_capacity(merged.len());
    positions.extend_from_slice(cloud.positions());
    positions.extend(
        merged.positions()[cloud.len()..]
            .iter()
            .map(|&p| transform.invert(p)),
    );
    let result = PointCloud::new(positions, merged.colors().map(|c| c.to_vec()))?;
    timings.denormalize_ms = ms(stage);
    timings.total_ms = ms(total_start);

    let manifest = RunManifest {
        input: None,
        output: None,
        config: cfg.clone(),
        seed: cfg.seed,
        points_in: cloud.len(),
        points_out: result.len(),
        blocks: block_count,
        timings,
    };
    Ok((result, manifest))
}

/// Color metrics of one protocol run.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolRun {
    pub seed: u64,
    pub psnr: ColorPsnr,
    pub hist_distance: f64,
}

/// Averaged color metrics over all protocol runs.
#[derive(Debug, Clone, Serialize)]
pub struct AttributeProtocolReport {
    pub runs: Vec<ProtocolRun>,
    pub keep_fraction: f64,
    pub psnr_r: f64,
    pub psnr_g: f64,
    pub psnr_b: f64,
    pub psnr_avg: f64,
    pub hist_distance: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    sum / count as f64
}

/// Predicts colors at `query_positions` from the colored `train` points:
/// blocks are formed over the union geometry, each block is rotated by the
/// variance criterion, and a per-channel frequency model fit on the train
/// support is evaluated at the queries. Blocks without any colored support
/// point fall back to the nearest colored point.
pub fn predict_attributes(
    train: &PointCloud,
    query_positions: &[Point3],
    cfg: &FsuConfig,
) -> Result<Vec<Rgb>> {
    let train_colors = train.colors().ok_or(FsuError::MissingColors)?;
    if query_positions.is_empty() {
        return Ok(Vec::new());
    }
    let train_len = train.len();

    let mut combined = Vec::with_capacity(train_len + query_positions.len());
    combined.extend_from_slice(train.positions());
    combined.extend_from_slice(query_positions);
    let combined_cloud = PointCloud::from_positions(combined)?;
    let blocks = partition(&combined_cloud, cfg.block_size, cfg.support_margin)?;

    let positions = combined_cloud.positions();
    let per_block: Result<Vec<Vec<(usize, Rgb)>>> = blocks
        .par_iter()
        .map(|block| {
            let queries: Vec<usize> = block
                .core_point_indices
                .iter()
                .copied()
                .filter(|&i| i >= train_len)
                .collect();
            if queries.is_empty() {
                return Ok(Vec::new());
            }
            let train_support: Vec<usize> = block
                .support_point_indices
                .iter()
                .copied()
                .filter(|&i| i < train_len)
                .collect();
            if train_support.is_empty() || block.support_point_indices.len() < 2 {
                // Marked for the nearest-neighbor fallback pass.
                return Ok(queries.iter().map(|&q| (q, [0, 0, 0])).collect());
            }

            let support_points: Vec<Point3> = block
                .support_point_indices
                .iter()
                .map(|&i| positions[i])
                .collect();
            let frame = select_axis(&support_points)?;
            let (basis, weights) = block_basis(block, &frame, cfg)?;

            let sample_positions: Vec<[f64; 2]> = train_support
                .iter()
                .map(|&i| {
                    let r = frame.to_frame(positions[i]);
                    [r[0], r[1]]
                })
                .collect();
            let query_planar: Vec<[f64; 2]> = queries
                .iter()
                .map(|&i| {
                    let r = frame.to_frame(positions[i]);
                    [r[0], r[1]]
                })
                .collect();

            let mut block_out: Vec<(usize, Rgb)> =
                queries.iter().map(|&q| (q, [0u8; 3])).collect();
            for channel in 0..3 {
                let values: Vec<f64> = train_support
                    .iter()
                    .map(|&i| train_colors[i][channel] as f64)
                    .collect();
                let samples = ScatteredSamples::new(sample_positions.clone(), values)?;
                let model = estimate(
                    &samples,
                    &basis,
                    &weights,
                    cfg.max_iterations,
                    cfg.residual_threshold,
                );
                let predicted = evaluate(&model, &basis, &query_planar)?;
                for (slot, v) in block_out.iter_mut().zip(&predicted) {
                    slot.1[channel] = v.round().clamp(0.0, 255.0) as u8;
                }
            }
            Ok(block_out)
        })
        .collect();

    // Blocks with colored support produced real predictions; the rest get
    // the nearest colored point's color.
    let mut needs_fallback: Vec<bool> = vec![false; query_positions.len()];
    let mut colors: Vec<Rgb> = vec![[0; 3]; query_positions.len()];
    let mut covered = vec![false; query_positions.len()];
    let block_results = per_block?;

    for (block, results) in blocks.iter().zip(&block_results) {
        let has_colored_support = block
            .support_point_indices
            .iter()
            .any(|&i| i < train_len)
            && block.support_point_indices.len() >= 2;
        for &(q, c) in results {
            let slot = q - train_len;
            colors[slot] = c;
            covered[slot] = true;
            if !has_colored_support {
                needs_fallback[slot] = true;
            }
        }
    }
    debug_assert!(covered.iter().all(|&c| c));

    if needs_fallback.iter().any(|&f| f) {
        let tree = KdTree3::build(train.positions());
        for (slot, flag) in needs_fallback.iter().enumerate() {
            if *flag {
                let (j, _) = tree
                    .nearest(query_positions[slot])
                    .ok_or(FsuError::EmptyInput)?;
                colors[slot] = train_colors[j];
            }
        }
    }
    Ok(colors)
}

/// Runs the randomized attribute-transfer protocol `runs` times with
/// `keep_fraction = 1 / scale_factor` and averages the color metrics.
pub fn attribute_protocol(
    reference: &PointCloud,
    cfg: &FsuConfig,
    runs: usize,
) -> Result<AttributeProtocolReport> {
    cfg.validate()?;
    if runs == 0 {
        return Err(FsuError::InvalidConfig("runs must be >= 1".into()));
    }
    if !reference.has_colors() {
        return Err(FsuError::MissingColors);
    }
    if cfg.scale_factor <= 1.0 {
        return Err(FsuError::InvalidConfig(
            "attribute protocol needs scale_factor > 1".into(),
        ));
    }
    let keep_fraction = 1.0 / cfg.scale_factor;

    let (normalized, _) = normalize(reference)?;
    let mut run_reports = Vec::with_capacity(runs);
    for run in 0..runs {
        let seed = cfg.seed.wrapping_add(run as u64);
        let split = attribute_transfer_eval(&normalized, keep_fraction, seed)?;
        let predicted = predict_attributes(&split.train, &split.query_positions, cfg)?;
        let psnr = color_psnr(&predicted, &split.query_truth_colors)?;
        let hist = histogram_distance_colors(&predicted, &split.query_truth_colors);
        run_reports.push(ProtocolRun {
            seed,
            psnr,
            hist_distance: hist,
        });
    }

    let report = AttributeProtocolReport {
        keep_fraction,
        psnr_r: mean(run_reports.iter().map(|r| r.psnr.r)),
        psnr_g: mean(run_reports.iter().map(|r| r.psnr.g)),
        psnr_b: mean(run_reports.iter().map(|r| r.psnr.b)),
        psnr_avg: mean(run_reports.iter().map(|r| r.psnr.avg)),
        hist_distance: mean(run_reports.iter().map(|r| r.hist_distance)),
        runs: run_reports,
    };
    Ok(report)
}
