//! Geometry upsampling of one block.
//!
//! The block's support points are rotated so the axis of smallest variance
//! becomes the modeled dimension, a sparse frequency model of the surface
//! height over the remaining two axes is estimated, and new planar positions
//! are generated at the midpoints of Delaunay edges. The surface model is
//! sampled at those positions and the points are rotated back to 3D. New
//! points are confined to the core cell; the overlapped support only feeds
//! the model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::{Point3, PointCloud};
use crate::config::FsuConfig;
use crate::delaunay::{delaunay2d, Triangulation2D};
use crate::error::{FsuError, Result};
use crate::fsmodel::{estimate, evaluate, BasisSpec, ScatteredSamples, SparseModel, WeightingSpec};
use crate::partition::{Block, BlockId, CORE_SLACK};

/// The coordinate axis modeled as a function of the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Cyclic permutation placing the modeled axis last, so rotated points are
/// `(x', y', z')` with `z'` the modeled coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisFrame {
    pub modeled_axis: Axis,
}

impl AxisFrame {
    /// Source axis indices for `(x', y', z')`.
    pub fn source_axes(&self) -> [usize; 3] {
        match self.modeled_axis {
            Axis::Z => [0, 1, 2],
            Axis::X => [1, 2, 0],
            Axis::Y => [2, 0, 1],
        }
    }

    pub fn to_frame(&self, p: Point3) -> Point3 {
        let s = self.source_axes();
        [p[s[0]], p[s[1]], p[s[2]]]
    }

    pub fn from_frame(&self, p: Point3) -> Point3 {
        let s = self.source_axes();
        let mut out = [0.0; 3];
        out[s[0]] = p[0];
        out[s[1]] = p[1];
        out[s[2]] = p[2];
        out
    }
}

/// Unbiased per-axis sample variances.
pub fn axis_variances(points: &[Point3]) -> Result<[f64; 3]> {
    if points.len() < 2 {
        return Err(FsuError::DegenerateBlock);
    }
    let n = points.len() as f64;
    let mut mean = [0.0f64; 3];
    for p in points {
        for a in 0..3 {
            mean[a] += p[a];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = [0.0f64; 3];
    for p in points {
        for a in 0..3 {
            let d = p[a] - mean[a];
            var[a] += d * d;
        }
    }
    for v in &mut var {
        *v /= n - 1.0;
    }
    Ok(var)
}

/// Chooses the modeled axis as the one with the smallest variance over the
/// given points; ties prefer Z, then Y, then X.
pub fn select_axis(points: &[Point3]) -> Result<AxisFrame> {
    let var = axis_variances(points)?;
    let modeled_axis = if var[2] <= var[1] && var[2] <= var[0] {
        Axis::Z
    } else if var[1] <= var[0] {
        Axis::Y
    } else {
        Axis::X
    };
    Ok(AxisFrame { modeled_axis })
}

/// Distance below which two planar positions count as duplicates.
const PLANAR_DEDUP: f64 = 1e-9;

/// Candidate positions for new points: midpoints of the deduplicated
/// triangulation edges, restricted to the core rectangle, deduplicated
/// against each other and against the triangulation vertices. When more
/// candidates than `target_count` exist, a seeded uniform subsample is
/// returned; otherwise all candidates are.
pub fn new_planar_positions(
    tri: &Triangulation2D,
    core_min: [f64; 2],
    core_max: [f64; 2],
    target_count: usize,
    seed: u64,
) -> Vec<[f64; 2]> {
    let mut candidates: Vec<[f64; 2]> = Vec::with_capacity(tri.edges.len());
    'edges: for e in &tri.edges {
        let a = tri.vertices[e[0]];
        let b = tri.vertices[e[1]];
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let in_core = mid[0] >= core_min[0] - CORE_SLACK
            && mid[0] <= core_max[0] + CORE_SLACK
            && mid[1] >= core_min[1] - CORE_SLACK
            && mid[1] <= core_max[1] + CORE_SLACK;
        if !in_core {
            continue;
        }
        for v in &tri.vertices {
            if (v[0] - mid[0]).abs() <= PLANAR_DEDUP && (v[1] - mid[1]).abs() <= PLANAR_DEDUP {
                continue 'edges;
            }
        }
        for c in &candidates {
            if (c[0] - mid[0]).abs() <= PLANAR_DEDUP && (c[1] - mid[1]).abs() <= PLANAR_DEDUP {
                continue 'edges;
            }
        }
        candidates.push(mid);
    }

    if candidates.len() <= target_count {
        return candidates;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, candidates.len(), target_count)
        .into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| candidates[i]).collect()
}

/// Deterministic per-block seed derived from the global seed and the block's
/// grid coordinates, so parallel schedules cannot change the output. The
/// coordinates are mixed in sorted order, which keeps the whole pipeline
/// equivariant under axis relabeling.
pub fn block_seed(global_seed: u64, id: BlockId) -> u64 {
    let mut coords = [id.x as u64, id.y as u64, id.z as u64];
    coords.sort_unstable();
    let mut h = global_seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in coords {
        h ^= v.wrapping_add(0x9E37_79B9_7F4A_7C15);
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 27;
        h = h.wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

/// Result of upsampling one block's geometry.
#[derive(Debug, Clone)]
pub struct BlockGeometry {
    pub frame: AxisFrame,
    pub model: SparseModel,
    /// New 3D positions, all inside the core cell.
    pub new_points: Vec<Point3>,
}

/// The basis extent of a block: the expanded cell interval on the two planar
/// axes of `frame`, and the matching weighting spec.
pub fn block_basis(
    block: &Block,
    frame: &AxisFrame,
    cfg: &FsuConfig,
) -> Result<(BasisSpec, WeightingSpec)> {
    let s = frame.source_axes();
    let basis = BasisSpec::new(
        block.core_min[s[0]] - cfg.support_margin,
        block.core_min[s[0]] + cfg.block_size + cfg.support_margin,
        block.core_min[s[1]] - cfg.support_margin,
        block.core_min[s[1]] + cfg.block_size + cfg.support_margin,
        cfg.max_freq,
    )?;
    let weights = WeightingSpec::centered_on(&basis, cfg.spatial_decay, cfg.spectral_decay);
    Ok((basis, weights))
}

/// Fits the block surface and generates new points on it.
///
/// Blocks that cannot support a model or a triangulation (fewer than 3
/// support points, or fewer than 3 distinct planar positions) contribute
/// nothing and return `None`.
pub fn upsample_block_geometry(
    block: &Block,
    cloud: &PointCloud,
    cfg: &FsuConfig,
) -> Result<Option<BlockGeometry>> {
    if block.support_point_indices.len() < 3 {
        return Ok(None);
    }
    let positions = cloud.positions();
    let support: Vec<Point3> = block
        .support_point_indices
        .iter()
        .map(|&i| positions[i])
        .collect();

    let frame = select_axis(&support)?;
    let rotated: Vec<Point3> = support.iter().map(|&p| frame.to_frame(p)).collect();
    let planar: Vec<[f64; 2]> = rotated.iter().map(|p| [p[0], p[1]]).collect();
    let heights: Vec<f64> = rotated.iter().map(|p| p[2]).collect();

    let (basis, weights) = block_basis(block, &frame, cfg)?;
    let samples = ScatteredSamples::new(planar.clone(), heights)?;
    let model = estimate(
        &samples,
        &basis,
        &weights,
        cfg.max_iterations,
        cfg.residual_threshold,
    );

    let tri = match delaunay2d(&planar) {
        Ok(tri) => tri,
        Err(FsuError::UntriangulatableBlock) => return Ok(None),
        Err(e) => return Err(e),
    };

    let s = frame.source_axes();
    let core_min_2d = [block.core_min[s[0]], block.core_min[s[1]]];
    let core_max_2d = [
        block.core_min[s[0]] + cfg.block_size,
        block.core_min[s[1]] + cfg.block_size,
    ];
    let seed = block_seed(cfg.seed, block.id);
    let candidates = new_planar_positions(&tri, core_min_2d, core_max_2d, usize::MAX, seed);
    if candidates.is_empty() {
        return Ok(Some(BlockGeometry {
            frame,
            model,
            new_points: Vec::new(),
        }));
    }

    // Sample the surface at every candidate and keep the ones whose modeled
    // coordinate also falls inside the core cell, so the subsample below
    // draws only from valid points and hits the target count whenever
    // enough midpoints exist.
    let modeled = evaluate(&model, &basis, &candidates)?;
    let core_lo = block.core_min[s[2]];
    let core_hi = block.core_min[s[2]] + cfg.block_size;
    let mut valid: Vec<Point3> = candidates
        .iter()
        .zip(&modeled)
        .filter(|(_, &h)| h >= core_lo - CORE_SLACK && h <= core_hi + CORE_SLACK)
        .map(|(p, &h)| frame.from_frame([p[0], p[1], h]))
        .collect();

    let target =
        ((cfg.scale_factor - 1.0) * block.core_point_indices.len() as f64).round() as usize;
    if valid.len() > target {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked =
            rand::seq::index::sample(&mut rng, valid.len(), target).into_vec();
        picked.sort_unstable();
        valid = picked.into_iter().map(|i| valid[i]).collect();
    }

    Ok(Some(BlockGeometry {
        frame,
        model,
        new_points: valid,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::partition;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frame_round_trips() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let frame = AxisFrame { modeled_axis: axis };
            let p = [1.0, 2.0, 3.0];
            assert_eq!(frame.from_frame(frame.to_frame(p)), p);
            assert_eq!(frame.to_frame(frame.from_frame(p)), p);
        }
    }

    #[test]
    fn selects_smallest_variance_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<Point3> = (0..100)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.01..0.01),
                ]
            })
            .collect();
        let frame = select_axis(&points).unwrap();
        assert_eq!(frame.modeled_axis, Axis::Z);
    }

    #[test]
    fn plane_with_constant_x_maps_x_to_modeled() {
        let points: Vec<Point3> = (0..20)
            .map(|i| [0.3, (i % 5) as f64 * 0.1, (i / 5) as f64 * 0.1])
            .collect();
        let frame = select_axis(&points).unwrap();
        assert_eq!(frame.modeled_axis, Axis::X);
        // x maps to z'.
        let rotated = frame.to_frame([0.3, 0.1, 0.2]);
        assert_eq!(rotated[2], 0.3);
    }

    #[test]
    fn variance_matches_direct_computation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let points: Vec<Point3> = (0..200)
            .map(|_| {
                [
                    3.0 * rng.gen::<f64>(),
                    0.5 * rng.gen::<f64>(),
                    1.5 * rng.gen::<f64>(),
                ]
            })
            .collect();
        let var = axis_variances(&points).unwrap();
        for a in 0..3 {
            let mean: f64 = points.iter().map(|p| p[a]).sum::<f64>() / 200.0;
            let direct: f64 =
                points.iter().map(|p| (p[a] - mean).powi(2)).sum::<f64>() / 199.0;
            assert!((var[a] - direct).abs() < 1e-12);
        }
        let frame = select_axis(&points).unwrap();
        let min_axis = (0..3).min_by(|&a, &b| var[a].partial_cmp(&var[b]).unwrap()).unwrap();
        assert_eq!(frame.source_axes()[2], min_axis);
    }

    #[test]
    fn axis_tie_prefers_z_then_y() {
        let points = vec![[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]];
        let frame = select_axis(&points).unwrap();
        assert_eq!(frame.modeled_axis, Axis::Z);

        let points = vec![[0.0, 0.0, 0.0], [1.0, 1.0, 2.0]];
        let frame = select_axis(&points).unwrap();
        assert_eq!(frame.modeled_axis, Axis::Y);
    }

    #[test]
    fn degenerate_block_errors() {
        assert!(matches!(
            select_axis(&[[0.0, 0.0, 0.0]]),
            Err(FsuError::DegenerateBlock)
        ));
    }

    #[test]
    fn single_triangle_yields_three_midpoints() {
        let tri = delaunay2d(&[[0.1, 0.1], [0.9, 0.1], [0.5, 0.9]]).unwrap();
        let mids = new_planar_positions(&tri, [0.0, 0.0], [1.0, 1.0], usize::MAX, 0);
        assert_eq!(mids.len(), 3);
    }

    #[test]
    fn midpoints_outside_core_are_excluded() {
        // One vertex deep in the support margin: the two midpoints of its
        // edges land outside the core rectangle.
        let tri = delaunay2d(&[[0.45, 0.45], [0.55, 0.45], [1.4, 0.55]]).unwrap();
        let mids = new_planar_positions(&tri, [0.4, 0.4], [0.6, 0.6], usize::MAX, 0);
        assert_eq!(mids.len(), 1);
        assert!((mids[0][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shared_edges_produce_each_midpoint_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let points: Vec<[f64; 2]> = (0..60).map(|_| [rng.gen(), rng.gen()]).collect();
        let tri = delaunay2d(&points).unwrap();
        let mids = new_planar_positions(&tri, [0.0, 0.0], [1.0, 1.0], usize::MAX, 0);

        // Naive per-triangle enumeration with deduplication.
        let mut naive: Vec<[f64; 2]> = Vec::new();
        for t in &tri.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                let va = tri.vertices[a];
                let vb = tri.vertices[b];
                let mid = [0.5 * (va[0] + vb[0]), 0.5 * (va[1] + vb[1])];
                if !naive
                    .iter()
                    .any(|c| (c[0] - mid[0]).abs() <= 1e-9 && (c[1] - mid[1]).abs() <= 1e-9)
                {
                    naive.push(mid);
                }
            }
        }
        assert_eq!(mids.len(), naive.len());
        for mid in &mids {
            assert!(naive
                .iter()
                .any(|c| (c[0] - mid[0]).abs() <= 1e-9 && (c[1] - mid[1]).abs() <= 1e-9));
        }
    }

    #[test]
    fn subsample_is_seeded_and_sized() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let points: Vec<[f64; 2]> = (0..50).map(|_| [rng.gen(), rng.gen()]).collect();
        let tri = delaunay2d(&points).unwrap();
        let a = new_planar_positions(&tri, [0.0, 0.0], [1.0, 1.0], 10, 123);
        let b = new_planar_positions(&tri, [0.0, 0.0], [1.0, 1.0], 10, 123);
        let c = new_planar_positions(&tri, [0.0, 0.0], [1.0, 1.0], 10, 124);
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    fn block_cloud(points: Vec<Point3>, n: f64, m: f64) -> (PointCloud, Block) {
        let cloud = PointCloud::from_positions(points).unwrap();
        let blocks = partition(&cloud, n, m).unwrap();
        let block = blocks
            .into_iter()
            .max_by_key(|b| b.core_point_indices.len())
            .unwrap();
        (cloud, block)
    }

    #[test]
    fn constant_plane_block_emits_points_on_the_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let points: Vec<Point3> = (0..80)
            .map(|_| [rng.gen_range(0.2..0.4), rng.gen_range(0.2..0.4), 0.3])
            .collect();
        let (cloud, block) = block_cloud(points, 0.2, 0.05);
        let cfg = FsuConfig {
            block_size: 0.2,
            support_margin: 0.05,
            ..FsuConfig::default()
        };
        let out = upsample_block_geometry(&block, &cloud, &cfg)
            .unwrap()
            .unwrap();
        assert!(!out.new_points.is_empty());
        for p in &out.new_points {
            assert!((p[2] - 0.3).abs() < 1e-9, "height {}", p[2]);
        }
    }

    #[test]
    fn outputs_confined_to_core_cell_while_input_spans_support() {
        // Input spans the full expanded cell; outputs stay in the core.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut points = Vec::new();
        for _ in 0..150 {
            let x: f64 = rng.gen_range(0.355..0.645);
            let y: f64 = rng.gen_range(0.355..0.645);
            points.push([x, y, 0.5 + 0.02 * (8.0 * x).sin() * (7.0 * y).cos()]);
        }
        let cloud = PointCloud::from_positions(points).unwrap();
        let cfg = FsuConfig {
            block_size: 0.2,
            support_margin: 0.05,
            scale_factor: 4.0,
            ..FsuConfig::default()
        };
        let blocks = partition(&cloud, cfg.block_size, cfg.support_margin).unwrap();
        let block = blocks
            .into_iter()
            .find(|b| b.id == crate::partition::BlockId { x: 2, y: 2, z: 2 })
            .unwrap();
        let input_spans_support = block.support_point_indices.len()
            > block.core_point_indices.len();
        assert!(input_spans_support);

        let out = upsample_block_geometry(&block, &cloud, &cfg)
            .unwrap()
            .unwrap();
        assert!(!out.new_points.is_empty());
        for p in &out.new_points {
            for a in 0..3 {
                assert!(p[a] >= block.core_min[a] - 1e-9);
                assert!(p[a] <= block.core_min[a] + cfg.block_size + 1e-9);
            }
        }
        // No emitted point duplicates an original or another emitted point.
        for (i, p) in out.new_points.iter().enumerate() {
            for q in cloud.positions() {
                let d: f64 = (0..3).map(|a| (p[a] - q[a]).powi(2)).sum::<f64>().sqrt();
                assert!(d > 1e-9);
            }
            for q in &out.new_points[i + 1..] {
                let d: f64 = (0..3).map(|a| (p[a] - q[a]).powi(2)).sum::<f64>().sqrt();
                assert!(d > 1e-9);
            }
        }
    }

    #[test]
    fn sphere_patch_errors_stay_near_noise_floor() {
        // Samples of a sphere patch with radial noise: new points must stay
        // within twice the input's mean radial deviation.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let radius = 0.45;
        let noise = 1.5e-3;
        let mut points = Vec::new();
        for _ in 0..220 {
            // Patch around the +z pole.
            let theta = rng.gen_range(0.0..0.25f64);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = radius + rng.gen_range(-noise..noise);
            points.push([
                0.5 + r * theta.sin() * phi.cos(),
                0.5 + r * theta.sin() * phi.sin(),
                0.5 + r * theta.cos(),
            ]);
        }
        let cloud = PointCloud::from_positions(points).unwrap();
        let cfg = FsuConfig {
            block_size: 0.1,
            support_margin: 0.025,
            ..FsuConfig::default()
        };
        let blocks = partition(&cloud, cfg.block_size, cfg.support_margin).unwrap();

        let radial_error = |p: &Point3| -> f64 {
            let d = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2)).sqrt();
            (d - radius).abs()
        };
        let input_floor: f64 =
            cloud.positions().iter().map(radial_error).sum::<f64>() / cloud.len() as f64;

        let mut new_points = Vec::new();
        for block in &blocks {
            if let Some(out) = upsample_block_geometry(block, &cloud, &cfg).unwrap() {
                new_points.extend(out.new_points);
            }
        }
        assert!(new_points.len() > 50);
        let new_error: f64 =
            new_points.iter().map(radial_error).sum::<f64>() / new_points.len() as f64;
        assert!(
            new_error <= 2.0 * input_floor,
            "new {new_error} vs input floor {input_floor}"
        );
    }
}
