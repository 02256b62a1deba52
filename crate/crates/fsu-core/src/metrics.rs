//! Point cloud quality metrics.
//!
//! Geometry: point-to-point error (mean nearest-neighbor distance),
//! point-to-plane error (mean error projected on the reference normal), and
//! plane-to-plane angular similarity between per-point fitted plane normals.
//! Color: per-channel reconstruction PSNR over paired points, and the
//! Euclidean distance between normalized 256-bin luminance histograms, which
//! needs no point correspondence.

use serde::Serialize;

use crate::cloud::{Point3, PointCloud, Rgb};
use crate::error::{FsuError, Result};
use crate::kdtree::KdTree3;

/// Unit normals per point, from a plane fit over the k nearest neighbors.
#[derive(Debug, Clone)]
pub struct NormalField {
    pub normals: Vec<Point3>,
    pub neighborhood_size: usize,
}

/// Per-channel PSNR in dB; `f64::INFINITY` marks a zero-error channel.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ColorPsnr {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    /// Mean of the finite channels; infinite only when all three are.
    pub avg: f64,
}

/// Full metric report for a (test, reference) pair. Color metrics are
/// present only when both clouds carry colors; PSNR additionally requires
/// pointwise correspondence (equal lengths).
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub p2p: f64,
    pub p2c: f64,
    pub c2c: f64,
    pub psnr: Option<ColorPsnr>,
    pub hist_distance: Option<f64>,
    pub knn: usize,
}

/// Estimates one unit normal per point as the smallest principal direction
/// of the covariance over the point and its `k` nearest neighbors. Signs are
/// normalized to a nonnegative z component, ties toward +y then +x. A
/// degenerate neighborhood (zero covariance) falls back to (0, 0, 1).
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<NormalField> {
    if cloud.len() < k + 1 {
        return Err(FsuError::InvalidConfig(format!(
            "normal estimation needs at least k+1 = {} points, cloud has {}",
            k + 1,
            cloud.len()
        )));
    }
    let positions = cloud.positions();
    let tree = KdTree3::build(positions);

    let normals = positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let neighbors = tree.k_nearest(p, k, Some(i));
            let mut pts: Vec<Point3> = Vec::with_capacity(k + 1);
            pts.push(p);
            pts.extend(neighbors.iter().map(|&(j, _)| positions[j]));
            plane_normal(&pts)
        })
        .collect();

    Ok(NormalField {
        normals,
        neighborhood_size: k,
    })
}

fn plane_normal(points: &[Point3]) -> Point3 {
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
    let mut cov = [[0.0f64; 3]; 3];
    for p in points {
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] += d[a] * d[b];
            }
        }
    }
    let frobenius: f64 = cov.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if frobenius < 1e-300 {
        return [0.0, 0.0, 1.0];
    }

    let matrix = nalgebra::Matrix3::from_fn(|r, c| cov[r][c]);
    let eigen = nalgebra::SymmetricEigen::new(matrix);
    let mut smallest = 0;
    for i in 1..3 {
        if eigen.eigenvalues[i] < eigen.eigenvalues[smallest] {
            smallest = i;
        }
    }
    let v = eigen.eigenvectors.column(smallest);
    let mut normal = [v[0], v[1], v[2]];
    let norm = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
    if norm < 1e-300 {
        return [0.0, 0.0, 1.0];
    }
    for c in &mut normal {
        *c /= norm;
    }
    // Sign convention: nonnegative dot with +z, ties toward +y then +x.
    let flip = if normal[2] != 0.0 {
        normal[2] < 0.0
    } else if normal[1] != 0.0 {
        normal[1] < 0.0
    } else {
        normal[0] < 0.0
    };
    if flip {
        for c in &mut normal {
            *c = -*c;
        }
    }
    normal
}

/// Mean Euclidean distance from each test point to its nearest reference
/// point.
pub fn p2p_error(test: &PointCloud, reference: &PointCloud) -> Result<f64> {
    if test.is_empty() || reference.is_empty() {
        return Err(FsuError::EmptyInput);
    }
    let tree = KdTree3::build(reference.positions());
    let sum: f64 = test
        .positions()
        .iter()
        .map(|&p| tree.nearest(p).expect("nonempty reference").1.sqrt())
        .sum();
    Ok(sum / test.len() as f64)
}

/// Mean magnitude of the nearest-neighbor error vector projected onto the
/// reference point's normal.
pub fn p2c_error(
    test: &PointCloud,
    reference: &PointCloud,
    normals: &NormalField,
) -> Result<f64> {
    if test.is_empty() || reference.is_empty() {
        return Err(FsuError::EmptyInput);
    }
    if normals.normals.len() != reference.len() {
        return Err(FsuError::LengthMismatch {
            left: normals.normals.len(),
            right: reference.len(),
        });
    }
    let tree = KdTree3::build(reference.positions());
    let refs = reference.positions();
    let sum: f64 = test
        .positions()
        .iter()
        .map(|&p| {
            let (j, _) = tree.nearest(p).expect("nonempty reference");
            let q = refs[j];
            let n = normals.normals[j];
            ((p[0] - q[0]) * n[0] + (p[1] - q[1]) * n[1] + (p[2] - q[2]) * n[2]).abs()
        })
        .sum();
    Ok(sum / test.len() as f64)
}

/// Angle in [0, pi/2] between two unit vectors up to sign, via the
/// numerically stable `2 atan2(|u - v|, |u + v|)` form: exact for bitwise
/// equal inputs and accurate near 0, where `acos` of a rounded dot product
/// loses half the digits.
fn sign_invariant_angle(u: Point3, v: Point3) -> f64 {
    let diff = ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt();
    let sum = ((u[0] + v[0]).powi(2) + (u[1] + v[1]).powi(2) + (u[2] + v[2]).powi(2)).sqrt();
    2.0 * diff.min(sum).atan2(diff.max(sum))
}

/// Mean angular similarity `1 - 2*theta/pi` between the fitted plane normal
/// of each test point and that of its nearest reference point, with `theta`
/// the sign-invariant angle between the normals. Lies in [0, 1]; exactly 1
/// for identical clouds.
pub fn c2c_similarity(test: &PointCloud, reference: &PointCloud, k: usize) -> Result<f64> {
    let test_normals = estimate_normals(test, k)?;
    let ref_normals = estimate_normals(reference, k)?;
    let tree = KdTree3::build(reference.positions());
    let sum: f64 = test
        .positions()
        .iter()
        .zip(&test_normals.normals)
        .map(|(&p, &nt)| {
            let (j, _) = tree.nearest(p).expect("nonempty reference");
            let theta = sign_invariant_angle(nt, ref_normals.normals[j]);
            1.0 - 2.0 * theta / std::f64::consts::PI
        })
        .sum();
    Ok(sum / test.len() as f64)
}

/// Per-channel PSNR between paired colors: `10 log10(255^2 / MSE)`.
pub fn color_psnr(test: &[Rgb], truth: &[Rgb]) -> Result<ColorPsnr> {
    if test.len() != truth.len() {
        return Err(FsuError::LengthMismatch {
            left: test.len(),
            right: truth.len(),
        });
    }
    if test.is_empty() {
        return Err(FsuError::EmptyInput);
    }
    let mut channel_psnr = [0.0f64; 3];
    for c in 0..3 {
        let sq: f64 = test
            .iter()
            .zip(truth)
            .map(|(a, b)| {
                let d = a[c] as f64 - b[c] as f64;
                d * d
            })
            .sum();
        let mse = sq / test.len() as f64;
        channel_psnr[c] = if mse > 0.0 {
            10.0 * (255.0f64 * 255.0 / mse).log10()
        } else {
            f64::INFINITY
        };
    }
    let finite: Vec<f64> = channel_psnr.iter().copied().filter(|v| v.is_finite()).collect();
    let avg = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    Ok(ColorPsnr {
        r: channel_psnr[0],
        g: channel_psnr[1],
        b: channel_psnr[2],
        avg,
    })
}

/// Normalized 256-bin histogram of the luminance `Y = 0.299 R + 0.587 G +
/// 0.114 B`, rounded to [0, 255].
pub fn luminance_histogram(colors: &[Rgb]) -> [f64; 256] {
    let mut hist = [0.0f64; 256];
    for c in colors {
        let y = 0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64;
        let bin = y.round().clamp(0.0, 255.0) as usize;
        hist[bin] += 1.0;
    }
    if !colors.is_empty() {
        let total = colors.len() as f64;
        for h in &mut hist {
            *h /= total;
        }
    }
    hist
}

/// Euclidean distance between the normalized luminance histograms of two
/// color sets. Needs no point correspondence.
pub fn histogram_distance_colors(test: &[Rgb], reference: &[Rgb]) -> f64 {
    let a = luminance_histogram(test);
    let b = luminance_histogram(reference);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Histogram distance between two colored clouds.
pub fn histogram_distance(test: &PointCloud, reference: &PointCloud) -> Result<f64> {
    let a = test.colors().ok_or(FsuError::MissingColors)?;
    let b = reference.colors().ok_or(FsuError::MissingColors)?;
    Ok(histogram_distance_colors(a, b))
}

/// Runs the full metric suite on a (test, reference) pair.
pub fn report(test: &PointCloud, reference: &PointCloud, knn: usize) -> Result<MetricsReport> {
    let p2p = p2p_error(test, reference)?;
    let ref_normals = estimate_normals(reference, knn)?;
    let p2c = p2c_error(test, reference, &ref_normals)?;
    let c2c = c2c_similarity(test, reference, knn)?;
    let psnr = match (test.colors(), reference.colors()) {
        (Some(a), Some(b)) if a.len() == b.len() => Some(color_psnr(a, b)?),
        _ => None,
    };
    let hist_distance = if test.has_colors() && reference.has_colors() {
        Some(histogram_distance(test, reference)?)
    } else {
        None
    };
    Ok(MetricsReport {
        p2p,
        p2c,
        c2c,
        psnr,
        hist_distance,
        knn,
    })
}
