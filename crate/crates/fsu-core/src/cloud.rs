//! Point cloud storage and coordinate normalization.
//!
//! A [`PointCloud`] holds 3D positions and, optionally, one 8-bit RGB color
//! per point. Positions are processed as `f64` throughout; colors cross the
//! API boundary as integers in `[0, 255]` and are only converted to reals
//! inside the model fitting loops.
//!
//! [`normalize`] maps a cloud into the unit cube with a single uniform scale
//! for all three axes, so angles and nearest-neighbor ordering are preserved.

use serde::Serialize;

use crate::error::{FsuError, Result};

/// 3D position.
pub type Point3 = [f64; 3];

/// 8-bit RGB color.
pub type Rgb = [u8; 3];

/// An ordered set of 3D points with optional per-point RGB attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    positions: Vec<Point3>,
    colors: Option<Vec<Rgb>>,
}

impl PointCloud {
    /// Builds a cloud, validating that all coordinates are finite and that
    /// `colors`, when present, has exactly one entry per position.
    pub fn new(positions: Vec<Point3>, colors: Option<Vec<Rgb>>) -> Result<Self> {
        for (i, p) in positions.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(FsuError::NonFiniteCoordinate(i));
            }
        }
        if let Some(c) = &colors {
            if c.len() != positions.len() {
                return Err(FsuError::LengthMismatch {
                    left: positions.len(),
                    right: c.len(),
                });
            }
        }
        Ok(Self { positions, colors })
    }

    /// Builds a colorless cloud.
    pub fn from_positions(positions: Vec<Point3>) -> Result<Self> {
        Self::new(positions, None)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn has_colors(&self) -> bool {
        self.colors.is_some()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn colors(&self) -> Option<&[Rgb]> {
        self.colors.as_deref()
    }

    /// Axis-aligned bounding box as `(min, max)`.
    ///
    /// Errors on an empty cloud.
    pub fn bounding_box(&self) -> Result<(Point3, Point3)> {
        if self.is_empty() {
            return Err(FsuError::EmptyInput);
        }
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in &self.positions {
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        Ok((min, max))
    }
}

/// The affine map `p -> (p - offset) / scale` taking a cloud into the unit
/// cube, with one uniform scale for all axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationTransform {
    pub offset: Point3,
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        Self {
            offset: [0.0; 3],
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        [
            (p[0] - self.offset[0]) / self.scale,
            (p[1] - self.offset[1]) / self.scale,
            (p[2] - self.offset[2]) / self.scale,
        ]
    }

    pub fn invert(&self, p: Point3) -> Point3 {
        [
            p[0] * self.scale + self.offset[0],
            p[1] * self.scale + self.offset[1],
            p[2] * self.scale + self.offset[2],
        ]
    }
}

/// Maps a cloud into `[0, 1]^3` with a uniform scale: the offset is the
/// per-axis minimum and the scale is the largest axis extent. A degenerate
/// cloud (all points coincident) keeps scale 1.
pub fn normalize(cloud: &PointCloud) -> Result<(PointCloud, NormalizationTransform)> {
    let (min, max) = cloud.bounding_box()?;
    let extent = (0..3).map(|a| max[a] - min[a]).fold(0.0_f64, f64::max);
    let scale = if extent > 0.0 { extent } else { 1.0 };
    let transform = NormalizationTransform { offset: min, scale };
    let positions = cloud
        .positions()
        .iter()
        .map(|&p| transform.apply(p))
        .collect();
    let normalized = PointCloud::new(positions, cloud.colors().map(|c| c.to_vec()))?;
    Ok((normalized, transform))
}

/// Inverse of [`normalize`]: maps unit-cube coordinates back into the
/// original frame. Colors pass through untouched.
pub fn denormalize(cloud: &PointCloud, transform: &NormalizationTransform) -> PointCloud {
    let positions = cloud
        .positions()
        .iter()
        .map(|&p| transform.invert(p))
        .collect();
    PointCloud {
        positions,
        colors: cloud.colors().map(|c| c.to_vec()),
    }
}
