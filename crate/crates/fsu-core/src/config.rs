//! Pipeline configuration.

use serde::Serialize;

use crate::error::{FsuError, Result};

/// All tunables of the upsampling pipeline, in normalized (unit cube)
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FsuConfig {
    /// Core block edge length N.
    pub block_size: f64,
    /// Support margin M added around each core block on every side.
    pub support_margin: f64,
    /// Spectral decay factor: the selection prior on a basis with frequency
    /// pair `(k, l)` is `spectral_decay ^ sqrt(k^2 + l^2)`.
    pub spectral_decay: f64,
    /// Spatial decay factor: a sample at distance `unit_radius` from the
    /// block center is weighted by `spatial_decay`.
    pub spatial_decay: f64,
    /// Number of frequencies per axis; the candidate set is `{0..K-1}^2`.
    pub max_freq: usize,
    /// Iteration budget of the greedy model estimation.
    pub max_iterations: usize,
    /// Weighted residual energy at which estimation stops early.
    pub residual_threshold: f64,
    /// Target output/input point count ratio (>= 1).
    pub scale_factor: f64,
    /// Seed for all randomized steps (midpoint subsampling, protocol splits).
    pub seed: u64,
}

impl Default for FsuConfig {
    fn default() -> Self {
        Self {
            block_size: 0.02,
            support_margin: 0.005,
            spectral_decay: 0.8,
            spatial_decay: 0.7,
            max_freq: 8,
            max_iterations: 32,
            residual_threshold: 0.0,
            scale_factor: 4.0,
            seed: 0,
        }
    }
}

impl FsuConfig {
    /// Checks the value ranges every stage relies on.
    pub fn validate(&self) -> Result<()> {
        if !(self.block_size > 0.0 && self.block_size.is_finite()) {
            return Err(FsuError::InvalidConfig(format!(
                "block_size must be positive, got {}",
                self.block_size
            )));
        }
        if !(self.support_margin >= 0.0 && self.support_margin.is_finite()) {
            return Err(FsuError::InvalidConfig(format!(
                "support_margin must be nonnegative, got {}",
                self.support_margin
            )));
        }
        if !(self.spectral_decay > 0.0 && self.spectral_decay < 1.0) {
            return Err(FsuError::InvalidConfig(format!(
                "spectral_decay must lie in (0, 1), got {}",
                self.spectral_decay
            )));
        }
        if !(self.spatial_decay > 0.0 && self.spatial_decay <= 1.0) {
            return Err(FsuError::InvalidConfig(format!(
                "spatial_decay must lie in (0, 1], got {}",
                self.spatial_decay
            )));
        }
        if self.max_freq == 0 {
            return Err(FsuError::InvalidConfig("max_freq must be >= 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(FsuError::InvalidConfig(
                "max_iterations must be >= 1".into(),
            ));
        }
        if self.residual_threshold.is_nan() || self.residual_threshold < 0.0 {
            return Err(FsuError::InvalidConfig(format!(
                "residual_threshold must be nonnegative, got {}",
                self.residual_threshold
            )));
        }
        if !(self.scale_factor >= 1.0 && self.scale_factor.is_finite()) {
            return Err(FsuError::InvalidConfig(format!(
                "scale_factor must be >= 1, got {}",
                self.scale_factor
            )));
        }
        Ok(())
    }
}
