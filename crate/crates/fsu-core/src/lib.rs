//! Frequency-selective upsampling of 3D point clouds.
//!
//! The cloud is normalized into the unit cube and partitioned into cubic
//! core blocks with an overlapped support margin. Per block, the surface is
//! fit as a sparse superposition of cosine basis functions over the two
//! least-varying axes, new positions are placed at Delaunay edge midpoints
//! inside the core cell, and the surface model is sampled there. A second
//! set of per-channel frequency models transfers colors to the new points
//! using the same planar projection. Reverse partitioning concatenates the
//! per-block results deterministically.
//!
//! The [`metrics`] module scores (test, reference) cloud pairs:
//! point-to-point and point-to-plane errors, plane-to-plane angular
//! similarity, per-channel color PSNR, and the luminance histogram distance.
//!
//! ```
//! use fsu_core::{upsample, FsuConfig};
//! use fsu_core::synthetic::sphere_cloud;
//!
//! let cloud = sphere_cloud(2000, [0.5; 3], 0.4, 1e-3, 42, true);
//! let cfg = FsuConfig {
//!     block_size: 0.1,
//!     support_margin: 0.025,
//!     ..FsuConfig::default()
//! };
//! let (upsampled, manifest) = upsample(&cloud, &cfg).unwrap();
//! assert!(upsampled.len() > cloud.len());
//! assert_eq!(manifest.points_out, upsampled.len());
//! ```

pub mod attrup;
pub mod cloud;
pub mod config;
pub mod delaunay;
pub mod error;
pub mod fsmodel;
pub mod geoup;
pub mod kdtree;
pub mod metrics;
pub mod partition;
pub mod pipeline;
pub mod ply;
pub mod synthetic;

pub use cloud::{denormalize, normalize, NormalizationTransform, Point3, PointCloud, Rgb};
pub use config::FsuConfig;
pub use error::{FsuError, Result};
pub use metrics::MetricsReport;
pub use pipeline::{attribute_protocol, upsample, AttributeProtocolReport, RunManifest};
