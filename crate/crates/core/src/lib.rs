//! Boundary detection and boundary-adaptive reconstruction for point clouds
//! sampled from a `d`-dimensional manifold with boundary embedded in `R^D`.
//!
//! The pipeline runs in the following order:
//!
//! 1. [`tangent`]: local PCA tangent frames at every sample point.
//! 2. [`calibrate`]: data-driven bandwidth, localization scale and cell-width threshold.
//! 3. [`voronoi`] + [`detector`]: projected Voronoi cells, boundary observations,
//!    outward normals and boundary tangent frames.
//! 4. [`patches`]: the union of tangential balls and oriented half-balls approximating
//!    the manifold, with exact distance queries for Hausdorff evaluation.
//!
//! [`synth`] provides ground-truth manifolds with exact distance, tangent and normal
//! oracles, used by the test suites and the `boundarykit` binary.

pub mod calibrate;
pub mod cli;
pub mod detector;
pub mod error;
pub mod exec;
pub mod geom;
pub mod patches;
pub mod policy;
pub mod synth;
pub mod tangent;
pub mod voronoi;

pub use error::{Error, Result};
pub use exec::Exec;
pub use geom::{Decomposition, Frame, PointCloud};
