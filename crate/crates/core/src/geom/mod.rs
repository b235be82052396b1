//! Geometric substrate: point clouds, orthonormal frames, projections,
//! principal angles, Hausdorff distances and radius queries.

mod cloud;
mod frame;
mod hausdorff;
mod neighbors;

pub use cloud::PointCloud;
pub use frame::{decompose, orthonormalize, principal_angle, Decomposition, Frame};
pub use hausdorff::{directed_hausdorff, hausdorff};
pub use neighbors::{neighbors_within, NeighborIndex, DENSE_LIMIT};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
