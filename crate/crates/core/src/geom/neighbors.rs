use super::{cloud::PointCloud, dist2};
use crate::error::Result;

/// Largest cloud for which [`NeighborIndex`] precomputes the full distance matrix.
pub const DENSE_LIMIT: usize = 20_000;

/// Indices `j` with `|X_j - X_center| <= radius`, in ascending order.
///
/// Brute-force scan; the center itself is always included.
pub fn neighbors_within(cloud: &PointCloud, center: usize, radius: f64) -> Result<Vec<usize>> {
    cloud.check_index(center)?;
    let c = cloud.point(center);
    Ok(cloud
        .points()
        .enumerate()
        .filter(|(j, p)| *j == center || dist2(p, c).sqrt() <= radius)
        .map(|(j, _)| j)
        .collect())
}

/// Radius queries with an optional precomputed distance matrix.
///
/// The matrix is built once (when requested and `n <= limit`) and is read-only
/// afterwards, so the index can be shared across threads.
pub struct NeighborIndex<'a> {
    cloud: &'a PointCloud,
    dense: Option<Vec<f64>>,
}

impl<'a> NeighborIndex<'a> {
    pub fn brute_force(cloud: &'a PointCloud) -> Self {
        Self { cloud, dense: None }
    }

    /// Precomputes all pairwise distances when the cloud has at most `limit` points.
    pub fn with_matrix(cloud: &'a PointCloud, limit: usize) -> Self {
        let n = cloud.len();
        let dense = (n <= limit.min(DENSE_LIMIT)).then(|| {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = dist2(cloud.point(i), cloud.point(j)).sqrt();
                    m[i * n + j] = d;
                    m[j * n + i] = d;
                }
            }
            m
        });
        Self { cloud, dense }
    }

    pub fn has_matrix(&self) -> bool {
        self.dense.is_some()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match &self.dense {
            Some(m) => m[i * self.cloud.len() + j],
            None => dist2(self.cloud.point(i), self.cloud.point(j)).sqrt(),
        }
    }

    pub fn within(&self, center: usize, radius: f64) -> Result<Vec<usize>> {
        self.cloud.check_index(center)?;
        match &self.dense {
            None => neighbors_within(self.cloud, center, radius),
            Some(m) => {
                let n = self.cloud.len();
                let row = &m[center * n..(center + 1) * n];
                Ok((0..n)
                    .filter(|&j| j == center || row[j] <= radius)
                    .collect())
            }
        }
    }
}
