//! Local PCA tangent frames.
//!
//! The local covariance at `X_i` is
//! `(1 / (n - 1)) * sum_{j != i, |X_j - X_i| <= h} (X_j - X_i)(X_j - X_i)^T`.
//! Note the normalization by `n - 1` over the whole sample, not by the number of
//! neighbors inside the ball. It does not change the eigenvectors but it does
//! change the reported eigenvalues.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{first_error, Exec};
use crate::geom::{dist2, Frame, PointCloud};
use crate::policy::{SIGN_TOL, SPECTRUM_TOL};

/// Estimated tangent frame at one point with the full descending spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentEstimate {
    pub frame: Frame,
    pub eigenvalues: Vec<f64>,
    pub neighbor_count: usize,
}

/// Tangent frames for every point of a cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    pub frames: Vec<Frame>,
    pub eigenvalues: Vec<Vec<f64>>,
    pub bandwidth: f64,
    /// Points inside `B(X_i, h)`, excluding `X_i`.
    pub neighbor_counts: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    index: usize,
    basis: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

impl TangentField {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Builds a field from externally known frames (e.g. exact tangents).
    pub fn from_frames(frames: Vec<Frame>) -> Self {
        let n = frames.len();
        Self {
            frames,
            eigenvalues: vec![Vec::new(); n],
            bandwidth: 0.0,
            neighbor_counts: vec![0; n],
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let records: Vec<FrameRecord> = self
            .frames
            .iter()
            .zip(&self.eigenvalues)
            .enumerate()
            .map(|(index, (f, ev))| FrameRecord {
                index,
                basis: f.basis_vectors(),
                eigenvalues: ev.clone(),
            })
            .collect();
        serde_json::to_value(records).expect("frame records serialize")
    }
}

/// The local covariance matrix `Sigma_i(h)`; zero when the ball holds no other point.
pub fn local_covariance(cloud: &PointCloud, i: usize, h: f64) -> Result<DMatrix<f64>> {
    cloud.check_index(i)?;
    Ok(covariance_and_count(cloud, i, h).0)
}

fn covariance_and_count(cloud: &PointCloud, i: usize, h: f64) -> (DMatrix<f64>, usize) {
    let dim = cloud.ambient_dim();
    let n = cloud.len();
    let xi = cloud.point(i);
    let mut acc = DMatrix::<f64>::zeros(dim, dim);
    let mut count = 0;
    let mut diff = vec![0.0; dim];
    for (j, xj) in cloud.points().enumerate() {
        if j == i || dist2(xj, xi).sqrt() > h {
            continue;
        }
        count += 1;
        for (d, (a, b)) in diff.iter_mut().zip(xj.iter().zip(xi)) {
            *d = a - b;
        }
        for r in 0..dim {
            for c in r..dim {
                acc[(r, c)] += diff[r] * diff[c];
            }
        }
    }
    for r in 0..dim {
        for c in 0..r {
            acc[(r, c)] = acc[(c, r)];
        }
    }
    if n > 1 {
        acc /= (n - 1) as f64;
    }
    (acc, count)
}

/// Eigenpairs of a symmetric matrix in descending order, each eigenvector
/// signed so that its first component above `1e-12` in magnitude is positive.
pub fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let dim = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (c, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).clone_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > SIGN_TOL) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(c, &v);
    }
    (values, vectors)
}

/// Span of the top-`d` eigenvectors of `Sigma_i(h)`.
pub fn estimate_tangent(cloud: &PointCloud, i: usize, h: f64, d: usize) -> Result<TangentEstimate> {
    cloud.check_index(i)?;
    if !(h > 0.0) {
        return Err(Error::ParamsOutOfRange(format!("bandwidth h = {h} must be positive")));
    }
    let dim = cloud.ambient_dim();
    if d == 0 || d > dim {
        return Err(Error::ParamsOutOfRange(format!("d = {d} must lie in 1..={dim}")));
    }
    let (cov, count) = covariance_and_count(cloud, i, h);
    if count < d {
        return Err(Error::InsufficientNeighbors {
            index: i,
            found: count,
            required: d,
        });
    }
    let (eigenvalues, vectors) = sorted_eigen(cov);
    let top = eigenvalues[0];
    let ld = eigenvalues[d - 1];
    let degenerate = !(ld > SPECTRUM_TOL * top)
        || (d < dim && ld - eigenvalues[d] <= SPECTRUM_TOL * ld.abs());
    if degenerate {
        return Err(Error::DegenerateSpectrum {
            index: i,
            eigenvalues,
        });
    }
    let frame = Frame::from_orthonormal_columns(vectors.columns(0, d).clone_owned())?;
    Ok(TangentEstimate {
        frame,
        eigenvalues,
        neighbor_count: count,
    })
}

/// Tangent frames at every point. The failing index is attached to errors.
pub fn estimate_all_tangents(cloud: &PointCloud, h: f64, d: usize) -> Result<TangentField> {
    estimate_all_tangents_with(cloud, h, d, Exec::Parallel)
}

pub fn estimate_all_tangents_with(
    cloud: &PointCloud,
    h: f64,
    d: usize,
    exec: Exec,
) -> Result<TangentField> {
    let results = exec.map(cloud.len(), |i| {
        estimate_tangent(cloud, i, h, d).map_err(|e| e.at(i))
    });
    let estimates = first_error(results)?;
    let mut field = TangentField {
        frames: Vec::with_capacity(estimates.len()),
        eigenvalues: Vec::with_capacity(estimates.len()),
        bandwidth: h,
        neighbor_counts: Vec::with_capacity(estimates.len()),
    };
    for e in estimates {
        field.frames.push(e.frame);
        field.eigenvalues.push(e.eigenvalues);
        field.neighbor_counts.push(e.neighbor_count);
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{orthonormalize, principal_angle};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(n: usize, dim: usize, d: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
            .collect();
        PointCloud::new(pts, d).unwrap()
    }

    #[test]
    fn two_point_covariance() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 1).unwrap();
        let m = local_covariance(&cloud, 0, 2.0).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let zero = local_covariance(&cloud, 0, 0.5).unwrap();
        assert_eq!(zero, DMatrix::zeros(2, 2));
    }

    #[test]
    fn covariance_matches_direct_sum() {
        let cloud = random_cloud(10, 3, 2, 3);
        for (i, h) in [(0, 0.3), (4, 0.7), (9, 2.0)] {
            let mut oracle = [[0.0f64; 3]; 3];
            let xi = cloud.point(i);
            for j in 0..10 {
                if j == i {
                    continue;
                }
                let xj = cloud.point(j);
                let dd: f64 = (0..3).map(|k| (xj[k] - xi[k]).powi(2)).sum();
                if dd.sqrt() <= h {
                    for r in 0..3 {
                        for c in 0..3 {
                            oracle[r][c] += (xj[r] - xi[r]) * (xj[c] - xi[c]) / 9.0;
                        }
                    }
                }
            }
            let got = local_covariance(&cloud, i, h).unwrap();
            for r in 0..3 {
                for c in 0..3 {
                    assert_abs_diff_eq!(got[(r, c)], oracle[r][c], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn collinear_points_give_the_axis() {
        let cloud = PointCloud::new((0..6).map(|i| vec![i as f64 * 0.3, 0.0]).collect(), 1).unwrap();
        let est = estimate_tangent(&cloud, 2, 1.0, 1).unwrap();
        assert_eq!(principal_angle(&est.frame, &Frame::axes(2, 1)).unwrap(), 0.0);
        assert_eq!(est.frame.basis_vector(0), vec![1.0, 0.0]);
    }

    #[test]
    fn coplanar_points_give_the_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = (0..30).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>(), 0.0]).collect();
        let cloud = PointCloud::new(pts, 2).unwrap();
        let est = estimate_tangent(&cloud, 0, 0.8, 2).unwrap();
        assert!(principal_angle(&est.frame, &Frame::axes(3, 2)).unwrap() <= 1e-9);
        assert!(est.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn error_paths() {
        let single = PointCloud::new(vec![vec![0.0, 0.0]], 1).unwrap();
        let err = estimate_all_tangents(&single, 1.0, 1).unwrap_err();
        assert!(matches!(err, Error::InsufficientNeighbors { index: 0, .. }));

        // two identical offsets along one line cannot span a plane
        let line = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]], 2).unwrap();
        assert!(matches!(
            estimate_tangent(&line, 1, 1.5, 2),
            Err(Error::DegenerateSpectrum { index: 1, .. })
        ));

        // symmetric cross: equal variance along both axes, d = 1 is ambiguous
        let cross = PointCloud::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            1,
        )
        .unwrap();
        assert!(matches!(
            estimate_tangent(&cross, 0, 1.5, 1),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn flat_disk_grid_in_space() {
        let tilt = orthonormalize(&[vec![1.0, 0.0, 0.5], vec![0.0, 1.0, -0.25]]).unwrap();
        let mut pts = Vec::new();
        for a in -10..=10 {
            for b in -10..=10 {
                let (u, v) = (a as f64 * 0.1, b as f64 * 0.1);
                if u * u + v * v <= 1.0 {
                    pts.push(tilt.lift(&[u, v]));
                }
            }
        }
        let cloud = PointCloud::new(pts, 2).unwrap();
        let field = estimate_all_tangents(&cloud, 0.25, 2).unwrap();
        for f in &field.frames {
            assert!(principal_angle(f, &tilt).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let cloud = random_cloud(300, 3, 2, 9);
        let a = estimate_all_tangents_with(&cloud, 0.35, 2, Exec::Serial).unwrap();
        let b = estimate_all_tangents_with(&cloud, 0.35, 2, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
