use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{ORTHONORMAL_TOL, RANK_TOL};

/// Orthonormal basis of a `k`-dimensional linear subspace of `R^D`.
///
/// The basis is stored column-wise in a `D x k` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    basis: DMatrix<f64>,
}

/// Split of a vector into coordinates along a frame and the norm of the
/// orthogonal remainder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub tangential: Vec<f64>,
    pub normal_norm: f64,
}

impl Frame {
    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal_columns(basis: DMatrix<f64>) -> Result<Self> {
        let k = basis.ncols();
        if k == 0 || k > basis.nrows() {
            return Err(Error::InvalidParams(format!(
                "frame dimension {k} must lie in 1..={}",
                basis.nrows()
            )));
        }
        let gram = basis.transpose() * &basis;
        let err = (gram - DMatrix::identity(k, k)).amax();
        if err > ORTHONORMAL_TOL {
            return Err(Error::InvalidParams(format!(
                "basis is not orthonormal (Gram error {err:.3e})"
            )));
        }
        Ok(Self { basis })
    }

    /// The span of the first `k` canonical axes of `R^D`.
    pub fn axes(ambient_dim: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= ambient_dim);
        Self {
            basis: DMatrix::identity(ambient_dim, k),
        }
    }

    /// Subspace dimension `k`.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, i: usize) -> Vec<f64> {
        self.basis.column(i).iter().copied().collect()
    }

    pub fn basis_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.basis_vector(i)).collect()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.ambient_dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: v.len(),
            })
        }
    }

    /// Coordinates of the orthogonal projection of `v` in the basis.
    pub fn coords(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v)?;
        Ok(self.coords_unchecked(v))
    }

    #[inline]
    pub(crate) fn coords_unchecked(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|c| self.basis.column(c).iter().zip(v).map(|(b, x)| b * x).sum())
            .collect()
    }

    /// Maps frame coordinates back to `R^D`.
    pub fn lift(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.dim());
        let mut out = vec![0.0; self.ambient_dim()];
        for (c, a) in coeffs.iter().enumerate() {
            for (o, b) in out.iter_mut().zip(self.basis.column(c).iter()) {
                *o += a * b;
            }
        }
        out
    }

    /// Orthogonal projection of `v` onto the subspace, in ambient coordinates.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.lift(&self.coords(v)?))
    }

    /// `D x D` orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Applies an ambient linear map to the basis and re-orthonormalizes.
    pub fn transformed(&self, q: &DMatrix<f64>) -> Result<Self> {
        let m = q * &self.basis;
        orthonormalize(&columns(&m))
    }
}

fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

/// Orthonormal basis spanning the same subspace as `vectors` (Gram-Schmidt).
///
/// Fails with [`Error::RankDeficient`] when the smallest singular value of the
/// input is below `1e-10` times the largest.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Result<Frame> {
    let k = vectors.len();
    let dim = vectors.first().map(Vec::len).ok_or(Error::EmptySet)?;
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    if k > dim {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let m = DMatrix::from_fn(dim, k, |r, c| vectors[c][r]);
    let sv = m.clone().svd(false, false).singular_values;
    let largest = sv.max();
    let smallest = sv.min();
    let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
    if !(ratio > RANK_TOL) {
        return Err(Error::RankDeficient { ratio });
    }
    let mut basis = m;
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for c in 0..k {
            for prev in 0..c {
                let proj = basis.column(prev).dot(&basis.column(c));
                let pc = basis.column(prev).clone_owned();
                basis.column_mut(c).axpy(-proj, &pc, 1.0);
            }
            let n = basis.column(c).norm();
            basis.column_mut(c).scale_mut(1.0 / n);
        }
    }
    Ok(Frame { basis })
}

/// Tangential coordinates of `v` in `frame` and the norm of its normal part.
pub fn decompose(frame: &Frame, v: &[f64]) -> Result<Decomposition> {
    let tangential = frame.coords(v)?;
    let recon = frame.lift(&tangential);
    let normal_norm = v
        .iter()
        .zip(&recon)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(Decomposition {
        tangential,
        normal_norm,
    })
}

/// Operator norm of the difference of the orthogonal projectors onto the two spans.
pub fn principal_angle(f1: &Frame, f2: &Frame) -> Result<f64> {
    if f1.ambient_dim() != f2.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.ambient_dim(),
            found: f2.ambient_dim(),
        });
    }
    let diff = f1.projector() - f2.projector();
    let eig = SymmetricEigen::new(diff);
    Ok(eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs())))
}

impl Serialize for Frame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.basis_vectors().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let vectors = Vec::<Vec<f64>>::deserialize(d)?;
        let dim = vectors.first().map(Vec::len).unwrap_or(0);
        let m = DMatrix::from_fn(dim, vectors.len(), |r, c| vectors[c][r]);
        Frame::from_orthonormal_columns(m).map_err(serde::de::Error::custom)
    }
}
