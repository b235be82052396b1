//! Numeric tolerances shared by every module.
//!
//! Operation-specific thresholds are named constants; generic comparisons go
//! through [`NumericPolicy`].

/// Orthonormality of frame bases (Gram matrix vs identity).
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Smallest-to-largest singular value ratio below which vectors count as dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Relative eigenvalue threshold for a degenerate or ambiguous PCA spectrum.
pub const SPECTRUM_TOL: f64 = 1e-12;

/// Threshold for the first nonzero component in the eigenvector sign convention.
pub const SIGN_TOL: f64 = 1e-12;

/// Absolute distance under which two Voronoi sites are merged.
pub const SITE_DEDUP_TOL: f64 = 1e-12;

/// Closed-comparison slack for the cell-width test `radius >= rho`.
pub const RHO_COMPARE_TOL: f64 = 1e-12;

/// Projected normals shorter than this are degenerate.
pub const NORMAL_DEGENERACY_TOL: f64 = 1e-9;

/// Maximum distance to the manifold for a point to count as lying on it.
pub const ON_MANIFOLD_TOL: f64 = 1e-6;

/// Relative and absolute tolerances for floating-point comparisons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericPolicy {
    pub rel: f64,
    pub abs: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            abs: 1e-12,
        }
    }
}

impl NumericPolicy {
    /// Tolerance for a quantity of magnitude `scale`.
    pub fn tol(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }

    pub fn approx_eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tol(a.abs().max(b.abs()))
    }
}
