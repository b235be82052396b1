//! Smooth localized perturbation `Phi(x) = x + eta * phi((x - x0) / delta) * e1`
//! built on the bump `phi(y) = exp(-|y|^2 / (1 - |y|^2))` supported in the unit ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dist, norm};

/// Sup of `|d phi|` over the unit ball.
pub const PHI_GRAD_BOUND: f64 = 2.5;
/// Sup of `|d^2 phi|` over the unit ball.
pub const PHI_HESSIAN_BOUND: f64 = 23.0;

/// `phi(y)`, zero outside the open unit ball.
pub fn phi(y: &[f64]) -> f64 {
    let s: f64 = y.iter().map(|v| v * v).sum();
    if s >= 1.0 {
        0.0
    } else {
        (-s / (1.0 - s)).exp()
    }
}

/// Gradient of `phi`: `-2 phi(y) y / (1 - |y|^2)^2`.
pub fn grad_phi(y: &[f64]) -> Vec<f64> {
    let s: f64 = y.iter().map(|v| v * v).sum();
    if s >= 1.0 {
        return vec![0.0; y.len()];
    }
    let c = -2.0 * phi(y) / ((1.0 - s) * (1.0 - s));
    y.iter().map(|v| c * v).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpMap {
    pub eta: f64,
    pub delta: f64,
    pub x0: Vec<f64>,
    pub e1: Vec<f64>,
}

impl BumpMap {
    pub fn new(eta: f64, delta: f64, x0: Vec<f64>, e1: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidParams(format!(
                "bump needs delta > 0 and finite eta, got eta = {eta}, delta = {delta}"
            )));
        }
        if x0.len() != e1.len() {
            return Err(Error::DimensionMismatch {
                expected: x0.len(),
                found: e1.len(),
            });
        }
        let n = norm(&e1);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("e1 must be a unit vector, |e1| = {n}")));
        }
        Ok(Self { eta, delta, x0, e1 })
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    fn local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.x0).map(|(a, b)| (a - b) / self.delta).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        if dist(x, &self.x0) >= self.delta {
            return x.to_vec();
        }
        let h = self.eta * phi(&self.local(x));
        x.iter().zip(&self.e1).map(|(a, e)| a + h * e).collect()
    }

    /// Jacobian `I + (eta / delta) e1 grad_phi^T`, row-major.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let g = grad_phi(&self.local(x));
        let c = self.eta / self.delta;
        (0..self.dim())
            .map(|r| {
                (0..self.dim())
                    .map(|k| if r == k { 1.0 } else { 0.0 } + c * self.e1[r] * g[k])
                    .collect()
            })
            .collect()
    }

    /// `dPhi(x) v`.
    pub fn push_forward(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let g = grad_phi(&self.local(x));
        let c = self.eta / self.delta * g.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        v.iter().zip(&self.e1).map(|(a, e)| a + c * e).collect()
    }

    /// Solves `Phi(y) = x` by fixed-point iteration; converges when `|dPhi - I| < 1`.
    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for _ in 0..200 {
            let h = self.eta * phi(&self.local(&y));
            let next: Vec<f64> = x.iter().zip(&self.e1).map(|(a, e)| a - h * e).collect();
            let moved = dist(&next, &y);
            y = next;
            if moved <= 1e-16 * (1.0 + norm(x)) {
                break;
            }
        }
        y
    }

    /// Analytic bound on `|dPhi - I|`.
    pub fn differential_bound(&self) -> f64 {
        PHI_GRAD_BOUND * self.eta.abs() / self.delta
    }

    /// Analytic bound on `|d^2 Phi|`.
    pub fn hessian_bound(&self) -> f64 {
        PHI_HESSIAN_BOUND * self.eta.abs() / (self.delta * self.delta)
    }

    /// Whether the perturbation keeps reach at least `reach / 2`.
    pub fn is_admissible(&self, reach: f64) -> bool {
        self.differential_bound() <= 0.1 && self.hessian_bound() <= 1.0 / (2.0 * reach)
    }

    /// Central finite-difference estimate of `|dPhi(x) - I|` (operator norm).
    pub fn fd_differential_norm(&self, x: &[f64], step: f64) -> f64 {
        let jac = fd_jacobian(|p| self.apply(p), x, step);
        let dim = self.dim();
        let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| {
            jac[r][c] - if r == c { 1.0 } else { 0.0 }
        });
        m.singular_values().max()
    }

    /// Finite-difference estimate of `|d^2 Phi(x)|` as a bilinear map.
    pub fn fd_hessian_norm(&self, x: &[f64], step: f64) -> f64 {
        // Phi - id is eta * phi(.) * e1, so the bilinear form has rank-one range
        let local = self.local(x);
        let scale = self.eta.abs() / (self.delta * self.delta);
        scale * fd_hessian_opnorm(phi, &local, step / self.delta)
    }
}

/// Central-difference Jacobian of `f` at `x`, row-major.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], step: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += step;
        xm[k] -= step;
        let (fp, fm) = (f(&xp), f(&xm));
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect::<Vec<f64>>());
    }
    let m = cols[0].len();
    (0..m).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect()
}

/// Central-difference gradient operator norm of a scalar function.
pub fn fd_gradient_norm(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> f64 {
    let jac = fd_jacobian(|p| vec![f(p)], x, step);
    norm(&jac[0])
}

/// Central-difference Hessian spectral norm of a scalar function.
pub fn fd_hessian_opnorm(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> f64 {
    let n = x.len();
    let at = |dx: &[(usize, f64)]| {
        let mut p = x.to_vec();
        for &(k, s) in dx {
            p[k] += s;
        }
        f(&p)
    };
    let h = step;
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = if i == j {
                (at(&[(i, h)]) - 2.0 * at(&[]) + at(&[(i, -h)])) / (h * h)
            } else {
                (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                    + at(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h)
            };
        }
    }
    m.symmetric_eigenvalues().iter().fold(0.0f64, |a, v| a.max(v.abs()))
}
