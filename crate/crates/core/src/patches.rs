//! The boundary-adaptive estimator `M_hat`: tangential `d`-balls at inner points
//! and tangential half-balls, cut by the estimated outward normal, at boundary
//! observations. The estimator is never meshed; it is queried through exact
//! Euclidean distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::BoundaryResult;
use crate::error::{Error, Result};
use crate::geom::{decompose, dist, norm, Frame, PointCloud};
use crate::policy::NORMAL_DEGENERACY_TOL;
use crate::synth::SyntheticManifold;
use crate::tangent::TangentField;

/// `X_i + B_T(0, eps)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerPatch {
    pub index: usize,
    pub center: Vec<f64>,
    pub frame: Frame,
}

/// `{ z in X_i + B_T(0, eps) : <z - X_i, eta> <= 0 }`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPatch {
    pub index: usize,
    pub center: Vec<f64>,
    pub frame: Frame,
    pub normal: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchComplex {
    pub inner: Vec<InnerPatch>,
    pub boundary: Vec<BoundaryPatch>,
    pub eps_int: f64,
    pub eps_bd: f64,
}

/// Distance to the tangential ball of radius `eps`.
pub fn distance_to_inner_patch(z: &[f64], patch: &InnerPatch, eps: f64) -> Result<f64> {
    let diff = offset(z, &patch.center)?;
    let dec = decompose(&patch.frame, &diff)?;
    let excess = (norm(&dec.tangential) - eps).max(0.0);
    Ok(dec.normal_norm.hypot(excess))
}

/// Projects in-frame coordinates onto `B(0, eps) ∩ {<u, w> <= 0}`.
///
/// The ball is centered on the bounding hyperplane, so clipping to the halfspace
/// and then shrinking radially is the exact Euclidean projection.
pub fn project_half_ball(t: &[f64], w: &[f64], eps: f64) -> Result<Vec<f64>> {
    let wn = norm(w);
    if wn <= NORMAL_DEGENERACY_TOL {
        return Err(Error::DegenerateNormal);
    }
    let along = crate::geom::dot(t, w) / wn;
    let mut p: Vec<f64> = if along > 0.0 {
        t.iter().zip(w).map(|(a, b)| a - along * b / wn).collect()
    } else {
        t.to_vec()
    };
    let pn = norm(&p);
    if pn > eps {
        p.iter_mut().for_each(|v| *v *= eps / pn);
    }
    Ok(p)
}

/// Distance to the tangential half-ball of radius `eps`.
pub fn distance_to_boundary_patch(z: &[f64], patch: &BoundaryPatch, eps: f64) -> Result<f64> {
    let diff = offset(z, &patch.center)?;
    let dec = decompose(&patch.frame, &diff)?;
    let w = patch.frame.coords(&patch.normal)?;
    let p = project_half_ball(&dec.tangential, &w, eps)?;
    Ok(dec.normal_norm.hypot(dist(&dec.tangential, &p)))
}

fn offset(z: &[f64], center: &[f64]) -> Result<Vec<f64>> {
    if z.len() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            found: z.len(),
        });
    }
    Ok(z.iter().zip(center).map(|(a, b)| a - b).collect())
}

impl PatchComplex {
    /// Boundary half-balls at detected points with a usable normal; tangential
    /// balls at every point at least `eps_bd / 2` away from those.
    pub fn build(
        cloud: &PointCloud,
        tangents: &TangentField,
        boundary: &BoundaryResult,
        eps_int: f64,
        eps_bd: f64,
    ) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if tangents.len() != cloud.len() {
            return Err(Error::InvalidParams("tangent field does not match the cloud".into()));
        }
        if !(eps_int > 0.0) || !(eps_bd > 0.0) {
            return Err(Error::ParamsOutOfRange(format!(
                "patch radii must be positive, got eps_int = {eps_int}, eps_bd = {eps_bd}"
            )));
        }
        if eps_int > eps_bd / 6.0 {
            log::warn!("eps_int = {eps_int:.4} exceeds eps_bd / 6 = {:.4}", eps_bd / 6.0);
        }
        let mut patches = Vec::new();
        for (&i, eta) in boundary.detected.iter().zip(&boundary.normals) {
            let frame = &tangents.frames[i];
            if norm(&frame.coords(eta)?) <= NORMAL_DEGENERACY_TOL {
                log::warn!("point {i}: degenerate normal, demoted to an inner candidate");
                continue;
            }
            patches.push(BoundaryPatch {
                index: i,
                center: cloud.point(i).to_vec(),
                frame: frame.clone(),
                normal: eta.clone(),
            });
        }
        let inner = (0..cloud.len())
            .into_par_iter()
            .filter(|&i| {
                let p = cloud.point(i);
                patches.iter().all(|b| dist(p, &b.center) >= eps_bd / 2.0)
            })
            .map(|i| InnerPatch {
                index: i,
                center: cloud.point(i).to_vec(),
                frame: tangents.frames[i].clone(),
            })
            .collect();
        Ok(Self {
            inner,
            boundary: patches,
            eps_int,
            eps_bd,
        })
    }

    /// Tangential balls at every point: the estimator without boundary adaptation.
    pub fn all_inner(cloud: &PointCloud, tangents: &TangentField, eps_int: f64) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if tangents.len() != cloud.len() {
            return Err(Error::InvalidParams("tangent field does not match the cloud".into()));
        }
        Ok(Self {
            inner: (0..cloud.len())
                .map(|i| InnerPatch {
                    index: i,
                    center: cloud.point(i).to_vec(),
                    frame: tangents.frames[i].clone(),
                })
                .collect(),
            boundary: Vec::new(),
            eps_int,
            eps_bd: eps_int,
        })
    }

    pub fn len(&self) -> usize {
        self.inner.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `d(z, M_hat)`: the minimum over all patches.
    pub fn distance_to(&self, z: &[f64]) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyComplex);
        }
        let mut best = f64::INFINITY;
        for p in &self.inner {
            // the patch lies inside B(center, eps)
            if dist(z, &p.center) - self.eps_int >= best {
                continue;
            }
            best = best.min(distance_to_inner_patch(z, p, self.eps_int)?);
        }
        for p in &self.boundary {
            if dist(z, &p.center) - self.eps_bd >= best {
                continue;
            }
            best = best.min(distance_to_boundary_patch(z, p, self.eps_bd)?);
        }
        Ok(best)
    }

    /// `per_patch` uniform points inside every patch, deterministic per seed.
    pub fn sample(&self, per_patch: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(per_patch * self.len());
        let draw = |frame: &Frame, eps: f64, w: Option<&[f64]>, rng: &mut ChaCha8Rng| loop {
            let u: Vec<f64> = (0..frame.dim()).map(|_| rng.gen_range(-1.0..1.0) * eps).collect();
            if norm(&u) > eps {
                continue;
            }
            if let Some(w) = w {
                if crate::geom::dot(&u, w) > 0.0 {
                    continue;
                }
            }
            return frame.lift(&u);
        };
        for p in &self.inner {
            for _ in 0..per_patch {
                let v = draw(&p.frame, self.eps_int, None, &mut rng);
                out.push(p.center.iter().zip(&v).map(|(a, b)| a + b).collect());
            }
        }
        for p in &self.boundary {
            let w = p.frame.coords_unchecked(&p.normal);
            for _ in 0..per_patch {
                let v = draw(&p.frame, self.eps_bd, Some(&w), &mut rng);
                out.push(p.center.iter().zip(&v).map(|(a, b)| a + b).collect());
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let inner: Vec<serde_json::Value> = self
            .inner
            .iter()
            .map(|p| serde_json::json!({ "index": p.index, "center": p.center, "basis": p.frame.basis_vectors() }))
            .collect();
        let boundary: Vec<serde_json::Value> = self
            .boundary
            .iter()
            .map(|p| {
                serde_json::json!({
                    "index": p.index,
                    "center": p.center,
                    "basis": p.frame.basis_vectors(),
                    "normal": p.normal,
                })
            })
            .collect();
        serde_json::json!({
            "eps_int": self.eps_int,
            "eps_bd": self.eps_bd,
            "inner": inner,
            "boundary": boundary,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    #[serde(rename = "sup_M_to_Mhat")]
    pub sup_m_to_mhat: f64,
    #[serde(rename = "sup_Mhat_to_M")]
    pub sup_mhat_to_m: f64,
    /// Largest nearest-neighbor gap of the truth sample.
    pub truth_resolution: f64,
    pub m_truth: usize,
    pub per_patch: usize,
    pub eps_int: f64,
    pub eps_bd: f64,
}

impl HausdorffReport {
    pub fn hausdorff(&self) -> f64 {
        self.sup_m_to_mhat.max(self.sup_mhat_to_m)
    }
}

/// Both one-sided distances between `M` and the complex.
///
/// The `M` side is a uniform sample of `m_truth` points plus `m_truth / 10`
/// points spread along the boundary, where the estimator is least accurate.
pub fn hausdorff_to_truth(
    complex: &PatchComplex,
    manifold: &SyntheticManifold,
    m_truth: usize,
    per_patch: usize,
    seed: u64,
) -> Result<HausdorffReport> {
    if complex.is_empty() {
        return Err(Error::EmptyComplex);
    }
    let mut truth = manifold.sample_uniform(m_truth.max(1), seed)?.to_vecs();
    truth.extend(manifold.boundary_grid(m_truth / 10));
    let sup_m_to_mhat = truth
        .par_iter()
        .map(|z| complex.distance_to(z))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let samples = complex.sample(per_patch, seed.wrapping_add(1));
    let sup_mhat_to_m = samples
        .par_iter()
        .map(|z| manifold.distance_to(z))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let truth_resolution = truth
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            truth
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| dist(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|d| d.is_finite())
        .reduce(|| 0.0, f64::max);
    Ok(HausdorffReport {
        sup_m_to_mhat,
        sup_mhat_to_m,
        truth_resolution,
        m_truth,
        per_patch,
        eps_int: complex.eps_int,
        eps_bd: complex.eps_bd,
    })
}
