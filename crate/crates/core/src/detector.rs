//! Boundary observations, outward normals and boundary tangent frames.
//!
//! `X_i` is a boundary observation when, for some `X_j` with `|X_i - X_j| <= r`,
//! the projection of `X_i - X_j` onto `T_j` has a Voronoi cell of radius at
//! least `rho` among the projected neighbors `B(X_j, R0)`. Each such witness `j`
//! contributes the unit direction from the projected site to the farthest cell
//! vertex, lifted back to the ambient space.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{first_error, Exec};
use crate::geom::{dist, NeighborIndex, PointCloud};
use crate::geom::Frame;
use crate::policy::{NORMAL_DEGENERACY_TOL, RHO_COMPARE_TOL};
use crate::tangent::TangentField;
use crate::voronoi::{cell_probe, project_local_cloud};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    #[serde(rename = "R0")]
    pub r0: f64,
    pub r: f64,
    pub rho: f64,
    pub h: f64,
}

impl DetectionParams {
    pub fn new(r0: f64, r: f64, rho: f64, h: f64) -> Result<Self> {
        let p = Self { r0, r, rho, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ParamsOutOfRange(msg));
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return bad(format!("R0 = {} must be positive", self.r0));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return bad(format!("r = {} must be nonnegative", self.r));
        }
        if !(self.rho > 0.0) || self.rho > 2.0 * self.r0 {
            return bad(format!("rho = {} must lie in (0, 2 R0 = {}]", self.rho, 2.0 * self.r0));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return bad(format!("h = {} must be positive", self.h));
        }
        Ok(())
    }

    /// Half-width of the box that clips unbounded cells.
    pub fn clip(&self) -> f64 {
        4.0 * self.r0
    }

    pub fn rho_minus(&self) -> f64 {
        self.r0 / 4.0
    }

    pub fn rho_plus(&self) -> f64 {
        self.r0 / 2.0
    }

    pub fn r_plus(&self) -> f64 {
        self.r0 / 12.0
    }

    /// Lower end of the admissible `r` range, `sqrt(tau * eps2)` with
    /// `eps2 = r0 * (c_d log n / (f_min n r0^d))^(2 / (d + 1))` and `r0 = R0 / 4`.
    pub fn r_minus(&self, tau: f64, n: usize, d: usize, f_min: f64, c_d: f64) -> f64 {
        let r0 = self.rho_minus();
        let nf = n as f64;
        let inner = c_d * nf.ln() / (f_min * nf * r0.powi(d as i32));
        let eps2 = r0 * inner.powf(2.0 / (d as f64 + 1.0));
        (tau * eps2).sqrt()
    }
}

/// One witness `j` of a boundary observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub radius: f64,
    /// Unit normal in the ambient space, lying in `T_j`.
    pub normal: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryResult {
    pub params: DetectionParams,
    /// Detected indices, ascending.
    pub detected: Vec<usize>,
    /// Witnesses of each detected point (aligned with `detected`), ascending in `j`.
    pub witnesses: Vec<Vec<Witness>>,
    /// Mean of the witness normals, not renormalized (aligned with `detected`).
    pub normals: Vec<Vec<f64>>,
    /// Boundary tangent frames (aligned with `detected`); `None` when `d = 1`
    /// or when the mean normal has a vanishing tangential part.
    pub boundary_frames: Vec<Option<Frame>>,
    /// Radius of each point's own projected cell (`j = i`).
    pub probe_radii: Vec<f64>,
    /// Whether each own cell stayed inside the clip box.
    pub probe_bounded: Vec<bool>,
}

impl BoundaryResult {
    pub fn len(&self) -> usize {
        self.detected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detected.is_empty()
    }

    pub fn is_detected(&self, i: usize) -> bool {
        self.detected.binary_search(&i).is_ok()
    }

    /// Detected indices whose mean normal is too short to orient anything.
    pub fn degenerate(&self) -> Vec<usize> {
        self.detected
            .iter()
            .zip(&self.normals)
            .filter(|(_, n)| crate::geom::norm(n) <= NORMAL_DEGENERACY_TOL)
            .map(|(&i, _)| i)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let normals: Vec<serde_json::Value> = self
            .detected
            .iter()
            .zip(&self.normals)
            .map(|(i, eta)| serde_json::json!({ "index": i, "eta": eta }))
            .collect();
        let frames: Vec<serde_json::Value> = self
            .detected
            .iter()
            .zip(&self.boundary_frames)
            .map(|(i, f)| {
                serde_json::json!({
                    "index": i,
                    "basis": f.as_ref().map(Frame::basis_vectors),
                })
            })
            .collect();
        let witnesses: Vec<serde_json::Value> = self
            .detected
            .iter()
            .zip(&self.witnesses)
            .map(|(i, w)| serde_json::json!({ "index": i, "witnesses": w }))
            .collect();
        serde_json::json!({
            "params": self.params,
            "detected": self.detected,
            "normals": normals,
            "boundary_frames": frames,
            "witnesses": witnesses,
            "probe_radii": self.probe_radii,
        })
    }

    /// Flat table `index,is_boundary,rho_i,eta_0..eta_{D-1}`; normals are blank
    /// for points that were not detected.
    pub fn write_csv<W: Write>(&self, writer: W, ambient_dim: usize) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["index".to_string(), "is_boundary".into(), "rho_i".into()];
        header.extend((0..ambient_dim).map(|k| format!("eta_{k}")));
        w.write_record(&header)?;
        let mut next = 0;
        for (i, rho) in self.probe_radii.iter().enumerate() {
            let mut row = vec![i.to_string(), String::new(), rho.to_string()];
            if self.detected.get(next) == Some(&i) {
                row[1] = "1".into();
                row.extend(self.normals[next].iter().map(f64::to_string));
                next += 1;
            } else {
                row[1] = "0".into();
                row.extend(std::iter::repeat(String::new()).take(ambient_dim));
            }
            w.write_record(&row)?;
        }
        w.flush()
    }

    pub fn save(&self, json_path: &Path, csv_path: &Path, ambient_dim: usize) -> Result<()> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::Io { path, source }
        };
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(json_path, text).map_err(io(json_path))?;
        let file = std::fs::File::create(csv_path).map_err(io(csv_path))?;
        self.write_csv(std::io::BufWriter::new(file), ambient_dim)
            .map_err(io(csv_path))
    }
}

/// Orthogonal complement of `pi_T(normal)` inside `T`.
///
/// Returns `Ok(None)` for one-dimensional frames, where the complement is `{0}`.
pub fn boundary_tangent(frame: &Frame, normal: &[f64]) -> Result<Option<Frame>> {
    let c = frame.coords(normal)?;
    let cn = crate::geom::norm(&c);
    if cn <= NORMAL_DEGENERACY_TOL {
        return Err(Error::DegenerateNormal);
    }
    let k = frame.dim();
    if k == 1 {
        return Ok(None);
    }
    let mut basis: Vec<Vec<f64>> = vec![c.iter().map(|x| x / cn).collect()];
    // canonical axes least aligned with the normal come first
    let mut axes: Vec<usize> = (0..k).collect();
    axes.sort_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs()));
    for a in axes {
        if basis.len() == k {
            break;
        }
        let mut v = vec![0.0; k];
        v[a] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let p = crate::geom::dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let vn = crate::geom::norm(&v);
        if vn > 1e-6 {
            basis.push(v.iter().map(|x| x / vn).collect());
        }
    }
    let lifted: Vec<Vec<f64>> = basis[1..].iter().map(|v| frame.lift(v)).collect();
    let m = nalgebra::DMatrix::from_fn(frame.ambient_dim(), k - 1, |r, col| lifted[col][r]);
    Frame::from_orthonormal_columns(m).map(Some)
}

fn check_inputs(cloud: &PointCloud, tangents: &TangentField) -> Result<()> {
    if tangents.len() != cloud.len() {
        return Err(Error::InvalidParams(format!(
            "tangent field has {} frames for {} points",
            tangents.len(),
            cloud.len()
        )));
    }
    for f in &tangents.frames {
        if f.dim() != cloud.intrinsic_dim() || f.ambient_dim() != cloud.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: cloud.intrinsic_dim(),
                found: f.dim(),
            });
        }
    }
    Ok(())
}

/// Probe outcome of `X_i` seen from the frame of `X_j`.
struct PairProbe {
    i: usize,
    radius: f64,
    bounded: bool,
    normal: Option<Vec<f64>>,
}

/// Probes, in the frame of `X_j`, the cells of every `X_i` with `|X_i - X_j| <= r`.
fn probe_from(
    cloud: &PointCloud,
    index: &NeighborIndex<'_>,
    frame: &Frame,
    j: usize,
    params: &DetectionParams,
) -> Result<Vec<PairProbe>> {
    let local = project_local_cloud(cloud, j, frame, params.r0)?;
    let candidates = if params.r > 0.0 {
        index.within(j, params.r)?
    } else {
        vec![j]
    };
    let mut out = Vec::with_capacity(candidates.len());
    for i in candidates {
        let probe = match local.position_of(i) {
            Some(p) => cell_probe(&local.sites, p, params.clip())?,
            None => {
                // r > R0: X_i is not among the projected neighbors of X_j
                let offset: Vec<f64> = cloud
                    .point(i)
                    .iter()
                    .zip(cloud.point(j))
                    .map(|(a, b)| a - b)
                    .collect();
                let mut sites = local.sites.clone();
                sites.push(frame.coords_unchecked(&offset));
                cell_probe(&sites, sites.len() - 1, params.clip())?
            }
        };
        let normal = probe.direction.as_ref().map(|d| frame.lift(d));
        out.push(PairProbe {
            i,
            radius: probe.radius,
            bounded: probe.bounded,
            normal,
        });
    }
    Ok(out)
}

pub fn detect(cloud: &PointCloud, tangents: &TangentField, params: &DetectionParams) -> Result<BoundaryResult> {
    detect_with(cloud, tangents, params, Exec::default())
}

pub fn detect_with(
    cloud: &PointCloud,
    tangents: &TangentField,
    params: &DetectionParams,
    exec: Exec,
) -> Result<BoundaryResult> {
    params.validate()?;
    check_inputs(cloud, tangents)?;
    let n = cloud.len();
    let index = NeighborIndex::brute_force(cloud);
    let per_j = first_error(exec.map(n, |j| {
        probe_from(cloud, &index, &tangents.frames[j], j, params).map_err(|e| e.at(j))
    }))?;

    let mut probe_radii = vec![0.0; n];
    let mut probe_bounded = vec![true; n];
    let mut found: Vec<Vec<Witness>> = vec![Vec::new(); n];
    for (j, probes) in per_j.into_iter().enumerate() {
        for p in probes {
            if p.i == j {
                probe_radii[j] = p.radius;
                probe_bounded[j] = p.bounded;
            }
            if p.radius >= params.rho - RHO_COMPARE_TOL {
                if let Some(normal) = p.normal {
                    found[p.i].push(Witness {
                        index: j,
                        radius: p.radius,
                        normal,
                    });
                }
            }
        }
    }

    let mut detected = Vec::new();
    let mut witnesses = Vec::new();
    let mut normals = Vec::new();
    let mut boundary_frames = Vec::new();
    for (i, w) in found.into_iter().enumerate() {
        if w.is_empty() {
            continue;
        }
        let dim = cloud.ambient_dim();
        let mut eta = vec![0.0; dim];
        for wit in &w {
            eta.iter_mut().zip(&wit.normal).for_each(|(a, b)| *a += b);
        }
        eta.iter_mut().for_each(|a| *a /= w.len() as f64);
        let frame = match boundary_tangent(&tangents.frames[i], &eta) {
            Ok(f) => f,
            Err(Error::DegenerateNormal) => {
                log::warn!("point {i}: conflicting witness normals, mean normal vanishes");
                None
            }
            Err(e) => return Err(e.at(i)),
        };
        detected.push(i);
        witnesses.push(w);
        normals.push(eta);
        boundary_frames.push(frame);
    }
    Ok(BoundaryResult {
        params: *params,
        detected,
        witnesses,
        normals,
        boundary_frames,
        probe_radii,
        probe_bounded,
    })
}

/// Self-probe radius of every point (`r = 0`), used to calibrate `rho`.
pub fn probe_radii(cloud: &PointCloud, tangents: &TangentField, r0: f64, exec: Exec) -> Result<Vec<f64>> {
    check_inputs(cloud, tangents)?;
    if !(r0 > 0.0) {
        return Err(Error::ParamsOutOfRange(format!("R0 = {r0} must be positive")));
    }
    first_error(exec.map(cloud.len(), |j| {
        let local = project_local_cloud(cloud, j, &tangents.frames[j], r0).map_err(|e| e.at(j))?;
        cell_probe(&local.sites, local.center, 4.0 * r0)
            .map(|p| p.radius)
            .map_err(|e| e.at(j))
    }))
}

/// Greedy farthest-point sampling from index 0.
///
/// Stops once every point lies within `eps` of the selection, so the output is
/// an `eps`-covering whose points are pairwise more than `eps` apart.
pub fn sparsify<P: AsRef<[f64]>>(points: &[P], eps: f64) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(eps > 0.0) {
        return Err(Error::ParamsOutOfRange(format!("eps = {eps} must be positive")));
    }
    let mut selected = vec![0];
    let mut gap: Vec<f64> = points.iter().map(|p| dist(p.as_ref(), points[0].as_ref())).collect();
    loop {
        let (far, &d) = gap
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| if *cur.1 > *best.1 { cur } else { best });
        if d <= eps {
            return Ok(selected);
        }
        selected.push(far);
        let anchor = points[far].as_ref();
        for (g, p) in gap.iter_mut().zip(points) {
            *g = g.min(dist(p.as_ref(), anchor));
        }
    }
}

#[cfg(test)]
mod tests;
