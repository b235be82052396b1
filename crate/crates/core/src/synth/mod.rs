//! Ground-truth manifolds with uniform samplers and exact geometric oracles.
//!
//! | kind           | d | D | boundary                 |
//! |----------------|---|---|--------------------------|
//! | segment        | 1 | 2 | two endpoints            |
//! | circle         | 1 | 2 | none                     |
//! | sphere         | 2 | 3 | none                     |
//! | spiral         | 1 | 3 | two endpoints            |
//! | annulus        | 2 | 2 | two circles              |
//! | half_sphere    | 2 | 3 | equator `x = 0`          |
//! | moebius        | 2 | 3 | one closed curve         |
//! | bumped_sphere  | 2 | 3 | none                     |
//! | bumped_ball    | 2 | 2 | bumped unit circle       |
//!
//! Curves and surfaces without closed-form projections (spiral, Möbius strip,
//! bumped kinds) answer nearest-point queries by a dense parameter grid followed
//! by local refinement; see [`nearest`].

pub mod bump;
pub mod nearest;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bump::BumpMap;
use nearest::{curve_nearest, surface_nearest, ChartPoint, GRID_NODES};

use crate::error::{Error, Result};
use crate::geom::{dist, dot, norm, orthonormalize, Frame, PointCloud};
use crate::policy::ON_MANIFOLD_TOL;

/// Reach of the spiral `(cos t, sin t, t/3)`, `t in [0, 5 pi]`.
///
/// Certified numerically from the pair formula `|y - x|^2 / (2 d(y - x, T_x))`
/// on a 6001-node parameter grid. Self-proximity across turns lowers it below
/// the curvature radius `10/9`.
pub const SPIRAL_REACH: f64 = 0.9916;
/// Reach of the Möbius strip, certified on an 81 x 721 parameter grid.
pub const MOEBIUS_REACH: f64 = 2.1244;
/// Reach of the Möbius strip's boundary curve, certified on 8000 nodes.
pub const MOEBIUS_BOUNDARY_REACH: f64 = 1.0;

const SPIRAL_END: f64 = 5.0 * PI;
const MOEBIUS_RADIUS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Segment,
    Circle,
    Sphere,
    Spiral,
    Annulus,
    HalfSphere,
    Moebius,
    BumpedSphere,
    BumpedBall,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Segment,
        Kind::Circle,
        Kind::Sphere,
        Kind::Spiral,
        Kind::Annulus,
        Kind::HalfSphere,
        Kind::Moebius,
        Kind::BumpedSphere,
        Kind::BumpedBall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Segment => "segment",
            Kind::Circle => "circle",
            Kind::Sphere => "sphere",
            Kind::Spiral => "spiral",
            Kind::Annulus => "annulus",
            Kind::HalfSphere => "half_sphere",
            Kind::Moebius => "moebius",
            Kind::BumpedSphere => "bumped_sphere",
            Kind::BumpedBall => "bumped_ball",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidParams(format!("unknown manifold kind `{s}`")))
    }
}

/// Shape parameters of a synthetic manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Segment { length: f64 },
    Circle { radius: f64 },
    Sphere { radius: f64 },
    Spiral,
    Annulus { inner: f64, outer: f64 },
    HalfSphere,
    Moebius,
    BumpedSphere { bump: BumpMap },
    BumpedBall { bump: BumpMap },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticManifold {
    shape: Shape,
}

impl SyntheticManifold {
    /// The kind with its default parameters.
    pub fn new(kind: Kind) -> Self {
        let shape = match kind {
            Kind::Segment => Shape::Segment { length: 1.0 },
            Kind::Circle => Shape::Circle { radius: 1.0 },
            Kind::Sphere => Shape::Sphere { radius: 1.0 },
            Kind::Spiral => Shape::Spiral,
            Kind::Annulus => Shape::Annulus {
                inner: 0.4,
                outer: 1.0,
            },
            Kind::HalfSphere => Shape::HalfSphere,
            Kind::Moebius => Shape::Moebius,
            Kind::BumpedSphere => Shape::BumpedSphere {
                bump: default_bump(3),
            },
            Kind::BumpedBall => Shape::BumpedBall {
                bump: default_bump(2),
            },
        };
        Self { shape }
    }

    pub fn from_shape(shape: Shape) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        match &shape {
            Shape::Segment { length } => positive("length", *length)?,
            Shape::Circle { radius } | Shape::Sphere { radius } => positive("radius", *radius)?,
            Shape::Annulus { inner, outer } => {
                positive("inner radius", *inner)?;
                if !(outer > inner) || !outer.is_finite() {
                    return Err(Error::InvalidParams(format!(
                        "annulus needs inner < outer, got {inner} and {outer}"
                    )));
                }
            }
            Shape::BumpedSphere { bump } => check_bump(bump, 3)?,
            Shape::BumpedBall { bump } => check_bump(bump, 2)?,
            Shape::Spiral | Shape::HalfSphere | Shape::Moebius => {}
        }
        Ok(Self { shape })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind(&self) -> Kind {
        match self.shape {
            Shape::Segment { .. } => Kind::Segment,
            Shape::Circle { .. } => Kind::Circle,
            Shape::Sphere { .. } => Kind::Sphere,
            Shape::Spiral => Kind::Spiral,
            Shape::Annulus { .. } => Kind::Annulus,
            Shape::HalfSphere => Kind::HalfSphere,
            Shape::Moebius => Kind::Moebius,
            Shape::BumpedSphere { .. } => Kind::BumpedSphere,
            Shape::BumpedBall { .. } => Kind::BumpedBall,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self.kind() {
            Kind::Segment | Kind::Circle | Kind::Spiral => 1,
            _ => 2,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind() {
            Kind::Segment | Kind::Circle | Kind::Annulus | Kind::BumpedBall => 2,
            _ => 3,
        }
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self.kind(), Kind::Circle | Kind::Sphere | Kind::BumpedSphere)
    }

    /// Reach of `M` (infinite for convex sets). Bumped kinds report the
    /// guaranteed lower bound for admissible perturbations.
    pub fn reach_manifold(&self) -> f64 {
        match &self.shape {
            Shape::Segment { .. } | Shape::BumpedBall { .. } => f64::INFINITY,
            Shape::Circle { radius } | Shape::Sphere { radius } => *radius,
            Shape::Spiral => SPIRAL_REACH,
            Shape::Annulus { inner, .. } => *inner,
            Shape::HalfSphere => 1.0,
            Shape::Moebius => MOEBIUS_REACH,
            Shape::BumpedSphere { .. } => 0.5,
        }
    }

    /// Reach of `∂M`; infinite when the boundary is empty.
    pub fn reach_boundary(&self) -> f64 {
        match &self.shape {
            Shape::Segment { length } => length / 2.0,
            Shape::Circle { .. } | Shape::Sphere { .. } | Shape::BumpedSphere { .. } => {
                f64::INFINITY
            }
            Shape::Spiral => dist(&spiral(0.0), &spiral(SPIRAL_END)) / 2.0,
            // the circle halfway between the two boundary circles is medial
            Shape::Annulus { inner, outer } => inner.min((outer - inner) / 2.0),
            Shape::HalfSphere => 1.0,
            Shape::Moebius => MOEBIUS_BOUNDARY_REACH,
            Shape::BumpedBall { .. } => 0.5,
        }
    }

    /// `min(reach_manifold, reach_boundary)`.
    pub fn reach_min(&self) -> f64 {
        self.reach_manifold().min(self.reach_boundary())
    }

    /// d-dimensional volume (length or area).
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Segment { length } => *length,
            Shape::Circle { radius } => TAU * radius,
            Shape::Sphere { radius } => 2.0 * TAU * radius * radius,
            Shape::Spiral => SPIRAL_END * (1.0f64 + 1.0 / 9.0).sqrt(),
            Shape::Annulus { inner, outer } => PI * (outer * outer - inner * inner),
            Shape::HalfSphere => TAU,
            Shape::Moebius => midpoint_quadrature(|u, t| moebius_area_element(u, t), [-1.0, 1.0], [0.0, TAU], 400),
            Shape::BumpedSphere { bump } => {
                // z = cos(polar angle) is uniform for the area measure of the sphere
                let f = |z: f64, t: f64| {
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    let y = [s * t.cos(), s * t.sin(), z];
                    sphere_area_factor(bump, &y)
                };
                midpoint_quadrature(f, [-1.0, 1.0], [0.0, TAU], 600)
            }
            Shape::BumpedBall { bump } => {
                let f = |r: f64, t: f64| {
                    let y = [r * t.cos(), r * t.sin()];
                    r * det2(&bump.jacobian(&y))
                };
                midpoint_quadrature(f, [0.0, 1.0], [0.0, TAU], 600)
            }
        }
    }

    /// Sidecar metadata: kind, parameters, dimensions and reaches.
    pub fn describe(&self) -> serde_json::Value {
        let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
        serde_json::json!({
            "kind": self.kind().name(),
            "params": self.shape,
            "intrinsic_dim": self.intrinsic_dim(),
            "ambient_dim": self.ambient_dim(),
            "has_boundary": self.has_boundary(),
            "reach_manifold": finite(self.reach_manifold()),
            "reach_boundary": finite(self.reach_boundary()),
            "volume": self.volume(),
        })
    }

    fn check_dim(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: z.len(),
            });
        }
        Ok(())
    }

    fn check_on_manifold(&self, x: &[f64]) -> Result<()> {
        let d = self.distance_to(x)?;
        if d > ON_MANIFOLD_TOL {
            return Err(Error::OutsideDomain { distance: d });
        }
        Ok(())
    }

    /// `n` i.i.d. points, uniform for the d-dimensional volume measure.
    pub fn sample_uniform(&self, n: usize, seed: u64) -> Result<PointCloud> {
        if n == 0 {
            return Err(Error::InvalidParams("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| self.draw(&mut rng)).collect();
        PointCloud::new(points, self.intrinsic_dim())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match &self.shape {
            Shape::Segment { length } => vec![rng.gen::<f64>() * length, 0.0],
            Shape::Circle { radius } => {
                let t = rng.gen::<f64>() * TAU;
                vec![radius * t.cos(), radius * t.sin()]
            }
            Shape::Sphere { radius } => unit_sphere(rng).iter().map(|x| x * radius).collect(),
            Shape::Spiral => spiral(rng.gen::<f64>() * SPIRAL_END),
            Shape::Annulus { inner, outer } => {
                let (a2, b2) = (inner * inner, outer * outer);
                let r = (a2 + (b2 - a2) * rng.gen::<f64>()).sqrt();
                let t = rng.gen::<f64>() * TAU;
                vec![r * t.cos(), r * t.sin()]
            }
            Shape::HalfSphere => {
                let mut x = unit_sphere(rng);
                x[0] = x[0].abs();
                x
            }
            Shape::Moebius => {
                // |du x dt| <= |du| |dt| <= sqrt(1/4 + 16)
                let bound = (0.25f64 + 16.0).sqrt();
                loop {
                    let u = rng.gen::<f64>() * 2.0 - 1.0;
                    let t = rng.gen::<f64>() * TAU;
                    if rng.gen::<f64>() * bound <= moebius_area_element(u, t) {
                        return moebius(u, t);
                    }
                }
            }
            Shape::BumpedSphere { bump } => {
                let bound = (1.0 + bump.differential_bound()).powi(2);
                loop {
                    let y = unit_sphere(rng);
                    if rng.gen::<f64>() * bound <= sphere_area_factor(bump, &y) {
                        return bump.apply(&y);
                    }
                }
            }
            Shape::BumpedBall { bump } => {
                let bound = (1.0 + bump.differential_bound()).powi(2);
                loop {
                    let y = [rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0];
                    if y[0] * y[0] + y[1] * y[1] > 1.0 {
                        continue;
                    }
                    if rng.gen::<f64>() * bound <= det2(&bump.jacobian(&y)) {
                        return bump.apply(&y);
                    }
                }
            }
        }
    }

    /// Euclidean distance from `z` to `M`.
    pub fn distance_to(&self, z: &[f64]) -> Result<f64> {
        self.check_dim(z)?;
        Ok(match &self.shape {
            Shape::Segment { length } => {
                let t = z[0].clamp(0.0, *length);
                dist(z, &[t, 0.0])
            }
            Shape::Circle { radius } | Shape::Sphere { radius } => (norm(z) - radius).abs(),
            Shape::Spiral => spiral_nearest(z, GRID_NODES).1,
            Shape::Annulus { inner, outer } => {
                let r = norm(z);
                (r - outer).max(inner - r).max(0.0)
            }
            Shape::HalfSphere => {
                if z[0] >= 0.0 {
                    (norm(z) - 1.0).abs()
                } else {
                    equator_distance(z)
                }
            }
            Shape::Moebius => moebius_nearest(z, GRID_NODES).1,
            Shape::BumpedSphere { bump } => bumped_sphere_nearest(bump, z, GRID_NODES).1,
            Shape::BumpedBall { bump } => {
                if norm(&bump.inverse(z)) <= 1.0 {
                    0.0
                } else {
                    bumped_circle_nearest(bump, z, GRID_NODES).1
                }
            }
        })
    }

    /// Euclidean distance from a point of `M` to `∂M` (infinite when `∂M` is empty).
    pub fn distance_to_boundary(&self, x: &[f64]) -> Result<f64> {
        self.check_on_manifold(x)?;
        Ok(match &self.shape {
            Shape::Segment { length } => norm(x).min(dist(x, &[*length, 0.0])),
            Shape::Circle { .. } | Shape::Sphere { .. } | Shape::BumpedSphere { .. } => {
                f64::INFINITY
            }
            Shape::Spiral => dist(x, &spiral(0.0)).min(dist(x, &spiral(SPIRAL_END))),
            Shape::Annulus { inner, outer } => {
                let r = norm(x);
                (outer - r).abs().min((r - inner).abs())
            }
            Shape::HalfSphere => equator_distance(x),
            Shape::Moebius => moebius_boundary_nearest(x, GRID_NODES).1,
            Shape::BumpedBall { bump } => bumped_circle_nearest(bump, x, GRID_NODES).1,
        })
    }

    /// Tangent space at a point of `M`.
    pub fn exact_tangent(&self, x: &[f64]) -> Result<Frame> {
        self.check_on_manifold(x)?;
        match &self.shape {
            Shape::Segment { .. } => Ok(Frame::axes(2, 1)),
            Shape::Circle { .. } => orthonormalize(&[vec![-x[1], x[0]]]),
            Shape::Sphere { .. } | Shape::HalfSphere => orthonormalize(&sphere_tangents(x)),
            Shape::Spiral => orthonormalize(&[spiral_velocity(spiral_nearest(x, GRID_NODES).0)]),
            Shape::Annulus { .. } | Shape::BumpedBall { .. } => Ok(Frame::axes(2, 2)),
            Shape::Moebius => {
                let ([u, t], _) = moebius_nearest(x, GRID_NODES);
                let c = moebius_chart([u, t]);
                orthonormalize(&[c.du, c.dv])
            }
            Shape::BumpedSphere { bump } => {
                let y = bump.inverse(x);
                let y: Vec<f64> = y.iter().map(|v| v / norm(&y)).collect();
                let pushed: Vec<Vec<f64>> = sphere_tangents(&y)
                    .iter()
                    .map(|t| bump.push_forward(&y, t))
                    .collect();
                orthonormalize(&pushed)
            }
        }
    }

    /// Unit outward normal at the boundary point nearest to `x`.
    pub fn exact_outward_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_on_manifold(x)?;
        if !self.has_boundary() {
            return Err(Error::InvalidParams(format!("{} has no boundary", self.kind())));
        }
        let unit = |v: Vec<f64>| -> Vec<f64> {
            let n = norm(&v);
            v.iter().map(|a| a / n).collect()
        };
        Ok(match &self.shape {
            Shape::Segment { length } => {
                if x[0] < length / 2.0 {
                    vec![-1.0, 0.0]
                } else {
                    vec![1.0, 0.0]
                }
            }
            Shape::Spiral => {
                if dist(x, &spiral(0.0)) <= dist(x, &spiral(SPIRAL_END)) {
                    unit(spiral_velocity(0.0).iter().map(|v| -v).collect())
                } else {
                    unit(spiral_velocity(SPIRAL_END))
                }
            }
            Shape::Annulus { inner, outer } => {
                let r = norm(x);
                let sign = if r - inner < outer - r { -1.0 } else { 1.0 };
                x.iter().map(|v| sign * v / r).collect()
            }
            Shape::HalfSphere => vec![-1.0, 0.0, 0.0],
            Shape::Moebius => {
                let (s, _) = moebius_boundary_nearest(x, GRID_NODES);
                let c = moebius_chart([1.0, s]);
                let t = unit(c.dv);
                let along = dot(&c.du, &t);
                unit(c.du.iter().zip(&t).map(|(a, b)| a - along * b).collect())
            }
            Shape::BumpedBall { bump } => {
                let (t, _) = bumped_circle_nearest(bump, x, GRID_NODES);
                let y = [t.cos(), t.sin()];
                let v = bump.push_forward(&y, &[-t.sin(), t.cos()]);
                unit(vec![v[1], -v[0]])
            }
            Shape::Circle { .. } | Shape::Sphere { .. } | Shape::BumpedSphere { .. } => {
                unreachable!("boundaryless kinds return early")
            }
        })
    }

    /// `m` points spread evenly along `∂M` (empty when there is no boundary).
    pub fn boundary_grid(&self, m: usize) -> Vec<Vec<f64>> {
        let circle = |count: usize, r: f64| -> Vec<Vec<f64>> {
            (0..count)
                .map(|k| {
                    let t = TAU * k as f64 / count as f64;
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect()
        };
        match &self.shape {
            Shape::Segment { length } => vec![vec![0.0, 0.0], vec![*length, 0.0]],
            Shape::Spiral => vec![spiral(0.0), spiral(SPIRAL_END)],
            Shape::Circle { .. } | Shape::Sphere { .. } | Shape::BumpedSphere { .. } => Vec::new(),
            Shape::Annulus { inner, outer } => {
                let mut pts = circle(m / 2, *outer);
                pts.extend(circle(m - m / 2, *inner));
                pts
            }
            Shape::HalfSphere => circle(m, 1.0)
                .into_iter()
                .map(|p| vec![0.0, p[0], p[1]])
                .collect(),
            Shape::Moebius => (0..m)
                .map(|k| moebius(1.0, 2.0 * TAU * k as f64 / m as f64))
                .collect(),
            Shape::BumpedBall { bump } => circle(m, 1.0).iter().map(|p| bump.apply(p)).collect(),
        }
    }
}

fn default_bump(dim: usize) -> BumpMap {
    let mut x0 = vec![0.0; dim];
    x0[0] = 1.0;
    // 5 eta / (2 delta) = 0.025 and 23 eta / delta^2 = 0.46: within the reach-stability regime
    BumpMap::new(0.005, 0.5, x0.clone(), x0).expect("valid default bump")
}

fn check_bump(bump: &BumpMap, dim: usize) -> Result<()> {
    if bump.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bump.dim(),
        });
    }
    if (norm(&bump.x0) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams("bump center must lie on the unit sphere".into()));
    }
    if bump.delta >= 1.0 {
        return Err(Error::InvalidParams("bump width must be below 1".into()));
    }
    if bump.differential_bound() >= 1.0 {
        return Err(Error::InvalidParams("bump is not a diffeomorphism (|dPhi - I| >= 1)".into()));
    }
    if !bump.is_admissible(1.0) {
        log::warn!(
            "bump outside the reach-stability regime: |dPhi - I| <= {:.3}, |d2Phi| <= {:.3}",
            bump.differential_bound(),
            bump.hessian_bound()
        );
    }
    Ok(())
}

fn midpoint_quadrature(f: impl Fn(f64, f64) -> f64, a: [f64; 2], b: [f64; 2], n: usize) -> f64 {
    let (ha, hb) = ((a[1] - a[0]) / n as f64, (b[1] - b[0]) / n as f64);
    let mut total = 0.0;
    for i in 0..n {
        let x = a[0] + (i as f64 + 0.5) * ha;
        for j in 0..n {
            total += f(x, b[0] + (j as f64 + 0.5) * hb);
        }
    }
    total * ha * hb
}

fn det2(m: &[Vec<f64>]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn unit_sphere(rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let n = norm(&v);
        if n > 1e-6 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Two independent tangent vectors of the sphere at `x`.
fn sphere_tangents(x: &[f64]) -> Vec<Vec<f64>> {
    let n: Vec<f64> = x.iter().map(|v| v / norm(x)).collect();
    let k = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .expect("three axes");
    let mut e = vec![0.0; 3];
    e[k] = 1.0;
    let t1: Vec<f64> = e.iter().zip(&n).map(|(a, b)| a - n[k] * b).collect();
    let t2 = cross(&n, &t1);
    vec![t1, t2]
}

/// Area distortion of the bump restricted to the unit sphere's tangent plane at `y`.
fn sphere_area_factor(bump: &BumpMap, y: &[f64]) -> f64 {
    let ts = sphere_tangents(y);
    let t1: Vec<f64> = ts[0].iter().map(|v| v / norm(&ts[0])).collect();
    let t2: Vec<f64> = ts[1].iter().map(|v| v / norm(&ts[1])).collect();
    let (a, b) = (bump.push_forward(y, &t1), bump.push_forward(y, &t2));
    norm(&cross(&a, &b))
}

fn equator_distance(z: &[f64]) -> f64 {
    let rho = (z[1] * z[1] + z[2] * z[2]).sqrt();
    (z[0] * z[0] + (rho - 1.0) * (rho - 1.0)).sqrt()
}

fn spiral(t: f64) -> Vec<f64> {
    vec![t.cos(), t.sin(), t / 3.0]
}

fn spiral_velocity(t: f64) -> Vec<f64> {
    vec![-t.sin(), t.cos(), 1.0 / 3.0]
}

fn spiral_nearest(z: &[f64], nodes: usize) -> (f64, f64) {
    let (t, d2) = curve_nearest(|t| crate::geom::dist2(&spiral(t), z), 0.0, SPIRAL_END, false, nodes);
    (t, d2.sqrt())
}

fn moebius(u: f64, t: f64) -> Vec<f64> {
    let w = u * (t / 2.0).cos() + MOEBIUS_RADIUS;
    vec![w * t.cos(), w * t.sin(), u * (t / 2.0).sin()]
}

fn moebius_chart(p: [f64; 2]) -> ChartPoint {
    let [u, t] = p;
    let (c2, s2) = ((t / 2.0).cos(), (t / 2.0).sin());
    let w = u * c2 + MOEBIUS_RADIUS;
    ChartPoint {
        point: moebius(u, t),
        du: vec![c2 * t.cos(), c2 * t.sin(), s2],
        dv: vec![
            -u * s2 / 2.0 * t.cos() - w * t.sin(),
            -u * s2 / 2.0 * t.sin() + w * t.cos(),
            u * c2 / 2.0,
        ],
    }
}

fn moebius_area_element(u: f64, t: f64) -> f64 {
    let c = moebius_chart([u, t]);
    norm(&cross(&c.du, &c.dv))
}

/// Nearest point on the strip; returns `([u, t], distance)`.
fn moebius_nearest(z: &[f64], nodes: usize) -> ([f64; 2], f64) {
    // a 1 : 4 grid aspect matches the strip's width to circumference ratio
    let nu = ((nodes as f64 / 4.0).sqrt().round() as usize).max(2);
    let nt = (nodes / nu).max(4);
    let grid: Vec<[f64; 2]> = (0..nu)
        .flat_map(|i| {
            (0..nt).map(move |j| [-1.0 + 2.0 * i as f64 / (nu - 1) as f64, TAU * j as f64 / nt as f64])
        })
        .collect();
    surface_nearest(moebius_chart, |p| [p[0].clamp(-1.0, 1.0), p[1]], &grid, z)
}

/// Nearest point on the boundary curve `s -> moebius(1, s)`, `s in [0, 4 pi)`.
fn moebius_boundary_nearest(z: &[f64], nodes: usize) -> (f64, f64) {
    let (s, d2) = curve_nearest(|s| crate::geom::dist2(&moebius(1.0, s), z), 0.0, 2.0 * TAU, true, nodes);
    (s, d2.sqrt())
}

/// Nearest point on the bumped unit sphere; returns `(point, distance)`.
fn bumped_sphere_nearest(bump: &BumpMap, z: &[f64], nodes: usize) -> (Vec<f64>, f64) {
    let x0 = &bump.x0;
    // the sphere outside B(x0, delta) is untouched: it is the cap <y, x0> <= c0
    let c0 = 1.0 - bump.delta * bump.delta / 2.0;
    let s_max = (1.0 - c0 * c0).sqrt();
    let along = dot(z, x0);
    let perp: Vec<f64> = z.iter().zip(x0).map(|(a, b)| a - along * b).collect();
    let pn = norm(&perp);
    let w: Vec<f64> = if pn > 1e-300 {
        perp.iter().map(|v| v / pn).collect()
    } else {
        sphere_tangents(x0)[0].iter().map(|v| v / norm(&sphere_tangents(x0)[0])).collect()
    };
    let zn = norm(z);
    let untouched = if zn > 0.0 && along / zn <= c0 {
        z.iter().map(|v| v / zn).collect::<Vec<f64>>()
    } else {
        x0.iter().zip(&w).map(|(a, b)| c0 * a + s_max * b).collect()
    };
    let mut best = (untouched.clone(), dist(&untouched, z));

    let ts = sphere_tangents(x0);
    let a: Vec<f64> = ts[0].iter().map(|v| v / norm(&ts[0])).collect();
    let b: Vec<f64> = ts[1].iter().map(|v| v / norm(&ts[1])).collect();
    let lift = |s: [f64; 2]| -> (Vec<f64>, f64) {
        let h = (1.0 - s[0] * s[0] - s[1] * s[1]).max(0.0).sqrt();
        ((0..3).map(|k| h * x0[k] + s[0] * a[k] + s[1] * b[k]).collect(), h)
    };
    let chart = |s: [f64; 2]| -> ChartPoint {
        let (y, h) = lift(s);
        let dy = |c: usize, e: &[f64]| -> Vec<f64> {
            (0..3).map(|k| -s[c] / h * x0[k] + e[k]).collect()
        };
        ChartPoint {
            point: bump.apply(&y),
            du: bump.push_forward(&y, &dy(0, &a)),
            dv: bump.push_forward(&y, &dy(1, &b)),
        }
    };
    let clamp = |s: [f64; 2]| {
        let r = (s[0] * s[0] + s[1] * s[1]).sqrt();
        if r > s_max {
            [s[0] * s_max / r, s[1] * s_max / r]
        } else {
            s
        }
    };
    let side = (nodes as f64).sqrt().round() as usize;
    let grid: Vec<[f64; 2]> = (0..side)
        .flat_map(|i| {
            (0..side).map(move |j| {
                let f = |k: usize| s_max * (2.0 * k as f64 / (side - 1) as f64 - 1.0);
                [f(i), f(j)]
            })
        })
        .filter(|s| s[0] * s[0] + s[1] * s[1] <= s_max * s_max)
        .collect();
    let (s, d) = surface_nearest(chart, clamp, &grid, z);
    if d < best.1 {
        best = (bump.apply(&lift(s).0), d);
    }
    best
}

/// Nearest point on the bumped unit circle; returns `(angle, distance)`.
fn bumped_circle_nearest(bump: &BumpMap, z: &[f64], nodes: usize) -> (f64, f64) {
    let t0 = bump.x0[1].atan2(bump.x0[0]);
    // arc of the circle inside B(x0, delta): |t - t0| <= half
    let half = 2.0 * (bump.delta / 2.0).asin();
    let point = |t: f64| bump.apply(&[t.cos(), t.sin()]);
    let (tb, d2) = curve_nearest(|t| crate::geom::dist2(&point(t), z), t0 - half, t0 + half, false, nodes);
    let mut best = (tb, d2.sqrt());
    // untouched arc: nearest circle point if it lies there, else an arc endpoint
    let tz = z[1].atan2(z[0]);
    let offset = (tz - t0 + PI).rem_euclid(TAU) - PI;
    let candidates = if offset.abs() >= half && norm(z) > 0.0 {
        vec![tz]
    } else {
        vec![t0 - half, t0 + half]
    };
    for t in candidates {
        let d = dist(&[t.cos(), t.sin()], z);
        if d < best.1 {
            best = (t, d);
        }
    }
    best
}
