//! Data-driven choice of the bandwidth `h`, the localization scale `R0` and the
//! cell-width threshold `rho`. The witness radius `r` defaults to 0.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::detector::probe_radii;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geom::{dist, PointCloud};
use crate::tangent::{estimate_all_tangents_with, TangentField};

pub const DEFAULT_DELTA: f64 = 0.3;
pub const DEFAULT_JUMP_FACTOR: f64 = 1.5;

/// Default neighbor count `ceil(d ln n)`, clamped to `[d + 1, n]`.
pub fn default_k(n: usize, d: usize) -> usize {
    let k = (d as f64 * (n as f64).ln()).ceil() as usize;
    k.max(d + 1).min(n)
}

/// `h(k)`: the largest distance from a point to its `k`-th nearest neighbor,
/// counting the point itself as the first.
pub fn bandwidth_h(cloud: &PointCloud, k: Option<usize>) -> Result<f64> {
    bandwidth_h_with(cloud, k, Exec::default())
}

pub fn bandwidth_h_with(cloud: &PointCloud, k: Option<usize>, exec: Exec) -> Result<f64> {
    let n = cloud.len();
    let k = k.unwrap_or_else(|| default_k(n, cloud.intrinsic_dim()));
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let kth = exec.map(n, |i| {
        let p = cloud.point(i);
        let mut d: Vec<f64> = cloud.points().map(|q| dist(p, q)).collect();
        // the point itself sits at distance 0, so index k - 1 is the k-th nearest
        let (_, v, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
        *v
    });
    Ok(kth.into_iter().fold(0.0, f64::max))
}

/// Relative metric distortion `1 - |pi_{T_i}(X_i - X_j)| / |X_i - X_j|` of an ordered pair.
fn distortion(cloud: &PointCloud, tangents: &TangentField, i: usize, j: usize) -> Option<(f64, f64)> {
    let diff: Vec<f64> = cloud.point(j).iter().zip(cloud.point(i)).map(|(a, b)| a - b).collect();
    let len = crate::geom::norm(&diff);
    if len == 0.0 {
        return None;
    }
    let proj = crate::geom::norm(&tangents.frames[i].coords_unchecked(&diff));
    Some((len, (1.0 - proj / len).abs()))
}

/// Largest `R` such that every pair at distance `<= R` has distortion `<= delta`.
///
/// Equivalently the largest pair distance below the nearest violating pair; the
/// maximum pairwise distance when no pair violates.
pub fn scale_r0(cloud: &PointCloud, tangents: &TangentField, delta: f64) -> Result<f64> {
    scale_r0_with(cloud, tangents, delta, Exec::default())
}

pub fn scale_r0_with(cloud: &PointCloud, tangents: &TangentField, delta: f64, exec: Exec) -> Result<f64> {
    if !(delta >= 0.0 && delta < 1.0) {
        return Err(Error::ParamsOutOfRange(format!("delta = {delta} must lie in [0, 1)")));
    }
    if tangents.len() != cloud.len() {
        return Err(Error::InvalidParams("tangent field does not match the cloud".into()));
    }
    let n = cloud.len();
    let first_violation = exec
        .map(n, |i| {
            (0..n)
                .filter_map(|j| distortion(cloud, tangents, i, j))
                .filter(|&(_, dist)| dist > delta)
                .map(|(len, _)| len)
                .fold(f64::INFINITY, f64::min)
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let below = exec
        .map(n, |i| {
            let p = cloud.point(i);
            cloud
                .points()
                .map(|q| dist(p, q))
                .filter(|&d| d > 0.0 && d < first_violation)
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max);
    if below == 0.0 {
        return Err(Error::NoAdmissibleScale);
    }
    Ok(below)
}

/// Up to `max_pairs` (distance, projected length) pairs, sorted by distance,
/// for the distortion scatter plot.
pub fn distortion_curve(cloud: &PointCloud, tangents: &TangentField, max_pairs: usize) -> Vec<(f64, f64)> {
    let n = cloud.len();
    let total = n * (n - 1);
    let stride = (total / max_pairs.max(1)).max(1);
    let mut out: Vec<(f64, f64)> = (0..total)
        .step_by(stride)
        .filter_map(|k| {
            let (i, mut j) = (k / (n - 1), k % (n - 1));
            if j >= i {
                j += 1;
            }
            distortion(cloud, tangents, i, j).map(|(len, d)| (len, len * (1.0 - d)))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// How the jump in the sorted probe radii is located.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum JumpRule {
    /// Midpoint of the largest consecutive gap.
    Max,
    /// Midpoint of the first gap that crosses `factor * floor`, where `floor`
    /// is the typical interior cell size (the bandwidth `h` by default).
    FirstAboveFactor { factor: f64, floor: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// Rank (0-based, ascending order) of the radius just below the jump.
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub rho: f64,
    /// Absent when no radius exceeds the floor of the first-above-factor rule.
    pub jump: Option<Jump>,
    pub low_contrast: bool,
}

/// Threshold `rho` from the per-point cell radii.
pub fn threshold_rho(radii: &[f64], rule: JumpRule) -> Result<Threshold> {
    if radii.len() < 2 {
        return Err(Error::TooFewRadii(radii.len()));
    }
    if let Some(bad) = radii.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::InvalidParams(format!("radius {bad} is not a finite nonnegative value")));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let jump_at = |k: usize| Jump {
        index: k,
        lower: sorted[k],
        upper: sorted[k + 1],
        gap: sorted[k + 1] - sorted[k],
    };
    match rule {
        JumpRule::Max => {
            let mut best = 0;
            for k in 1..sorted.len() - 1 {
                if sorted[k + 1] - sorted[k] > sorted[best + 1] - sorted[best] {
                    best = k;
                }
            }
            let jump = jump_at(best);
            let low_contrast = jump.gap <= 0.0;
            if low_contrast {
                log::warn!("all probe radii are equal; rho has no contrast");
            }
            Ok(Threshold {
                rho: (jump.lower + jump.upper) / 2.0,
                jump: Some(jump),
                low_contrast,
            })
        }
        JumpRule::FirstAboveFactor { factor, floor } => {
            if !(factor > 0.0) || !(floor > 0.0) {
                return Err(Error::ParamsOutOfRange(format!(
                    "jump factor {factor} and floor {floor} must be positive"
                )));
            }
            let level = factor * floor;
            match sorted.iter().position(|&r| r > level) {
                None => {
                    log::warn!("no probe radius exceeds {level:.4e}; nothing will be detected");
                    Ok(Threshold {
                        rho: level,
                        jump: None,
                        low_contrast: true,
                    })
                }
                Some(0) => {
                    log::warn!("every probe radius exceeds {level:.4e}");
                    Ok(Threshold {
                        rho: (level + sorted[0]) / 2.0,
                        jump: None,
                        low_contrast: true,
                    })
                }
                Some(k) => {
                    let jump = jump_at(k - 1);
                    Ok(Threshold {
                        rho: (jump.lower + jump.upper) / 2.0,
                        jump: Some(jump),
                        low_contrast: false,
                    })
                }
            }
        }
    }
}

/// Rule used by [`calibrate`]; the floor of the factor rule is filled in from `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum JumpRuleKind {
    Max,
    #[default]
    FirstAboveFactor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationOptions {
    pub k: Option<usize>,
    pub delta: f64,
    pub jump_rule: JumpRuleKind,
    pub jump_factor: f64,
    pub h: Option<f64>,
    pub r0: Option<f64>,
    pub rho: Option<f64>,
    pub r: f64,
    pub exec: Exec,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            k: None,
            delta: DEFAULT_DELTA,
            jump_rule: JumpRuleKind::default(),
            jump_factor: DEFAULT_JUMP_FACTOR,
            h: None,
            r0: None,
            rho: None,
            r: 0.0,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub h: f64,
    pub k_used: usize,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub distortion_delta: f64,
    pub rho: f64,
    pub jump_rule: JumpRule,
    pub jump_location: Option<Jump>,
    pub low_contrast: bool,
    pub r: f64,
    /// Own-cell radius of every point, in index order.
    pub probe_radii: Vec<f64>,
}

impl CalibrationReport {
    pub fn sorted_radii(&self) -> Vec<f64> {
        let mut s = self.probe_radii.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    /// `rank,rho` table of the sorted radii.
    pub fn write_radii_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["rank", "rho"])?;
        for (k, r) in self.sorted_radii().iter().enumerate() {
            w.write_record([k.to_string(), r.to_string()])?;
        }
        w.flush()
    }
}

/// `distance,projected` table of the distortion scatter plot.
pub fn write_distortion_csv<W: Write>(pairs: &[(f64, f64)], writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["distance", "projected"])?;
    for (a, b) in pairs {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()
}

/// Output of the full calibration: the report and the tangent field built on the way.
pub struct Calibrated {
    pub report: CalibrationReport,
    pub tangents: TangentField,
}

/// Runs `h`, tangents, `R0`, probe radii and `rho` in dependency order,
/// keeping any value fixed in `opts`.
pub fn calibrate(cloud: &PointCloud, opts: &CalibrationOptions) -> Result<Calibrated> {
    let n = cloud.len();
    let d = cloud.intrinsic_dim();
    let k_used = opts.k.unwrap_or_else(|| default_k(n, d));
    let h = match opts.h {
        Some(h) => h,
        None => bandwidth_h_with(cloud, Some(k_used), opts.exec)?,
    };
    let tangents = estimate_all_tangents_with(cloud, h, d, opts.exec)?;
    let r0 = match opts.r0 {
        Some(r0) => r0,
        None => scale_r0_with(cloud, &tangents, opts.delta, opts.exec)?,
    };
    let radii = probe_radii(cloud, &tangents, r0, opts.exec)?;
    let rule = match opts.jump_rule {
        JumpRuleKind::Max => JumpRule::Max,
        JumpRuleKind::FirstAboveFactor => JumpRule::FirstAboveFactor {
            factor: opts.jump_factor,
            floor: h,
        },
    };
    let (rho, jump_location, low_contrast) = match opts.rho {
        Some(rho) => (rho, None, false),
        None => {
            let t = threshold_rho(&radii, rule)?;
            // a jump into clipped cells can sit past 2 R0; every clipped radius
            // is at least 4 R0, so capping changes no decision
            let rho = if t.rho > 2.0 * r0 {
                log::info!("rho = {:.4} capped at 2 R0 = {:.4}", t.rho, 2.0 * r0);
                2.0 * r0
            } else {
                t.rho
            };
            (rho, t.jump, t.low_contrast)
        }
    };
    Ok(Calibrated {
        report: CalibrationReport {
            h,
            k_used,
            r0,
            distortion_delta: opts.delta,
            rho,
            jump_rule: rule,
            jump_location,
            low_contrast,
            r: opts.r,
            probe_radii: radii,
        },
        tangents,
    })
}
