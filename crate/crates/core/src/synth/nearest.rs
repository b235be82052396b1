//! Nearest-point search on parametrized curves and surfaces: a dense parameter
//! grid followed by local refinement of the best grid minima.

/// Default number of grid nodes for nearest-point queries.
pub const GRID_NODES: usize = 4096;

const CANDIDATES: usize = 3;

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / 2.0;
    (t, f(t))
}

/// Indices of the smallest discrete local minima of `values`.
fn best_local_minima(values: &[f64], periodic: bool, count: usize) -> Vec<usize> {
    let n = values.len();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&k| {
            let left = if k > 0 {
                Some(values[k - 1])
            } else if periodic {
                Some(values[n - 1])
            } else {
                None
            };
            let right = if k + 1 < n {
                Some(values[k + 1])
            } else if periodic {
                Some(values[0])
            } else {
                None
            };
            left.map_or(true, |l| values[k] <= l) && right.map_or(true, |r| values[k] <= r)
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    minima.truncate(count);
    minima
}

/// Minimizes `dist2(t)` over `t` in `[lo, hi]`.
///
/// For periodic curves `hi - lo` is the period and `dist2` must be defined
/// slightly beyond the interval. Returns `(t, dist2(t))`.
pub fn curve_nearest(
    dist2: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    periodic: bool,
    nodes: usize,
) -> (f64, f64) {
    let step = if periodic {
        (hi - lo) / nodes as f64
    } else {
        (hi - lo) / (nodes - 1) as f64
    };
    let ts: Vec<f64> = (0..nodes).map(|k| lo + k as f64 * step).collect();
    let values: Vec<f64> = ts.iter().map(|&t| dist2(t)).collect();
    let mut best = (f64::NAN, f64::INFINITY);
    for k in best_local_minima(&values, periodic, CANDIDATES) {
        let (mut a, mut b) = (ts[k] - step, ts[k] + step);
        if !periodic {
            a = a.max(lo);
            b = b.min(hi);
        }
        let cand = golden_min(&dist2, a, b, 1e-13 * (1.0 + hi.abs().max(lo.abs())));
        let cand = if values[k] < cand.1 { (ts[k], values[k]) } else { cand };
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

/// A point on a surface chart and its two partial derivatives.
pub struct ChartPoint {
    pub point: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

/// Minimizes `|S(p) - z|` over a 2-parameter chart by Levenberg-Marquardt from
/// the best grid nodes. `project` maps a parameter back into the domain.
pub fn surface_nearest(
    chart: impl Fn([f64; 2]) -> ChartPoint,
    project: impl Fn([f64; 2]) -> [f64; 2],
    grid: &[[f64; 2]],
    z: &[f64],
) -> ([f64; 2], f64) {
    let d2 = |p: &[f64]| -> f64 { p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum() };
    let mut scored: Vec<(f64, [f64; 2])> = grid.iter().map(|&p| (d2(&chart(p).point), p)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = ([f64::NAN; 2], f64::INFINITY);
    for &(f0, p0) in scored.iter().take(CANDIDATES) {
        let (p, f) = levenberg_marquardt(&chart, &project, p0, f0, z);
        if f < best.1 {
            best = (p, f);
        }
    }
    (best.0, best.1.sqrt())
}

fn levenberg_marquardt(
    chart: &impl Fn([f64; 2]) -> ChartPoint,
    project: &impl Fn([f64; 2]) -> [f64; 2],
    mut p: [f64; 2],
    mut f: f64,
    z: &[f64],
) -> ([f64; 2], f64) {
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let c = chart(p);
        let r: Vec<f64> = c.point.iter().zip(z).map(|(a, b)| a - b).collect();
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let (a11, a12, a22) = (dot(&c.du, &c.du), dot(&c.du, &c.dv), dot(&c.dv, &c.dv));
        let (g1, g2) = (dot(&c.du, &r), dot(&c.dv, &r));
        let mut improved = false;
        while lambda < 1e12 {
            let scale = lambda * (a11 + a22).max(1e-12);
            let (m11, m22) = (a11 + scale, a22 + scale);
            let det = m11 * m22 - a12 * a12;
            let step = [-(m22 * g1 - a12 * g2) / det, -(m11 * g2 - a12 * g1) / det];
            let q = project([p[0] + step[0], p[1] + step[1]]);
            let fq: f64 = chart(q).point.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            if fq <= f {
                let moved = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                p = q;
                f = fq;
                lambda = (lambda / 10.0).max(1e-12);
                improved = moved > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (p, f)
}
