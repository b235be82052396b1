//! Command-line front end: `sample`, `calibrate`, `detect`, `estimate`, `rates`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::calibrate::{
    bandwidth_h, calibrate, distortion_curve, write_distortion_csv, Calibrated, CalibrationOptions, JumpRuleKind,
    DEFAULT_DELTA, DEFAULT_JUMP_FACTOR,
};
use crate::detector::{detect, BoundaryResult, DetectionParams};
use crate::error::Error;
use crate::geom::{dist, norm, PointCloud};
use crate::patches::{hausdorff_to_truth, HausdorffReport, PatchComplex};
use crate::synth::{Kind, Shape, SyntheticManifold};

pub const THREADS_ENV: &str = "BOUNDARYKIT_THREADS";
/// Points on the true boundary used to measure how well detections cover it.
pub const BOUNDARY_GRID: usize = 720;
/// `eps_bd = EPS_BD_FACTOR * eps_int` unless given.
pub const EPS_BD_FACTOR: f64 = 3.0;

#[derive(Parser, Debug)]
#[command(name = "boundarykit", version, about = "Boundary detection and boundary-aware reconstruction of sampled manifolds")]
pub struct Cli {
    /// Worker threads (falls back to BOUNDARYKIT_THREADS, then all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a uniform sample from a synthetic manifold.
    Sample(SampleArgs),
    /// Choose h, R0 and rho from the data.
    Calibrate(CalibrateArgs),
    /// Flag boundary observations and estimate their outward normals.
    Detect(DetectArgs),
    /// Build the patch complex and, with a known truth, its Hausdorff error.
    Estimate(EstimateArgs),
    /// Repeat detection and estimation over sample sizes and seeds.
    Rates(RatesArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; the sidecar JSON goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

/// Either a CSV file or a synthetic sample.
#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    #[arg(long, conflicts_with = "kind")]
    pub input: Option<PathBuf>,
    /// Intrinsic dimension of a CSV input.
    #[arg(long)]
    pub d: Option<usize>,
    /// Sidecar JSON of a sampled CSV, enabling truth metrics.
    #[arg(long, requires = "input")]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum JumpRuleArg {
    Max,
    FirstAboveFactor,
}

#[derive(Args, Debug, Clone)]
pub struct CalibArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "first-above-factor")]
    pub jump_rule: JumpRuleArg,
    #[arg(long, default_value_t = DEFAULT_JUMP_FACTOR)]
    pub jump_factor: f64,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long = "r0", alias = "R0")]
    pub r0: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
}

#[derive(Args, Debug, Clone)]
pub struct PatchArgs {
    #[arg(long)]
    pub eps_int: Option<f64>,
    #[arg(long)]
    pub eps_bd: Option<f64>,
    /// Size of the uniform truth sample for `sup_M d(., M_hat)`.
    #[arg(long, default_value_t = 20_000)]
    pub m_truth: usize,
    /// Points drawn in every patch for `sup_M_hat d(., M)`.
    #[arg(long, default_value_t = 8)]
    pub per_patch: usize,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub calib: CalibArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub calib: CalibArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub calib: CalibArgs,
    #[command(flatten)]
    pub patch: PatchArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    #[arg(long)]
    pub kind: Kind,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Skip the patch complex and its Hausdorff error.
    #[arg(long)]
    pub no_estimate: bool,
    #[command(flatten)]
    pub calib: CalibArgs,
    #[command(flatten)]
    pub patch: PatchArgs,
    /// Output CSV; slopes go to `<stem>_slopes.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    /// 0 success, 2 configuration, 3 numerical degeneracy, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(e) if e.is_io() || matches!(e.root(), Error::Json(_)) => 4,
            CliError::Run(e) if e.is_numeric() => 3,
            CliError::Run(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut fs::File) -> std::io::Result<()>) -> CliResult<()> {
    let mut file = fs::File::create(path).map_err(io_error(path))?;
    f(&mut file).map_err(io_error(path))?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    write_file(path, |f| writeln!(f, "{text}"))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    Ok(())
}

/// A loaded cloud and, when known, the manifold it was drawn from.
pub struct Source {
    pub cloud: PointCloud,
    pub truth: Option<SyntheticManifold>,
}

impl SourceArgs {
    pub fn load(&self) -> CliResult<Source> {
        match (&self.input, self.kind) {
            (Some(path), None) => {
                let truth = match &self.truth {
                    Some(sidecar) => Some(read_sidecar(sidecar)?),
                    None => None,
                };
                let d = match (self.d, &truth) {
                    (Some(d), _) => d,
                    (None, Some(m)) => m.intrinsic_dim(),
                    (None, None) => return Err(CliError::Config("--d is required with --input".into())),
                };
                let cloud = PointCloud::load_csv(path, d)?;
                if let Some(m) = &truth {
                    if m.ambient_dim() != cloud.ambient_dim() || m.intrinsic_dim() != d {
                        return Err(CliError::Config("the truth sidecar does not match the input dimensions".into()));
                    }
                }
                Ok(Source { cloud, truth })
            }
            (None, Some(kind)) => {
                let n = self.n.ok_or_else(|| CliError::Config("--n is required with --kind".into()))?;
                let m = SyntheticManifold::new(kind);
                if self.d.is_some_and(|d| d != m.intrinsic_dim()) {
                    return Err(CliError::Config(format!("{kind} has intrinsic dimension {}", m.intrinsic_dim())));
                }
                let cloud = m.sample_uniform(n, self.seed)?;
                Ok(Source { cloud, truth: Some(m) })
            }
            _ => Err(CliError::Config("give exactly one of --input and --kind".into())),
        }
    }
}

fn read_sidecar(path: &Path) -> CliResult<SyntheticManifold> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let shape: Shape = serde_json::from_value(value["params"].clone()).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: format!("no manifold description: {e}"),
    })?;
    Ok(SyntheticManifold::from_shape(shape)?)
}

impl CalibArgs {
    pub fn options(&self) -> CliResult<CalibrationOptions> {
        for (name, v) in [("h", self.h), ("R0", self.r0), ("rho", self.rho)] {
            if v.is_some_and(|v| !(v > 0.0)) {
                return Err(CliError::Config(format!("--{name} must be positive")));
            }
        }
        if !(self.r >= 0.0) {
            return Err(CliError::Config("--r must be nonnegative".into()));
        }
        Ok(CalibrationOptions {
            k: self.k,
            delta: self.delta,
            jump_rule: match self.jump_rule {
                JumpRuleArg::Max => JumpRuleKind::Max,
                JumpRuleArg::FirstAboveFactor => JumpRuleKind::FirstAboveFactor,
            },
            jump_factor: self.jump_factor,
            h: self.h,
            r0: self.r0,
            rho: self.rho,
            r: self.r,
            ..Default::default()
        })
    }
}

/// Calibration followed by detection with the calibrated parameters.
pub fn run_detection(cloud: &PointCloud, calib: &CalibArgs) -> CliResult<(Calibrated, BoundaryResult)> {
    let cal = calibrate(cloud, &calib.options()?)?;
    let r = &cal.report;
    let params = DetectionParams::new(r.r0, r.r, r.rho, r.h)?;
    let result = detect(cloud, &cal.tangents, &params)?;
    Ok((cal, result))
}

/// Patch radii: `eps_int` defaults to the largest distance to the `(d+1)`-th
/// nearest point (self included), `eps_bd` to a fixed multiple of it.
pub fn patch_radii(cloud: &PointCloud, patch: &PatchArgs) -> CliResult<(f64, f64)> {
    let eps_int = match patch.eps_int {
        Some(e) => e,
        None => bandwidth_h(cloud, Some((cloud.intrinsic_dim() + 1).min(cloud.len())))?,
    };
    let eps_bd = patch.eps_bd.unwrap_or(EPS_BD_FACTOR * eps_int);
    if !(eps_int > 0.0) || !(eps_bd > 0.0) {
        return Err(CliError::Config("patch radii must be positive".into()));
    }
    Ok((eps_int, eps_bd))
}

/// `(cover, excess)`: the largest distance from the boundary grid to the
/// detected set, and the largest distance from a detected point to the boundary.
/// `None` when the truth has no boundary or nothing was detected.
pub fn detection_errors(
    truth: &SyntheticManifold,
    cloud: &PointCloud,
    result: &BoundaryResult,
) -> crate::Result<(Option<f64>, Option<f64>)> {
    if !truth.has_boundary() || result.detected.is_empty() {
        let cover = truth.has_boundary().then_some(f64::INFINITY);
        return Ok((cover, None));
    }
    let grid = truth.boundary_grid(BOUNDARY_GRID);
    let cover = grid
        .iter()
        .map(|g| result.detected.iter().map(|&i| dist(g, cloud.point(i))).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let mut excess: f64 = 0.0;
    for &i in &result.detected {
        excess = excess.max(truth.distance_to_boundary(cloud.point(i))?);
    }
    Ok((Some(cover), Some(excess)))
}

/// Angles between estimated and true outward normals, aligned with `detected`.
pub fn normal_errors(truth: &SyntheticManifold, cloud: &PointCloud, result: &BoundaryResult) -> crate::Result<Vec<f64>> {
    result
        .detected
        .iter()
        .zip(&result.normals)
        .map(|(&i, eta)| {
            let exact = truth.exact_outward_normal(cloud.point(i))?;
            let len = norm(eta);
            Ok(eta.iter().zip(&exact).map(|(a, b)| a / len - b).map(|v| v * v).sum::<f64>().sqrt())
        })
        .collect()
}

fn cmd_sample(args: &SampleArgs) -> CliResult<()> {
    let m = SyntheticManifold::new(args.kind);
    let cloud = m.sample_uniform(args.n, args.seed)?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    cloud.save_csv(&args.out)?;
    let mut side = m.describe();
    side["seed"] = json!(args.seed);
    side["n"] = json!(args.n);
    write_json(&args.out.with_extension("json"), &side)
}

fn write_calibration(dir: &Path, cal: &Calibrated) -> CliResult<()> {
    write_json(&dir.join("calibration.json"), &serde_json::to_value(&cal.report).map_err(Error::from)?)?;
    let path = dir.join("radii.csv");
    write_file(&path, |f| cal.report.write_radii_csv(f))
}

fn cmd_calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let src = args.source.load()?;
    let cal = calibrate(&src.cloud, &args.calib.options()?)?;
    ensure_dir(&args.out_dir)?;
    write_calibration(&args.out_dir, &cal)?;
    let pairs = distortion_curve(&src.cloud, &cal.tangents, 20_000);
    let path = args.out_dir.join("distortion.csv");
    write_file(&path, |f| write_distortion_csv(&pairs, f))
}

fn cmd_detect(args: &DetectArgs) -> CliResult<()> {
    let src = args.source.load()?;
    let (cal, result) = run_detection(&src.cloud, &args.calib)?;
    ensure_dir(&args.out_dir)?;
    write_calibration(&args.out_dir, &cal)?;
    result.save(
        &args.out_dir.join("boundary.json"),
        &args.out_dir.join("boundary.csv"),
        src.cloud.ambient_dim(),
    )?;
    log::info!("{} of {} points detected", result.detected.len(), src.cloud.len());
    Ok(())
}

/// Everything `estimate` learns about one cloud.
pub struct Estimate {
    pub calibrated: Calibrated,
    pub boundary: BoundaryResult,
    pub complex: PatchComplex,
    pub hausdorff: Option<HausdorffReport>,
    pub cover: Option<f64>,
    pub excess: Option<f64>,
}

pub fn run_estimate(src: &Source, calib: &CalibArgs, patch: &PatchArgs, seed: u64) -> CliResult<Estimate> {
    let (calibrated, boundary) = run_detection(&src.cloud, calib)?;
    let (eps_int, eps_bd) = patch_radii(&src.cloud, patch)?;
    let complex = PatchComplex::build(&src.cloud, &calibrated.tangents, &boundary, eps_int, eps_bd)?;
    let (hausdorff, cover, excess) = match &src.truth {
        Some(m) => {
            let h = hausdorff_to_truth(&complex, m, patch.m_truth, patch.per_patch, seed)?;
            let (c, e) = detection_errors(m, &src.cloud, &boundary)?;
            (Some(h), c, e)
        }
        None => (None, None, None),
    };
    Ok(Estimate {
        calibrated,
        boundary,
        complex,
        hausdorff,
        cover,
        excess,
    })
}

fn finite_or_null(v: Option<f64>) -> serde_json::Value {
    match v {
        Some(x) if x.is_finite() => json!(x),
        _ => serde_json::Value::Null,
    }
}

fn cmd_estimate(args: &EstimateArgs) -> CliResult<()> {
    let src = args.source.load()?;
    let est = run_estimate(&src, &args.calib, &args.patch, args.source.seed)?;
    ensure_dir(&args.out_dir)?;
    write_calibration(&args.out_dir, &est.calibrated)?;
    est.boundary.save(
        &args.out_dir.join("boundary.json"),
        &args.out_dir.join("boundary.csv"),
        src.cloud.ambient_dim(),
    )?;
    write_json(&args.out_dir.join("complex.json"), &est.complex.to_json())?;
    let r = &est.calibrated.report;
    let mut metrics = json!({
        "n": src.cloud.len(),
        "D": src.cloud.ambient_dim(),
        "d": src.cloud.intrinsic_dim(),
        "h": r.h,
        "R0": r.r0,
        "rho": r.rho,
        "r": r.r,
        "detected": est.boundary.detected.len(),
        "eps_int": est.complex.eps_int,
        "eps_bd": est.complex.eps_bd,
        "inner_patches": est.complex.inner.len(),
        "boundary_patches": est.complex.boundary.len(),
    });
    if let Some(h) = &est.hausdorff {
        metrics["hausdorff"] = serde_json::to_value(h).map_err(Error::from)?;
        metrics["dH_manifold"] = json!(h.hausdorff());
        metrics["dH_boundary_cover"] = finite_or_null(est.cover);
        metrics["dH_boundary_excess"] = finite_or_null(est.excess);
    }
    write_json(&args.out_dir.join("metrics.json"), &metrics)
}

/// Least-squares slope of `ln y` against `ln n`; `None` with fewer than three
/// distinct `n` or any nonpositive or infinite value.
pub fn log_log_slope(rows: &[(usize, Option<f64>)]) -> Option<f64> {
    let mut distinct: Vec<usize> = rows.iter().map(|r| r.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return None;
    }
    let mut pts = Vec::with_capacity(rows.len());
    for &(n, y) in rows {
        match y {
            Some(y) if y > 0.0 && y.is_finite() => pts.push(((n as f64).ln(), y.ln())),
            _ => return None,
        }
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub const RATE_COLUMNS: [&str; 5] = [
    "dH_boundary_cover",
    "dH_boundary_excess",
    "dH_manifold",
    "sup_M_to_Mhat",
    "sup_Mhat_to_M",
];

fn cmd_rates(args: &RatesArgs) -> CliResult<()> {
    if args.n_list.contains(&0) {
        return Err(CliError::Config("sample sizes must be positive".into()));
    }
    let mut rows: Vec<(usize, u64, [f64; 4], [Option<f64>; 5])> = Vec::new();
    for &n in &args.n_list {
        for s in 0..args.seeds {
            let seed = args.seed_base + s;
            let m = SyntheticManifold::new(args.kind);
            let src = Source {
                cloud: m.sample_uniform(n, seed)?,
                truth: Some(m),
            };
            let (meta, values) = if args.no_estimate {
                let (cal, res) = run_detection(&src.cloud, &args.calib)?;
                let (c, e) = detection_errors(src.truth.as_ref().unwrap(), &src.cloud, &res)?;
                let r = &cal.report;
                ([r.h, r.r0, r.rho, res.detected.len() as f64], [c, e, None, None, None])
            } else {
                let est = run_estimate(&src, &args.calib, &args.patch, seed)?;
                let h = est.hausdorff.as_ref().unwrap();
                let r = &est.calibrated.report;
                (
                    [r.h, r.r0, r.rho, est.boundary.detected.len() as f64],
                    [
                        est.cover,
                        est.excess,
                        Some(h.hausdorff()),
                        Some(h.sup_m_to_mhat),
                        Some(h.sup_mhat_to_m),
                    ],
                )
            };
            log::info!("n = {n}, seed = {seed}: {values:?}");
            rows.push((n, seed, meta, values));
        }
    }
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_file(&args.out, |f| {
        let mut w = csv::Writer::from_writer(f);
        let mut header = vec!["n", "seed"];
        header.extend(RATE_COLUMNS);
        header.extend(["h", "R0", "rho", "detected"]);
        w.write_record(&header)?;
        for (n, seed, meta, values) in &rows {
            let mut rec = vec![n.to_string(), seed.to_string()];
            rec.extend(values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            rec.extend(meta.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()
    })?;
    let mut slopes = serde_json::Map::new();
    for (c, name) in RATE_COLUMNS.iter().enumerate() {
        let col: Vec<(usize, Option<f64>)> = rows.iter().map(|r| (r.0, r.3[c])).collect();
        slopes.insert(name.to_string(), json!(log_log_slope(&col)));
    }
    let slopes = serde_json::Value::Object(slopes);
    println!("{}", serde_json::to_string(&slopes).map_err(Error::from)?);
    let stem = args.out.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    write_json(&args.out.with_file_name(format!("{stem}_slopes.json")), &slopes)
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Rates(a) => cmd_rates(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
