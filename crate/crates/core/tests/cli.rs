use std::fs;
use std::path::Path;
use std::process::Command;

fn bk(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_boundarykit"))
        .args(args)
        .env_remove("BOUNDARYKIT_THREADS")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sample_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let o = bk(&["sample", "--kind", "annulus", "--n", "3000", "--seed", "7", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0,x1"));
    assert_eq!(lines.count(), 3000);
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(side["kind"], "annulus");
    assert_eq!(side["seed"], 7);
    assert_eq!(side["reach_boundary"], 0.3);
    let cloud = boundarykit::PointCloud::load_csv(&out, 2).unwrap();
    assert_eq!(cloud.len(), 3000);
}

#[test]
fn sample_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(bk(&["sample", "--kind", "moebius", "--n", "500", "--seed", "3", "--out", p(&a)]).status.success());
    assert!(bk(&["--threads", "1", "sample", "--kind", "moebius", "--n", "500", "--seed", "3", "--out", p(&b)])
        .status
        .success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    assert_eq!(bk(&["sample", "--kind", "circle", "--n", "0", "--out", p(&out)]).status.code(), Some(2));
    assert_eq!(bk(&["sample", "--kind", "torus", "--n", "10", "--out", p(&out)]).status.code(), Some(2));
    assert_eq!(bk(&["rates", "--kind", "klein", "--n-list", "10", "--out", p(&out)]).status.code(), Some(2));
    assert_eq!(bk(&["detect", "--out-dir", p(dir.path())]).status.code(), Some(2));
    assert_eq!(bk(&["--threads", "0", "sample", "--kind", "circle", "--n", "5", "--out", p(&out)]).status.code(), Some(2));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = bk(&["detect", "--input", p(&missing), "--d", "1", "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
}

#[test]
fn detect_on_circle_finds_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    assert!(bk(&["sample", "--kind", "circle", "--n", "1500", "--seed", "1", "--out", p(&csv)]).status.success());
    let o = bk(&["detect", "--input", p(&csv), "--d", "1", "--out-dir", p(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let res: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("boundary.json")).unwrap()).unwrap();
    assert_eq!(res["detected"], serde_json::json!([]));
    let cal: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("calibration.json")).unwrap()).unwrap();
    assert!(cal["R0"].as_f64().unwrap() > 0.0);
    assert_eq!(cal["probe_radii"].as_array().unwrap().len(), 1500);
    let rows = fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    assert_eq!(rows.lines().next(), Some("index,is_boundary,rho_i,eta_0,eta_1"));
    assert_eq!(rows.lines().count(), 1501);
}

#[test]
fn calibrate_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = bk(&["calibrate", "--kind", "half-sphere", "--n", "600", "--seed", "2", "--jump-rule", "max", "--out-dir", p(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cal: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("calibration.json")).unwrap()).unwrap();
    assert_eq!(cal["jump_rule"]["rule"], "max");
    assert!(fs::read_to_string(dir.path().join("radii.csv")).unwrap().starts_with("rank,rho\n"));
    assert!(fs::read_to_string(dir.path().join("distortion.csv")).unwrap().starts_with("distance,projected\n"));
}

#[test]
fn estimate_with_and_without_truth() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    assert!(bk(&["sample", "--kind", "annulus", "--n", "1500", "--seed", "5", "--out", p(&csv)]).status.success());
    let with = dir.path().join("with");
    let o = bk(&[
        "estimate", "--input", p(&csv), "--truth", p(&dir.path().join("a.json")), "--m-truth", "3000", "--out-dir", p(&with),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(with.join("metrics.json")).unwrap()).unwrap();
    assert!(m["hausdorff"]["sup_M_to_Mhat"].as_f64().unwrap() >= 0.0);
    assert!(m["hausdorff"]["sup_Mhat_to_M"].as_f64().unwrap() > 0.0);
    assert!(m["detected"].as_u64().unwrap() > 0);
    assert!(m["boundary_patches"].as_u64().unwrap() > 0);
    let without = dir.path().join("without");
    assert!(bk(&["estimate", "--input", p(&csv), "--d", "2", "--out-dir", p(&without)]).status.success());
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(without.join("metrics.json")).unwrap()).unwrap();
    assert!(m.get("hausdorff").is_none() && m.get("dH_manifold").is_none());
    // the same cloud gives the same complex either way
    assert_eq!(fs::read(with.join("complex.json")).unwrap(), fs::read(without.join("complex.json")).unwrap());
}

#[test]
fn estimate_on_boundaryless_truth_is_inner_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = bk(&["estimate", "--kind", "circle", "--n", "800", "--seed", "3", "--m-truth", "2000", "--out-dir", p(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["detected"], 0);
    assert_eq!(m["boundary_patches"], 0);
    assert_eq!(m["inner_patches"], 800);
    assert!(m["dH_boundary_cover"].is_null());
    assert!(m["dH_manifold"].as_f64().unwrap() < 0.05);
}

#[test]
fn detect_output_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |out: &Path| -> Vec<String> {
        ["detect", "--kind", "half-sphere", "--n", "700", "--seed", "9", "--out-dir", p(out)].iter().map(|s| s.to_string()).collect()
    };
    let one = Command::new(env!("CARGO_BIN_EXE_boundarykit")).args(args(&a)).env("BOUNDARYKIT_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_boundarykit")).args(args(&b)).env("BOUNDARYKIT_THREADS", "4").output().unwrap();
    assert!(one.status.success() && many.status.success());
    for f in ["boundary.json", "boundary.csv", "calibration.json", "radii.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn rates_table_and_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates.csv");
    let o = bk(&["rates", "--kind", "annulus", "--n-list", "400", "--seeds", "2", "--m-truth", "1000", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,seed,dH_boundary_cover,dH_boundary_excess,dH_manifold"));
    assert_eq!(lines.count(), 2);
    let slopes: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rates_slopes.json")).unwrap()).unwrap();
    assert!(slopes["dH_boundary_cover"].is_null());
    let o = bk(&["rates", "--kind", "segment", "--n-list", "200,400,800", "--seeds", "1", "--no-estimate", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let slopes: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rates_slopes.json")).unwrap()).unwrap();
    assert!(slopes["dH_boundary_cover"].is_number(), "{slopes}");
    assert!(slopes["dH_manifold"].is_null());
}
