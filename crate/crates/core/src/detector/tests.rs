use super::*;
use crate::geom::{decompose, norm, orthonormalize};
use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest, ProptestConfig, Strategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(frames: Vec<Frame>) -> TangentField {
    TangentField::from_frames(frames)
}

#[test]
fn unit_interval_endpoints() {
    let pts: Vec<Vec<f64>> = (0..=10).map(|k| vec![k as f64 / 10.0]).collect();
    let cloud = PointCloud::new(pts, 1).unwrap();
    let t = field(vec![Frame::axes(1, 1); 11]);
    let params = DetectionParams::new(0.5, 0.0, 0.2, 0.1).unwrap();
    let res = detect(&cloud, &t, &params).unwrap();
    assert_eq!(res.detected, vec![0, 10]);
    for i in 1..10 {
        assert_abs_diff_eq!(res.probe_radii[i], 0.05, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(res.probe_radii[0], 2.0, epsilon = 1e-12);
    assert!(!res.probe_bounded[0]);
    assert_eq!(res.normals, vec![vec![-1.0], vec![1.0]]);
    assert_eq!(res.boundary_frames, vec![None, None]);
}

#[test]
fn params_validation() {
    assert!(DetectionParams::new(0.0, 0.0, 0.1, 0.1).is_err());
    assert!(DetectionParams::new(1.0, -1.0, 0.1, 0.1).is_err());
    assert!(DetectionParams::new(1.0, 0.0, 2.5, 0.1).is_err());
    assert!(DetectionParams::new(1.0, 0.0, 0.0, 0.1).is_err());
    assert!(DetectionParams::new(1.0, 0.0, 0.5, 0.0).is_err());
    let p = DetectionParams::new(1.2, 0.0, 2.4, 0.1).unwrap();
    assert_eq!(p.clip(), 4.8);
    assert_eq!(p.rho_minus(), 0.3);
    assert_eq!(p.rho_plus(), 0.6);
    assert_abs_diff_eq!(p.r_plus(), 0.1, epsilon = 1e-15);
}

#[test]
fn boundary_tangent_examples() {
    let plane = Frame::axes(3, 2);
    let bt = boundary_tangent(&plane, &[1.0, 0.0, 0.0]).unwrap().unwrap();
    assert_eq!(bt.dim(), 1);
    let v = bt.basis_vector(0);
    assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(v[1].abs(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(v[2], 0.0, epsilon = 1e-15);
    assert!(matches!(
        boundary_tangent(&plane, &[0.0, 0.0, 1.0]),
        Err(Error::DegenerateNormal)
    ));
    assert_eq!(boundary_tangent(&Frame::axes(2, 1), &[1.0, 0.0]).unwrap(), None);
}

#[test]
fn boundary_tangent_random_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let vecs: Vec<Vec<f64>> = (0..3).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let frame = orthonormalize(&vecs).unwrap();
        let normal: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bt = boundary_tangent(&frame, &normal).unwrap().unwrap();
        assert_eq!(bt.dim(), 2);
        let w = frame.project(&normal).unwrap();
        for b in bt.basis_vectors() {
            // orthogonal to the projected normal, inside span(frame)
            assert!(crate::geom::dot(&b, &w).abs() <= 1e-10);
            assert!(decompose(&frame, &b).unwrap().normal_norm <= 1e-10);
        }
    }
}

#[test]
fn sparsify_examples() {
    let same = vec![vec![1.0, 2.0]; 5];
    assert_eq!(sparsify(&same, 0.1).unwrap(), vec![0]);
    let line = vec![vec![0.0], vec![1.0], vec![2.0]];
    assert_eq!(sparsify(&line, 0.5).unwrap(), vec![0, 2, 1]);
    let empty: Vec<Vec<f64>> = Vec::new();
    assert!(matches!(sparsify(&empty, 0.5), Err(Error::EmptySet)));
    assert!(sparsify(&line, 0.0).is_err());
}

#[test]
fn sparsify_separates_and_covers() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pts: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let eps = 0.2;
    let sel = sparsify(&pts, eps).unwrap();
    for (a, &i) in sel.iter().enumerate() {
        for &j in &sel[a + 1..] {
            assert!(dist(&pts[i], &pts[j]) > eps);
        }
    }
    for p in &pts {
        assert!(sel.iter().any(|&i| dist(p, &pts[i]) <= eps));
    }
}

/// Jittered grid on the half-disk `{|x| <= 1, x_0 <= 0}`, in the plane `z = 0` of R^3.
fn half_disk(seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::new();
    let step = 0.1;
    for i in -10..=0 {
        for j in -10..=10 {
            let x = i as f64 * step + rng.gen_range(-0.02..0.02);
            let y = j as f64 * step + rng.gen_range(-0.02..0.02);
            if x <= 0.0 && x * x + y * y <= 1.0 {
                pts.push(vec![x, y, 0.0]);
            }
        }
    }
    PointCloud::new(pts, 2).unwrap()
}

#[test]
fn half_disk_detection_with_exact_frames() {
    let cloud = half_disk(1);
    let t = field(vec![Frame::axes(3, 2); cloud.len()]);
    let params = DetectionParams::new(0.5, 0.0, 0.15, 0.2).unwrap();
    let res = detect(&cloud, &t, &params).unwrap();
    assert!(!res.is_empty());
    for (k, &i) in res.detected.iter().enumerate() {
        let p = cloud.point(i);
        let r = norm(p);
        // detected points hug the boundary: the diameter x = 0 or the arc
        assert!(p[0] > -0.2 || r > 0.8, "interior point {i} at {p:?}");
        let eta = &res.normals[k];
        assert!(norm(eta) <= 1.0 + 1e-12);
        for w in &res.witnesses[k] {
            assert_abs_diff_eq!(norm(&w.normal), 1.0, epsilon = 1e-9);
            assert!(decompose(&t.frames[w.index], &w.normal).unwrap().normal_norm <= 1e-10);
        }
        if let Some(f) = &res.boundary_frames[k] {
            let w = t.frames[i].project(eta).unwrap();
            assert!(crate::geom::dot(&f.basis_vector(0), &w).abs() <= 1e-10);
        }
        // points on the straight edge see an outward normal close to +x
        if p[0] > -0.05 && r < 0.7 {
            assert!(eta[0] / norm(eta) > 0.7, "normal {eta:?} at {p:?}");
        }
    }
    assert_eq!(
        res.detected.len(),
        (0..cloud.len()).filter(|&i| res.is_detected(i)).count()
    );
}

#[test]
fn serial_and_parallel_agree() {
    let cloud = half_disk(2);
    let t = field(vec![Frame::axes(3, 2); cloud.len()]);
    let params = DetectionParams::new(0.5, 0.15, 0.15, 0.2).unwrap();
    let a = detect_with(&cloud, &t, &params, Exec::Serial).unwrap();
    let b = detect_with(&cloud, &t, &params, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn witnesses_beyond_r0_use_an_extra_site() {
    let cloud = half_disk(3);
    let t = field(vec![Frame::axes(3, 2); cloud.len()]);
    let wide = DetectionParams::new(0.2, 0.3, 0.1, 0.2).unwrap();
    let res = detect(&cloud, &t, &wide).unwrap();
    let narrow = detect(&cloud, &t, &DetectionParams { r: 0.0, ..wide }).unwrap();
    for i in &narrow.detected {
        assert!(res.is_detected(*i));
    }
}

#[test]
fn json_and_csv_layout() {
    let pts: Vec<Vec<f64>> = (0..=4).map(|k| vec![k as f64 / 4.0, 0.0]).collect();
    let cloud = PointCloud::new(pts, 1).unwrap();
    let t = field(vec![Frame::axes(2, 1); 5]);
    let res = detect(&cloud, &t, &DetectionParams::new(0.5, 0.0, 0.5, 0.3).unwrap()).unwrap();
    let json = res.to_json();
    assert_eq!(json["detected"], serde_json::json!([0, 4]));
    assert_eq!(json["normals"][1]["index"], 4);
    assert_eq!(json["probe_radii"].as_array().unwrap().len(), 5);
    let mut buf = Vec::new();
    res.write_csv(&mut buf, 2).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,is_boundary,rho_i,eta_0,eta_1");
    assert_eq!(lines[1], "0,1,2,-1,0");
    assert_eq!(lines[2], "1,0,0.125,,");
}

#[test]
fn mismatched_field_is_rejected() {
    let cloud = half_disk(4);
    let t = field(vec![Frame::axes(3, 2); 3]);
    let params = DetectionParams::new(0.5, 0.0, 0.15, 0.2).unwrap();
    assert!(detect(&cloud, &t, &params).is_err());
    let t = field(vec![Frame::axes(3, 1); cloud.len()]);
    assert!(detect(&cloud, &t, &params).is_err());
}

fn random_rotation(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

/// A small noisy surface patch in R^3 with random (not estimated) frames.
fn scenario() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>)> {
    let point = prop::collection::vec(-1.0f64..1.0, 3);
    let frame = prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2);
    (4usize..16).prop_flat_map(move |n| {
        (
            prop::collection::vec(point.clone(), n),
            prop::collection::vec(frame.clone(), n),
        )
    })
}

fn build(pts: &[Vec<f64>], raw: &[Vec<Vec<f64>>]) -> Option<(PointCloud, TangentField)> {
    let pts: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], p[1], 0.2 * p[2]]).collect();
    let frames: Option<Vec<Frame>> = raw.iter().map(|f| orthonormalize(f).ok()).collect();
    Some((PointCloud::new(pts, 2).ok()?, field(frames?)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn monotone_in_rho_and_r(
        (pts, raw) in scenario(),
        rho in 0.05f64..1.0,
        bump in 0.0f64..0.5,
        r in 0.0f64..0.6,
        dr in 0.0f64..0.6,
    ) {
        let Some((cloud, t)) = build(&pts, &raw) else { return Ok(()) };
        let base = DetectionParams::new(0.6, r, rho, 0.3).unwrap();
        let res = detect_with(&cloud, &t, &base, Exec::Serial).unwrap();
        let stricter = DetectionParams { rho: (rho + bump).min(1.2), ..base };
        let s = detect_with(&cloud, &t, &stricter, Exec::Serial).unwrap();
        prop_assert!(s.detected.iter().all(|i| res.is_detected(*i)));
        let wider = DetectionParams { r: r + dr, ..base };
        let w = detect_with(&cloud, &t, &wider, Exec::Serial).unwrap();
        prop_assert!(res.detected.iter().all(|i| w.is_detected(*i)));
        for (k, _) in res.detected.iter().enumerate() {
            prop_assert!(norm(&res.normals[k]) <= 1.0 + 1e-12);
            for wit in &res.witnesses[k] {
                prop_assert!((norm(&wit.normal) - 1.0).abs() <= 1e-9);
                prop_assert!(decompose(&t.frames[wit.index], &wit.normal).unwrap().normal_norm <= 1e-10);
            }
        }
    }

    #[test]
    fn rigid_motion_commutes_with_detection(
        (pts, raw) in scenario(),
        seed in 0u64..1_000_000,
        rho in 0.05f64..1.0,
        r in 0.0f64..0.5,
    ) {
        let Some((cloud, t)) = build(&pts, &raw) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_rotation(&mut rng, 3);
        let shift: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let moved = cloud
            .map_points(|p| {
                let v = &q * nalgebra::DVector::from_column_slice(p);
                v.iter().zip(&shift).map(|(a, b)| a + b).collect()
            })
            .unwrap();
        let frames: Vec<Frame> = t.frames.iter().map(|f| f.transformed(&q).unwrap()).collect();
        let params = DetectionParams::new(0.6, r, rho, 0.3).unwrap();
        let a = detect_with(&cloud, &t, &params, Exec::Serial).unwrap();
        let b = detect_with(&moved, &field(frames), &params, Exec::Serial).unwrap();
        prop_assert_eq!(&a.detected, &b.detected);
        for (na, nb) in a.normals.iter().zip(&b.normals) {
            let rotated = &q * nalgebra::DVector::from_column_slice(na);
            for (x, y) in rotated.iter().zip(nb) {
                prop_assert!((x - y).abs() <= 1e-8);
            }
        }
    }
}
