use num_complex::Complex64;
use starlab::geometry::{amplitude_a, classify_triple, MidpointTriple, SpherePoint, TriangleVertices, EPS_DET, EPS_SIGN};
use starlab::io::write_verify_outputs;
use starlab::verify::{
    fd_inverse_jacobian, global_kernel_fn, kernel_symmetry_checks, loop_area, run_suite, VerifyConfig,
};

use std::f64::consts::PI;

fn small() -> VerifyConfig {
    VerifyConfig {
        ns: vec![1, 2],
        kernel_ns: vec![1, 2, 3],
        grid: (6, 12),
        l_max: 2,
        triangles: 50,
        jacobian_samples: 10,
        kernel_triples: 500,
        partition_samples: 20_000,
        ..VerifyConfig::default()
    }
}

fn axes() -> [SpherePoint; 3] {
    [
        SpherePoint::new(1.0, 0.0, 0.0).unwrap(),
        SpherePoint::new(0.0, 1.0, 0.0).unwrap(),
        SpherePoint::new(0.0, 0.0, 1.0).unwrap(),
    ]
}

#[test]
fn octant_loop_area() {
    let v = axes();
    assert!((loop_area(&v, [false; 3]) - PI / 2.0).abs() < 1e-12);
    let reversed = [v[0], v[2], v[1]];
    let s = loop_area(&reversed, [false; 3]).rem_euclid(4.0 * PI);
    assert!((s - (4.0 * PI - PI / 2.0)).abs() < 1e-12, "{s}");
}

#[test]
fn octant_fd_jacobian() {
    let [a, b, c] = axes();
    let j = fd_inverse_jacobian(&TriangleVertices::new(a, b, c), 1e-6).unwrap();
    let h = 1.0 / 2f64.sqrt();
    let m = |x: [f64; 3]| SpherePoint::new(x[0], x[1], x[2]).unwrap();
    let t = classify_triple(m([h, h, 0.0]), m([0.0, h, h]), m([h, 0.0, h]), EPS_SIGN);
    let amp = amplitude_a(&t, EPS_DET).unwrap();
    assert!((amp - 8.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((j - amp).abs() < 1e-4 * amp, "{j} vs {amp}");
}

#[test]
fn small_suite_passes() {
    let outcome = run_suite(&small()).unwrap();
    let failures: Vec<_> = outcome.report.failures().map(|c| c.name.clone()).collect();
    assert!(failures.is_empty(), "{failures:?}");
    for c in 1..=7 {
        assert!(outcome.report.checks.iter().any(|r| r.criterion == c), "criterion {c} missing");
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let config = small();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let outcome = pool.install(|| run_suite(&config)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_verify_outputs(dir.path(), &outcome, 0.0).unwrap();
        ["verify_report.json", "verify_products.csv"].map(|f| std::fs::read(dir.path().join(f)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

/// `A z^n` on every non-boundary triple, with `eta` supplied by `eta_of`.
/// The global kernel averages over `z -> -conj(z)` and so cannot see `eta`;
/// the class kernel can.
fn class_kernel(
    config: &VerifyConfig,
    eta_of: fn(&MidpointTriple) -> f64,
) -> impl Fn(&[SpherePoint; 3], u32) -> Option<Complex64> + Sync + '_ {
    move |p: &[SpherePoint; 3], n: u32| {
        let t = classify_triple(p[0], p[1], p[2], config.eps_sign);
        if t.is_boundary() {
            return None;
        }
        let a = amplitude_a(&t, config.eps_det).ok()?;
        let z = Complex64::new(eta_of(&t) * t.one_minus_det_sq().sqrt(), t.det());
        Some(z.powu(n) * a)
    }
}

#[test]
fn eta_sign_bug_breaks_cyclic_symmetry() {
    let config = small();
    let majority = |t: &MidpointTriple| t.eta().sign().unwrap();
    let clean = class_kernel(&config, majority);
    // Single flips move a triple between classes, so only the other three
    // identities apply to the class kernel.
    for c in kernel_symmetry_checks(&clean, "clean", &config) {
        assert!(c.passed || c.name == "clean_single_flip_parity", "{c:?}");
    }

    let first_pair = |t: &MidpointTriple| t.d12().signum();
    let mutated = class_kernel(&config, first_pair);
    let checks = kernel_symmetry_checks(&mutated, "mutated", &config);
    let cyclic = checks.iter().find(|c| c.name == "mutated_cyclic_symmetry").unwrap();
    assert!(!cyclic.passed, "max defect {}", cyclic.max_defect);

    let global = global_kernel_fn(config.eps_sign, config.eps_det);
    assert!(kernel_symmetry_checks(&global, "global", &config).iter().all(|c| c.passed));
}
