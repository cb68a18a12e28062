//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release -p starlab --test acceptance -- --nocapture`.

use std::time::Instant;

use num_complex::Complex64;
use starlab::function_space::BandlimitedFunction;
use starlab::io::write_verify_outputs;
use starlab::semiclassical::{limit_scan, LimitScanConfig};
use starlab::verify::{run_suite, CheckReport, SuiteOutcome, VerifyConfig};

struct Line {
    criterion: u32,
    title: &'static str,
    passed: bool,
    summary: String,
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

/// Timed stages of the suite that produced `criterion`; checks 3 and 4 share a sweep.
fn stages(outcome: &SuiteOutcome, criterion: u32) -> Vec<f64> {
    let stage = if criterion == 4 { 3 } else { criterion };
    outcome.timings.iter().filter(|t| t.0 == stage).map(|t| t.1).collect()
}

/// `limit_s` applies to each timed stage separately.
fn group_line(outcome: &SuiteOutcome, criterion: u32, title: &'static str, limit_s: Option<f64>) -> Line {
    let checks: Vec<&CheckReport> = outcome.report.checks.iter().filter(|c| c.criterion == criterion).collect();
    let mut passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    let mut parts: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{}{} {:.2e}/{:.0e}",
                if c.passed { "" } else { "!" },
                c.name,
                c.max_defect,
                c.tolerance
            )
        })
        .collect();
    let times = stages(outcome, criterion);
    let t: f64 = times.iter().sum();
    match limit_s {
        Some(limit) => {
            passed &= times.iter().all(|&s| s < limit);
            parts.push(format!("runtime {t:.1} s (limit {limit} s per stage)"));
        }
        None => parts.push(format!("runtime {t:.1} s")),
    }
    Line {
        criterion,
        title,
        passed,
        summary: parts.join("; "),
    }
}

fn limit_scan_line() -> Line {
    let mut f = BandlimitedFunction::basis(2, 2, 0).unwrap();
    f.set(0, 0, Complex64::new(1.0, 0.0));
    let f = f.scaled(Complex64::new(1.0 / f.norm(), 0.0));
    let config = LimitScanConfig {
        ks: vec![1, 2, 4, 8, 16],
        ..LimitScanConfig::default()
    };
    let t = Instant::now();
    let rows = limit_scan(&f, &f, &config).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let err = |k: u32| rows.iter().find(|r| r.k == k).and_then(|r| r.rel_error).unwrap_or(f64::NAN);
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("k={} P={} err={:.4e}", r.k, r.n_polar, r.rel_error.unwrap_or(f64::NAN)))
        .collect();
    Line {
        criterion: 8,
        title: "large-n trend toward the pointwise product",
        passed: err(16) < err(4) && secs < 1800.0,
        summary: format!("{}; runtime {secs:.1} s (limit 1800 s)", table.join(", ")),
    }
}

fn reproducibility_line(first: &SuiteOutcome, config: &VerifyConfig) -> Line {
    let second = pool(4).install(|| run_suite(config)).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_verify_outputs(a.path(), first, 0.0).unwrap();
    write_verify_outputs(b.path(), &second, 0.0).unwrap();
    let mut same = true;
    let mut bytes = 0;
    for name in ["verify_report.json", "verify_products.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        same &= x == y;
        bytes += x.len();
    }
    Line {
        criterion: 9,
        title: "byte-identical verify outputs across worker counts",
        passed: same,
        summary: format!("1 vs 4 workers, {bytes} bytes compared"),
    }
}

#[test]
fn acceptance() {
    let config = VerifyConfig::default();
    let outcome = pool(1).install(|| run_suite(&config)).unwrap();

    let mut lines = vec![
        group_line(&outcome, 1, "geometry oracles", Some(10.0)),
        group_line(&outcome, 2, "kernel identities", Some(10.0)),
        group_line(&outcome, 3, "graded commutativity of the global product", Some(300.0)),
        group_line(&outcome, 4, "odd-factor annihilation and output parity", Some(300.0)),
        group_line(&outcome, 5, "partial, restricted and global consistency", None),
        group_line(&outcome, 6, "generalized amplitudes", Some(300.0)),
        group_line(&outcome, 7, "domain partition", None),
    ];
    lines.push(limit_scan_line());
    lines.push(reproducibility_line(&outcome, &config));

    for l in &lines {
        println!(
            "criterion {} {} {}: {}",
            l.criterion,
            if l.passed { "PASS" } else { "FAIL" },
            l.title,
            l.summary
        );
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.passed).map(|l| l.criterion).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
