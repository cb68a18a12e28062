use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use starlab::function_space::{parity_decompose, random_bandlimited, BandlimitedFunction};
use starlab::geometry::{
    amplitude_a, classify_triple, midpoints_from_vertices, signed_area_from_vertices, standardize_conjugate,
    triangle_area_s, vertices_from_midpoints, DomainLabel, MidpointTriple, SpherePoint, TriangleVertices, EPS_DET,
    EPS_SIGN,
};
use starlab::io::{
    fmt_num, read_coefficients_csv, write_file, write_grid_csv, write_json, write_limit_scan_csv, write_product_csv,
    write_structure_csv, write_verify_outputs, RunManifest,
};
use starlab::kernels::Variant;
use starlab::product::{self, structure_constants_with};
use starlab::quadrature::QuadratureGrid;
use starlab::semiclassical::{self, LimitScanConfig};
use starlab::verify::run_suite;

use crate::config::RunConfig;
use crate::CliError;

/// Sup-norm bound, relative to `|f| |g|`, below which a product counts as annihilated.
const ANNIHILATION_TOL: f64 = 1e-10;
const PARITY_TOL: f64 = 1e-12;

fn parse_point(s: &str) -> Result<SpherePoint, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("bad point {s:?}: expected x,y,z")))?;
    if v.len() != 3 {
        return Err(CliError::Input(format!("bad point {s:?}: expected x,y,z")));
    }
    Ok(SpherePoint::new(v[0], v[1], v[2])?)
}

fn show(p: &SpherePoint) -> String {
    format!("{},{},{}", fmt_num(p.x()), fmt_num(p.y()), fmt_num(p.z()))
}

pub fn triangle(points: &[String], vertices: &[String]) -> Result<(), CliError> {
    let t: MidpointTriple = if vertices.is_empty() {
        let p: Vec<SpherePoint> = points.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?;
        classify_triple(p[0], p[1], p[2], EPS_SIGN)
    } else {
        let v: Vec<SpherePoint> = vertices.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?;
        let t = midpoints_from_vertices(&TriangleVertices::new(v[0], v[1], v[2]), EPS_SIGN)?;
        for (i, m) in t.points().iter().enumerate() {
            println!("midpoint_{} = {}", i + 1, show(m));
        }
        t
    };
    println!("d12 = {}", fmt_num(t.d12()));
    println!("d23 = {}", fmt_num(t.d23()));
    println!("d31 = {}", fmt_num(t.d31()));
    println!("det = {}", fmt_num(t.det()));
    println!("class = {}", t.label());
    if t.label() == DomainLabel::Boundary {
        return Err(CliError::Input("boundary triple: a pairwise scalar product vanishes".into()));
    }
    println!("eta = {:+}", t.eta().sign().unwrap_or(0.0));
    let s = triangle_area_s(&t)?;
    println!("S = {}", fmt_num(s));
    println!("A = {}", fmt_num(amplitude_a(&t, EPS_DET)?));

    let (standard, flips) = standardize_conjugate(&t)?;
    let s_std = triangle_area_s(&standard)?;
    println!("standard_flips = {flips}");
    println!("S_standard = {}", fmt_num(s_std));
    let v = vertices_from_midpoints(&standard, EPS_DET)?;
    println!("vertex_a = {}", show(&v.a));
    println!("vertex_b = {}", show(&v.b));
    println!("vertex_c = {}", show(&v.c));
    match signed_area_from_vertices(&v) {
        Ok(excess) => {
            println!("oracle_area = {}", fmt_num(excess));
            println!("agreement = {}", fmt_num((excess - s_std).abs()));
        }
        Err(e) => println!("oracle_area = unavailable ({e})"),
    }
    Ok(())
}

fn load_function(path: &Path) -> Result<BandlimitedFunction, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    read_coefficients_csv(BufReader::new(file)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn inputs(config: &RunConfig) -> Result<(BandlimitedFunction, BandlimitedFunction), CliError> {
    let f = match &config.f {
        Some(p) => load_function(p)?,
        None => random_bandlimited(config.bandlimit, config.seed, config.parity_filter(), false),
    };
    let g = match &config.g {
        Some(p) => load_function(p)?,
        None => random_bandlimited(config.bandlimit, config.seed.wrapping_add(1), config.parity_filter(), false),
    };
    Ok((f, g))
}

fn grid(config: &RunConfig) -> Result<QuadratureGrid, CliError> {
    Ok(QuadratureGrid::new(config.grid.0, config.grid.1)?)
}

fn manifest(command: &str, config: &RunConfig, bandlimit: usize, wall_time_s: f64) -> RunManifest {
    RunManifest {
        command: command.into(),
        spec: None,
        n_polar: config.grid.0,
        n_azimuth: config.grid.1,
        bandlimit,
        seed: config.seed,
        skipped_weight: None,
        wall_time_s,
        notes: Vec::new(),
    }
}

fn note(m: &mut RunManifest, key: &str, value: impl ToString) {
    m.notes.push((key.to_string(), value.to_string()));
}

fn save_manifest(config: &RunConfig, m: &RunManifest) -> Result<(), CliError> {
    write_file(&config.out, "manifest.json", |w| write_json(w, m))?;
    Ok(())
}

pub fn product(config: &RunConfig) -> Result<(), CliError> {
    let (f, g) = inputs(config)?;
    let grid = grid(config)?;
    let spec = config.spec()?;
    let start = Instant::now();
    let r = product::product(&spec, &f, &g, &grid)?;
    let secs = start.elapsed().as_secs_f64();

    write_file(&config.out, "product.csv", |w| write_product_csv(w, &grid, &r.values))?;
    let mut m = manifest("product", config, f.l_max().max(g.l_max()), secs);
    m.spec = Some(spec);
    m.skipped_weight = Some(r.skipped_weight);

    let scale = f.norm() * g.norm();
    let sup = r.sup_norm();
    let annihilated = sup < ANNIHILATION_TOL * scale;
    let odd_norm = |h: &BandlimitedFunction| parity_decompose(h, spec.n).1.norm();
    note(&mut m, "f_norm", fmt_num(f.norm()));
    note(&mut m, "g_norm", fmt_num(g.norm()));
    note(&mut m, "f_n_odd_norm", fmt_num(odd_norm(&f)));
    note(&mut m, "g_n_odd_norm", fmt_num(odd_norm(&g)));
    note(&mut m, "sup_norm", fmt_num(sup));
    note(&mut m, "annihilated", annihilated);

    let mut failures = Vec::new();
    if matches!(spec.variant, Variant::Partial(_)) {
        note(&mut m, "parity_check", "not applicable");
    } else {
        let defect = r.parity_defect(&grid);
        let ok = defect <= PARITY_TOL * sup.max(1.0);
        note(&mut m, "parity_defect", fmt_num(defect));
        note(&mut m, "parity_check", if ok { "pass" } else { "fail" });
        if !ok {
            failures.push(format!("output parity defect {defect:e}"));
        }
        let pure_odd = |h: &BandlimitedFunction| h.norm() > 0.0 && parity_decompose(h, spec.n).0.norm() == 0.0;
        if (pure_odd(&f) || pure_odd(&g)) && !annihilated {
            failures.push(format!("n-odd factor not annihilated: sup-norm {sup:e}"));
        }
    }
    save_manifest(config, &m)?;
    println!(
        "product n = {} variant {} on {}x{}: sup-norm {}, annihilated {annihilated}, wrote {}",
        spec.n,
        spec.variant,
        grid.n_polar(),
        grid.n_azimuth(),
        fmt_num(sup),
        config.out.display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Property(failures.join("; ")))
    }
}

pub fn structure(config: &RunConfig) -> Result<(), CliError> {
    let grid = grid(config)?;
    let spec = config.spec()?;
    let start = Instant::now();
    let t = structure_constants_with(&spec, config.bandlimit, &grid)?;
    let secs = start.elapsed().as_secs_f64();
    write_file(&config.out, "structure.csv", |w| write_structure_csv(w, &t))?;
    let mut m = manifest("structure", config, config.bandlimit, secs);
    m.spec = Some(spec);
    m.skipped_weight = Some(t.skipped_weight);
    save_manifest(config, &m)?;
    println!("structure tensor n = {}, L = {}: {} entries, wrote {}", t.n, t.l_max, t.entries.len(), config.out.display());
    Ok(())
}

pub fn verify(config: &RunConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let outcome = run_suite(&config.verify_config())?;
    let secs = start.elapsed().as_secs_f64();
    write_verify_outputs(&config.out, &outcome, secs)?;
    for c in &outcome.report.checks {
        println!(
            "[{}] criterion {} {}: defect {:.3e} (tolerance {:.0e}, {} samples)",
            if c.passed { "PASS" } else { "FAIL" },
            c.criterion,
            c.name,
            c.max_defect,
            c.tolerance,
            c.samples
        );
    }
    let failed: Vec<String> = outcome.report.failures().map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        println!("all {} checks passed in {secs:.1} s", outcome.report.checks.len());
        Ok(())
    } else {
        Err(CliError::Property(format!("failed checks: {}", failed.join(", "))))
    }
}

/// Normalized `1 + Y_{2,0}`.
fn default_scan_input() -> BandlimitedFunction {
    let mut f = BandlimitedFunction::basis(2, 2, 0).expect("degree 2 basis");
    f.set(0, 0, Complex64::new(1.0, 0.0));
    f.scaled(Complex64::new(1.0 / f.norm(), 0.0))
}

pub fn limit_scan(config: &RunConfig) -> Result<(), CliError> {
    let f = match &config.f {
        Some(p) => load_function(p)?,
        None => default_scan_input(),
    };
    let g = match &config.g {
        Some(p) => load_function(p)?,
        None => f.clone(),
    };
    let scan = LimitScanConfig {
        ks: config.ks.clone(),
        normalization: config.normalization,
        ..LimitScanConfig::default()
    };
    let start = Instant::now();
    let rows = semiclassical::limit_scan(&f, &g, &scan)?;
    let secs = start.elapsed().as_secs_f64();
    write_file(&config.out, "limit_scan.csv", |w| write_limit_scan_csv(w, &rows))?;
    let mut m = manifest("limit-scan", config, f.l_max().max(g.l_max()), secs);
    m.n_polar = scan.output_grid.0;
    m.n_azimuth = scan.output_grid.1;
    note(&mut m, "normalization", format!("{:?}", scan.normalization));
    for r in &rows {
        note(&mut m, &format!("k{}_n_polar", r.k), r.n_polar);
        note(&mut m, &format!("k{}_unit_ratio", r.k), fmt_num(r.unit_ratio));
        println!(
            "k = {:>3}  n_polar = {:>4}  rel_error = {}  unit_ratio = {}",
            r.k,
            r.n_polar,
            r.rel_error.map(fmt_num).unwrap_or_else(|| "undefined".into()),
            fmt_num(r.unit_ratio)
        );
    }
    save_manifest(config, &m)?;
    Ok(())
}

pub fn grid_dump(config: &RunConfig) -> Result<(), CliError> {
    let grid = grid(config)?;
    write_file(&config.out, "grid.csv", |w| write_grid_csv(w, &grid))?;
    println!("grid {}x{}: {} nodes, wrote {}", grid.n_polar(), grid.n_azimuth(), grid.len(), config.out.display());
    Ok(())
}
