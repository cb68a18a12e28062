//! Executable property suite.
//!
//! Every check draws its samples from a ChaCha stream seeded from the
//! configuration, and every product is a fixed-order sum, so a report is a
//! pure function of the configuration.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::Matrix6;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::function_space::{parity_decompose, random_bandlimited, BandlimitedFunction, ParityFilter};
use crate::geometry::{
    amplitude_a, classify_triple, midpoints_from_vertices, signed_area_from_vertices, triangle_area_s,
    vertices_from_midpoints, DomainLabel, FlipPattern, MidpointTriple, Rotation, SpherePoint, TriangleVertices,
    EPS_DET, EPS_SIGN,
};
use crate::kernels::{global_kernel, parity_sign, partial_kernel, phase_factor, Amplitude};
use crate::product::{partial_sweep, trig_sweep, NodePair, PartialProducts};
use crate::quadrature::QuadratureGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Orders for the product checks.
    pub ns: Vec<u32>,
    /// Orders for the kernel identity checks.
    pub kernel_ns: Vec<u32>,
    pub grid: (usize, usize),
    pub l_max: usize,
    pub seed: u64,
    pub triangles: usize,
    pub jacobian_samples: usize,
    pub kernel_triples: usize,
    pub partition_samples: usize,
    pub eps_sign: f64,
    pub eps_det: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            ns: vec![1, 2, 3, 4],
            kernel_ns: (1..=6).collect(),
            grid: (16, 32),
            l_max: 4,
            seed: 1,
            triangles: 1000,
            jacobian_samples: 100,
            kernel_triples: 10_000,
            partition_samples: 1_000_000,
            eps_sign: EPS_SIGN,
            eps_det: EPS_DET,
        }
    }
}

/// Verdict for one property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    /// Acceptance group the property belongs to.
    pub criterion: u32,
    pub name: String,
    pub passed: bool,
    pub max_defect: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

impl CheckReport {
    pub fn new(criterion: u32, name: impl Into<String>, max_defect: f64, tolerance: f64, samples: usize, detail: impl Into<String>) -> Self {
        CheckReport {
            criterion,
            name: name.into(),
            passed: max_defect.is_finite() && max_defect <= tolerance && samples > 0,
            max_defect,
            tolerance,
            samples,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Global product of the random pair `(f, g)` kept as a data artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRecord {
    pub n: u32,
    pub amplitude: Amplitude,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: VerifyReport,
    pub products: Vec<ProductRecord>,
    /// Wall time per criterion, seconds.
    pub timings: Vec<(u32, f64)>,
}

/// Kernel under test: `None` marks a skipped (boundary or singular) triple.
pub type KernelFn<'a> = dyn Fn(&[SpherePoint; 3], u32) -> Option<Complex64> + Sync + 'a;

/// The global kernel as a [`KernelFn`].
pub fn global_kernel_fn(eps_sign: f64, eps_det: f64) -> impl Fn(&[SpherePoint; 3], u32) -> Option<Complex64> + Sync {
    move |p: &[SpherePoint; 3], n: u32| {
        let t = classify_triple(p[0], p[1], p[2], eps_sign);
        let k = global_kernel(&t, n, eps_det);
        k.skipped.is_none().then_some(k.value)
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform point on the sphere.
    pub fn point(&mut self) -> SpherePoint {
        loop {
            let v = [self.normal(), self.normal(), self.normal()];
            if let Ok(p) = SpherePoint::new(v[0], v[1], v[2]) {
                return p;
            }
        }
    }

    pub fn triple(&mut self) -> [SpherePoint; 3] {
        [self.point(), self.point(), self.point()]
    }

    /// Uniform proper rotation.
    pub fn rotation(&mut self) -> Rotation {
        loop {
            let q = [self.normal(), self.normal(), self.normal(), self.normal()];
            if let Ok(r) = Rotation::from_quaternion(q[0], q[1], q[2], q[3]) {
                return r;
            }
        }
    }

    /// Uniform triple whose class is `W000` and whose Jacobian is regular.
    pub fn standard_triple(&mut self, eps_sign: f64, eps_det: f64) -> MidpointTriple {
        loop {
            let [a, b, c] = self.triple();
            let t = classify_triple(a, b, c, eps_sign);
            if t.label() == DomainLabel::W000 && t.one_minus_det_sq() >= eps_det {
                return t;
            }
        }
    }
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(4.0 * PI);
    d.min(4.0 * PI - d)
}

/// Oriented area, modulo `4 pi`, of the 2-chain bounded by the loop
/// `v0 -> v1 -> v2 -> v0`, with arc `k` (from `v_k` to `v_{k+1}`) taken the
/// long way round when `long[k]`. The arcs are cut into short pieces and the
/// signed areas of the thin triangles `(base, x_i, x_{i+1})` are summed, so
/// the result does not depend on the loop being simple.
pub fn loop_area(v: &[SpherePoint; 3], long: [bool; 3]) -> f64 {
    const PIECES: usize = 256;
    let mut path: Vec<[f64; 3]> = Vec::with_capacity(3 * PIECES + 1);
    for k in 0..3 {
        let (p, q) = (&v[k], &v[(k + 1) % 3]);
        let d = p.dot(q).clamp(-1.0, 1.0);
        let t = [q.x() - d * p.x(), q.y() - d * p.y(), q.z() - d * p.z()];
        let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        let (dir, len) = if long[k] { (-1.0 / tn, 2.0 * PI - d.acos()) } else { (1.0 / tn, d.acos()) };
        for i in 0..PIECES {
            let (sn, cs) = (len * i as f64 / PIECES as f64).sin_cos();
            path.push([
                cs * p.x() + sn * dir * t[0],
                cs * p.y() + sn * dir * t[1],
                cs * p.z() + sn * dir * t[2],
            ]);
        }
    }
    path.push(path[0]);
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    // base point as far as possible from the antipodes of the path
    let candidates = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    let base = candidates
        .iter()
        .max_by(|a, b| {
            let worst = |c: &[f64; 3]| path.iter().map(|x| dot(c, x)).fold(f64::INFINITY, f64::min);
            worst(a).total_cmp(&worst(b))
        })
        .expect("six candidates");
    let mut area = 0.0;
    for w in path.windows(2) {
        let (x, y) = (&w[0], &w[1]);
        let c = [x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]];
        area += 2.0 * dot(base, &c).atan2(1.0 + dot(base, x) + dot(x, y) + dot(y, base));
    }
    area
}

/// `1 / |det dG|` by central differences, where `G` maps vertices to
/// midpoints and both sides use orthonormal tangent frames.
pub fn fd_inverse_jacobian(v: &TriangleVertices, step: f64) -> Result<f64> {
    let frame = |p: &SpherePoint| {
        let e = if p.x().abs() < 0.5 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let d = p.x() * e[0] + p.y() * e[1] + p.z() * e[2];
        let t = [e[0] - d * p.x(), e[1] - d * p.y(), e[2] - d * p.z()];
        let n = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        let t1 = [t[0] / n, t[1] / n, t[2] / n];
        let t2 = [
            p.y() * t1[2] - p.z() * t1[1],
            p.z() * t1[0] - p.x() * t1[2],
            p.x() * t1[1] - p.y() * t1[0],
        ];
        [t1, t2]
    };
    let verts = [v.a, v.b, v.c];
    let base = midpoints_from_vertices(v, 0.0)?.points();
    let out_frames: Vec<[[f64; 3]; 2]> = base.iter().map(frame).collect();
    let mut jac = Matrix6::<f64>::zeros();
    for (k, vk) in verts.iter().enumerate() {
        for (d, t) in frame(vk).iter().enumerate() {
            let moved = |s: f64| -> Result<[SpherePoint; 3]> {
                let mut w = verts;
                w[k] = SpherePoint::new(vk.x() + s * t[0], vk.y() + s * t[1], vk.z() + s * t[2])?;
                Ok(midpoints_from_vertices(&TriangleVertices::new(w[0], w[1], w[2]), 0.0)?.points())
            };
            let (plus, minus) = (moved(step)?, moved(-step)?);
            for j in 0..3 {
                let diff = [
                    (plus[j].x() - minus[j].x()) / (2.0 * step),
                    (plus[j].y() - minus[j].y()) / (2.0 * step),
                    (plus[j].z() - minus[j].z()) / (2.0 * step),
                ];
                for (r, f) in out_frames[j].iter().enumerate() {
                    jac[(2 * j + r, 2 * k + d)] = diff[0] * f[0] + diff[1] * f[1] + diff[2] * f[2];
                }
            }
        }
    }
    Ok(1.0 / jac.determinant().abs())
}

/// Criterion 1: area oracle, vertex/midpoint round trip, Jacobian.
pub fn geometry_checks(config: &VerifyConfig) -> Vec<CheckReport> {
    let mut out = Vec::new();

    let mut s = Sampler::new(config.seed, 1);
    let (mut worst, mut used, mut rejected) = (0.0f64, 0, 0);
    while used < config.triangles {
        let [a, b, c] = s.triple();
        let v = TriangleVertices::new(a, b, c);
        let (Ok(t), Ok(excess)) = (midpoints_from_vertices(&v, config.eps_sign), signed_area_from_vertices(&v)) else {
            rejected += 1;
            continue;
        };
        match triangle_area_s(&t) {
            Ok(area) => {
                worst = worst.max(angle_diff(area, excess));
                used += 1;
            }
            Err(_) => rejected += 1,
        }
    }
    out.push(CheckReport::new(
        1,
        "area_matches_spherical_excess",
        worst,
        1e-9,
        used,
        format!("random vertex triangles; {rejected} degenerate draws skipped"),
    ));

    let mut s = Sampler::new(config.seed, 2);
    let (mut worst, mut used, mut failed) = (0.0f64, 0, 0);
    for _ in 0..config.triangles {
        let t = s.standard_triple(config.eps_sign, config.eps_det);
        let back = vertices_from_midpoints(&t, config.eps_det).and_then(|v| midpoints_from_vertices(&v, config.eps_sign));
        match back {
            Ok(r) => {
                let d = t
                    .points()
                    .iter()
                    .zip(r.points())
                    .map(|(p, q)| ((p.x() - q.x()).powi(2) + (p.y() - q.y()).powi(2) + (p.z() - q.z()).powi(2)).sqrt())
                    .fold(0.0, f64::max);
                worst = worst.max(d);
                used += 1;
            }
            Err(_) => failed += 1,
        }
    }
    if failed > 0 {
        worst = f64::INFINITY;
    }
    out.push(CheckReport::new(
        1,
        "vertex_midpoint_round_trip",
        worst,
        1e-10,
        used,
        format!("W000 midpoint triples; {failed} inversions failed"),
    ));

    let mut s = Sampler::new(config.seed, 3);
    let (mut worst, mut used) = (0.0f64, 0);
    while used < config.jacobian_samples {
        let [a, b, c] = s.triple();
        let v = TriangleVertices::new(a, b, c);
        let Ok(t) = midpoints_from_vertices(&v, config.eps_sign) else { continue };
        if t.label() != DomainLabel::W000 {
            continue;
        }
        let (Ok(amp), Ok(fd)) = (amplitude_a(&t, config.eps_det), fd_inverse_jacobian(&v, 1e-5)) else {
            continue;
        };
        worst = worst.max((amp - fd).abs() / amp);
        used += 1;
    }
    out.push(CheckReport::new(
        1,
        "amplitude_matches_fd_jacobian",
        worst,
        1e-4,
        used,
        "relative; central differences with step 1e-5",
    ));
    out
}

/// Symmetry, antipodal and rotation identities of an arbitrary kernel that
/// should behave like the global kernel.
pub fn kernel_symmetry_checks(kernel: &KernelFn<'_>, label: &str, config: &VerifyConfig) -> Vec<CheckReport> {
    let mut s = Sampler::new(config.seed, 4);
    let triples: Vec<[SpherePoint; 3]> = (0..config.kernel_triples).map(|_| s.triple()).collect();
    let rotations: Vec<Rotation> = (0..config.kernel_triples).map(|_| s.rotation()).collect();
    let mut cyclic = (0.0f64, 0usize);
    let mut reflect = (0.0f64, 0usize);
    let mut flip = (0.0f64, 0usize);
    let mut rotate = (0.0f64, 0usize);
    let bump = |acc: &mut (f64, usize), a: Option<Complex64>, b: Option<Complex64>| {
        if let (Some(a), Some(b)) = (a, b) {
            acc.0 = acc.0.max(rel_diff(a, b));
            acc.1 += 1;
        }
    };
    for &n in &config.kernel_ns {
        let sign = parity_sign(n);
        for (p, r) in triples.iter().zip(&rotations) {
            let [a, b, c] = *p;
            let k = kernel(p, n);
            bump(&mut cyclic, k, kernel(&[c, a, b], n));
            bump(&mut reflect, k, kernel(&[c, b, a], n).map(|v| v.conj()));
            bump(&mut flip, k.map(|v| v * sign), kernel(&[a, b, -c], n));
            bump(&mut rotate, k, kernel(&[r.apply(&a), r.apply(&b), r.apply(&c)], n));
        }
    }
    let ns = format!("{label}; n in {:?}", config.kernel_ns);
    vec![
        CheckReport::new(2, format!("{label}_cyclic_symmetry"), cyclic.0, 1e-12, cyclic.1, ns.clone()),
        CheckReport::new(2, format!("{label}_reflection_conjugate"), reflect.0, 1e-12, reflect.1, ns.clone()),
        CheckReport::new(2, format!("{label}_single_flip_parity"), flip.0, 1e-12, flip.1, ns.clone()),
        CheckReport::new(2, format!("{label}_rotation_invariance"), rotate.0, 1e-12, rotate.1, ns),
    ]
}

/// Criterion 2: kernel identities.
pub fn kernel_checks(config: &VerifyConfig) -> Vec<CheckReport> {
    let global = global_kernel_fn(config.eps_sign, config.eps_det);
    let mut out = kernel_symmetry_checks(&global, "global", config);

    let (eps_sign, eps_det) = (config.eps_sign, config.eps_det);
    let mut s = Sampler::new(config.seed, 5);
    let standard: Vec<MidpointTriple> = (0..config.kernel_triples).map(|_| s.standard_triple(eps_sign, eps_det)).collect();
    let mut worst = [0.0f64; 6];
    let mut counts = [0usize; 6];
    let mut bump = |i: usize, a: Result<Complex64>, b: Result<Complex64>| {
        if let (Ok(a), Ok(b)) = (a, b) {
            worst[i] = worst[i].max(rel_diff(a, b));
            counts[i] += 1;
        }
    };
    let k000 = |t: &MidpointTriple, n: u32| -> Result<Complex64> {
        let k = partial_kernel(t, FlipPattern::STANDARD, n, eps_det)?;
        Ok(k.value)
    };
    for &n in &config.kernel_ns {
        let sign = parity_sign(n);
        for t in &standard {
            let [a, b, c] = t.points();
            let e = phase_factor(t, n);
            let at = |x, y, z| classify_triple(x, y, z, eps_sign);
            // partial kernel on its own domain
            bump(0, k000(t, n), k000(&at(c, a, b), n));
            bump(1, k000(t, n), k000(&at(c, b, a), n).map(|v| v.conj()));
            bump(2, e.clone().map(|v| v * sign), phase_factor(&at(a, b, -c), n));
            bump(3, e.clone().map(|v| v.conj() * sign), phase_factor(&at(-a, -b, c), n));
            bump(4, e.clone().map(|v| v.conj()), phase_factor(&at(-a, -b, -c), n));
            // conjugate triangle: same midpoints, vertices -a, -b, -c joined by
            // long arcs; both areas from the same vertices
            if let Ok(v) = vertices_from_midpoints(t, eps_det) {
                let short = loop_area(&[v.a, v.b, v.c], [false; 3]);
                let conj = loop_area(&[-v.a, -v.b, -v.c], [true; 3]);
                let expected = Complex64::from_polar(1.0, -(n as f64) * short / 2.0) * sign;
                bump(5, Ok(expected), Ok(Complex64::from_polar(1.0, n as f64 * conj / 2.0)));
            }
        }
    }
    let ns = format!("W000 triples; n in {:?}", config.kernel_ns);
    let names = [
        "partial000_cyclic_symmetry",
        "partial000_reflection_conjugate",
        "phase_single_flip",
        "phase_double_flip",
        "phase_triple_flip",
        "conjugate_triangle_phase",
    ];
    for (i, name) in names.iter().enumerate() {
        out.push(CheckReport::new(2, *name, worst[i], 1e-12, counts[i], ns.clone()));
    }

    // one long side: midpoints (m1, m2, -m3) bound the loop with arc c -> a long
    let (mut worst, mut used) = (0.0f64, 0);
    for &n in &config.kernel_ns {
        for t in &standard {
            let [m1, m2, m3] = t.points();
            let w001 = classify_triple(m1, m2, -m3, eps_sign);
            let (Ok(v), Ok(e)) = (vertices_from_midpoints(t, eps_det), phase_factor(&w001, n)) else {
                continue;
            };
            let area = loop_area(&[v.a, v.b, v.c], [false, false, true]);
            worst = worst.max(rel_diff(e, Complex64::from_polar(1.0, n as f64 * area / 2.0)));
            used += 1;
        }
    }
    out.push(CheckReport::new(2, "one_long_side_phase", worst, 1e-9, used, ns));
    out
}

/// Criterion 7: the four classes partition the non-boundary triples.
pub fn partition_check(config: &VerifyConfig) -> Vec<CheckReport> {
    let mut s = Sampler::new(config.seed, 6);
    let (mut bad, mut boundary) = (0usize, 0usize);
    for _ in 0..config.partition_samples {
        let [a, b, c] = s.triple();
        let t = classify_triple(a, b, c, config.eps_sign);
        let (d12, d23, d31) = (a.dot(&b), b.dot(&c), c.dot(&a));
        if d12.abs().min(d23.abs()).min(d31.abs()) < config.eps_sign {
            boundary += 1;
            if !t.is_boundary() {
                bad += 1;
            }
            continue;
        }
        let (s12, s23, s31) = (d12 > 0.0, d23 > 0.0, d31 > 0.0);
        let members = [
            (s12 == s23 && s23 == s31, DomainLabel::W000),
            (s23 == s31 && s12 != s23, DomainLabel::W001),
            (s12 == s23 && s31 != s12, DomainLabel::W010),
            (s12 == s31 && s23 != s12, DomainLabel::W100),
        ];
        let hits: Vec<DomainLabel> = members.iter().filter(|m| m.0).map(|m| m.1).collect();
        if hits.len() != 1 || hits[0] != t.label() {
            bad += 1;
        }
    }
    let total = config.partition_samples;
    vec![
        CheckReport::new(7, "domain_partition", bad as f64, 0.0, total, "triples in zero or several classes, or misclassified"),
        CheckReport::new(
            7,
            "boundary_fraction",
            boundary as f64 / total.max(1) as f64,
            1e-3,
            total,
            format!("eps_sign = {:e}", config.eps_sign),
        ),
    ]
}

struct Inputs {
    f: BandlimitedFunction,
    g: BandlimitedFunction,
    odd: BandlimitedFunction,
    e1: BandlimitedFunction,
    e2: BandlimitedFunction,
}

fn inputs(config: &VerifyConfig, n: u32) -> Inputs {
    let base = config.seed.wrapping_mul(1000).wrapping_add(10 * n as u64);
    let f = random_bandlimited(config.l_max, base, ParityFilter::None, false);
    let g = random_bandlimited(config.l_max, base + 1, ParityFilter::None, false);
    let (e1, odd) = parity_decompose(&f, n);
    let (e2, _) = parity_decompose(&g, n);
    Inputs { f, g, odd, e1, e2 }
}

fn max_abs(values: impl Iterator<Item = Complex64>) -> f64 {
    values.map(|v| v.norm()).fold(0.0, f64::max)
}

/// Criteria 3, 4 and 6 for one amplitude over all `ns`, plus the
/// `(f, g)` products as data.
fn trig_checks(
    config: &VerifyConfig,
    grid: &QuadratureGrid,
    amplitude: Amplitude,
    out: &mut Vec<CheckReport>,
    records: &mut Vec<ProductRecord>,
    even: &mut Vec<(u32, Vec<Complex64>)>,
) -> Result<()> {
    let (mut comm, mut annihilate, mut parity, mut parity_even, mut skipped) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut samples = 0;
    let anti = grid.antipode_index();
    for &n in &config.ns {
        let inp = inputs(config, n);
        let vals: Vec<Vec<Complex64>> = [&inp.f, &inp.g, &inp.odd, &inp.e1, &inp.e2].iter().map(|h| h.evaluate(grid)).collect();
        let (f, g, h, e1, e2) = (&vals[0], &vals[1], &vals[2], &vals[3], &vals[4]);
        let pairs: [NodePair<'_>; 5] = [(f, g), (g, f), (h, g), (g, h), (e1, e2)];
        let (p, skip) = trig_sweep(grid, &pairs, n, amplitude, config.eps_sign, config.eps_det)?;
        let sign = parity_sign(n);
        let fg_norm = inp.f.norm() * inp.g.norm();
        comm = comm.max(max_abs(p[0].iter().zip(&p[1]).map(|(a, b)| a - b * sign)) / fg_norm);
        let hg = inp.odd.norm() * inp.g.norm();
        if hg > 0.0 {
            annihilate = annihilate.max(max_abs(p[2].iter().chain(&p[3]).copied()) / hg);
        }
        let defect = |v: &[Complex64]| max_abs((0..v.len()).map(|m| v[anti[m]] - v[m] * sign));
        parity = parity.max(defect(&p[0]) / fg_norm);
        parity_even = parity_even.max(defect(&p[4]) / fg_norm);
        skipped = skipped.max(skip / (16.0 * PI * PI));
        samples += grid.len();
        if amplitude == Amplitude::Jacobian {
            even.push((n, p[4].clone()));
        }
        records.push(ProductRecord {
            n,
            amplitude,
            values: p[0].clone(),
        });
    }
    let (c_main, c_parity) = if amplitude == Amplitude::Jacobian { (3, 4) } else { (6, 6) };
    let tag = format!("[{amplitude}]");
    let detail = format!("grid {}x{}, L = {}, n in {:?}", grid.n_polar(), grid.n_azimuth(), config.l_max, config.ns);
    out.push(CheckReport::new(c_main, format!("graded_commutativity{tag}"), comm, 1e-10, samples, detail.clone()));
    out.push(CheckReport::new(c_parity, format!("odd_factor_annihilation{tag}"), annihilate, 1e-10, samples, detail.clone()));
    out.push(CheckReport::new(c_parity, format!("output_parity{tag}"), parity, 1e-12, samples, detail.clone()));
    out.push(CheckReport::new(c_parity, format!("even_inputs_output_parity{tag}"), parity_even, 1e-12, samples, detail.clone()));
    out.push(CheckReport::new(c_main, format!("skipped_weight_fraction{tag}"), skipped, 1e-6, samples, detail));
    Ok(())
}

/// Criterion 5: partial products against the global product.
fn partial_checks(
    config: &VerifyConfig,
    grid: &QuadratureGrid,
    global: &[ProductRecord],
    even: &[(u32, Vec<Complex64>)],
    out: &mut Vec<CheckReport>,
) -> Result<()> {
    let anti = grid.antipode_index();
    let (mut mean_defect, mut restricted, mut reflection, mut table) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut samples = 0;
    for &n in &config.ns {
        let inp = inputs(config, n);
        let vals: Vec<Vec<Complex64>> = [&inp.f, &inp.g, &inp.e1, &inp.e2].iter().map(|h| h.evaluate(grid)).collect();
        let (f, g, e1, e2) = (&vals[0], &vals[1], &vals[2], &vals[3]);
        let pairs: [NodePair<'_>; 3] = [(f, g), (e1, e2), (e2, e1)];
        let parts: Vec<PartialProducts> = partial_sweep(grid, &pairs, n, config.eps_sign, config.eps_det)?;
        let (even12, even21) = (&parts[1], &parts[2]);
        let eg = even.iter().find(|r| r.0 == n).map(|r| r.1.clone()).unwrap_or_default();
        let sign = parity_sign(n);
        let scale = inp.f.norm() * inp.g.norm();

        let glob = global
            .iter()
            .find(|r| r.n == n && r.amplitude == Amplitude::Jacobian)
            .map(|r| r.values.clone())
            .unwrap_or_default();
        let mean = parts[0].mean();
        mean_defect = mean_defect.max(if glob.len() == mean.len() {
            max_abs(mean.iter().zip(&glob).map(|(a, b)| a - b)) / scale
        } else {
            f64::INFINITY
        });

        let p = even12.class(FlipPattern::STANDARD);
        let q = even21.class(FlipPattern::STANDARD);
        let restr: Vec<Complex64> = (0..grid.len()).map(|m| (p[m] + p[anti[m]] * sign) * 0.5).collect();
        restricted = restricted.max(if eg.len() == restr.len() {
            max_abs(restr.iter().zip(&eg).map(|(a, b)| a - b)) / scale
        } else {
            f64::INFINITY
        });
        reflection = reflection.max(max_abs((0..grid.len()).map(|m| q[m] - p[anti[m]])) / scale);

        // classes of n-even inputs: 000, 010, 100, 110 equal P; 001, 011, 101, 111 equal (-1)^n Q
        for c in FlipPattern::all() {
            let v = even12.class(c);
            let d = match c.index() {
                0b000 | 0b010 | 0b100 | 0b110 => max_abs(v.iter().zip(p).map(|(a, b)| a - b)),
                _ => max_abs(v.iter().zip(q).map(|(a, b)| a - b * sign)),
            };
            table = table.max(d / scale);
        }
        let c001 = even12.class(FlipPattern::new(false, false, true));
        table = table.max(max_abs((0..grid.len()).map(|m| c001[m] - p[anti[m]] * sign)) / scale);
        samples += grid.len();
    }
    let detail = format!("grid {}x{}, L = {}, n in {:?}", grid.n_polar(), grid.n_azimuth(), config.l_max, config.ns);
    out.push(CheckReport::new(5, "partial_mean_equals_global", mean_defect, 1e-10, samples, detail.clone()));
    out.push(CheckReport::new(5, "restricted_equals_global", restricted, 1e-10, samples, detail.clone()));
    out.push(CheckReport::new(5, "swap_reflection_identity", reflection, 1e-10, samples, detail.clone()));
    out.push(CheckReport::new(5, "partial_class_equivalences", table, 1e-10, samples, detail));
    Ok(())
}

/// Runs every check at the scale given by `config`.
pub fn run_suite(config: &VerifyConfig) -> Result<SuiteOutcome> {
    let grid = QuadratureGrid::new(config.grid.0, config.grid.1)?;
    let mut checks = Vec::new();
    let mut timings = Vec::new();
    let mut records = Vec::new();
    let mut even = Vec::new();

    let t = Instant::now();
    checks.extend(geometry_checks(config));
    timings.push((1, t.elapsed().as_secs_f64()));

    let t = Instant::now();
    checks.extend(kernel_checks(config));
    timings.push((2, t.elapsed().as_secs_f64()));

    for amplitude in [Amplitude::Jacobian, Amplitude::Unit, Amplitude::JacobianScaled] {
        let t = Instant::now();
        trig_checks(config, &grid, amplitude, &mut checks, &mut records, &mut even)?;
        let c = if amplitude == Amplitude::Jacobian { 3 } else { 6 };
        timings.push((c, t.elapsed().as_secs_f64()));
    }

    let t = Instant::now();
    partial_checks(config, &grid, &records, &even, &mut checks)?;
    timings.push((5, t.elapsed().as_secs_f64()));

    let t = Instant::now();
    checks.extend(partition_check(config));
    timings.push((7, t.elapsed().as_secs_f64()));

    checks.sort_by_key(|c| c.criterion);
    Ok(SuiteOutcome {
        report: VerifyReport {
            config: config.clone(),
            checks,
        },
        products: records,
        timings,
    })
}
