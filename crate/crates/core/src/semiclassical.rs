//! Large-`n` behaviour of the even product against the pointwise product.
//!
//! Direct evaluation costs `O(N^2)` kernel calls per output point, which is
//! out of reach on the fine grids large `n` needs. Rotation invariance gives
//! `(f * g)(R e_z) = int int f(R u) g(R v) K(u, v, e_z) du dv`, and with the
//! output at the pole the kernel between rings depends only on the azimuth
//! difference. [`PoleKernel`] evaluates that form on a product grid as a
//! circular correlation per pair of rings. [`ScanKernel`] integrates the
//! azimuth adaptively and treats the `1 / rho` singularity at the pair of
//! equators in polar coordinates; plain product rules converge only like
//! `1 / n_polar` there.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{project, BandlimitedFunction};
use crate::geometry::{MidpointTriple, Rotation, SpherePoint};
use crate::kernels::{trig_kernel, KernelSpec};
use crate::quadrature::{azimuth_table, QuadratureGrid};
use crate::summation::ComplexSum;

/// Azimuthal Fourier transform of the kernel with output at the north pole.
pub struct PoleKernel<'g> {
    grid: &'g QuadratureGrid,
    n: u32,
    l_max: usize,
    /// `kh[(a * P + b) * (2L + 1) + (mu + L)]`
    kh: Vec<Complex64>,
    skipped: usize,
}

impl<'g> PoleKernel<'g> {
    pub fn new(grid: &'g QuadratureGrid, spec: &KernelSpec, l_max: usize) -> Result<Self> {
        spec.validate()?;
        let na = grid.n_azimuth();
        if na <= 2 * l_max {
            return Err(Error::InsufficientExactness {
                required: 2 * l_max + 1,
                available: na,
            });
        }
        let p = grid.n_polar();
        let width = 2 * l_max + 1;
        let nodes = grid.nodes();
        let az = azimuth_table(na);
        let amplitude = spec.effective_amplitude();
        let odd = spec.n % 2 == 1;
        let rows: Vec<(Vec<Complex64>, usize)> = (0..p * p)
            .into_par_iter()
            .map(|ab| {
                let (a, b) = (ab / p, ab % p);
                let v = nodes[grid.index(b, 0)];
                let mut skipped = 0;
                let kt: Vec<f64> = (0..na)
                    .map(|e| {
                        let t = MidpointTriple::classify(nodes[grid.index(a, e)], v, SpherePoint::E_Z, spec.eps_sign);
                        trig_kernel(t.invariants(), spec.n, amplitude, spec.eps_det).unwrap_or_else(|_| {
                            skipped += 1;
                            0.0
                        })
                    })
                    .collect();
                let row = (0..width)
                    .map(|t| {
                        let mu = t as i64 - l_max as i64;
                        let mut s = ComplexSum::new();
                        for (e, k) in kt.iter().enumerate() {
                            let (c, sn) = az[(mu.rem_euclid(na as i64) as usize * e) % na];
                            s.add(Complex64::new(c, -sn) * *k);
                        }
                        let v = s.value();
                        if odd {
                            Complex64::new(-v.im, v.re)
                        } else {
                            v
                        }
                    })
                    .collect();
                (row, skipped)
            })
            .collect();
        let skipped = rows.iter().map(|r| r.1).sum();
        let kh = rows.into_iter().flat_map(|r| r.0).collect();
        Ok(PoleKernel {
            grid,
            n: spec.n,
            l_max,
            kh,
            skipped,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of skipped `(u, v)` node pairs.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Per-ring azimuthal transforms `hat[a][mu + L]` of `h(R node)`.
    fn ring_transforms(&self, h: &BandlimitedFunction, rot: &Rotation) -> Vec<Complex64> {
        let g = self.grid;
        let na = g.n_azimuth();
        let width = 2 * self.l_max + 1;
        let az = azimuth_table(na);
        let mut out = vec![Complex64::new(0.0, 0.0); g.n_polar() * width];
        for a in 0..g.n_polar() {
            let vals: Vec<Complex64> = (0..na).map(|d| h.value_at(&rot.apply(&g.nodes()[g.index(a, d)]))).collect();
            for t in 0..width {
                let mu = t as i64 - self.l_max as i64;
                let mut s = ComplexSum::new();
                for (d, v) in vals.iter().enumerate() {
                    let (c, sn) = az[(mu.rem_euclid(na as i64) as usize * d) % na];
                    s.add(v * Complex64::new(c, -sn));
                }
                out[a * width + t] = s.value();
            }
        }
        out
    }

    /// `(f * g)(x)` for `f`, `g` of degree at most `l_max`.
    pub fn product_at(&self, f: &BandlimitedFunction, g: &BandlimitedFunction, x: &SpherePoint) -> Result<Complex64> {
        for h in [f, g] {
            if h.l_max() > self.l_max {
                return Err(Error::InvalidArgument(format!(
                    "input degree {} exceeds pole kernel bandlimit {}",
                    h.l_max(),
                    self.l_max
                )));
            }
        }
        let rot = Rotation::pole_to(x);
        let fh = self.ring_transforms(f, &rot);
        let gh = self.ring_transforms(g, &rot);
        let p = self.grid.n_polar();
        let width = 2 * self.l_max + 1;
        let ring_w: Vec<f64> = (0..p).map(|a| self.grid.weights()[self.grid.index(a, 0)]).collect();
        let mut s = ComplexSum::new();
        for a in 0..p {
            for b in 0..p {
                let kh = &self.kh[(a * p + b) * width..(a * p + b + 1) * width];
                let mut inner = Complex64::new(0.0, 0.0);
                for t in 0..width {
                    // F(-mu) G(mu) K(mu)
                    inner += fh[a * width + (width - 1 - t)] * gh[b * width + t] * kh[t];
                }
                s.add(inner * (ring_w[a] * ring_w[b]));
            }
        }
        Ok(s.value() / self.grid.n_azimuth() as f64)
    }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];
const MAX_DEPTH: u32 = 18;

/// Cosine moments `int_a^b cos(mu e) k(e) de` for `mu = 0..out.len()`, by
/// adaptive 7/15-point Gauss-Kronrod with absolute tolerance `tol` per panel.
fn cosine_moments(k: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32, out: &mut [f64]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut es = [0.0; 15];
    let mut ks = [0.0; 15];
    for i in 0..7 {
        es[2 * i] = c - h * GK_X[i];
        es[2 * i + 1] = c + h * GK_X[i];
    }
    es[14] = c;
    for (e, v) in es.iter().zip(ks.iter_mut()) {
        *v = k(*e);
    }
    let mut kron = vec![0.0; out.len()];
    let mut err: f64 = 0.0;
    for (mu, slot) in kron.iter_mut().enumerate() {
        let f = |i: usize| (mu as f64 * es[i]).cos() * ks[i];
        let mut rk = GK_WK[7] * f(14);
        let mut rg = GK_WG[3] * f(14);
        for i in 0..7 {
            let pair = f(2 * i) + f(2 * i + 1);
            rk += GK_WK[i] * pair;
            if i % 2 == 1 {
                rg += GK_WG[i / 2] * pair;
            }
        }
        *slot = rk * h;
        err = err.max(((rk - rg) * h).abs());
    }
    if err <= tol || depth >= MAX_DEPTH || !err.is_finite() {
        for (o, v) in out.iter_mut().zip(&kron) {
            *o += v;
        }
        return;
    }
    cosine_moments(k, a, c, tol, depth + 1, out);
    cosine_moments(k, c, b, tol, depth + 1, out);
}

/// One node of the `(cos theta_u, cos theta_v)` rule.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairNode {
    xu: f64,
    xv: f64,
    weight: f64,
}

/// Product rule on `[-1, 1]^2` in polar coordinates about the origin, where
/// the azimuthally integrated kernel has a `1 / rho` singularity. Each
/// quadrant is split at `psi = pi / 4` and `rho = 1`, the circle on which the
/// kink of the kernel in the relative azimuth enters the integration range.
fn pair_rule(m: usize) -> Vec<PairNode> {
    let (x, w) = crate::quadrature::gauss_legendre(m);
    let unit: Vec<(f64, f64)> = x.iter().zip(&w).map(|(x, w)| (0.5 + 0.5 * x, 0.5 * w)).collect();
    let mut nodes = Vec::with_capacity(16 * m * m);
    for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        for (p0, p1) in [(0.0, PI / 4.0), (PI / 4.0, PI / 2.0)] {
            for &(tp, wp) in &unit {
                let psi = p0 + (p1 - p0) * tp;
                let (sn, cs) = psi.sin_cos();
                let rho_max = 1.0 / cs.max(sn);
                for (r0, r1) in [(0.0, 1.0), (1.0, rho_max)] {
                    for &(tr, wr) in &unit {
                        let rho = r0 + (r1 - r0) * tr;
                        nodes.push(PairNode {
                            xu: sx * rho * cs,
                            xv: sy * rho * sn,
                            weight: (p1 - p0) * wp * (r1 - r0) * wr * rho,
                        });
                    }
                }
            }
        }
    }
    nodes
}

/// Even-`n` kernel with the output at the north pole, reduced to its cosine
/// moments in the relative azimuth of the two inputs.
///
/// With `u = (x_u, e)` and `v = (x_v, 0)`, the kernel depends on the azimuths
/// only through their difference `e`, and is even in `e`. For inputs
/// band-limited to degree `L`,
/// `(f * g)(R e_z) = 2 pi sum_{pairs} w sum_mu a_mu(x_u) b_{-mu}(x_v) K_mu(x_u, x_v)`
/// where `a_mu`, `b_mu` are the azimuthal Fourier coefficients of `f(R .)`,
/// `g(R .)` on the rings `x_u`, `x_v`, and `K_mu = int_0^{2 pi} cos(mu e) K de`.
pub struct ScanKernel {
    n: u32,
    l_max: usize,
    nodes: Vec<PairNode>,
    /// `moments[node * (L + 1) + mu]`
    moments: Vec<f64>,
}

impl ScanKernel {
    /// `panel_nodes` Gauss points per direction in each of the 16 panels.
    pub fn new(spec: &KernelSpec, l_max: usize, panel_nodes: usize, tol: f64) -> Result<Self> {
        spec.validate()?;
        if spec.n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("scan kernel needs even n, got {}", spec.n)));
        }
        if panel_nodes == 0 || !(tol > 0.0) {
            return Err(Error::InvalidArgument("scan kernel needs panel_nodes >= 1 and tol > 0".into()));
        }
        let nodes = pair_rule(panel_nodes);
        let amplitude = spec.effective_amplitude();
        let width = l_max + 1;
        let moments: Vec<f64> = nodes
            .par_iter()
            .flat_map_iter(|node| {
                let su = ((1.0 - node.xu) * (1.0 + node.xu)).sqrt();
                let sv = ((1.0 - node.xv) * (1.0 + node.xv)).sqrt();
                let v = SpherePoint::new(sv, 0.0, node.xv).expect("unit ring point");
                let k = |e: f64| {
                    let (sn, cs) = e.sin_cos();
                    let u = SpherePoint::new(su * cs, su * sn, node.xu).expect("unit ring point");
                    let t = MidpointTriple::classify(u, v, SpherePoint::E_Z, spec.eps_sign);
                    trig_kernel(t.invariants(), spec.n, amplitude, spec.eps_det).unwrap_or(0.0)
                };
                let mut breaks = vec![0.0, PI / 2.0, PI];
                let c = -node.xu * node.xv / (su * sv);
                if c.abs() < 1.0 {
                    breaks.push(c.acos());
                }
                breaks.sort_by(f64::total_cmp);
                let mut out = vec![0.0; width];
                for w in breaks.windows(2) {
                    if w[1] > w[0] {
                        cosine_moments(&k, w[0], w[1], tol, 0, &mut out);
                    }
                }
                out.into_iter().map(|x| 2.0 * x)
            })
            .collect();
        Ok(ScanKernel {
            n: spec.n,
            l_max,
            nodes,
            moments,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of `(x_u, x_v)` nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(f * g)(x)` for `f`, `g` of degree at most `l_max`.
    pub fn product_at(&self, f: &BandlimitedFunction, g: &BandlimitedFunction, x: &SpherePoint) -> Result<Complex64> {
        for h in [f, g] {
            if h.l_max() > self.l_max {
                return Err(Error::InvalidArgument(format!(
                    "input degree {} exceeds scan kernel bandlimit {}",
                    h.l_max(),
                    self.l_max
                )));
            }
        }
        let rot = Rotation::pole_to(x);
        let na = 2 * self.l_max + 2;
        let az = azimuth_table(na);
        let l = self.l_max as i64;
        // azimuthal coefficients mu = -L..=L of h(R (x, phi))
        let ring = |h: &BandlimitedFunction, z: f64| -> Vec<Complex64> {
            let s = ((1.0 - z) * (1.0 + z)).sqrt();
            let vals: Vec<Complex64> = az
                .iter()
                .map(|&(c, sn)| h.value_at(&rot.apply(&SpherePoint::from_unit([s * c, s * sn, z]))))
                .collect();
            (-l..=l)
                .map(|mu| {
                    let mut acc = ComplexSum::new();
                    for (d, v) in vals.iter().enumerate() {
                        let (c, sn) = az[(mu.rem_euclid(na as i64) as usize * d) % na];
                        acc.add(v * Complex64::new(c, -sn));
                    }
                    acc.value() / na as f64
                })
                .collect()
        };
        let width = self.l_max + 1;
        let mut total = ComplexSum::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let a = ring(f, node.xu);
            let b = ring(g, node.xv);
            let km = &self.moments[i * width..(i + 1) * width];
            let mut inner = Complex64::new(0.0, 0.0);
            for mu in -l..=l {
                inner += a[(l + mu) as usize] * b[(l - mu) as usize] * km[mu.unsigned_abs() as usize];
            }
            total.add(inner * node.weight);
        }
        Ok(total.value() * (2.0 * PI))
    }
}

/// How the raw product is scaled before comparison with `f g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Multiply by `k^2 / (16 pi^2)`.
    Flat,
    /// Divide by the measured value of `1 * 1`.
    UnitConstant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitScanConfig {
    pub ks: Vec<u32>,
    /// Polar resolution `n_polar = polar_per_k * k`, split as `n_polar / 2`
    /// Gauss points per direction per panel of the pair rule.
    pub polar_per_k: usize,
    pub min_polar: usize,
    /// Absolute tolerance of the azimuthal kernel moments.
    pub tolerance: f64,
    pub output_grid: (usize, usize),
    pub normalization: Normalization,
}

impl Default for LimitScanConfig {
    fn default() -> Self {
        LimitScanConfig {
            ks: vec![1, 2, 4, 8, 16],
            polar_per_k: 8,
            min_polar: 8,
            tolerance: 1e-10,
            output_grid: (5, 10),
            normalization: Normalization::Flat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitScanRow {
    pub k: u32,
    pub n_polar: usize,
    /// `None` when `f g` vanishes identically.
    pub rel_error: Option<f64>,
    /// Measured `(1 * 1)` times `k^2 / (16 pi^2)`.
    pub unit_ratio: f64,
}

/// Relative `L^2` error of the scaled `f *^{2k} g` against `f g` for each `k`.
pub fn limit_scan(f: &BandlimitedFunction, g: &BandlimitedFunction, config: &LimitScanConfig) -> Result<Vec<LimitScanRow>> {
    let l_in = f.l_max().max(g.l_max());
    let l_out = 2 * l_in;
    let out_grid = QuadratureGrid::new(config.output_grid.0, config.output_grid.1)?;
    if out_grid.exact_degree() < 2 * l_out {
        return Err(Error::InsufficientExactness {
            required: 2 * l_out,
            available: out_grid.exact_degree(),
        });
    }
    let fv = f.evaluate(&out_grid);
    let gv = g.evaluate(&out_grid);
    let fg: Vec<Complex64> = fv.iter().zip(&gv).map(|(a, b)| a * b).collect();
    let reference = project(&fg, &out_grid, l_out)?;
    let ref_norm = reference.norm();
    let one = BandlimitedFunction::constant(l_in, Complex64::new(1.0, 0.0));

    let mut rows = Vec::with_capacity(config.ks.len());
    for &k in &config.ks {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        let p = (config.polar_per_k * k as usize).max(config.min_polar).max(2);
        let spec = KernelSpec::global(2 * k)?;
        let kernel = ScanKernel::new(&spec, l_in, p / 2, config.tolerance)?;
        let flat = (k as f64).powi(2) / (16.0 * PI * PI);
        let unit = kernel.product_at(&one, &one, &SpherePoint::E_Z)?.re * flat;
        let scale = match config.normalization {
            Normalization::Flat => flat,
            Normalization::UnitConstant => flat / unit,
        };
        let rel_error = if ref_norm == 0.0 {
            None
        } else {
            let vals: Vec<Complex64> = out_grid
                .nodes()
                .par_iter()
                .map(|x| kernel.product_at(f, g, x).map(|v| v * scale))
                .collect::<Result<_>>()?;
            let approx = project(&vals, &out_grid, l_out)?;
            let diff = approx.add(&reference.scaled(Complex64::new(-1.0, 0.0)));
            Some(diff.norm() / ref_norm)
        };
        log::info!("limit scan k = {k}: n_polar {p}, rel_error {rel_error:?}, unit ratio {unit}");
        rows.push(LimitScanRow {
            k,
            n_polar: p,
            rel_error,
            unit_ratio: unit,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{random_bandlimited, ParityFilter};
    use crate::product::product_at;

    #[test]
    fn pole_method_matches_direct_sum_at_the_pole() {
        let grid = QuadratureGrid::new(6, 12).unwrap();
        let f = random_bandlimited(2, 1, ParityFilter::None, false);
        let g = random_bandlimited(2, 2, ParityFilter::None, false);
        for n in 1..=4 {
            let spec = KernelSpec::global(n).unwrap();
            let pole = PoleKernel::new(&grid, &spec, 2).unwrap();
            let a = pole.product_at(&f, &g, &SpherePoint::E_Z).unwrap();
            let b = product_at(&spec, &f, &g, &SpherePoint::E_Z, &grid).unwrap();
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()), "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_input_gives_undefined_error() {
        let f = BandlimitedFunction::zero(2);
        let g = random_bandlimited(2, 2, ParityFilter::NEven(2), true);
        let config = LimitScanConfig {
            ks: vec![1],
            ..LimitScanConfig::default()
        };
        let rows = limit_scan(&f, &g, &config).unwrap();
        assert_eq!(rows[0].rel_error, None);
    }

    #[test]
    fn scan_kernel_converges_in_panel_nodes() {
        let spec = KernelSpec::global(4).unwrap();
        let one = BandlimitedFunction::constant(0, Complex64::new(1.0, 0.0));
        let coarse = ScanKernel::new(&spec, 0, 8, 1e-10).unwrap();
        let fine = ScanKernel::new(&spec, 0, 16, 1e-10).unwrap();
        let a = coarse.product_at(&one, &one, &SpherePoint::E_Z).unwrap();
        let b = fine.product_at(&one, &one, &SpherePoint::E_Z).unwrap();
        assert!((a - b).norm() < 3e-4 * b.norm(), "{a} vs {b}");
        assert!(b.im.abs() < 1e-12 * b.re.abs());
    }

    #[test]
    fn scan_kernel_agrees_with_grid_sum() {
        let spec = KernelSpec::global(2).unwrap();
        let f = BandlimitedFunction::basis(2, 2, 1).unwrap();
        let g = BandlimitedFunction::constant(2, Complex64::new(1.0, 0.0));
        let x = SpherePoint::from_angles(0.7, 1.9);
        let scan = ScanKernel::new(&spec, 2, 12, 1e-10).unwrap();
        let grid = QuadratureGrid::new(96, 192).unwrap();
        let pole = PoleKernel::new(&grid, &spec, 2).unwrap();
        let a = scan.product_at(&f, &g, &x).unwrap();
        let b = pole.product_at(&f, &g, &x).unwrap();
        // the grid sum carries an O(1 / n_polar) error
        assert!((a - b).norm() < 0.03 * a.norm(), "{a} vs {b}");
    }

    #[test]
    fn scan_kernel_rejects_odd_n() {
        let spec = KernelSpec::global(3).unwrap();
        assert!(ScanKernel::new(&spec, 2, 4, 1e-10).is_err());
    }
}
