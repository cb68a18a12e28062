//! Skewed products by direct double quadrature.
//!
//! For every output point `m` the engine sums `w' w'' f(m') g(m'') K(m', m'', m)`
//! over all node pairs. Pairs are visited in blocks `{i, -i} x {j, -j}`: the
//! four kernels of a block are evaluated independently and the four terms are
//! combined as `(t(i,j) + t(-i,j)) + (t(i,-j) + t(-i,-j))` before entering a
//! compensated sum. Since the global kernel changes exactly by `(-1)^n` under
//! each single flip, a factor of the wrong parity cancels inside every block
//! without rounding, and every output obeys `r(-m) = (-1)^n r(m)` bit for bit.
//!
//! Work is parallel over output points; each output is a sequential sum, so
//! results do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{num_coeffs, project, BandlimitedFunction, HarmonicTable};
use crate::geometry::{cross3, det_from_forms, dot3, FlipPattern, SpherePoint, TripleInvariants, Vec3};
use crate::kernels::{domain_kernel, parity_sign, trig_kernel, Amplitude, KernelSpec, SkipReason, Variant};
use crate::quadrature::QuadratureGrid;
use crate::summation::{ComplexSum, Neumaier};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductResult {
    pub values: Vec<Complex64>,
    /// `sum_m (w_m / 4 pi) sum_{skipped (i, j)} w_i w_j`; at most `(4 pi)^2`.
    pub skipped_weight: f64,
    pub spec: KernelSpec,
    pub n_polar: usize,
    pub n_azimuth: usize,
}

impl ProductResult {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max_m |r(-m) - (-1)^n r(m)|`.
    pub fn parity_defect(&self, grid: &QuadratureGrid) -> f64 {
        let s = parity_sign(self.spec.n);
        let a = grid.antipode_index();
        (0..self.values.len())
            .map(|i| (self.values[a[i]] - self.values[i] * s).norm())
            .fold(0.0, f64::max)
    }

    pub fn project(&self, grid: &QuadratureGrid, l_max: usize) -> Result<BandlimitedFunction> {
        project(&self.values, grid, l_max)
    }
}

/// All eight partial products of one pair, indexed by [`FlipPattern::index`].
#[derive(Debug, Clone)]
pub struct PartialProducts {
    pub classes: [Vec<Complex64>; 8],
    pub skipped_weight: f64,
}

impl PartialProducts {
    pub fn class(&self, c: FlipPattern) -> &[Complex64] {
        &self.classes[c.index()]
    }

    /// Mean of the eight classes.
    pub fn mean(&self) -> Vec<Complex64> {
        let len = self.classes[0].len();
        (0..len)
            .map(|m| {
                let mut s = ComplexSum::new();
                for c in &self.classes {
                    s.add(c[m]);
                }
                s.value() / 8.0
            })
            .collect()
    }
}

/// Per-output-point data shared by all pairs `(i, j)`.
struct Frame {
    x: Vec3,
    /// `p_k . x`
    dot_x: Vec<f64>,
    /// `p_k x x`
    cross_kx: Vec<Vec3>,
    /// `x x p_k`
    cross_xk: Vec<Vec3>,
}

impl Frame {
    fn new(nodes: &[SpherePoint], x: &SpherePoint) -> Self {
        let xv = *x.as_array();
        Frame {
            x: xv,
            dot_x: nodes.iter().map(|p| dot3(p.as_array(), &xv)).collect(),
            cross_kx: nodes.iter().map(|p| cross3(p.as_array(), &xv)).collect(),
            cross_xk: nodes.iter().map(|p| cross3(&xv, p.as_array())).collect(),
        }
    }

    /// Invariants of `(p_i, p_j, x)`, bit-identical to `MidpointTriple::classify`.
    #[inline(always)]
    fn triple(&self, nodes: &[SpherePoint], i: usize, j: usize, eps_sign: f64) -> TripleInvariants {
        let pi = nodes[i].as_array();
        let pj = nodes[j].as_array();
        let forms = [
            dot3(pi, &self.cross_kx[j]),
            dot3(pj, &self.cross_xk[i]),
            dot3(&self.x, &cross3(pi, pj)),
        ];
        TripleInvariants::from_parts(
            dot3(pi, pj),
            self.dot_x[j],
            self.dot_x[i],
            det_from_forms(forms),
            eps_sign,
        )
    }
}

/// Node values of the inputs of one product.
pub type NodePair<'a> = (&'a [Complex64], &'a [Complex64]);

fn check_pairs(grid: &QuadratureGrid, pairs: &[NodePair<'_>]) -> Result<()> {
    for (f, g) in pairs {
        for v in [f, g] {
            if v.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    actual: v.len(),
                });
            }
        }
    }
    Ok(())
}

/// Global/generalized products of all `pairs` at a single output point.
/// Returns the values and `sum_{skipped} w_i w_j`.
fn trig_point(
    grid: &QuadratureGrid,
    x: &SpherePoint,
    pairs: &[NodePair<'_>],
    n: u32,
    amplitude: Amplitude,
    eps_sign: f64,
    eps_det: f64,
) -> (Vec<Complex64>, f64) {
    let nodes = grid.nodes();
    let w = grid.weights();
    let anti = grid.antipode_index();
    let frame = Frame::new(nodes, x);
    let mut acc = vec![ComplexSum::new(); pairs.len()];
    let mut skipped = Neumaier::new();
    for &ii in grid.representatives() {
        let ia = anti[ii];
        for &jj in grid.representatives() {
            let ja = anti[jj];
            let idx = [(ii, jj), (ia, jj), (ii, ja), (ia, ja)];
            let mut k = [0.0; 4];
            for (slot, &(i, j)) in idx.iter().enumerate() {
                let inv = frame.triple(nodes, i, j, eps_sign);
                match trig_kernel(&inv, n, amplitude, eps_det) {
                    Ok(v) => k[slot] = v,
                    Err(_) => skipped.add(w[i] * w[j]),
                }
            }
            let ww = w[ii] * w[jj];
            for (a, (f, g)) in acc.iter_mut().zip(pairs) {
                let t0 = f[ii] * g[jj] * k[0];
                let t1 = f[ia] * g[jj] * k[1];
                let t2 = f[ii] * g[ja] * k[2];
                let t3 = f[ia] * g[ja] * k[3];
                a.add(((t0 + t1) + (t2 + t3)) * ww);
            }
        }
    }
    let odd = n % 2 == 1;
    let values = acc
        .iter()
        .map(|a| {
            let v = a.value();
            if odd {
                Complex64::new(-v.im, v.re)
            } else {
                v
            }
        })
        .collect();
    (values, skipped.value())
}

/// Eight partial products of all `pairs` at a single output point.
fn partial_point(
    grid: &QuadratureGrid,
    x: &SpherePoint,
    pairs: &[NodePair<'_>],
    n: u32,
    eps_sign: f64,
    eps_det: f64,
) -> (Vec<[Complex64; 8]>, f64) {
    let nodes = grid.nodes();
    let w = grid.weights();
    let s = parity_sign(n);
    let frame = Frame::new(nodes, x);
    let mut acc = vec![[ComplexSum::new(); 8]; pairs.len()];
    let mut skipped = Neumaier::new();
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            let inv = frame.triple(nodes, i, j, eps_sign);
            let kv = match domain_kernel(&inv, n, eps_det) {
                Ok(v) => v,
                Err(_) => {
                    skipped.add(w[i] * w[j]);
                    continue;
                }
            };
            let c = inv.label.flips().expect("non-boundary").index();
            let kc = kv.conj() * s;
            let ww = w[i] * w[j];
            for (a, (f, g)) in acc.iter_mut().zip(pairs) {
                let fg = f[i] * g[j] * ww;
                a[c].add(fg * kv);
                a[7 - c].add(fg * kc);
            }
        }
    }
    let values = acc.iter().map(|a| std::array::from_fn(|c| a[c].value())).collect();
    (values, skipped.value())
}

fn collect_skipped(grid: &QuadratureGrid, per_node: &[f64]) -> f64 {
    let mut s = Neumaier::new();
    for (w, k) in grid.weights().iter().zip(per_node) {
        s.add(w / FOUR_PI * k);
    }
    s.value()
}

/// Global or generalized products of several pairs with shared kernel
/// evaluations. `amplitude = Jacobian` gives the global product.
pub fn trig_sweep(
    grid: &QuadratureGrid,
    pairs: &[NodePair<'_>],
    n: u32,
    amplitude: Amplitude,
    eps_sign: f64,
    eps_det: f64,
) -> Result<(Vec<Vec<Complex64>>, f64)> {
    check_pairs(grid, pairs)?;
    let per_node: Vec<(Vec<Complex64>, f64)> = grid
        .nodes()
        .par_iter()
        .map(|x| trig_point(grid, x, pairs, n, amplitude, eps_sign, eps_det))
        .collect();
    let skipped = collect_skipped(grid, &per_node.iter().map(|p| p.1).collect::<Vec<_>>());
    let values = (0..pairs.len())
        .map(|b| per_node.iter().map(|p| p.0[b]).collect())
        .collect();
    Ok((values, skipped))
}

/// All eight partial products of several pairs.
pub fn partial_sweep(
    grid: &QuadratureGrid,
    pairs: &[NodePair<'_>],
    n: u32,
    eps_sign: f64,
    eps_det: f64,
) -> Result<Vec<PartialProducts>> {
    check_pairs(grid, pairs)?;
    let per_node: Vec<(Vec<[Complex64; 8]>, f64)> = grid
        .nodes()
        .par_iter()
        .map(|x| partial_point(grid, x, pairs, n, eps_sign, eps_det))
        .collect();
    let skipped = collect_skipped(grid, &per_node.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok((0..pairs.len())
        .map(|b| PartialProducts {
            classes: std::array::from_fn(|c| per_node.iter().map(|p| p.0[b][c]).collect()),
            skipped_weight: skipped,
        })
        .collect())
}

fn require_n_even(f: &BandlimitedFunction, n: u32, which: &str) -> Result<()> {
    if f.is_n_even(n) {
        Ok(())
    } else {
        Err(Error::ParityContract(format!(
            "{which} input has parity {} but the restricted product needs n_even({n})",
            f.parity_tag(n)
        )))
    }
}

/// Products of several function pairs under one kernel spec.
pub fn product_batch(
    spec: &KernelSpec,
    pairs: &[(&BandlimitedFunction, &BandlimitedFunction)],
    grid: &QuadratureGrid,
) -> Result<Vec<ProductResult>> {
    spec.validate()?;
    let l = pairs.iter().map(|(f, g)| f.l_max().max(g.l_max())).max().unwrap_or(0);
    grid.check_resolution(spec.n, l);
    if spec.variant == Variant::RestrictedEven {
        for (f, g) in pairs {
            require_n_even(f, spec.n, "first")?;
            require_n_even(g, spec.n, "second")?;
        }
    }
    let values: Vec<(Vec<Complex64>, Vec<Complex64>)> =
        pairs.iter().map(|(f, g)| (f.evaluate(grid), g.evaluate(grid))).collect();
    let refs: Vec<NodePair<'_>> = values.iter().map(|(f, g)| (f.as_slice(), g.as_slice())).collect();
    let wrap = |values: Vec<Complex64>, skipped_weight: f64| ProductResult {
        values,
        skipped_weight,
        spec: *spec,
        n_polar: grid.n_polar(),
        n_azimuth: grid.n_azimuth(),
    };
    match spec.variant {
        Variant::Global | Variant::Generalized => {
            let (vals, skipped) = trig_sweep(grid, &refs, spec.n, spec.effective_amplitude(), spec.eps_sign, spec.eps_det)?;
            Ok(vals.into_iter().map(|v| wrap(v, skipped)).collect())
        }
        Variant::Partial(c) => {
            let parts = partial_sweep(grid, &refs, spec.n, spec.eps_sign, spec.eps_det)?;
            Ok(parts
                .into_iter()
                .map(|mut p| {
                    let v = std::mem::take(&mut p.classes[c.index()]);
                    wrap(v, p.skipped_weight)
                })
                .collect())
        }
        Variant::RestrictedEven => {
            let parts = partial_sweep(grid, &refs, spec.n, spec.eps_sign, spec.eps_det)?;
            let s = parity_sign(spec.n);
            let anti = grid.antipode_index();
            Ok(parts
                .into_iter()
                .map(|p| {
                    let p000 = p.class(FlipPattern::STANDARD);
                    let v = (0..grid.len()).map(|m| (p000[m] + p000[anti[m]] * s) * 0.5).collect();
                    wrap(v, p.skipped_weight)
                })
                .collect())
        }
    }
}

/// Product of `f` and `g` under `spec`, on the nodes of `grid`.
pub fn product(
    spec: &KernelSpec,
    f: &BandlimitedFunction,
    g: &BandlimitedFunction,
    grid: &QuadratureGrid,
) -> Result<ProductResult> {
    Ok(product_batch(spec, &[(f, g)], grid)?.pop().expect("one pair"))
}

pub fn product_global(f: &BandlimitedFunction, g: &BandlimitedFunction, n: u32, grid: &QuadratureGrid) -> Result<ProductResult> {
    product(&KernelSpec::global(n)?, f, g, grid)
}

pub fn product_partial(
    f: &BandlimitedFunction,
    g: &BandlimitedFunction,
    n: u32,
    class: FlipPattern,
    grid: &QuadratureGrid,
) -> Result<ProductResult> {
    product(&KernelSpec::new(n, Variant::Partial(class))?, f, g, grid)
}

/// All eight partial products from a single sweep.
pub fn product_partials(
    f: &BandlimitedFunction,
    g: &BandlimitedFunction,
    n: u32,
    grid: &QuadratureGrid,
) -> Result<PartialProducts> {
    let spec = KernelSpec::new(n, Variant::Partial(FlipPattern::STANDARD))?;
    let (fv, gv) = (f.evaluate(grid), g.evaluate(grid));
    Ok(partial_sweep(grid, &[(&fv, &gv)], n, spec.eps_sign, spec.eps_det)?
        .pop()
        .expect("one pair"))
}

pub fn product_restricted_even(
    f: &BandlimitedFunction,
    g: &BandlimitedFunction,
    n: u32,
    grid: &QuadratureGrid,
) -> Result<ProductResult> {
    product(&KernelSpec::new(n, Variant::RestrictedEven)?, f, g, grid)
}

pub fn product_generalized(
    f: &BandlimitedFunction,
    g: &BandlimitedFunction,
    n: u32,
    amplitude: Amplitude,
    grid: &QuadratureGrid,
) -> Result<ProductResult> {
    product(&KernelSpec::new(n, Variant::Generalized)?.with_amplitude(amplitude), f, g, grid)
}

/// Value of a global or generalized product at an arbitrary point, with the
/// inner double integral taken on `grid`.
pub fn product_at(
    spec: &KernelSpec,
    f: &BandlimitedFunction,
    g: &BandlimitedFunction,
    x: &SpherePoint,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    spec.validate()?;
    let (fv, gv) = (f.evaluate(grid), g.evaluate(grid));
    match spec.variant {
        Variant::Global | Variant::Generalized => {
            let (v, _) = trig_point(grid, x, &[(&fv, &gv)], spec.n, spec.effective_amplitude(), spec.eps_sign, spec.eps_det);
            Ok(v[0])
        }
        Variant::Partial(c) => {
            let (v, _) = partial_point(grid, x, &[(&fv, &gv)], spec.n, spec.eps_sign, spec.eps_det);
            Ok(v[0][c.index()])
        }
        Variant::RestrictedEven => {
            require_n_even(f, spec.n, "first")?;
            require_n_even(g, spec.n, "second")?;
            let (a, _) = partial_point(grid, x, &[(&fv, &gv)], spec.n, spec.eps_sign, spec.eps_det);
            let (b, _) = partial_point(grid, &-*x, &[(&fv, &gv)], spec.n, spec.eps_sign, spec.eps_det);
            Ok((a[0][0] + b[0][0] * parity_sign(spec.n)) * 0.5)
        }
    }
}

/// Harmonic-basis matrix elements
/// `C[b1][b2][b3] = int conj(Y_b3) (Y_b1 * Y_b2)` of the global product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureTensor {
    pub n: u32,
    pub l_max: usize,
    pub entries: Vec<Complex64>,
    pub skipped_weight: f64,
}

impl StructureTensor {
    pub fn dim(&self) -> usize {
        num_coeffs(self.l_max)
    }

    pub fn get(&self, b1: usize, b2: usize, b3: usize) -> Complex64 {
        let d = self.dim();
        self.entries[(b1 * d + b2) * d + b3]
    }
}

/// Structure constants of the global product for degrees `<= l_max`.
///
/// Per output node the kernel matrix is contracted with the basis on the
/// first slot, then on the second; the output is projected on the basis.
pub fn structure_constants(n: u32, l_max: usize, grid: &QuadratureGrid) -> Result<StructureTensor> {
    structure_constants_with(&KernelSpec::global(n)?, l_max, grid)
}

pub fn structure_constants_with(spec: &KernelSpec, l_max: usize, grid: &QuadratureGrid) -> Result<StructureTensor> {
    spec.validate()?;
    let amplitude = match spec.variant {
        Variant::Global | Variant::Generalized => spec.effective_amplitude(),
        other => {
            return Err(Error::InvalidArgument(format!(
                "structure constants are defined for the global and generalized products, not {other}"
            )))
        }
    };
    if grid.exact_degree() < 2 * l_max {
        return Err(Error::InsufficientExactness {
            required: 2 * l_max,
            available: grid.exact_degree(),
        });
    }
    grid.check_resolution(spec.n, l_max);
    let nb = num_coeffs(l_max);
    let table = HarmonicTable::new(grid, l_max);
    let nodes = grid.nodes();
    let w = grid.weights();
    let odd = spec.n % 2 == 1;
    let len = nodes.len();

    let per_node: Vec<(Vec<Complex64>, f64)> = nodes
        .par_iter()
        .map(|x| {
            let frame = Frame::new(nodes, x);
            let mut skipped = Neumaier::new();
            // t[b1 * len + j] = sum_i w_i Y_b1(i) K(i, j, x)
            let mut t = vec![Complex64::new(0.0, 0.0); nb * len];
            let mut kcol = vec![0.0; len];
            for j in 0..len {
                for (i, kc) in kcol.iter_mut().enumerate() {
                    let inv = frame.triple(nodes, i, j, spec.eps_sign);
                    *kc = match trig_kernel(&inv, spec.n, amplitude, spec.eps_det) {
                        Ok(v) => v * w[i],
                        Err(SkipReason::Boundary | SkipReason::Singular) => {
                            skipped.add(w[i] * w[j]);
                            0.0
                        }
                    };
                }
                for b1 in 0..nb {
                    let mut s = ComplexSum::new();
                    for (i, kc) in kcol.iter().enumerate() {
                        s.add(table.get(i, b1) * *kc);
                    }
                    t[b1 * len + j] = s.value();
                }
            }
            let mut out = vec![Complex64::new(0.0, 0.0); nb * nb];
            for b1 in 0..nb {
                for b2 in 0..nb {
                    let mut s = ComplexSum::new();
                    for j in 0..len {
                        s.add(t[b1 * len + j] * table.get(j, b2) * w[j]);
                    }
                    let v = s.value();
                    out[b1 * nb + b2] = if odd { Complex64::new(-v.im, v.re) } else { v };
                }
            }
            (out, skipped.value())
        })
        .collect();

    let skipped = collect_skipped(grid, &per_node.iter().map(|p| p.1).collect::<Vec<_>>());
    let mut entries = vec![Complex64::new(0.0, 0.0); nb * nb * nb];
    let mut integrand = vec![Complex64::new(0.0, 0.0); len];
    for b12 in 0..nb * nb {
        for b3 in 0..nb {
            for (m, v) in integrand.iter_mut().enumerate() {
                *v = table.get(m, b3).conj() * per_node[m].0[b12];
            }
            entries[b12 * nb + b3] = grid.integrate(&integrand)?;
        }
    }
    Ok(StructureTensor {
        n: spec.n,
        l_max,
        entries,
        skipped_weight: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{random_bandlimited, ParityFilter};
    use crate::geometry::{MidpointTriple, EPS_DET, EPS_SIGN};
    use crate::kernels::global_kernel;
    use crate::quadrature::build_grid;

    #[test]
    fn frame_matches_classify() {
        let g = build_grid(3, 6).unwrap();
        let x = SpherePoint::new(0.3, -0.5, 0.7).unwrap();
        let f = Frame::new(g.nodes(), &x);
        for i in 0..g.len() {
            for j in 0..g.len() {
                let t = MidpointTriple::classify(g.nodes()[i], g.nodes()[j], x, EPS_SIGN);
                let a = f.triple(g.nodes(), i, j, EPS_SIGN);
                assert_eq!(&a, t.invariants());
                for n in 1..5 {
                    let k = global_kernel(&t, n, EPS_DET).value;
                    let kk = trig_kernel(&a, n, Amplitude::Jacobian, EPS_DET).unwrap_or(0.0);
                    assert_eq!(if n % 2 == 0 { k.re } else { k.im }, kk);
                }
            }
        }
    }

    #[test]
    fn odd_factor_cancels_exactly() {
        let g = build_grid(4, 8).unwrap();
        let f = random_bandlimited(3, 1, ParityFilter::NOdd(2), false);
        let h = random_bandlimited(3, 2, ParityFilter::None, false);
        let r = product_global(&f, &h, 2, &g).unwrap();
        assert!(r.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        let r = product_global(&h, &f, 2, &g).unwrap();
        assert!(r.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn output_parity_is_exact() {
        let g = build_grid(4, 8).unwrap();
        let f = random_bandlimited(3, 5, ParityFilter::None, false);
        let h = random_bandlimited(3, 6, ParityFilter::None, false);
        for n in 1..=4 {
            assert_eq!(product_global(&f, &h, n, &g).unwrap().parity_defect(&g), 0.0);
        }
    }

    #[test]
    fn restricted_rejects_wrong_parity() {
        let g = build_grid(2, 4).unwrap();
        let f = random_bandlimited(2, 1, ParityFilter::None, false);
        assert!(matches!(
            product_restricted_even(&f, &f, 2, &g),
            Err(Error::ParityContract(_))
        ));
    }

    #[test]
    fn product_at_matches_node_values() {
        let g = build_grid(3, 6).unwrap();
        let f = random_bandlimited(2, 3, ParityFilter::None, false);
        let h = random_bandlimited(2, 4, ParityFilter::None, false);
        for spec in [KernelSpec::global(3).unwrap(), KernelSpec::new(2, Variant::Partial(FlipPattern::new(false, true, true))).unwrap()] {
            let r = product(&spec, &f, &h, &g).unwrap();
            for m in [0, 5, 17] {
                let v = product_at(&spec, &f, &h, &g.nodes()[m], &g).unwrap();
                assert!((v - r.values[m]).norm() < 1e-12 * (1.0 + v.norm()));
            }
        }
    }
}
