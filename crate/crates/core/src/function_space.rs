//! Band-limited functions in the orthonormal complex spherical-harmonic basis.
//!
//! `Y_lm` uses the Condon-Shortley phase and `int |Y_lm|^2 = 1`. Coefficients
//! are stored flat at index `l^2 + l + m`.
//!
//! The normalized associated Legendre recurrence is arranged so that
//! `Y_lm(-p) = (-1)^l Y_lm(p)` holds bit for bit, both on grid nodes and for
//! arbitrary points; functions of pure parity are therefore exactly even or
//! odd under the antipodal map.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::quadrature::{azimuth_table, QuadratureGrid};

#[inline]
pub fn coeff_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

#[inline]
pub fn num_coeffs(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// `(l, m)` of flat index `i`.
pub fn degree_order(i: usize) -> (usize, i64) {
    let l = (i as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= i { l + 1 } else { l };
    (l, i as i64 - (l * l + l) as i64)
}

/// Parity of the degrees present in a coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HarmonicParity {
    /// No nonzero coefficient; both even and odd.
    Zero,
    Even,
    Odd,
    Mixed,
}

/// Parity relative to a prequantization integer `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParityTag {
    NEven(u32),
    NOdd(u32),
    Mixed,
}

impl fmt::Display for ParityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParityTag::NEven(n) => write!(f, "n_even({n})"),
            ParityTag::NOdd(n) => write!(f, "n_odd({n})"),
            ParityTag::Mixed => f.write_str("mixed"),
        }
    }
}

/// Restriction applied by [`random_bandlimited`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParityFilter {
    #[default]
    None,
    NEven(u32),
    NOdd(u32),
}

impl ParityFilter {
    fn keeps(self, l: usize) -> bool {
        let l_odd = l % 2 == 1;
        match self {
            ParityFilter::None => true,
            ParityFilter::NEven(n) => l_odd == (n % 2 == 1),
            ParityFilter::NOdd(n) => l_odd != (n % 2 == 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedFunction {
    l_max: usize,
    coeffs: Vec<Complex64>,
    parity: HarmonicParity,
}

fn parity_of(coeffs: &[Complex64]) -> HarmonicParity {
    let mut even = false;
    let mut odd = false;
    for (i, c) in coeffs.iter().enumerate() {
        if *c != Complex64::new(0.0, 0.0) {
            if degree_order(i).0 % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
    }
    match (even, odd) {
        (false, false) => HarmonicParity::Zero,
        (true, false) => HarmonicParity::Even,
        (false, true) => HarmonicParity::Odd,
        (true, true) => HarmonicParity::Mixed,
    }
}

impl BandlimitedFunction {
    pub fn from_coeffs(l_max: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != num_coeffs(l_max) {
            return Err(Error::LengthMismatch {
                expected: num_coeffs(l_max),
                actual: coeffs.len(),
            });
        }
        let parity = parity_of(&coeffs);
        Ok(BandlimitedFunction { l_max, coeffs, parity })
    }

    pub fn zero(l_max: usize) -> Self {
        BandlimitedFunction {
            l_max,
            coeffs: vec![Complex64::new(0.0, 0.0); num_coeffs(l_max)],
            parity: HarmonicParity::Zero,
        }
    }

    /// Single basis function `Y_lm` with bandlimit `l_max`.
    pub fn basis(l_max: usize, l: usize, m: i64) -> Result<Self> {
        if l > l_max || m.unsigned_abs() as usize > l {
            return Err(Error::InvalidArgument(format!("no harmonic ({l}, {m}) below degree {l_max}")));
        }
        let mut f = Self::zero(l_max);
        f.set(l, m, Complex64::new(1.0, 0.0));
        Ok(f)
    }

    /// The constant function with value `c`.
    pub fn constant(l_max: usize, c: Complex64) -> Self {
        let mut f = Self::zero(l_max);
        f.set(0, 0, c * (4.0 * PI).sqrt());
        f
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn parity(&self) -> HarmonicParity {
        self.parity
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[coeff_index(l, m)]
        }
    }

    pub fn set(&mut self, l: usize, m: i64, c: Complex64) {
        self.coeffs[coeff_index(l, m)] = c;
        self.parity = parity_of(&self.coeffs);
    }

    /// Parity relative to `n`: degrees `l = n (mod 2)` are n-even.
    pub fn parity_tag(&self, n: u32) -> ParityTag {
        let n_odd = n % 2 == 1;
        match self.parity {
            HarmonicParity::Zero => ParityTag::NEven(n),
            HarmonicParity::Even if !n_odd => ParityTag::NEven(n),
            HarmonicParity::Odd if n_odd => ParityTag::NEven(n),
            HarmonicParity::Even | HarmonicParity::Odd => ParityTag::NOdd(n),
            HarmonicParity::Mixed => ParityTag::Mixed,
        }
    }

    pub fn is_n_even(&self, n: u32) -> bool {
        self.parity == HarmonicParity::Zero || self.parity_tag(n) == ParityTag::NEven(n)
    }

    pub fn is_n_odd(&self, n: u32) -> bool {
        self.parity == HarmonicParity::Zero || self.parity_tag(n) == ParityTag::NOdd(n)
    }

    /// `L^2` norm, equal to the coefficient 2-norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `int conj(self) other`.
    pub fn inner(&self, other: &BandlimitedFunction) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        BandlimitedFunction::from_coeffs(self.l_max, coeffs).expect("same length")
    }

    /// Sum of two functions, padded to the larger bandlimit.
    pub fn add(&self, other: &BandlimitedFunction) -> Self {
        let l_max = self.l_max.max(other.l_max);
        let coeffs = (0..num_coeffs(l_max))
            .map(|i| {
                let (l, m) = degree_order(i);
                self.get(l, m) + other.get(l, m)
            })
            .collect();
        BandlimitedFunction::from_coeffs(l_max, coeffs).expect("same length")
    }

    /// `f(-p)` as a band-limited function: `c_lm -> (-1)^l c_lm`.
    pub fn antipodal(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if degree_order(i).0 % 2 == 1 { -c } else { *c })
            .collect();
        BandlimitedFunction::from_coeffs(self.l_max, coeffs).expect("same length")
    }

    /// Zeroes coefficients with modulus at most `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.norm() <= tol { Complex64::new(0.0, 0.0) } else { *c })
            .collect();
        BandlimitedFunction::from_coeffs(self.l_max, coeffs).expect("same length")
    }

    /// Value at an arbitrary point.
    pub fn value_at(&self, p: &SpherePoint) -> Complex64 {
        let y = harmonics_at(self.l_max, p);
        synthesize(&self.coeffs, &y)
    }

    /// Values on all grid nodes.
    pub fn evaluate(&self, grid: &QuadratureGrid) -> Vec<Complex64> {
        let table = HarmonicTable::new(grid, self.l_max);
        (0..grid.len()).map(|i| synthesize(&self.coeffs, table.row(i))).collect()
    }
}

#[inline]
fn synthesize(coeffs: &[Complex64], y: &[Complex64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (c, y) in coeffs.iter().zip(y) {
        s += c * y;
    }
    s
}

/// Normalized associated Legendre values `sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m`
/// with Condon-Shortley phase, for `0 <= m <= l <= l_max`, at index
/// `l (l + 1) / 2 + m`.
pub fn legendre_table(l_max: usize, x: f64, sin_theta: f64) -> Vec<f64> {
    let mut p = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta;
        }
        p[idx(m, m)] = pmm;
        if m < l_max {
            p[idx(m + 1, m)] = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
        }
        for l in (m + 2)..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}

fn fill_harmonics(l_max: usize, p: &[f64], phase: impl Fn(usize) -> Complex64, out: &mut [Complex64]) {
    for l in 0..=l_max {
        let base = l * (l + 1) / 2;
        out[l * l + l] = Complex64::new(p[base], 0.0);
        for m in 1..=l {
            let y = phase(m) * p[base + m];
            out[l * l + l + m] = y;
            let yc = y.conj();
            out[l * l + l - m] = if m % 2 == 1 { -yc } else { yc };
        }
    }
}

/// All `Y_lm(p)` for `l <= l_max`, flat-indexed.
pub fn harmonics_at(l_max: usize, p: &SpherePoint) -> Vec<Complex64> {
    let s = p.x().hypot(p.y());
    let e = if s > 0.0 {
        Complex64::new(p.x() / s, p.y() / s)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let leg = legendre_table(l_max, p.z(), s);
    let mut out = vec![Complex64::new(0.0, 0.0); num_coeffs(l_max)];
    fill_harmonics(l_max, &leg, |m| e.powu(m as u32), &mut out);
    out
}

/// `Y_lm` at every node of a grid, row-major by node.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    l_max: usize,
    values: Vec<Complex64>,
}

impl HarmonicTable {
    pub fn new(grid: &QuadratureGrid, l_max: usize) -> Self {
        let nc = num_coeffs(l_max);
        let na = grid.n_azimuth();
        let az = azimuth_table(na);
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len() * nc];
        for (j, &x) in grid.cos_theta().iter().enumerate() {
            let s = ((1.0 - x) * (1.0 + x)).sqrt();
            let leg = legendre_table(l_max, x, s);
            for k in 0..na {
                let i = grid.index(j, k);
                fill_harmonics(
                    l_max,
                    &leg,
                    |m| {
                        let (c, sn) = az[(m * k) % na];
                        Complex64::new(c, sn)
                    },
                    &mut values[i * nc..(i + 1) * nc],
                );
            }
        }
        HarmonicTable { l_max, values }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    #[inline]
    pub fn row(&self, node: usize) -> &[Complex64] {
        let nc = num_coeffs(self.l_max);
        &self.values[node * nc..(node + 1) * nc]
    }

    #[inline]
    pub fn get(&self, node: usize, index: usize) -> Complex64 {
        self.values[node * num_coeffs(self.l_max) + index]
    }
}

/// Values of `f` on the grid nodes.
pub fn evaluate(f: &BandlimitedFunction, grid: &QuadratureGrid) -> Vec<Complex64> {
    f.evaluate(grid)
}

/// `c_lm = int conj(Y_lm) f` for `l <= l_max`.
pub fn project(values: &[Complex64], grid: &QuadratureGrid, l_max: usize) -> Result<BandlimitedFunction> {
    if grid.exact_degree() < 2 * l_max {
        return Err(Error::InsufficientExactness {
            required: 2 * l_max,
            available: grid.exact_degree(),
        });
    }
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: values.len(),
        });
    }
    let table = HarmonicTable::new(grid, l_max);
    let mut integrand = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut coeffs = Vec::with_capacity(num_coeffs(l_max));
    for c in 0..num_coeffs(l_max) {
        for (i, v) in integrand.iter_mut().enumerate() {
            *v = table.get(i, c).conj() * values[i];
        }
        coeffs.push(grid.integrate(&integrand)?);
    }
    BandlimitedFunction::from_coeffs(l_max, coeffs)
}

/// Splits `f` into its n-even part (`l = n mod 2`) and n-odd part.
pub fn parity_decompose(f: &BandlimitedFunction, n: u32) -> (BandlimitedFunction, BandlimitedFunction) {
    let zero = Complex64::new(0.0, 0.0);
    let keep = ParityFilter::NEven(n);
    let mut plus = Vec::with_capacity(f.coeffs.len());
    let mut minus = Vec::with_capacity(f.coeffs.len());
    for (i, c) in f.coeffs.iter().enumerate() {
        if keep.keeps(degree_order(i).0) {
            plus.push(*c);
            minus.push(zero);
        } else {
            plus.push(zero);
            minus.push(*c);
        }
    }
    (
        BandlimitedFunction::from_coeffs(f.l_max, plus).expect("same length"),
        BandlimitedFunction::from_coeffs(f.l_max, minus).expect("same length"),
    )
}

/// Seeded random function of unit norm.
///
/// With `real = true` the coefficients satisfy `c_{l,-m} = (-1)^m conj(c_lm)`.
pub fn random_bandlimited(l_max: usize, seed: u64, filter: ParityFilter, real: bool) -> BandlimitedFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); num_coeffs(l_max)];
    for l in 0..=l_max {
        let keep = filter.keeps(l);
        if real {
            let c0 = normal();
            if keep {
                coeffs[coeff_index(l, 0)] = Complex64::new(c0, 0.0);
            }
            for m in 1..=l as i64 {
                let c = Complex64::new(normal(), normal());
                if keep {
                    coeffs[coeff_index(l, m)] = c;
                    let cc = c.conj();
                    coeffs[coeff_index(l, -m)] = if m % 2 == 1 { -cc } else { cc };
                }
            }
        } else {
            for m in -(l as i64)..=l as i64 {
                let c = Complex64::new(normal(), normal());
                if keep {
                    coeffs[coeff_index(l, m)] = c;
                }
            }
        }
    }
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for c in &mut coeffs {
            *c /= norm;
        }
    }
    BandlimitedFunction::from_coeffs(l_max, coeffs).expect("same length")
}
