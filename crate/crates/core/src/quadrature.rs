//! Antipodally closed product quadrature on the sphere.
//!
//! Nodes are Gauss-Legendre in `cos(theta)` times a uniform azimuth. The
//! node with indices `(j, k)` has the exact antipode
//! `(n_polar - 1 - j, (k + n_azimuth / 2) mod n_azimuth)`: the Legendre
//! abscissae are mirrored and the azimuth tables for the second half-turn are
//! negated copies of the first, so `nodes[antipode(i)] == -nodes[i]` bit for
//! bit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::summation::sum_indexed;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureGrid {
    n_polar: usize,
    n_azimuth: usize,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    antipode_index: Vec<usize>,
    representatives: Vec<usize>,
    cos_theta: Vec<f64>,
    polar_weights: Vec<f64>,
}

/// Gauss-Legendre abscissae (descending) and weights on `[-1, 1]`.
///
/// The abscissae satisfy `x[n - 1 - i] == -x[i]` exactly and the weights are
/// scaled so that they sum to 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n / 2;
    for i in 0..half {
        let mut r = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, r);
            dp = d;
            let step = p / d;
            r -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, r);
        dp = if d.is_finite() { d } else { dp };
        x[i] = r;
        x[n - 1 - i] = -r;
        let wi = 2.0 / ((1.0 - r * r) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        x[half] = 0.0;
        w[half] = 2.0 / (d * d);
    }
    let total: f64 = w.iter().sum();
    for wi in &mut w {
        *wi *= 2.0 / total;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `(cos(2 pi k / n), sin(2 pi k / n))` for `k in 0..n` with the second half
/// stored as exact negations of the first.
pub(crate) fn azimuth_table(n: usize) -> Vec<(f64, f64)> {
    debug_assert!(n % 2 == 0);
    let half = n / 2;
    let mut t = Vec::with_capacity(n);
    for k in 0..half {
        let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
        t.push((c, s));
    }
    for k in 0..half {
        let (c, s) = t[k];
        t.push((-c, -s));
    }
    t
}

impl QuadratureGrid {
    pub fn new(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_azimuth % 2 != 0 {
            return Err(Error::GridNotSymmetric(n_azimuth));
        }
        if n_polar < 1 || n_azimuth < 2 {
            return Err(Error::InvalidGrid(format!(
                "need n_polar >= 1 and n_azimuth >= 2, got {n_polar}x{n_azimuth}"
            )));
        }
        let (x, w) = gauss_legendre(n_polar);
        let az = azimuth_table(n_azimuth);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let count = n_polar * n_azimuth;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        let mut antipode_index = Vec::with_capacity(count);
        for j in 0..n_polar {
            let s = ((1.0 - x[j]) * (1.0 + x[j])).sqrt();
            for (k, &(c, sn)) in az.iter().enumerate() {
                nodes.push(SpherePoint::from_unit([s * c, s * sn, x[j]]));
                weights.push(w[j] * dphi);
                let ka = (k + n_azimuth / 2) % n_azimuth;
                antipode_index.push((n_polar - 1 - j) * n_azimuth + ka);
            }
        }
        let representatives = (0..count).filter(|&i| i < antipode_index[i]).collect();
        Ok(QuadratureGrid {
            n_polar,
            n_azimuth,
            nodes,
            weights,
            antipode_index,
            representatives,
            cos_theta: x,
            polar_weights: w,
        })
    }

    /// Parses `"PxA"`.
    pub fn from_spec(s: &str) -> Result<Self> {
        let (p, a) = parse_grid_spec(s)?;
        Self::new(p, a)
    }

    pub fn n_polar(&self) -> usize {
        self.n_polar
    }
    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn antipode_index(&self) -> &[usize] {
        &self.antipode_index
    }
    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }
    pub fn polar_weights(&self) -> &[f64] {
        &self.polar_weights
    }

    /// Flat node index of ring `j`, azimuth `k`.
    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_azimuth + k
    }

    /// Highest degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        (2 * self.n_polar - 1).min(self.n_azimuth - 1)
    }

    /// One node from each antipodal pair, in increasing index order.
    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    /// `sum_i w_i v_i` with compensated, thread-count independent summation.
    ///
    /// Antipodal pairs are added first, so odd integrands cancel exactly.
    pub fn integrate(&self, values: &[Complex64]) -> Result<Complex64> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        let r = &self.representatives;
        let a = &self.antipode_index;
        Ok(sum_indexed(r.len(), |t| {
            let i = r[t];
            (values[i] + values[a[i]]) * self.weights[i]
        }))
    }

    pub fn integrate_real(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        let r = &self.representatives;
        let a = &self.antipode_index;
        Ok(sum_indexed(r.len(), |t| {
            let i = r[t];
            Complex64::new((values[i] + values[a[i]]) * self.weights[i], 0.0)
        })
        .re)
    }

    /// Values of `f` composed with the antipodal map, by index permutation only.
    pub fn compose_antipode<T: Copy>(&self, values: &[T]) -> Vec<T> {
        self.antipode_index.iter().map(|&a| values[a]).collect()
    }

    /// Warns when the grid is coarse for a kernel of integer `n` and bandlimit `l`.
    pub fn check_resolution(&self, n: u32, l: usize) -> bool {
        let k = (n as usize).div_ceil(2);
        let want = 4 * k.max(l);
        if self.n_polar < want {
            log::warn!(
                "grid {}x{} is coarse for n = {n}, L = {l}; n_polar >= {want} recommended",
                self.n_polar,
                self.n_azimuth
            );
            false
        } else {
            true
        }
    }
}

pub fn build_grid(n_polar: usize, n_azimuth: usize) -> Result<QuadratureGrid> {
    QuadratureGrid::new(n_polar, n_azimuth)
}

pub fn parse_grid_spec(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("grid must look like PxA, got {s:?}"));
    let (p, a) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let p = p.trim().parse().map_err(|_| bad())?;
    let a = a.trim().parse().map_err(|_| bad())?;
    Ok((p, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid() {
        let g = build_grid(2, 4).unwrap();
        assert_eq!(g.len(), 8);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        assert_eq!(g.exact_degree(), 3);
    }

    #[test]
    fn odd_azimuth_rejected() {
        assert_eq!(build_grid(4, 7).unwrap_err(), Error::GridNotSymmetric(7));
        assert!(build_grid(0, 8).is_err());
    }

    #[test]
    fn antipodes_are_exact() {
        for (p, a) in [(1, 2), (3, 6), (8, 16), (7, 10)] {
            let g = build_grid(p, a).unwrap();
            for i in 0..g.len() {
                let j = g.antipode_index()[i];
                assert_ne!(i, j);
                assert_eq!(g.antipode_index()[j], i);
                assert_eq!(g.nodes()[j], -g.nodes()[i]);
                assert_eq!(g.weights()[j], g.weights()[i]);
            }
            assert_eq!(g.representatives().len(), g.len() / 2);
        }
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(10);
        for d in 0..20 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "degree {d}: {s} vs {exact}");
        }
    }

    #[test]
    fn moments() {
        let g = build_grid(6, 12).unwrap();
        let one = vec![Complex64::new(1.0, 0.0); g.len()];
        assert!((g.integrate(&one).unwrap().re - 4.0 * PI).abs() < 1e-12);
        let z2: Vec<f64> = g.nodes().iter().map(|p| p.z() * p.z()).collect();
        assert!((g.integrate_real(&z2).unwrap() - 4.0 * PI / 3.0).abs() < 1e-13);
        let z: Vec<f64> = g.nodes().iter().map(|p| p.z()).collect();
        assert_eq!(g.integrate_real(&z).unwrap(), 0.0);
        assert!(g.integrate(&one[1..]).is_err());
    }

    #[test]
    fn grid_spec_parsing() {
        assert_eq!(parse_grid_spec("16x32").unwrap(), (16, 32));
        assert!(parse_grid_spec("16-32").is_err());
    }
}
