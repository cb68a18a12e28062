//! Compensated summation with a fixed reduction order.

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub const fn new() -> Self {
        Neumaier { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Componentwise [`Neumaier`] accumulator for complex values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    pub const fn new() -> Self {
        ComplexSum {
            re: Neumaier::new(),
            im: Neumaier::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Chunk length for parallel reductions. Partial sums are always formed over
/// the same chunks and merged left to right, so the result does not depend on
/// the number of worker threads.
pub const CHUNK: usize = 4096;

/// Deterministic compensated sum of `f(i)` for `i in 0..len`.
pub fn sum_indexed<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let starts: Vec<usize> = (0..len).step_by(CHUNK).collect();
    let partials: Vec<Complex64> = starts
        .par_iter()
        .map(|&s| {
            let mut acc = ComplexSum::new();
            for i in s..(s + CHUNK).min(len) {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    let mut total = ComplexSum::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let mut s = Neumaier::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn negated_inputs_give_negated_sum() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 / 17.0 - 29.0).collect();
        let mut a = Neumaier::new();
        let mut b = Neumaier::new();
        for x in &xs {
            a.add(*x);
            b.add(-*x);
        }
        assert_eq!(a.value(), -b.value());
    }

    #[test]
    fn indexed_sum_is_thread_count_independent() {
        let f = |i: usize| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos());
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| sum_indexed(20_000, f));
        let b = three.install(|| sum_indexed(20_000, f));
        assert_eq!(a, b);
    }
}
