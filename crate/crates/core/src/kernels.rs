//! Integral kernels: partial, global, restricted and generalized.
//!
//! All kernels are built from the unit holonomy `z = e^{iS/2}` of a midpoint
//! triple; the phase `e^{inS/2}` is `z^n` by repeated squaring, which keeps
//! conjugation and negation identities exact.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainLabel, FlipPattern, MidpointTriple, TripleInvariants, EPS_DET, EPS_SIGN};

/// Kernel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Global,
    Partial(FlipPattern),
    RestrictedEven,
    Generalized,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Global => f.write_str("global"),
            Variant::Partial(p) => write!(f, "partial-{p}"),
            Variant::RestrictedEven => f.write_str("restricted"),
            Variant::Generalized => f.write_str("generalized"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Variant::Global),
            "restricted" | "restricted-even" => Ok(Variant::RestrictedEven),
            "generalized" => Ok(Variant::Generalized),
            _ => match s.strip_prefix("partial-") {
                Some(bits) => Ok(Variant::Partial(bits.parse()?)),
                None => Err(Error::InvalidArgument(format!("unknown variant {s:?}"))),
            },
        }
    }
}

/// Amplitude plug-in for generalized kernels.
///
/// Every choice depends on the triple only through rotation- and
/// permutation-invariant data, so the symmetry identities of the global
/// kernel carry over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Amplitude {
    /// `A / 4`; the global kernel.
    Jacobian,
    /// Constant `1`.
    Unit,
    /// `(A / 4)(1 + 1/n)`.
    JacobianScaled,
}

impl Amplitude {
    /// Plug-in value given the Jacobian amplitude `a`.
    #[inline]
    pub fn eval(self, a: f64, n: u32) -> f64 {
        match self {
            Amplitude::Jacobian => 0.25 * a,
            Amplitude::Unit => 1.0,
            Amplitude::JacobianScaled => 0.25 * a * (1.0 + 1.0 / n as f64),
        }
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Amplitude::Jacobian => "jacobian",
            Amplitude::Unit => "unit",
            Amplitude::JacobianScaled => "jacobian-scaled",
        })
    }
}

impl FromStr for Amplitude {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jacobian" => Ok(Amplitude::Jacobian),
            "unit" => Ok(Amplitude::Unit),
            "jacobian-scaled" => Ok(Amplitude::JacobianScaled),
            _ => Err(Error::InvalidArgument(format!("unknown amplitude {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub n: u32,
    pub variant: Variant,
    pub amplitude: Amplitude,
    pub eps_sign: f64,
    pub eps_det: f64,
}

impl KernelSpec {
    pub fn new(n: u32, variant: Variant) -> Result<Self> {
        let spec = KernelSpec {
            n,
            variant,
            amplitude: Amplitude::Jacobian,
            eps_sign: EPS_SIGN,
            eps_det: EPS_DET,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn global(n: u32) -> Result<Self> {
        Self::new(n, Variant::Global)
    }

    pub fn with_amplitude(mut self, amplitude: Amplitude) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(self.eps_sign > 0.0 && self.eps_det > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// `(-1)^n`.
    pub fn sign(&self) -> f64 {
        parity_sign(self.n)
    }

    /// Amplitude plug-in in effect: `Jacobian` unless the variant is generalized.
    pub fn effective_amplitude(&self) -> Amplitude {
        match self.variant {
            Variant::Generalized => self.amplitude,
            _ => Amplitude::Jacobian,
        }
    }

    /// Evaluates the kernel selected by `variant` on `t`.
    pub fn evaluate(&self, t: &MidpointTriple) -> Result<KernelValue> {
        match self.variant {
            Variant::Global => Ok(global_kernel(t, self.n, self.eps_det)),
            Variant::Generalized => Ok(generalized_kernel(t, self.n, self.amplitude, self.eps_det)),
            Variant::Partial(c) => partial_kernel(t, c, self.n, self.eps_det),
            Variant::RestrictedEven => partial_kernel(t, FlipPattern::STANDARD, self.n, self.eps_det),
        }
    }
}

#[inline]
pub fn parity_sign(n: u32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Why a kernel evaluation contributed zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SkipReason {
    Boundary,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub skipped: Option<SkipReason>,
}

impl KernelValue {
    fn skip(reason: SkipReason) -> Self {
        KernelValue {
            value: Complex64::new(0.0, 0.0),
            skipped: Some(reason),
        }
    }

    fn of(value: Complex64) -> Self {
        KernelValue { value, skipped: None }
    }
}

/// `e^{inS/2}` of a triple.
pub fn phase_factor(t: &MidpointTriple, n: u32) -> Result<Complex64> {
    Ok(t.half_phase()?.powu(n))
}

/// Real scalar `kappa` of the global/generalized kernel; the kernel is
/// `kappa` for even `n` and `i kappa` for odd `n`.
#[inline]
pub(crate) fn trig_kernel(
    inv: &TripleInvariants,
    n: u32,
    amplitude: Amplitude,
    eps_det: f64,
) -> std::result::Result<f64, SkipReason> {
    if inv.label == DomainLabel::Boundary {
        return Err(SkipReason::Boundary);
    }
    let a = inv.jacobian(eps_det).map_err(|_| SkipReason::Singular)?;
    let z = inv.half_phase().ok_or(SkipReason::Boundary)?.powu(n);
    let trig = if n % 2 == 0 { z.re } else { z.im };
    Ok(amplitude.eval(a, n) * trig)
}

/// `A z^n` for the domain class of the triple; its conjugate class receives
/// `(-1)^n A conj(z)^n`.
#[inline]
pub(crate) fn domain_kernel(
    inv: &TripleInvariants,
    n: u32,
    eps_det: f64,
) -> std::result::Result<Complex64, SkipReason> {
    if inv.label == DomainLabel::Boundary {
        return Err(SkipReason::Boundary);
    }
    let a = inv.jacobian(eps_det).map_err(|_| SkipReason::Singular)?;
    let z = inv.half_phase().ok_or(SkipReason::Boundary)?.powu(n);
    Ok(z * a)
}

#[inline]
fn lift(kappa: f64, n: u32) -> Complex64 {
    if n % 2 == 0 {
        Complex64::new(kappa, 0.0)
    } else {
        Complex64::new(0.0, kappa)
    }
}

/// `(1/4) A cos(kS)` for `n = 2k`, `(i/4) A sin((k - 1/2) S)` for `n = 2k - 1`.
pub fn global_kernel(t: &MidpointTriple, n: u32, eps_det: f64) -> KernelValue {
    generalized_kernel(t, n, Amplitude::Jacobian, eps_det)
}

/// Global trig forms with the plug-in amplitude in place of `A / 4`.
pub fn generalized_kernel(t: &MidpointTriple, n: u32, amplitude: Amplitude, eps_det: f64) -> KernelValue {
    match trig_kernel(t.invariants(), n, amplitude, eps_det) {
        Ok(kappa) => KernelValue::of(lift(kappa, n)),
        Err(r) => KernelValue::skip(r),
    }
}

/// Kernel of the partial product of class `class`.
///
/// The triple must lie in the domain of the class (a class and its
/// complement share a domain). Classes with at most one long side use
/// `A e^{inS/2}` directly; their conjugates use `(-1)^n A e^{-inS/2}`.
pub fn partial_kernel(t: &MidpointTriple, class: FlipPattern, n: u32, eps_det: f64) -> Result<KernelValue> {
    if t.is_boundary() {
        return Ok(KernelValue::skip(SkipReason::Boundary));
    }
    let expected = class.domain();
    if t.label() != expected {
        return Err(Error::ClassMismatch {
            expected: expected.to_string(),
            actual: t.label().to_string(),
        });
    }
    Ok(match domain_kernel(t.invariants(), n, eps_det) {
        Ok(v) if class.is_conjugate() => KernelValue::of(v.conj() * parity_sign(n)),
        Ok(v) => KernelValue::of(v),
        Err(r) => KernelValue::skip(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify_triple, SpherePoint};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn p(x: f64, y: f64, z: f64) -> SpherePoint {
        SpherePoint::new(x, y, z).unwrap()
    }

    fn octant() -> MidpointTriple {
        classify_triple(p(1.0, 1.0, 0.0), p(0.0, 1.0, 1.0), p(1.0, 0.0, 1.0), EPS_SIGN)
    }

    fn coincident() -> MidpointTriple {
        let e = SpherePoint::E_Z;
        classify_triple(e, e, e, EPS_SIGN)
    }

    #[test]
    fn phase_examples() {
        for n in 1..8 {
            assert_eq!(phase_factor(&coincident(), n).unwrap(), Complex64::new(1.0, 0.0));
        }
        let z = phase_factor(&octant(), 2).unwrap();
        assert!((z - Complex64::i()).norm() < 1e-15);
        let t = octant();
        let all = t.flipped(FlipPattern::ALL, EPS_SIGN);
        for n in 1..8 {
            assert_eq!(phase_factor(&all, n).unwrap(), phase_factor(&t, n).unwrap().conj());
        }
    }

    #[test]
    fn global_examples() {
        assert!(global_kernel(&octant(), 2, EPS_DET).value.norm() < 1e-14);
        assert_eq!(global_kernel(&coincident(), 2, EPS_DET).value, Complex64::new(4.0, 0.0));
        assert_eq!(global_kernel(&coincident(), 1, EPS_DET).value, Complex64::new(0.0, 0.0));
        let b = classify_triple(SpherePoint::E_X, SpherePoint::E_Y, p(1.0, 1.0, 0.0), EPS_SIGN);
        assert_eq!(global_kernel(&b, 2, EPS_DET).skipped, Some(SkipReason::Boundary));
    }

    #[test]
    fn generalized_examples() {
        for n in 1..6 {
            assert_eq!(
                generalized_kernel(&octant(), n, Amplitude::Jacobian, EPS_DET),
                global_kernel(&octant(), n, EPS_DET)
            );
        }
        assert_eq!(generalized_kernel(&coincident(), 2, Amplitude::Unit, EPS_DET).value, Complex64::new(1.0, 0.0));
        let v = generalized_kernel(&octant(), 1, Amplitude::Unit, EPS_DET).value;
        assert!((v - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn partial_examples() {
        let t = octant();
        let a = crate::geometry::amplitude_a(&t, EPS_DET).unwrap();
        for n in 1..6 {
            let e = phase_factor(&t, n).unwrap();
            let k000 = partial_kernel(&t, FlipPattern::STANDARD, n, EPS_DET).unwrap().value;
            assert!((k000 - e * a).norm() < 1e-13);
            let k111 = partial_kernel(&t, FlipPattern::ALL, n, EPS_DET).unwrap().value;
            assert!((k111 - e.conj() * a * parity_sign(n)).norm() < 1e-13);
        }
        let [x, y, z] = t.points();
        let w001 = classify_triple(x, y, -z, EPS_SIGN);
        let c001 = FlipPattern::new(false, false, true);
        let direct = phase_factor(&w001, 3).unwrap() * crate::geometry::amplitude_a(&w001, EPS_DET).unwrap();
        assert_eq!(partial_kernel(&w001, c001, 3, EPS_DET).unwrap().value, direct);
        assert!(matches!(
            partial_kernel(&w001, FlipPattern::STANDARD, 3, EPS_DET),
            Err(Error::ClassMismatch { .. })
        ));
    }

    #[test]
    fn spec_parsing() {
        for s in ["global", "restricted", "generalized", "partial-011"] {
            assert_eq!(s.parse::<Variant>().unwrap().to_string(), s);
        }
        assert!("partial-2".parse::<Variant>().is_err());
        for s in ["jacobian", "unit", "jacobian-scaled"] {
            assert_eq!(s.parse::<Amplitude>().unwrap().to_string(), s);
        }
        assert!(KernelSpec::global(0).is_err());
    }
}
