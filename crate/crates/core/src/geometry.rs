//! Midpoint-triangle geometry on the unit sphere.
//!
//! A [`MidpointTriple`] is an ordered triple of points read as the midpoints
//! of the sides of a geodesic triangle: `p1` is the midpoint of side `ab`,
//! `p2` of `bc` and `p3` of `ca`. Everything the kernels need (pairwise dots,
//! the triple determinant, the sign class and the domain label) is cached
//! on construction.
//!
//! The determinant is evaluated so that it is *exactly* covariant in floating
//! point: permuting the arguments by an even permutation returns the same bits,
//! an odd permutation or the negation of any argument returns the exact
//! negation. The antipodal identities of the kernels then hold bit-for-bit on
//! grids whose node set is closed under `p -> -p`.

use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default threshold below which a pairwise scalar product counts as zero.
pub const EPS_SIGN: f64 = 1e-12;
/// Default guard on `1 - det^2` for the Jacobian amplitude.
pub const EPS_DET: f64 = 1e-10;

const EPS_NORM: f64 = 1e-14;
const EPS_MIDPOINT: f64 = 1e-12;

pub(crate) type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// A point of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    v: Vec3,
}

impl SpherePoint {
    pub const E_X: SpherePoint = SpherePoint { v: [1.0, 0.0, 0.0] };
    pub const E_Y: SpherePoint = SpherePoint { v: [0.0, 1.0, 0.0] };
    pub const E_Z: SpherePoint = SpherePoint { v: [0.0, 0.0, 1.0] };

    /// Normalizes `(x, y, z)` onto the sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = [x, y, z];
        let n = norm3(&v);
        if !(n > EPS_NORM) || !n.is_finite() {
            return Err(Error::DegeneratePoint(n));
        }
        Ok(SpherePoint {
            v: [x / n, y / n, z / n],
        })
    }

    /// Wraps components already known to have unit norm.
    #[inline]
    pub(crate) const fn from_unit(v: Vec3) -> Self {
        SpherePoint { v }
    }

    /// Point with polar angle `theta` and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        SpherePoint::from_unit([st * cp, st * sp, ct])
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.v[0]
    }
    #[inline]
    pub fn y(&self) -> f64 {
        self.v[1]
    }
    #[inline]
    pub fn z(&self) -> f64 {
        self.v[2]
    }
    #[inline]
    pub fn as_array(&self) -> &Vec3 {
        &self.v
    }

    #[inline]
    pub fn antipode(self) -> Self {
        -self
    }

    #[inline]
    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot3(&self.v, &other.v)
    }

    /// Polar angle in `[0, pi]`.
    pub fn theta(&self) -> f64 {
        self.v[2].clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in `[0, 2 pi)`.
    pub fn phi(&self) -> f64 {
        let p = self.v[1].atan2(self.v[0]);
        if p < 0.0 {
            p + std::f64::consts::TAU
        } else {
            p
        }
    }
}

impl Neg for SpherePoint {
    type Output = SpherePoint;
    #[inline]
    fn neg(self) -> SpherePoint {
        SpherePoint {
            v: [-self.v[0], -self.v[1], -self.v[2]],
        }
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.17e}, {:.17e}, {:.17e})", self.v[0], self.v[1], self.v[2])
    }
}

pub fn make_point(v: [f64; 3]) -> Result<SpherePoint> {
    SpherePoint::new(v[0], v[1], v[2])
}

pub fn antipode(p: SpherePoint) -> SpherePoint {
    -p
}

/// `det(a, b, c)`, exactly antisymmetric under odd permutations and under
/// negation of any argument.
///
/// The three cyclic forms `a.(b x c)`, `b.(c x a)`, `c.(a x b)` are summed in
/// order of increasing magnitude, which makes the result independent of the
/// starting point of the cycle.
pub fn triple_det(a: &SpherePoint, b: &SpherePoint, c: &SpherePoint) -> f64 {
    det_from_forms([
        dot3(&a.v, &cross3(&b.v, &c.v)),
        dot3(&b.v, &cross3(&c.v, &a.v)),
        dot3(&c.v, &cross3(&a.v, &b.v)),
    ])
}

#[inline]
pub(crate) fn det_from_forms(f: [f64; 3]) -> f64 {
    let [s0, s1, s2] = sort3_by_abs(f);
    (((s0 + s1) + s2) / 3.0).clamp(-1.0, 1.0)
}

#[inline]
pub(crate) fn sort3_by_abs(mut f: [f64; 3]) -> [f64; 3] {
    if f[1].abs() < f[0].abs() {
        f.swap(0, 1);
    }
    if f[2].abs() < f[1].abs() {
        f.swap(1, 2);
        if f[1].abs() < f[0].abs() {
            f.swap(0, 1);
        }
    }
    f
}

/// Sign class of a midpoint triple: the common (or majority) sign of the three
/// pairwise scalar products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Eta {
    Plus,
    Minus,
    Boundary,
}

impl Eta {
    pub fn sign(self) -> Option<f64> {
        match self {
            Eta::Plus => Some(1.0),
            Eta::Minus => Some(-1.0),
            Eta::Boundary => None,
        }
    }
}

/// Which of the four "at most one long side" domains a triple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainLabel {
    W000,
    W001,
    W010,
    W100,
    Boundary,
}

impl DomainLabel {
    /// The flip pattern that carries a triple of this domain into `W000`.
    pub fn flips(self) -> Option<FlipPattern> {
        match self {
            DomainLabel::W000 => Some(FlipPattern::STANDARD),
            DomainLabel::W001 => Some(FlipPattern::new(false, false, true)),
            DomainLabel::W010 => Some(FlipPattern::new(false, true, false)),
            DomainLabel::W100 => Some(FlipPattern::new(true, false, false)),
            DomainLabel::Boundary => None,
        }
    }
}

impl fmt::Display for DomainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainLabel::W000 => "W000",
            DomainLabel::W001 => "W001",
            DomainLabel::W010 => "W010",
            DomainLabel::W100 => "W100",
            DomainLabel::Boundary => "boundary",
        };
        f.write_str(s)
    }
}

/// A pattern `(eta, nu, rho)` of antipodal flips, one bit per midpoint.
///
/// Bit `k` set means the side through midpoint `k` is long. The eight patterns
/// index the partial products; a pattern and its complement are conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlipPattern(u8);

impl FlipPattern {
    pub const STANDARD: FlipPattern = FlipPattern(0);
    pub const ALL: FlipPattern = FlipPattern(0b111);

    pub const fn new(eta: bool, nu: bool, rho: bool) -> Self {
        FlipPattern(((eta as u8) << 2) | ((nu as u8) << 1) | (rho as u8))
    }

    /// All eight patterns in the order `000, 001, ..., 111`.
    pub fn all() -> [FlipPattern; 8] {
        std::array::from_fn(|i| FlipPattern(i as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < 8).then_some(FlipPattern(i as u8))
    }

    pub fn eta(self) -> bool {
        self.0 & 0b100 != 0
    }
    pub fn nu(self) -> bool {
        self.0 & 0b010 != 0
    }
    pub fn rho(self) -> bool {
        self.0 & 0b001 != 0
    }

    /// Whether midpoint `k` (0-based) is flipped.
    pub fn flips(self, k: usize) -> bool {
        self.0 & (0b100 >> k) != 0
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    pub fn complement(self) -> Self {
        FlipPattern(!self.0 & 0b111)
    }

    /// The member of the conjugate pair `{self, complement}` with at most one
    /// long side. Both members share this domain.
    pub fn domain_pattern(self) -> Self {
        if self.weight() <= 1 {
            self
        } else {
            self.complement()
        }
    }

    pub fn domain(self) -> DomainLabel {
        match self.domain_pattern().0 {
            0b000 => DomainLabel::W000,
            0b001 => DomainLabel::W001,
            0b010 => DomainLabel::W010,
            _ => DomainLabel::W100,
        }
    }

    /// Whether this pattern belongs to the conjugate (right) column.
    pub fn is_conjugate(self) -> bool {
        self.weight() >= 2
    }

    pub fn apply(self, p: [SpherePoint; 3]) -> [SpherePoint; 3] {
        std::array::from_fn(|k| if self.flips(k) { -p[k] } else { p[k] })
    }
}

impl fmt::Display for FlipPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.eta() as u8, self.nu() as u8, self.rho() as u8)
    }
}

impl FromStr for FlipPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let b = s.as_bytes();
        if b.len() != 3 || !b.iter().all(|c| *c == b'0' || *c == b'1') {
            return Err(Error::InvalidArgument(format!("flip pattern must be three binary digits, got {s:?}")));
        }
        Ok(FlipPattern::new(b[0] == b'1', b[1] == b'1', b[2] == b'1'))
    }
}

/// Scalar invariants of an ordered triple plus its classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TripleInvariants {
    pub d12: f64,
    pub d23: f64,
    pub d31: f64,
    pub det: f64,
    pub eta: Eta,
    pub label: DomainLabel,
}

impl TripleInvariants {
    #[inline]
    pub fn compute(p1: &SpherePoint, p2: &SpherePoint, p3: &SpherePoint, eps_sign: f64) -> Self {
        let d12 = p1.dot(p2);
        let d23 = p2.dot(p3);
        let d31 = p3.dot(p1);
        Self::from_parts(d12, d23, d31, triple_det(p1, p2, p3), eps_sign)
    }

    #[inline]
    pub fn from_parts(d12: f64, d23: f64, d31: f64, det: f64, eps_sign: f64) -> Self {
        let (eta, label) = classify_signs(d12, d23, d31, eps_sign);
        TripleInvariants {
            d12,
            d23,
            d31,
            det,
            eta,
            label,
        }
    }

    /// `1 - det^2`, factored so that it is invariant under `det -> -det`.
    #[inline]
    pub fn one_minus_det_sq(&self) -> f64 {
        (1.0 - self.det) * (1.0 + self.det)
    }

    /// `e^{iS/2}`; `None` on the boundary unless `det = +-1` exactly.
    #[inline]
    pub fn half_phase(&self) -> Option<Complex64> {
        let r = self.one_minus_det_sq().max(0.0).sqrt();
        match self.eta.sign() {
            Some(s) => Some(Complex64::new(s * r, self.det)),
            None if r == 0.0 => Some(Complex64::new(0.0, self.det)),
            None => None,
        }
    }

    /// Jacobian amplitude; `None` when `1 - det^2 < eps_det`. Boundary triples
    /// have amplitude zero.
    #[inline]
    pub fn jacobian(&self, eps_det: f64) -> std::result::Result<f64, f64> {
        if self.label == DomainLabel::Boundary {
            return Ok(0.0);
        }
        let q = self.one_minus_det_sq();
        if q < eps_det {
            return Err(q);
        }
        let [a, b, c] = sort3_by_abs([self.d12.abs(), self.d23.abs(), self.d31.abs()]);
        Ok(16.0 * ((a * b) * c) / (q * q * q.sqrt()))
    }
}

#[inline]
fn classify_signs(d12: f64, d23: f64, d31: f64, eps_sign: f64) -> (Eta, DomainLabel) {
    if d12.abs() < eps_sign || d23.abs() < eps_sign || d31.abs() < eps_sign {
        return (Eta::Boundary, DomainLabel::Boundary);
    }
    let (s12, s23, s31) = (d12 > 0.0, d23 > 0.0, d31 > 0.0);
    let eta_of = |positive: bool| if positive { Eta::Plus } else { Eta::Minus };
    if s12 == s23 && s23 == s31 {
        (eta_of(s12), DomainLabel::W000)
    } else if s23 == s31 {
        // <p1,p2> deviates: the side through p3 is long.
        (eta_of(s23), DomainLabel::W001)
    } else if s12 == s31 {
        (eta_of(s12), DomainLabel::W100)
    } else {
        (eta_of(s12), DomainLabel::W010)
    }
}

/// Ordered midpoint triple with cached invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointTriple {
    points: [SpherePoint; 3],
    inv: TripleInvariants,
}

impl MidpointTriple {
    pub fn classify(p1: SpherePoint, p2: SpherePoint, p3: SpherePoint, eps_sign: f64) -> Self {
        MidpointTriple {
            points: [p1, p2, p3],
            inv: TripleInvariants::compute(&p1, &p2, &p3, eps_sign),
        }
    }

    pub fn points(&self) -> [SpherePoint; 3] {
        self.points
    }
    pub fn d12(&self) -> f64 {
        self.inv.d12
    }
    pub fn d23(&self) -> f64 {
        self.inv.d23
    }
    pub fn d31(&self) -> f64 {
        self.inv.d31
    }
    pub fn det(&self) -> f64 {
        self.inv.det
    }
    pub fn eta(&self) -> Eta {
        self.inv.eta
    }
    pub fn label(&self) -> DomainLabel {
        self.inv.label
    }
    pub fn is_boundary(&self) -> bool {
        self.inv.label == DomainLabel::Boundary
    }
    pub fn one_minus_det_sq(&self) -> f64 {
        self.inv.one_minus_det_sq()
    }
    pub(crate) fn invariants(&self) -> &TripleInvariants {
        &self.inv
    }

    /// The unit holonomy `e^{iS/2} = eta sqrt(1 - det^2) + i det`.
    pub fn half_phase(&self) -> Result<Complex64> {
        self.inv.half_phase().ok_or(Error::SignDegenerate)
    }

    /// Re-classifies after flipping the points selected by `pattern`.
    pub fn flipped(&self, pattern: FlipPattern, eps_sign: f64) -> Self {
        let [a, b, c] = pattern.apply(self.points);
        MidpointTriple::classify(a, b, c, eps_sign)
    }
}

pub fn classify_triple(p1: SpherePoint, p2: SpherePoint, p3: SpherePoint, eps_sign: f64) -> MidpointTriple {
    MidpointTriple::classify(p1, p2, p3, eps_sign)
}

/// Symplectic area `S = 2 Arg(eta sqrt(1 - det^2) + i det)` in `(-2 pi, 2 pi]`.
pub fn triangle_area_s(t: &MidpointTriple) -> Result<f64> {
    let z = t.half_phase()?;
    // +0.0 folds a negative zero imaginary part onto the upper branch.
    let s = 2.0 * (z.im + 0.0).atan2(z.re);
    Ok(s)
}

/// Jacobian amplitude `16 |d12 d23 d31| (1 - det^2)^{-5/2}`; zero on the boundary.
pub fn amplitude_a(t: &MidpointTriple, eps_det: f64) -> Result<f64> {
    t.inv.jacobian(eps_det).map_err(Error::SingularJacobian)
}

/// Vertices of a geodesic triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleVertices {
    pub a: SpherePoint,
    pub b: SpherePoint,
    pub c: SpherePoint,
}

impl TriangleVertices {
    pub fn new(a: SpherePoint, b: SpherePoint, c: SpherePoint) -> Self {
        TriangleVertices { a, b, c }
    }
}

#[derive(Clone, Copy)]
struct Quat {
    w: f64,
    v: Vec3,
}

impl Quat {
    fn pure(p: &SpherePoint) -> Self {
        Quat { w: 0.0, v: p.v }
    }

    fn mul(&self, o: &Quat) -> Quat {
        let c = cross3(&self.v, &o.v);
        Quat {
            w: self.w * o.w - dot3(&self.v, &o.v),
            v: [
                self.w * o.v[0] + o.w * self.v[0] + c[0],
                self.w * o.v[1] + o.w * self.v[1] + c[1],
                self.w * o.v[2] + o.w * self.v[2] + c[2],
            ],
        }
    }
}

/// Half-turn about the axis `p`: `x -> 2 (p.x) p - x`.
#[inline]
pub fn point_reflection(p: &SpherePoint, x: &SpherePoint) -> SpherePoint {
    let s = 2.0 * p.dot(x);
    SpherePoint::from_unit([s * p.v[0] - x.v[0], s * p.v[1] - x.v[1], s * p.v[2] - x.v[2]])
}

fn renormalize(p: SpherePoint) -> SpherePoint {
    let n = norm3(&p.v);
    SpherePoint::from_unit([p.v[0] / n, p.v[1] / n, p.v[2] / n])
}

/// Recovers the all-short triangle whose side midpoints are `t`.
///
/// The half-turns about `p1`, `p2`, `p3` carry `a -> b -> c -> a`, so the
/// composite rotation fixes `a`. Its axis is read off the composed unit
/// quaternion; the sign is the one for which all three recovered sides are
/// short.
pub fn vertices_from_midpoints(t: &MidpointTriple, eps_det: f64) -> Result<TriangleVertices> {
    match t.label() {
        DomainLabel::W000 => {}
        DomainLabel::Boundary => return Err(Error::SignDegenerate),
        other => return Err(Error::NotStandard(other.to_string())),
    }
    if t.one_minus_det_sq() < eps_det {
        return Err(Error::DegenerateFamily);
    }
    let [p1, p2, p3] = t.points;
    let composite = Quat::pure(&p3).mul(&Quat::pure(&p2)).mul(&Quat::pure(&p1));
    let axis_norm = norm3(&composite.v);
    if !(axis_norm > 0.0) {
        return Err(Error::DegenerateFamily);
    }
    let axis = SpherePoint::from_unit([
        composite.v[0] / axis_norm,
        composite.v[1] / axis_norm,
        composite.v[2] / axis_norm,
    ]);

    let build = |a: SpherePoint| {
        let b = renormalize(point_reflection(&p1, &a));
        let c = renormalize(point_reflection(&p2, &b));
        let score = p1.dot(&a).min(p2.dot(&b)).min(p3.dot(&c));
        (TriangleVertices { a, b, c }, score)
    };
    let (plus, s_plus) = build(axis);
    let (minus, s_minus) = build(-axis);
    let (best, score) = if s_plus >= s_minus {
        (plus, s_plus)
    } else {
        (minus, s_minus)
    };
    if !(score > 0.0) {
        return Err(Error::DegenerateTriangle("no all-short triangle has these midpoints"));
    }
    Ok(best)
}

/// Short-geodesic midpoints `(ab, bc, ca)` of a triangle.
pub fn midpoints_from_vertices(v: &TriangleVertices, eps_sign: f64) -> Result<MidpointTriple> {
    let mid = |x: &SpherePoint, y: &SpherePoint, i: usize, j: usize| {
        let s = [x.v[0] + y.v[0], x.v[1] + y.v[1], x.v[2] + y.v[2]];
        let n = norm3(&s);
        if n < EPS_MIDPOINT {
            return Err(Error::MidpointNotUnique(i, j));
        }
        Ok(SpherePoint::from_unit([s[0] / n, s[1] / n, s[2] / n]))
    };
    let m1 = mid(&v.a, &v.b, 0, 1)?;
    let m2 = mid(&v.b, &v.c, 1, 2)?;
    let m3 = mid(&v.c, &v.a, 2, 0)?;
    Ok(MidpointTriple::classify(m1, m2, m3, eps_sign))
}

/// Oriented spherical excess: interior angle sum minus `pi`, signed by the
/// orientation `det(a, b, c)`.
pub fn signed_area_from_vertices(v: &TriangleVertices) -> Result<f64> {
    let angle = |at: &SpherePoint, p: &SpherePoint, q: &SpherePoint| -> Result<f64> {
        let tp = tangent(at, p);
        let tq = tangent(at, q);
        if norm3(&tp) < EPS_NORM || norm3(&tq) < EPS_NORM {
            return Err(Error::DegenerateTriangle("coincident or antipodal vertices"));
        }
        Ok(norm3(&cross3(&tp, &tq)).atan2(dot3(&tp, &tq)))
    };
    let orientation = dot3(&v.a.v, &cross3(&v.b.v, &v.c.v));
    if orientation == 0.0 {
        return Err(Error::DegenerateTriangle("vertices lie on a great circle"));
    }
    let excess = angle(&v.a, &v.b, &v.c)? + angle(&v.b, &v.c, &v.a)? + angle(&v.c, &v.a, &v.b)?
        - std::f64::consts::PI;
    Ok(excess.copysign(orientation))
}

fn tangent(at: &SpherePoint, toward: &SpherePoint) -> Vec3 {
    let d = at.dot(toward);
    [
        toward.v[0] - d * at.v[0],
        toward.v[1] - d * at.v[1],
        toward.v[2] - d * at.v[2],
    ]
}

/// Maps a triple of any non-boundary class onto its `W000` representative.
///
/// Returns the standardized triple and the pattern that was applied. A
/// triple and its full antipode are both standard; the complementary pattern
/// `flips.complement()` describes the conjugate (all-long) reading.
pub fn standardize_conjugate(t: &MidpointTriple) -> Result<(MidpointTriple, FlipPattern)> {
    let flips = t.label().flips().ok_or(Error::SignDegenerate)?;
    let [a, b, c] = flips.apply(t.points);
    let standard = MidpointTriple {
        points: [a, b, c],
        inv: TripleInvariants::compute(&a, &b, &c, f64::MIN_POSITIVE),
    };
    debug_assert_eq!(standard.label(), DomainLabel::W000);
    Ok((standard, flips))
}

/// A proper rotation of 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Rotation from a (not necessarily normalized) quaternion `(w, x, y, z)`.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n > EPS_NORM) {
            return Err(Error::DegeneratePoint(n));
        }
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Ok(Rotation {
            m: [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ],
        })
    }

    /// A rotation carrying the north pole `e_z` onto `p`.
    pub fn pole_to(p: &SpherePoint) -> Self {
        let (st, ct) = p.theta().sin_cos();
        let (sp, cp) = p.phi().sin_cos();
        // R_z(phi) R_y(theta)
        Rotation {
            m: [
                [cp * ct, -sp, cp * st],
                [sp * ct, cp, sp * st],
                [-st, 0.0, ct],
            ],
        }
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        let m = &self.m;
        let v = &p.v;
        renormalize(SpherePoint::from_unit([
            dot3(&m[0], v),
            dot3(&m[1], v),
            dot3(&m[2], v),
        ]))
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }
}
