//! Möbius transformations of the Riemann sphere, their Poincaré extension to
//! upper half-space, the Poisson kernel and the cross ratio.
//!
//! Maps are stored as determinant-one matrices. Since `M` and `-M` act
//! identically, a canonical sign is chosen after every normalization: the
//! first nonzero component of `(a.re, a.im, b.re, b.im, c.re, c.im, d.re,
//! d.im)` is positive.
//!
//! Points of hyperbolic 3-space use the upper half-space model
//! `{(x1, x2, t) : t > 0}` with default basepoint `(0, 0, 1)`.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used to classify a map from its squared trace.
pub const TRACE_TOLERANCE: f64 = 1e-9;

/// A point of the Riemann sphere. Infinity is an explicit variant, never a
/// large float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexPoint {
    Finite(Complex64),
    Infinity,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(ComplexPoint::Finite(Complex64::new(re, im)))
        } else {
            Err(Error::InvalidPoint(format!("({re}, {im}) is not finite")))
        }
    }

    pub fn real(x: f64) -> Self {
        ComplexPoint::Finite(Complex64::new(x, 0.0))
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            ComplexPoint::Finite(z) => Some(z),
            ComplexPoint::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ComplexPoint::Infinity)
    }

    /// Homogeneous coordinates `(x, y)` with `z = x / y`.
    fn homogeneous(&self) -> (Complex64, Complex64) {
        match *self {
            ComplexPoint::Finite(z) => (z, Complex64::new(1.0, 0.0)),
            ComplexPoint::Infinity => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }

    fn from_homogeneous(x: Complex64, y: Complex64) -> Self {
        if y == Complex64::new(0.0, 0.0) {
            ComplexPoint::Infinity
        } else {
            ComplexPoint::Finite(x / y)
        }
    }

    /// Chordal distance on the unit sphere; finite for every pair of points.
    pub fn chordal_distance(&self, other: &ComplexPoint) -> f64 {
        match (*self, *other) {
            (ComplexPoint::Infinity, ComplexPoint::Infinity) => 0.0,
            (ComplexPoint::Finite(z), ComplexPoint::Infinity)
            | (ComplexPoint::Infinity, ComplexPoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (ComplexPoint::Finite(z), ComplexPoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
            }
        }
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        ComplexPoint::Finite(z)
    }
}

impl fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexPoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            ComplexPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Classification of a nonidentity element of PSL(2, C) by its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

/// A normalized fractional-linear map `z -> (a z + b) / (c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl MoebiusMap {
    /// Builds and normalizes a map. Fails if `ad - bc` vanishes.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !det.is_finite() || !scale.is_finite() || det.norm() <= 1e-300 || det.norm() <= 1e-28 * scale * scale {
            return Err(Error::Singular { det: det.norm() });
        }
        Ok(Self::normalized_from(a, b, c, d))
    }

    pub fn identity() -> Self {
        Self { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(0.0, 0.0), d: c(1.0, 0.0) }
    }

    /// `z -> k z`.
    pub fn dilation(k: Complex64) -> Result<Self> {
        Self::new(k, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
    }

    /// `z -> z + t`.
    pub fn translation(t: Complex64) -> Self {
        Self { a: c(1.0, 0.0), b: t, c: c(0.0, 0.0), d: c(1.0, 0.0) }
    }

    /// The map sending `z1 -> 0`, `z2 -> 1`, `z3 -> infinity`.
    pub fn from_three_points(z1: ComplexPoint, z2: ComplexPoint, z3: ComplexPoint) -> Result<Self> {
        let (x1, y1) = z1.homogeneous();
        let (x2, y2) = z2.homogeneous();
        let (x3, y3) = z3.homogeneous();
        let d23 = x2 * y3 - x3 * y2;
        let d21 = x2 * y1 - x1 * y2;
        Self::new(y1 * d23, -x1 * d23, y3 * d21, -x3 * d21)
    }

    fn normalized_from(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        let k = (a * d - b * c).sqrt().inv();
        let mut m = Self { a: a * k, b: b * k, c: c * k, d: d * k };
        m.canonical_sign();
        m
    }

    fn canonical_sign(&mut self) {
        let comps = [self.a.re, self.a.im, self.b.re, self.b.im, self.c.re, self.c.im, self.d.re, self.d.im];
        if let Some(&first) = comps.iter().find(|x| **x != 0.0) {
            if first < 0.0 {
                self.a = -self.a;
                self.b = -self.b;
                self.c = -self.c;
                self.d = -self.d;
            }
        }
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }
    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Squared trace; well defined on PSL(2, C).
    pub fn trace_squared(&self) -> Complex64 {
        let t = self.trace();
        t * t
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        // The product of determinant-one matrices has determinant one. For
        // long words ad - bc cancels catastrophically, so rescale only when
        // the computed determinant is trustworthy.
        let scale = (a * d).norm() + (b * c).norm();
        if scale * f64::EPSILON < 1e-8 {
            Self::normalized_from(a, b, c, d)
        } else {
            let mut m = Self { a, b, c, d };
            m.canonical_sign();
            m
        }
    }

    pub fn inverse(&self) -> MoebiusMap {
        let mut m = Self { a: self.d, b: -self.b, c: -self.c, d: self.a };
        m.canonical_sign();
        m
    }

    /// `h ∘ self ∘ h⁻¹`.
    pub fn conjugate_by(&self, h: &MoebiusMap) -> MoebiusMap {
        h.compose(self).compose(&h.inverse())
    }

    pub fn apply(&self, z: ComplexPoint) -> ComplexPoint {
        match z {
            ComplexPoint::Infinity => ComplexPoint::from_homogeneous(self.a, self.c),
            ComplexPoint::Finite(z) => ComplexPoint::from_homogeneous(self.a * z + self.b, self.c * z + self.d),
        }
    }

    /// `|m'(z)|` for finite `z` (infinite at the pole).
    pub fn derivative_modulus(&self, z: Complex64) -> f64 {
        1.0 / (self.c * z + self.d).norm_sqr()
    }

    /// The point sent to infinity, if finite.
    pub fn pole(&self) -> ComplexPoint {
        if self.c == c(0.0, 0.0) {
            ComplexPoint::Infinity
        } else {
            ComplexPoint::Finite(-self.d / self.c)
        }
    }

    pub fn kind(&self) -> MapKind {
        let t2 = self.trace_squared();
        if (t2 - c(4.0, 0.0)).norm() <= TRACE_TOLERANCE {
            let off = self.b.norm() + self.c.norm() + (self.a - self.d).norm();
            if off <= TRACE_TOLERANCE {
                MapKind::Identity
            } else {
                MapKind::Parabolic
            }
        } else if t2.im.abs() <= TRACE_TOLERANCE && t2.re >= -TRACE_TOLERANCE && t2.re < 4.0 {
            MapKind::Elliptic
        } else {
            MapKind::Loxodromic
        }
    }

    /// Frobenius norm squared; `cosh d((0,0,1), m(0,0,1)) = |m|² / 2`.
    pub fn frobenius_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// Poincaré extension to upper half-space.
    pub fn act_h3(&self, x: &H3Point) -> H3Point {
        let z = x.z();
        let t = x.t;
        let czd = self.c * z + self.d;
        let den = czd.norm_sqr() + self.c.norm_sqr() * t * t;
        let w = ((self.a * z + self.b) * czd.conj() + self.a * self.c.conj() * t * t) / den;
        H3Point { x1: w.re, x2: w.im, t: t / den }
    }
}

impl Serialize for MoebiusMap {
    /// As `[[a.re, a.im], [b.re, b.im], [c.re, c.im], [d.re, d.im]]`.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries().map(|z| [z.re, z.im]).serialize(serializer)
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;
    fn mul(self, rhs: MoebiusMap) -> MoebiusMap {
        self.compose(&rhs)
    }
}

impl Mul for &MoebiusMap {
    type Output = MoebiusMap;
    fn mul(self, rhs: &MoebiusMap) -> MoebiusMap {
        self.compose(rhs)
    }
}

/// Largest entrywise distance between two maps, taken over both matrix
/// representatives of the second.
pub fn entry_distance(m1: &MoebiusMap, m2: &MoebiusMap) -> f64 {
    let e1 = m1.entries();
    let e2 = m2.entries();
    let plus = e1.iter().zip(&e2).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let minus = e1.iter().zip(&e2).map(|(x, y)| (x + y).norm()).fold(0.0, f64::max);
    plus.min(minus)
}

/// `m1 ∘ m2`, normalized.
pub fn compose(m1: &MoebiusMap, m2: &MoebiusMap) -> MoebiusMap {
    m1.compose(m2)
}

pub fn apply_sphere(m: &MoebiusMap, z: ComplexPoint) -> ComplexPoint {
    m.apply(z)
}

/// A point `(x1, x2, t)` of upper half-space, `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H3Point {
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
}

impl H3Point {
    pub fn new(x1: f64, x2: f64, t: f64) -> Result<Self> {
        if !(x1.is_finite() && x2.is_finite() && t.is_finite()) || t <= 0.0 {
            return Err(Error::InvalidPoint(format!("({x1}, {x2}, {t}) is not in upper half-space")));
        }
        Ok(Self { x1, x2, t })
    }

    /// The default basepoint `(0, 0, 1)`.
    pub fn origin() -> Self {
        Self { x1: 0.0, x2: 0.0, t: 1.0 }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x1, self.x2)
    }

    /// Hyperbolic distance, via `sinh(d/2) = |p - q| / (2 sqrt(t_p t_q))`.
    pub fn distance(&self, other: &H3Point) -> f64 {
        let dz = (self.z() - other.z()).norm_sqr();
        let dt = self.t - other.t;
        let chord = (dz + dt * dt).sqrt();
        2.0 * (chord / (2.0 * (self.t * other.t).sqrt())).asinh()
    }

    /// Unit vector at this point pointing towards `y`, expressed in the ball
    /// model centred here. `None` when `y` coincides with this point.
    fn direction_to(&self, y: &H3Point) -> Option<[f64; 3]> {
        let z = (y.z() - self.z()) / self.t;
        let t = y.t / self.t;
        let den = z.norm_sqr() + (t + 1.0) * (t + 1.0);
        let u = [2.0 * z.re / den, 2.0 * z.im / den, (z.norm_sqr() + t * t - 1.0) / den];
        let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        if n == 0.0 {
            None
        } else {
            Some([u[0] / n, u[1] / n, u[2] / n])
        }
    }

    fn boundary_direction(&self, zeta: ComplexPoint) -> [f64; 3] {
        match zeta {
            ComplexPoint::Infinity => [0.0, 0.0, 1.0],
            ComplexPoint::Finite(w) => {
                let z = (w - self.z()) / self.t;
                let n2 = z.norm_sqr();
                let den = n2 + 1.0;
                [2.0 * z.re / den, 2.0 * z.im / den, (n2 - 1.0) / den]
            }
        }
    }

    /// Endpoint on the sphere of the geodesic ray from this point through `y`.
    /// Returns `None` when `y` coincides with this point.
    pub fn ray_endpoint(&self, y: &H3Point) -> Option<ComplexPoint> {
        let z = (y.z() - self.z()) / self.t;
        let t = y.t / self.t;
        let den = z.norm_sqr() + (t + 1.0) * (t + 1.0);
        let u1 = 2.0 * z.re / den;
        let u2 = 2.0 * z.im / den;
        let u3 = (z.norm_sqr() + t * t - 1.0) / den;
        let horiz = u1 * u1 + u2 * u2;
        let n = (horiz + u3 * u3).sqrt();
        if n == 0.0 {
            return None;
        }
        // inverse stereographic projection of u/|u|, arranged to avoid cancellation
        let w = if u3 > 0.0 {
            if horiz == 0.0 {
                return Some(ComplexPoint::Infinity);
            }
            Complex64::new(u1, u2) * ((n + u3) / horiz)
        } else {
            Complex64::new(u1, u2) / (n - u3)
        };
        Some(ComplexPoint::Finite(self.z() + w * self.t))
    }

    /// Cosine of the angle at this point between the geodesic towards `y`
    /// and the geodesic ray towards `zeta`, returned as `1 - cos`.
    fn one_minus_cos_angle(&self, y: &H3Point, zeta: ComplexPoint) -> f64 {
        match self.direction_to(y) {
            None => 1.0,
            Some(u) => {
                let v = self.boundary_direction(zeta);
                let d2: f64 = (0..3).map(|k| (u[k] - v[k]) * (u[k] - v[k])).sum();
                0.5 * d2
            }
        }
    }
}

impl Default for H3Point {
    fn default() -> Self {
        Self::origin()
    }
}

/// Fixed points, multiplier and translation length of a loxodromic map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoxodromicData {
    /// Repelling fixed point.
    pub fixed_minus: ComplexPoint,
    /// Attracting fixed point.
    pub fixed_plus: ComplexPoint,
    /// Multiplier with `|multiplier| > 1`: the map is conjugate to `z -> multiplier * z`
    /// with `fixed_minus -> 0` and `fixed_plus -> infinity`.
    pub multiplier: Complex64,
    pub translation_length: f64,
}

pub fn loxodromic_data(m: &MoebiusMap) -> Result<LoxodromicData> {
    if m.kind() != MapKind::Loxodromic {
        let t2 = m.trace_squared();
        return Err(Error::NotLoxodromic { re: t2.re, im: t2.im });
    }
    let t = m.trace();
    let mut disc = (t * t - 4.0).sqrt();
    // eigenvalue of modulus > 1
    let mut mu = (t + disc) / 2.0;
    if mu.norm() < 1.0 {
        disc = -disc;
        mu = (t + disc) / 2.0;
    }
    let multiplier = mu * mu;
    let translation_length = 2.0 * mu.norm().ln();

    // roots of c z² + (d - a) z - b = 0, computed stably
    let (a, b, cc, d) = (m.a, m.b, m.c, m.d);
    let p = d - a;
    let sgn = if (p.conj() * disc).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -(p + disc * sgn) / 2.0;
    let root1 = if cc == Complex64::new(0.0, 0.0) { ComplexPoint::Infinity } else { ComplexPoint::Finite(q / cc) };
    let root2 = if q == Complex64::new(0.0, 0.0) { ComplexPoint::Infinity } else { ComplexPoint::Finite(-b / q) };

    // a finite fixed point f is attracting iff |c f + d|² > 1
    let attracting = |f: ComplexPoint| -> bool {
        match f {
            ComplexPoint::Finite(z) => (cc * z + d).norm_sqr() > 1.0,
            // z -> (a/d) z + b/d near infinity: attracting iff |a/d| > 1
            ComplexPoint::Infinity => a.norm() > d.norm(),
        }
    };
    let (fixed_plus, fixed_minus) = if attracting(root1) && !attracting(root2) {
        (root1, root2)
    } else if attracting(root2) && !attracting(root1) {
        (root2, root1)
    } else {
        // numerically ambiguous; fall back to comparing the derivative moduli
        let dm = |f: ComplexPoint| match f {
            ComplexPoint::Finite(z) => (cc * z + d).norm_sqr(),
            ComplexPoint::Infinity => (a / d).norm_sqr(),
        };
        if dm(root1) >= dm(root2) {
            (root1, root2)
        } else {
            (root2, root1)
        }
    };
    Ok(LoxodromicData { fixed_minus, fixed_plus, multiplier, translation_length })
}

/// Hyperbolic distance between `x` and `m·x`.
pub fn h3_displacement(m: &MoebiusMap, x: &H3Point) -> f64 {
    x.distance(&m.act_h3(x))
}

/// `ln Ψ_x(m⁻¹x, ζ) = -ln(cosh d - sinh d · cos θ)` with `d = d(x, m x)` and
/// `θ` the angle at `x` between `m⁻¹x` and `ζ`.
pub fn log_poisson_kernel(m: &MoebiusMap, x: &H3Point, zeta: ComplexPoint) -> f64 {
    PoissonKernel::new(m, x).log_value(zeta)
}

/// The kernel `ζ -> Ψ_x(m⁻¹x, ζ)` with `m⁻¹x` and `d` computed once, for
/// evaluation at many boundary points.
#[derive(Debug, Clone, Copy)]
pub struct PoissonKernel {
    x: H3Point,
    y: H3Point,
    d: f64,
}

impl PoissonKernel {
    pub fn new(m: &MoebiusMap, x: &H3Point) -> Self {
        let y = m.inverse().act_h3(x);
        Self { x: *x, y, d: x.distance(&y) }
    }

    pub fn log_value(&self, zeta: ComplexPoint) -> f64 {
        let h = self.x.one_minus_cos_angle(&self.y, zeta);
        // cosh d - sinh d cos θ = e^{-d} + sinh(d)(1 - cos θ)
        //                       = e^{d} (e^{-2d} + h (1 - e^{-2d}) / 2)
        let e2 = (-2.0 * self.d).exp();
        -(self.d + (e2 + 0.5 * h * (1.0 - e2)).ln())
    }

    pub fn value(&self, zeta: ComplexPoint, s: f64) -> f64 {
        (s * self.log_value(zeta)).exp()
    }
}

/// The Poisson kernel `Ψ_x(m⁻¹x, ζ)^s = (cosh d - sinh d cos θ)^{-s}`.
pub fn poisson_kernel(m: &MoebiusMap, x: &H3Point, zeta: ComplexPoint, s: f64) -> f64 {
    (s * log_poisson_kernel(m, x, zeta)).exp()
}

/// `[z1, z2, z3, z4] = (z1 - z3)(z2 - z4) / ((z1 - z4)(z2 - z3))`.
///
/// Infinite arguments are handled in homogeneous coordinates, which amounts
/// to cancelling the two factors containing the infinite point.
pub fn cross_ratio(z1: ComplexPoint, z2: ComplexPoint, z3: ComplexPoint, z4: ComplexPoint) -> Result<ComplexPoint> {
    let h = [z1.homogeneous(), z2.homogeneous(), z3.homogeneous(), z4.homogeneous()];
    let det = |i: usize, j: usize| h[i].0 * h[j].1 - h[j].0 * h[i].1;
    let num = det(0, 2) * det(1, 3);
    let den = det(0, 3) * det(1, 2);
    let zero = Complex64::new(0.0, 0.0);
    if num == zero && den == zero {
        return Err(Error::DegenerateCrossRatio);
    }
    Ok(ComplexPoint::from_homogeneous(num, den))
}

/// A round circle in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidCircle("center must be finite".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidCircle(format!("radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    pub fn point_at(&self, angle: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, angle)
    }

    /// Circle through three distinct non-collinear points.
    pub fn through(p: Complex64, q: Complex64, r: Complex64) -> Option<Circle> {
        let d = 2.0 * (p.re * (q.im - r.im) + q.re * (r.im - p.im) + r.re * (p.im - q.im));
        let scale = (p - q).norm().max((q - r).norm()).max((r - p).norm());
        if d.abs() <= 1e-14 * scale * scale {
            return None;
        }
        let (p2, q2, r2) = (p.norm_sqr(), q.norm_sqr(), r.norm_sqr());
        let ux = (p2 * (q.im - r.im) + q2 * (r.im - p.im) + r2 * (p.im - q.im)) / d;
        let uy = (p2 * (r.re - q.re) + q2 * (p.re - r.re) + r2 * (q.re - p.re)) / d;
        let center = Complex64::new(ux, uy);
        Some(Circle { center, radius: (p - center).norm() })
    }

    /// Image under `m`, when it is a circle (not a line) and the disk interior
    /// maps to the interior of the image.
    pub fn image(&self, m: &MoebiusMap) -> Option<Circle> {
        if let ComplexPoint::Finite(p) = m.pole() {
            if (p - self.center).norm() <= self.radius {
                return None;
            }
        }
        let pts: Vec<Complex64> = [0.0, 2.0, 4.0]
            .iter()
            .map(|k| m.apply(ComplexPoint::Finite(self.point_at(k * std::f64::consts::PI / 3.0))).finite())
            .collect::<Option<Vec<_>>>()?;
        Circle::through(pts[0], pts[1], pts[2])
    }

    pub fn contains_open(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }

    pub fn contains_closed(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    fn fin(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::Finite(cx(re, im))
    }

    #[test]
    fn compose_examples() {
        let m = MoebiusMap::new(cx(1.0, 2.0), cx(0.5, 0.0), cx(-1.0, 0.3), cx(2.0, 0.0)).unwrap();
        assert!(entry_distance(&compose(&MoebiusMap::identity(), &m), &m) < 1e-14);
        assert!(entry_distance(&compose(&m, &m.inverse()), &MoebiusMap::identity()) < 1e-14);

        let dil = MoebiusMap::dilation(cx(2.0, 0.0)).unwrap();
        let tr = MoebiusMap::translation(cx(1.0, 0.0));
        let expected = MoebiusMap::new(cx(2.0, 0.0), cx(2.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)).unwrap();
        assert!(entry_distance(&compose(&dil, &tr), &expected) < 1e-14);
    }

    #[test]
    fn normalization_and_sign() {
        let m = MoebiusMap::new(cx(-3.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0)).unwrap();
        assert!((m.determinant() - cx(1.0, 0.0)).norm() < 1e-12);
        assert!(m.a().re > 0.0);
        assert!(MoebiusMap::new(cx(1.0, 0.0), cx(2.0, 0.0), cx(2.0, 0.0), cx(4.0, 0.0)).is_err());
    }

    #[test]
    fn apply_examples() {
        let dil = MoebiusMap::dilation(cx(2.0, 0.0)).unwrap();
        assert!(dil.apply(fin(3.0, 0.0)).chordal_distance(&fin(6.0, 0.0)) < 1e-15);
        let inv = MoebiusMap::new(cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)).unwrap();
        assert_eq!(inv.apply(fin(0.0, 0.0)), ComplexPoint::Infinity);
        let cayley = MoebiusMap::new(cx(1.0, 0.0), cx(-1.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0)).unwrap();
        let w = cayley.apply(ComplexPoint::Infinity).finite().unwrap();
        assert!((w - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn loxodromic_examples() {
        let m = MoebiusMap::dilation(cx(4.0, 0.0)).unwrap();
        let data = loxodromic_data(&m).unwrap();
        assert_eq!(data.fixed_minus, fin(0.0, 0.0));
        assert_eq!(data.fixed_plus, ComplexPoint::Infinity);
        assert!((data.multiplier - cx(4.0, 0.0)).norm() < 1e-12);
        assert!((data.translation_length - 4f64.ln()).abs() < 1e-12);

        assert!(matches!(loxodromic_data(&MoebiusMap::identity()), Err(Error::NotLoxodromic { .. })));
        let para = MoebiusMap::translation(cx(1.0, 0.0));
        assert!(matches!(loxodromic_data(&para), Err(Error::NotLoxodromic { .. })));
        let rot = MoebiusMap::dilation(Complex64::from_polar(1.0, 0.7)).unwrap();
        assert_eq!(rot.kind(), MapKind::Elliptic);
        assert!(loxodromic_data(&rot).is_err());
    }

    #[test]
    fn contraction_towards_zero_swaps_fixed_points() {
        let m = MoebiusMap::dilation(cx(0.25, 0.0)).unwrap();
        let data = loxodromic_data(&m).unwrap();
        assert_eq!(data.fixed_plus, fin(0.0, 0.0));
        assert_eq!(data.fixed_minus, ComplexPoint::Infinity);
        assert!((data.multiplier - cx(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn negative_real_trace_squared_is_loxodromic() {
        // z -> 3 + 1/(z+3) has trace² = -36
        let m = MoebiusMap::new(cx(3.0, 0.0), cx(10.0, 0.0), cx(1.0, 0.0), cx(3.0, 0.0)).unwrap();
        assert_eq!(m.kind(), MapKind::Loxodromic);
        let data = loxodromic_data(&m).unwrap();
        assert!(data.multiplier.re < 0.0);
    }

    #[test]
    fn displacement_examples() {
        let x = H3Point::new(0.3, -0.2, 0.7).unwrap();
        assert_eq!(h3_displacement(&MoebiusMap::identity(), &x), 0.0);
        let m = MoebiusMap::dilation(cx(4.0, 0.0)).unwrap();
        assert!((h3_displacement(&m, &H3Point::origin()) - 4f64.ln()).abs() < 1e-14);
        // (1,0,1) -> (4,0,4): cosh d = 1 + 18/8, independent evaluation
        let off = h3_displacement(&m, &H3Point::new(1.0, 0.0, 1.0).unwrap());
        assert!((off - 1.847_246_085_713_837_8).abs() < 1e-13);
        assert!(off > 4f64.ln());
    }

    #[test]
    fn displacement_matches_frobenius_formula_at_origin() {
        let m = MoebiusMap::new(cx(1.0, 2.0), cx(0.5, -1.0), cx(-1.0, 0.3), cx(2.0, 0.0)).unwrap();
        let d = h3_displacement(&m, &H3Point::origin());
        assert!((d.cosh() - m.frobenius_sqr() / 2.0).abs() < 1e-12 * d.cosh());
    }

    #[test]
    fn poisson_kernel_examples() {
        let m = MoebiusMap::dilation(cx(4.0, 0.0)).unwrap();
        let x = H3Point::origin();
        // m⁻¹x = (0,0,1/4) lies below x, so the ray towards 0 has angle 0
        assert!((poisson_kernel(&m, &x, fin(0.0, 0.0), 1.0) - 4.0).abs() < 1e-12);
        assert!((poisson_kernel(&m, &x, ComplexPoint::Infinity, 1.0) - 0.25).abs() < 1e-13);
        // boundary points at angle π/2 from the vertical: the unit circle
        let k = poisson_kernel(&m, &x, fin(1.0, 0.0), 1.0);
        assert!((k - 8.0 / 17.0).abs() < 1e-13, "{k}");
        let k2 = poisson_kernel(&m, &x, fin(0.0, 0.0), 2.5);
        assert!((k2 - 4f64.powf(2.5)).abs() < 1e-12 * k2);
    }

    #[test]
    fn poisson_kernel_matches_half_space_closed_form() {
        // Ψ_x(y, ζ) = P(y, ζ) / P(x, ζ) with P((z,t), ζ) = t / (|z - ζ|² + t²)
        let m = MoebiusMap::new(cx(1.2, 0.4), cx(0.3, 0.0), cx(0.5, -0.2), cx(1.1, 0.1)).unwrap();
        let x = H3Point::new(0.2, 0.1, 0.8).unwrap();
        let y = m.inverse().act_h3(&x);
        for zeta in [cx(0.0, 0.0), cx(1.0, -2.0), cx(-3.0, 0.5), cx(0.19, 0.11)] {
            let p = |q: &H3Point| q.t / ((q.z() - zeta).norm_sqr() + q.t * q.t);
            let expected = p(&y) / p(&x);
            let got = poisson_kernel(&m, &x, ComplexPoint::Finite(zeta), 1.0);
            assert!((got - expected).abs() < 1e-11 * expected, "{got} {expected}");
        }
    }

    #[test]
    fn cross_ratio_examples() {
        let r = cross_ratio(fin(2.0, 0.0), fin(3.0, 0.0), fin(4.0, 0.0), fin(5.0, 0.0)).unwrap();
        assert!((r.finite().unwrap() - cx(4.0 / 3.0, 0.0)).norm() < 1e-15);
        let lam = cx(0.3, 1.7);
        let r = cross_ratio(fin(0.0, 0.0), fin(1.0, 0.0), ComplexPoint::Infinity, ComplexPoint::Finite(lam)).unwrap();
        assert!((r.finite().unwrap() - (lam - 1.0) / lam).norm() < 1e-15);
        assert_eq!(
            cross_ratio(fin(1.0, 0.0), fin(1.0, 0.0), fin(1.0, 0.0), fin(2.0, 0.0)),
            Err(Error::DegenerateCrossRatio)
        );
        let r = cross_ratio(fin(1.0, 0.0), fin(2.0, 0.0), fin(3.0, 0.0), fin(1.0, 0.0)).unwrap();
        assert_eq!(r, ComplexPoint::Infinity);
    }

    #[test]
    fn ray_endpoint_of_vertical_points() {
        let x = H3Point::origin();
        let up = H3Point::new(0.0, 0.0, 5.0).unwrap();
        let down = H3Point::new(0.0, 0.0, 0.2).unwrap();
        assert_eq!(x.ray_endpoint(&up), Some(ComplexPoint::Infinity));
        assert_eq!(x.ray_endpoint(&down), Some(fin(0.0, 0.0)));
        assert_eq!(x.ray_endpoint(&x), None);
        let side = H3Point::new(1.0, 0.0, 1.0).unwrap();
        let end = x.ray_endpoint(&side).unwrap();
        assert!(x.one_minus_cos_angle(&side, end) < 1e-14);
    }

    #[test]
    fn circle_through_and_image() {
        let c0 = Circle::through(cx(1.0, 0.0), cx(0.0, 1.0), cx(-1.0, 0.0)).unwrap();
        assert!(c0.center.norm() < 1e-15 && (c0.radius - 1.0).abs() < 1e-15);
        let m = MoebiusMap::dilation(cx(0.0, 2.0)).unwrap();
        let img = Circle::new(cx(3.0, 0.0), 1.0).unwrap().image(&m).unwrap();
        assert!((img.center - cx(0.0, 6.0)).norm() < 1e-13 && (img.radius - 2.0).abs() < 1e-13);
        let inv = MoebiusMap::new(cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)).unwrap();
        assert!(Circle::new(cx(0.0, 0.0), 1.0).unwrap().image(&inv).is_none());
    }
}
