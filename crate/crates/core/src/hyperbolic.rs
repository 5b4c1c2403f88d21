//! Hyperbolic 3-space primitives.
//!
//! Points live in the upper half-space model for input and output; internally
//! most computation happens on the hyperboloid in `R^{3,1}` (signature
//! `(-,+,+,+)`, time coordinate first), where bisectors and geodesic planes are
//! linear and the Klein model is a projective chart. The basepoint convention is
//! `UHS (0,0,1) <-> hyperboloid e0 <-> Klein origin`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for metric predicates.
pub const METRIC_EPS: f64 = 1e-9;

/// A vector in Minkowski space `R^{3,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HVec(pub [f64; 4]);

impl HVec {
    pub const ORIGIN: HVec = HVec([1.0, 0.0, 0.0, 0.0]);

    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        HVec([t, x, y, z])
    }

    /// Minkowski inner product `-a0 b0 + a1 b1 + a2 b2 + a3 b3`.
    pub fn dot(&self, o: &HVec) -> f64 {
        -self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2] + self.0[3] * o.0[3]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// Rescales a future timelike vector onto the hyperboloid.
    pub fn to_point(self) -> HVec {
        let n = (-self.norm_sq()).sqrt();
        let s = if self.0[0] < 0.0 { -1.0 / n } else { 1.0 / n };
        self * s
    }

    /// Rescales a spacelike vector to unit Minkowski length.
    pub fn to_unit_spacelike(self) -> HVec {
        self * (1.0 / self.norm_sq().sqrt())
    }

    /// Klein-model coordinates of a (projective) timelike vector.
    pub fn klein(&self) -> [f64; 3] {
        [self.0[1] / self.0[0], self.0[2] / self.0[0], self.0[3] / self.0[0]]
    }

    pub fn from_klein(u: [f64; 3]) -> HVec {
        HVec([1.0, u[0], u[1], u[2]]).to_point()
    }

    /// Projective lift of a Klein point without normalization checks.
    pub fn from_klein_unchecked(u: [f64; 3]) -> HVec {
        let s = 1.0 - (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        if s > 0.0 {
            HVec([1.0, u[0], u[1], u[2]]) * (1.0 / s.sqrt())
        } else {
            HVec([1.0, u[0], u[1], u[2]])
        }
    }

    /// Vector Minkowski-orthogonal to the three arguments.
    pub fn cross3(a: &HVec, b: &HVec, c: &HVec) -> HVec {
        let m = |i: usize, j: usize, k: usize| -> f64 {
            a.0[i] * (b.0[j] * c.0[k] - b.0[k] * c.0[j]) - a.0[j] * (b.0[i] * c.0[k] - b.0[k] * c.0[i])
                + a.0[k] * (b.0[i] * c.0[j] - b.0[j] * c.0[i])
        };
        // Euclidean cofactor vector, then lowered by the metric.
        let e = [m(1, 2, 3), -m(0, 2, 3), m(0, 1, 3), -m(0, 1, 2)];
        HVec([-e[0], e[1], e[2], e[3]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Add for HVec {
    type Output = HVec;
    fn add(self, o: HVec) -> HVec {
        HVec([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }
}

impl Sub for HVec {
    type Output = HVec;
    fn sub(self, o: HVec) -> HVec {
        HVec([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }
}

impl Neg for HVec {
    type Output = HVec;
    fn neg(self) -> HVec {
        self * -1.0
    }
}

impl Mul<f64> for HVec {
    type Output = HVec;
    fn mul(self, s: f64) -> HVec {
        HVec([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }
}

/// Hyperbolic distance between two points on the hyperboloid.
pub fn hdist(a: &HVec, b: &HVec) -> f64 {
    let c = -a.dot(b);
    if c > 3.0 {
        // The chord is nearly lightlike for far-apart points and its norm cancels.
        return c.acosh();
    }
    let q = (*a - *b).norm_sq().max(0.0);
    2.0 * (q.sqrt() / 2.0).asinh()
}

/// A linear isometry of `R^{3,1}` preserving the hyperboloid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lorentz(pub [[f64; 4]; 4]);

impl Lorentz {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Lorentz(m)
    }

    pub fn apply(&self, v: &HVec) -> HVec {
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.0[i][j] * v.0[j]).sum();
        }
        HVec(out)
    }

    pub fn compose(&self, o: &Lorentz) -> Lorentz {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..4).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Lorentz(m)
    }

    /// Inverse via `eta M^T eta`.
    pub fn inverse(&self) -> Lorentz {
        let eta = [-1.0, 1.0, 1.0, 1.0];
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = eta[i] * self.0[j][i] * eta[j];
            }
        }
        Lorentz(m)
    }

    /// Boost taking the origin `e0` to the hyperboloid point `p`.
    pub fn boost_to(p: &HVec) -> Lorentz {
        let p0 = p.0[0];
        let v = p.spatial();
        let mut m = [[0.0; 4]; 4];
        m[0][0] = p0;
        for i in 0..3 {
            m[0][i + 1] = v[i];
            m[i + 1][0] = v[i];
            for j in 0..3 {
                m[i + 1][j + 1] = if i == j { 1.0 } else { 0.0 } + v[i] * v[j] / (1.0 + p0);
            }
        }
        Lorentz(m)
    }

    /// Translation by `length` along the vertical axis composed with rotation by `twist`.
    pub fn loxodromic(length: f64, twist: f64) -> Lorentz {
        let (ch, sh) = (length.cosh(), length.sinh());
        let (c, s) = (twist.cos(), twist.sin());
        Lorentz([[ch, 0.0, 0.0, sh], [0.0, c, -s, 0.0], [0.0, s, c, 0.0], [sh, 0.0, 0.0, ch]])
    }
}

/// Point of the upper half-space model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointUHS {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PointUHS {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) || z <= 0.0 {
            return Err(Error::InvalidParameter(format!("({x}, {y}, {z}) is not in upper half-space")));
        }
        Ok(PointUHS { x, y, z })
    }

    /// Unchecked constructor for internal use where `z > 0` is known.
    pub(crate) fn raw(x: f64, y: f64, z: f64) -> Self {
        PointUHS { x, y, z }
    }

    pub fn to_hyperboloid(&self) -> HVec {
        let r2 = self.x * self.x + self.y * self.y + self.z * self.z;
        HVec([(r2 + 1.0) / (2.0 * self.z), self.x / self.z, self.y / self.z, (r2 - 1.0) / (2.0 * self.z)])
    }

    pub fn from_hyperboloid(v: &HVec) -> PointUHS {
        let z = 1.0 / (v.0[0] - v.0[3]);
        PointUHS { x: v.0[1] * z, y: v.0[2] * z, z }
    }

    pub fn to_klein(&self) -> PointKlein {
        PointKlein { u: self.to_hyperboloid().klein() }
    }

    /// Cylinder coordinates `(r, t, phi)` about the vertical axis `0 <-> infinity`:
    /// distance from the axis, log-height of the foot point, and angle.
    pub fn cylinder(&self) -> (f64, f64, f64) {
        let rho = (self.x * self.x + self.y * self.y).sqrt();
        let norm = (rho * rho + self.z * self.z).sqrt();
        ((rho / self.z).asinh(), norm.ln(), self.y.atan2(self.x))
    }

    pub fn from_cylinder(r: f64, t: f64, phi: f64) -> PointUHS {
        let e = t.exp();
        PointUHS { x: e * r.tanh() * phi.cos(), y: e * r.tanh() * phi.sin(), z: e / r.cosh() }
    }
}

/// Point of the Klein (projective) ball model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointKlein {
    pub u: [f64; 3],
}

impl PointKlein {
    pub fn new(u: [f64; 3]) -> Result<Self> {
        let n2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        if !(n2 < 1.0) {
            return Err(Error::InvalidParameter(format!("Klein point {u:?} outside unit ball")));
        }
        Ok(PointKlein { u })
    }

    pub fn to_uhs(&self) -> PointUHS {
        PointUHS::from_hyperboloid(&HVec::from_klein(self.u))
    }
}

/// Cylinder-coordinate point on the hyperboloid.
pub fn cylinder_point(r: f64, t: f64, phi: f64) -> HVec {
    HVec([r.cosh() * t.cosh(), r.sinh() * phi.cos(), r.sinh() * phi.sin(), r.cosh() * t.sinh()])
}

/// Cylinder coordinates `(r, t, phi)` of a hyperboloid point.
pub fn cylinder_coords(v: &HVec) -> (f64, f64, f64) {
    let s = (v.0[1] * v.0[1] + v.0[2] * v.0[2]).sqrt();
    let t = 0.5 * ((v.0[0] + v.0[3]) / (v.0[0] - v.0[3])).ln();
    (s.asinh(), t, v.0[2].atan2(v.0[1]))
}

/// Hyperbolic distance in the upper half-space model.
pub fn dist(p: &PointUHS, q: &PointUHS) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    let e = (dx * dx + dy * dy + dz * dz).sqrt();
    2.0 * (e / (2.0 * (p.z * q.z).sqrt())).asinh()
}

/// `sinh(x) - x`, accurate for small `x`.
fn sinh_minus_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= x2 / ((k + 1.0) * (k + 2.0));
            sum += term;
            k += 2.0;
        }
        sum
    } else {
        x.sinh() - x
    }
}

/// Volume of a hyperbolic ball of radius `r`: `pi (sinh 2r - 2r)`.
pub fn ball_volume(r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("ball radius {r} must be nonnegative")));
    }
    Ok(PI * sinh_minus_x(2.0 * r))
}

/// Ideal point on the sphere at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IdealPoint {
    Finite(Complex64),
    Infinity,
}

impl IdealPoint {
    /// Future null vector representing the ideal point.
    pub fn null_vector(&self) -> HVec {
        match self {
            IdealPoint::Infinity => HVec([1.0, 0.0, 0.0, 1.0]),
            IdealPoint::Finite(w) => {
                let n = w.norm_sqr();
                HVec([n + 1.0, 2.0 * w.re, 2.0 * w.im, n - 1.0]) * (1.0 / (n + 1.0))
            }
        }
    }

    fn approx_eq(&self, o: &IdealPoint) -> bool {
        match (self, o) {
            (IdealPoint::Infinity, IdealPoint::Infinity) => true,
            (IdealPoint::Finite(a), IdealPoint::Finite(b)) => (a - b).norm() < 1e-14,
            _ => false,
        }
    }
}

/// Orientation-preserving isometry `[[a, b], [c, d]]` of upper half-space, `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Isometry {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if (det - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidParameter(format!("determinant {det} is not 1")));
        }
        Ok(Isometry { a, b, c, d })
    }

    /// Normalizes an invertible matrix to determinant one.
    pub fn normalized(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 {
            return Err(Error::InvalidParameter("singular matrix".into()));
        }
        let s = det.sqrt().inv();
        Ok(Isometry { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Isometry { a: one, b: zero, c: zero, d: one }
    }

    /// `diag(e^{(l + i theta)/2}, e^{-(l + i theta)/2})`.
    pub fn loxodromic(length: f64, twist: f64) -> Self {
        let h = Complex64::new(length / 2.0, twist / 2.0).exp();
        Isometry { a: h, b: Complex64::new(0.0, 0.0), c: Complex64::new(0.0, 0.0), d: h.inv() }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn compose(&self, o: &Isometry) -> Isometry {
        Isometry {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Poincare extension of the Mobius action.
    pub fn apply(&self, p: &PointUHS) -> PointUHS {
        let w = Complex64::new(p.x, p.y);
        let cw_d = self.c * w + self.d;
        let den = cw_d.norm_sqr() + self.c.norm_sqr() * p.z * p.z;
        let num = (self.a * w + self.b) * cw_d.conj() + self.a * self.c.conj() * p.z * p.z;
        PointUHS::raw(num.re / den, num.im / den, p.z / den)
    }

    pub fn apply_ideal(&self, w: &IdealPoint) -> IdealPoint {
        match w {
            IdealPoint::Infinity => {
                if self.c.norm() < 1e-300 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite(self.a / self.c)
                }
            }
            IdealPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() < 1e-300 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Largest entry-wise deviation from the identity, up to sign.
    pub fn distance_from_identity(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let plus = (self.a - one).norm().max((self.d - one).norm());
        let minus = (self.a + one).norm().max((self.d + one).norm());
        plus.min(minus).max(self.b.norm()).max(self.c.norm())
    }
}

/// Complete geodesic between two distinct ideal points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub ends: [IdealPoint; 2],
}

impl Geodesic {
    pub fn new(a: IdealPoint, b: IdealPoint) -> Result<Self> {
        if a.approx_eq(&b) {
            return Err(Error::InvalidParameter("geodesic endpoints coincide".into()));
        }
        Ok(Geodesic { ends: [a, b] })
    }

    /// The vertical geodesic `0 <-> infinity`.
    pub fn vertical_axis() -> Self {
        Geodesic { ends: [IdealPoint::Finite(Complex64::new(0.0, 0.0)), IdealPoint::Infinity] }
    }

    /// Orthonormal frame `(a, b)` of the 2-plane spanned by the endpoints:
    /// `a` unit timelike, `b` unit spacelike.
    pub fn frame(&self) -> (HVec, HVec) {
        let l1 = self.ends[0].null_vector();
        let l2 = self.ends[1].null_vector();
        let s = (-2.0 * l1.dot(&l2)).sqrt();
        ((l1 + l2) * (1.0 / s), (l1 - l2) * (1.0 / s))
    }

    /// `cosh^2` of the distance from a hyperboloid point to the geodesic.
    pub fn cosh2_dist(&self, x: &HVec) -> f64 {
        let (a, b) = self.frame();
        let xa = x.dot(&a);
        let xb = x.dot(&b);
        (xa * xa - xb * xb) / (-x.norm_sq())
    }
}

/// Distance from `p` to the complete geodesic `g`.
pub fn dist_to_geodesic(p: &PointUHS, g: &Geodesic) -> f64 {
    let x = p.to_hyperboloid();
    let c2 = g.cosh2_dist(&x).max(1.0);
    // asinh form keeps precision close to the axis.
    (c2 - 1.0).sqrt().asinh()
}

/// Shape of a geodesic plane in the upper half-space model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PlaneShape {
    Hemisphere { center: [f64; 2], radius: f64 },
    Vertical { normal: [f64; 2], offset: f64 },
}

/// Oriented geodesic plane. The selected half-space is `{X : <X, normal> <= 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPlane {
    pub normal: HVec,
}

impl GeodesicPlane {
    pub fn from_normal(n: HVec) -> Result<Self> {
        let q = n.norm_sq();
        if !(q > 0.0) {
            return Err(Error::InvalidParameter("plane normal must be spacelike".into()));
        }
        Ok(GeodesicPlane { normal: n.to_unit_spacelike() })
    }

    /// Hemisphere `|p - center| = radius`, selecting the inside when `inside` is true.
    pub fn hemisphere(center: [f64; 2], radius: f64, inside: bool) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("hemisphere radius must be positive".into()));
        }
        // (X0 + X3) - 2 c.X12 + (|c|^2 - r^2)(X0 - X3) as a Euclidean linear form.
        let k = center[0] * center[0] + center[1] * center[1] - radius * radius;
        let e = [1.0 + k, -2.0 * center[0], -2.0 * center[1], 1.0 - k];
        let s = if inside { 1.0 } else { -1.0 };
        Self::from_normal(HVec([-e[0] * s, e[1] * s, e[2] * s, e[3] * s]))
    }

    /// Vertical plane `normal . (x, y) = offset`, selecting `normal . (x, y) <= offset`.
    pub fn vertical(normal: [f64; 2], offset: f64) -> Result<Self> {
        if normal[0] == 0.0 && normal[1] == 0.0 {
            return Err(Error::InvalidParameter("vertical plane normal is zero".into()));
        }
        let e = [-offset, normal[0], normal[1], offset];
        Self::from_normal(HVec([-e[0], e[1], e[2], e[3]]))
    }

    pub fn shape(&self) -> PlaneShape {
        // Euclidean coefficients of the linear form <X, N>.
        let e = [-self.normal.0[0], self.normal.0[1], self.normal.0[2], self.normal.0[3]];
        let alpha = (e[0] + e[3]) / 2.0;
        let beta = (e[0] - e[3]) / 2.0;
        let scale = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if alpha.abs() > 1e-14 * scale {
            let c = [-e[1] / (2.0 * alpha), -e[2] / (2.0 * alpha)];
            let r2 = c[0] * c[0] + c[1] * c[1] - beta / alpha;
            PlaneShape::Hemisphere { center: c, radius: r2.max(0.0).sqrt() }
        } else {
            PlaneShape::Vertical { normal: [e[1], e[2]], offset: -beta }
        }
    }

    /// Signed side value: nonpositive on the selected half-space.
    pub fn side(&self, p: &PointUHS) -> f64 {
        p.to_hyperboloid().dot(&self.normal)
    }

    pub fn flipped(&self) -> Self {
        GeodesicPlane { normal: -self.normal }
    }
}

/// Perpendicular bisector of `p` and `q`, oriented toward `p`.
pub fn bisector(p: &PointUHS, q: &PointUHS) -> Result<GeodesicPlane> {
    if dist(p, q) < 1e-14 {
        return Err(Error::CoincidentPoints);
    }
    let (a, b) = (p.to_hyperboloid(), q.to_hyperboloid());
    GeodesicPlane::from_normal(b - a)
}

/// Closed `radius`-neighborhood of a geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub axis: Geodesic,
    pub radius: f64,
}

impl Cone {
    pub fn new(axis: Geodesic, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("cone radius must be positive".into()));
        }
        Ok(Cone { axis, radius })
    }

    /// Homogeneous quadratic form, `<= 0` exactly on the cone.
    pub fn form(&self) -> ConeForm {
        let (a, b) = self.axis.frame();
        ConeForm { a, b, c2: self.radius.cosh().powi(2) }
    }

    pub fn contains(&self, p: &PointUHS, eps: f64) -> bool {
        dist_to_geodesic(p, &self.axis) <= self.radius + eps
    }

    /// Exterior predicate (the closed complement of the open cone).
    pub fn in_exterior(&self, p: &PointUHS, eps: f64) -> bool {
        dist_to_geodesic(p, &self.axis) >= self.radius - eps
    }
}

/// Quadratic form `<X,a>^2 - <X,b>^2 + cosh^2(r) <X,X>` describing a cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeForm {
    pub a: HVec,
    pub b: HVec,
    pub c2: f64,
}

impl ConeForm {
    pub fn eval(&self, x: &HVec) -> f64 {
        let xa = x.dot(&self.a);
        let xb = x.dot(&self.b);
        xa * xa - xb * xb + self.c2 * x.norm_sq()
    }

    /// Symmetric bilinear form associated with `eval`.
    pub fn bilinear(&self, x: &HVec, y: &HVec) -> f64 {
        x.dot(&self.a) * y.dot(&self.a) - x.dot(&self.b) * y.dot(&self.b) + self.c2 * x.dot(y)
    }

    /// Sub-interval of `lambda in [0, 1]` on which `(1-lambda) x + lambda y` lies in the cone.
    pub fn chord_interval(&self, x: &HVec, y: &HVec) -> Option<(f64, f64)> {
        let fx = self.eval(x);
        let fy = self.eval(y);
        let bxy = self.bilinear(x, y);
        // F(l) = (1-l)^2 fx + 2 l (1-l) bxy + l^2 fy = A l^2 + B l + C
        let qa = fx - 2.0 * bxy + fy;
        let qb = 2.0 * (bxy - fx);
        let qc = fx;
        let roots = solve_quadratic(qa, qb, qc);
        let inside = |l: f64| qa * l * l + qb * l + qc <= 0.0;
        let mut pts = vec![0.0];
        pts.extend(roots.iter().copied().filter(|r| *r > 0.0 && *r < 1.0));
        pts.push(1.0);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut lo = None;
        let mut hi = None;
        for w in pts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if inside(mid) {
                if lo.is_none() {
                    lo = Some(w[0]);
                }
                hi = Some(w[1]);
            }
        }
        match (lo, hi) {
            (Some(l), Some(h)) => Some((l, h)),
            _ => {
                // Degenerate interval touching at an endpoint.
                if fx <= 0.0 {
                    Some((0.0, 0.0))
                } else if fy <= 0.0 {
                    Some((1.0, 1.0))
                } else {
                    None
                }
            }
        }
    }
}

/// Real roots of `a x^2 + b x + c`, numerically stable.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return vec![];
    }
    if a.abs() <= 1e-15 * scale {
        if b.abs() <= 1e-15 * scale {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    if q == 0.0 {
        return vec![0.0];
    }
    let mut r = vec![q / a, c / q];
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

/// Point at fraction `t` of arclength along the geodesic segment `[a, b]`.
pub fn geodesic_lerp(a: &HVec, b: &HVec, t: f64) -> HVec {
    let d = hdist(a, b);
    if d < 1e-300 {
        return *a;
    }
    // Orthonormal tangent at a toward b.
    let w = *b + *a * a.dot(b);
    let wn = w.norm_sq().max(0.0).sqrt();
    if wn < 1e-300 {
        return *a;
    }
    let u = w * (1.0 / wn);
    (*a * (t * d).cosh() + u * (t * d).sinh()).to_point()
}

/// Arclength fraction of the point `(1-lambda) a + lambda b` along `[a, b]`.
fn lambda_to_fraction(a: &HVec, b: &HVec, lambda: f64) -> f64 {
    let total = hdist(a, b);
    if total < 1e-300 {
        return 0.0;
    }
    let p = (*a * (1.0 - lambda) + *b * lambda).to_point();
    (hdist(a, &p) / total).clamp(0.0, 1.0)
}

/// Sub-interval of the segment `[a, b]` inside the cone, as arclength fractions.
pub fn segment_cone_clip(a: &PointUHS, b: &PointUHS, cone: &Cone) -> Option<(f64, f64)> {
    let (xa, xb) = (a.to_hyperboloid(), b.to_hyperboloid());
    segment_cone_clip_h(&xa, &xb, &cone.form())
}

/// Hyperboloid variant of [`segment_cone_clip`].
pub fn segment_cone_clip_h(xa: &HVec, xb: &HVec, form: &ConeForm) -> Option<(f64, f64)> {
    form.chord_interval(xa, xb)
        .map(|(l0, l1)| (lambda_to_fraction(xa, xb, l0), lambda_to_fraction(xa, xb, l1)))
}

/// Horoball based at an ideal point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horoball {
    pub basepoint: IdealPoint,
    /// Euclidean diameter for a finite basepoint, cutoff height for infinity.
    pub height: f64,
}

impl Horoball {
    pub fn new(basepoint: IdealPoint, height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(Error::InvalidParameter("horoball height must be positive".into()));
        }
        Ok(Horoball { basepoint, height })
    }

    pub fn contains(&self, p: &PointUHS) -> bool {
        match self.basepoint {
            IdealPoint::Infinity => p.z >= self.height,
            IdealPoint::Finite(w) => {
                let r = self.height / 2.0;
                let dx = p.x - w.re;
                let dy = p.y - w.im;
                let dz = p.z - r;
                dx * dx + dy * dy + dz * dz <= r * r
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> PointUHS {
        PointUHS::new(x, y, z).unwrap()
    }

    #[test]
    fn vertical_distance_is_log_ratio() {
        assert!((dist(&p(0.0, 0.0, 1.0), &p(0.0, 0.0, std::f64::consts::E)) - 1.0).abs() < 1e-14);
        assert_eq!(dist(&p(0.3, 0.2, 0.7), &p(0.3, 0.2, 0.7)), 0.0);
    }

    #[test]
    fn hyperboloid_roundtrip() {
        let q = p(0.4, -1.2, 0.3);
        let h = q.to_hyperboloid();
        assert!((h.norm_sq() + 1.0).abs() < 1e-12);
        let back = PointUHS::from_hyperboloid(&h);
        assert!((back.x - q.x).abs() < 1e-12 && (back.y - q.y).abs() < 1e-12 && (back.z - q.z).abs() < 1e-12);
        assert!((hdist(&h, &p(0.0, 0.0, 1.0).to_hyperboloid()) - dist(&q, &p(0.0, 0.0, 1.0))).abs() < 1e-12);
    }

    #[test]
    fn basepoint_is_klein_origin() {
        let k = p(0.0, 0.0, 1.0).to_klein();
        assert_eq!(k.u, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(PointUHS::new(0.0, 0.0, 0.0).is_err());
        assert!(ball_volume(-0.1).is_err());
        assert_eq!(ball_volume(0.0).unwrap(), 0.0);
        assert_eq!(bisector(&p(1.0, 0.0, 1.0), &p(1.0, 0.0, 1.0)), Err(Error::CoincidentPoints));
        assert!(GeodesicPlane::hemisphere([0.0, 0.0], 0.0, true).is_err());
        assert!(GeodesicPlane::vertical([0.0, 0.0], 1.0).is_err());
        assert!(Cone::new(Geodesic::vertical_axis(), 0.0).is_err());
        assert!(Horoball::new(IdealPoint::Infinity, -1.0).is_err());
        assert!(Geodesic::new(IdealPoint::Infinity, IdealPoint::Infinity).is_err());
    }

    #[test]
    fn loxodromic_moves_basepoint_up() {
        let g = Isometry::loxodromic(0.7, 0.4);
        let q = g.apply(&p(0.0, 0.0, 1.0));
        assert!(q.x.abs() < 1e-15 && q.y.abs() < 1e-15);
        assert!((q.z - 0.7f64.exp()).abs() < 1e-14);
        let id = Isometry::identity().apply(&p(0.2, 0.3, 0.4));
        assert_eq!(id, p(0.2, 0.3, 0.4));
    }

    #[test]
    fn lorentz_matches_mobius_loxodromic() {
        let g = Isometry::loxodromic(0.3, 1.1);
        let l = Lorentz::loxodromic(0.3, 1.1);
        let q = p(0.5, -0.25, 0.8);
        let a = g.apply(&q);
        let b = PointUHS::from_hyperboloid(&l.apply(&q.to_hyperboloid()));
        assert!(dist(&a, &b) < 1e-12);
    }

    #[test]
    fn boost_moves_origin() {
        let x = p(0.3, 0.1, 2.0).to_hyperboloid();
        let b = Lorentz::boost_to(&x);
        let y = b.apply(&HVec::ORIGIN);
        assert!((y - x).max_abs() < 1e-12);
        let back = b.inverse().apply(&x);
        assert!((back - HVec::ORIGIN).max_abs() < 1e-12);
    }

    #[test]
    fn hemisphere_and_vertical_shapes_roundtrip() {
        let h = GeodesicPlane::hemisphere([0.5, -0.2], 1.3, true).unwrap();
        match h.shape() {
            PlaneShape::Hemisphere { center, radius } => {
                assert!((center[0] - 0.5).abs() < 1e-12 && (center[1] + 0.2).abs() < 1e-12);
                assert!((radius - 1.3).abs() < 1e-12);
            }
            _ => panic!("expected hemisphere"),
        }
        assert!(h.side(&p(0.5, -0.2, 0.5)) < 0.0);
        let v = GeodesicPlane::vertical([1.0, 0.0], 0.25).unwrap();
        assert!(matches!(v.shape(), PlaneShape::Vertical { .. }));
        assert!(v.side(&p(0.0, 3.0, 1.0)) < 0.0);
        assert!(v.side(&p(1.0, 3.0, 1.0)) > 0.0);
    }

    #[test]
    fn bisector_of_vertical_pair_is_hemisphere() {
        let (a, b) = (0.5, 3.0);
        let plane = bisector(&p(0.0, 0.0, a), &p(0.0, 0.0, b)).unwrap();
        match plane.shape() {
            PlaneShape::Hemisphere { center, radius } => {
                assert!(center[0].abs() < 1e-12 && center[1].abs() < 1e-12);
                assert!((radius - (a * b).sqrt()).abs() < 1e-12);
            }
            _ => panic!("expected hemisphere"),
        }
        // Oriented toward p.
        assert!(plane.side(&p(0.0, 0.0, a)) < 0.0);
    }

    #[test]
    fn bisector_of_mirror_pair_is_vertical() {
        let plane = bisector(&p(-0.5, 0.3, 1.0), &p(0.5, 0.3, 1.0)).unwrap();
        match plane.shape() {
            PlaneShape::Vertical { normal, offset } => {
                assert!(normal[1].abs() < 1e-12 * normal[0].abs());
                assert!((offset / normal[0]).abs() < 1e-12);
            }
            _ => panic!("expected vertical plane"),
        }
    }

    #[test]
    fn distance_to_vertical_axis() {
        let axis = Geodesic::vertical_axis();
        assert!((dist_to_geodesic(&p(1.0, 0.0, 1.0), &axis) - 0.881_373_587_0).abs() < 1e-10);
        assert_eq!(dist_to_geodesic(&p(0.0, 0.0, 2.5), &axis), 0.0);
    }

    #[test]
    fn cone_clip_basic_cases() {
        let cone = Cone::new(Geodesic::vertical_axis(), 0.5).unwrap();
        let a = p(0.05, 0.0, 1.0);
        let b = p(0.0, 0.1, 1.2);
        assert_eq!(segment_cone_clip(&a, &b, &cone), Some((0.0, 1.0)));
        let far1 = PointUHS::from_cylinder(2.0, 0.0, 0.0);
        let far2 = PointUHS::from_cylinder(2.0, 0.3, 0.2);
        assert_eq!(segment_cone_clip(&far1, &far2, &cone), None);
    }

    #[test]
    fn cylinder_coordinates_roundtrip() {
        let q = PointUHS::from_cylinder(1.3, -0.4, 2.0);
        let (r, t, phi) = q.cylinder();
        assert!((r - 1.3).abs() < 1e-12 && (t + 0.4).abs() < 1e-12 && (phi - 2.0).abs() < 1e-12);
        let h = cylinder_point(1.3, -0.4, 2.0);
        assert!((h - q.to_hyperboloid()).max_abs() < 1e-12);
        let (r2, t2, p2) = cylinder_coords(&h);
        assert!((r2 - 1.3).abs() < 1e-12 && (t2 + 0.4).abs() < 1e-12 && (p2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn horoball_membership() {
        let h = Horoball::new(IdealPoint::Infinity, 2.0).unwrap();
        assert!(h.contains(&p(5.0, 5.0, 3.0)));
        assert!(!h.contains(&p(0.0, 0.0, 1.0)));
        let f = Horoball::new(IdealPoint::Finite(Complex64::new(1.0, 0.0)), 1.0).unwrap();
        assert!(f.contains(&p(1.0, 0.0, 0.5)));
        assert!(!f.contains(&p(1.0, 0.0, 1.5)));
    }

    #[test]
    fn geodesic_lerp_is_on_segment() {
        let a = p(0.1, 0.2, 0.5).to_hyperboloid();
        let b = p(-0.7, 0.4, 2.0).to_hyperboloid();
        let m = geodesic_lerp(&a, &b, 0.3);
        let d = hdist(&a, &b);
        assert!((hdist(&a, &m) - 0.3 * d).abs() < 1e-12);
        assert!((hdist(&m, &b) - 0.7 * d).abs() < 1e-12);
    }
}
