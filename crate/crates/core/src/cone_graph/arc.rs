//! Curves on the tube boundary and arcs cut out by planes through a fixed interior point.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{hdist, HVec};
use crate::tube::{Section, TubeCone};

/// Largest displacement used to move an arc endpoint off a degenerate position.
pub const MAX_PERTURBATION: f64 = 1e-5;
/// Retries allowed before a degenerate configuration is reported.
pub const MAX_RETRIES: usize = 10;

/// A polyline on the tube boundary in cylinder coordinates `(t, phi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylCurve {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl CylCurve {
    pub fn new(points: Vec<(f64, f64)>, closed: bool) -> Self {
        CylCurve { points, closed }
    }

    /// Number of segments.
    pub fn segments(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len().saturating_sub(1)
        }
    }

    /// Endpoints of segment `k` with the angle unwrapped across the segment.
    pub fn segment(&self, k: usize) -> ((f64, f64), (f64, f64)) {
        let a = self.points[k];
        let b = self.points[(k + 1) % self.points.len()];
        (a, (b.0, a.1 + wrap(b.1 - a.1)))
    }

    /// Cylinder coordinates at parameter `u` (segment index plus fraction).
    pub fn coords_at(&self, u: f64) -> (f64, f64) {
        let n = self.segments();
        let u = if self.closed { u.rem_euclid(n as f64) } else { u.clamp(0.0, n as f64) };
        let k = (u.floor() as usize).min(n - 1);
        let f = u - k as f64;
        let (a, b) = self.segment(k);
        (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))
    }

    pub fn point_at(&self, cone: &TubeCone, u: f64) -> HVec {
        let (t, phi) = self.coords_at(u);
        cone.point(t, phi)
    }

    /// Points where the curve meets the plane `<X, n> = 0`, with root polishing on each segment.
    pub fn plane_hits(&self, cone: &TubeCone, n: &HVec) -> Vec<(f64, HVec)> {
        let mut out = Vec::new();
        let vals: Vec<f64> = self.points.iter().map(|(t, p)| cone.point(*t, *p).dot(n)).collect();
        for k in 0..self.segments() {
            let (fa, fb) = (vals[k], vals[(k + 1) % vals.len()]);
            if (fa < 0.0) == (fb < 0.0) {
                continue;
            }
            let (a, b) = self.segment(k);
            let eval = |f: f64| cone.point(a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1)).dot(n);
            let f = bisect(eval, 0.0, 1.0, fa);
            out.push((k as f64 + f, cone.point(a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))));
        }
        out
    }

    /// Whether the curve has no self-intersections in the development, up to `tol`.
    pub fn is_simple(&self, cone: &TubeCone, tol: f64) -> bool {
        let n = self.segments();
        let dev: Vec<((f64, f64), (f64, f64))> = (0..n)
            .map(|k| {
                let (a, b) = self.segment(k);
                (cone.develop(a.0, a.1), cone.develop(b.0, b.1))
            })
            .collect();
        let period = cone.period();
        for i in 0..n {
            for j in i + 2..n {
                if self.closed && i == 0 && j == n - 1 {
                    continue;
                }
                for shift in [-period, 0.0, period] {
                    let (c, d) = ((dev[j].0 .0, dev[j].0 .1 + shift), (dev[j].1 .0, dev[j].1 .1 + shift));
                    if segments_cross(dev[i].0, dev[i].1, c, d, tol) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

pub(crate) fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64), tol: f64) -> bool {
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < -tol && o3 * o4 < -tol
}

/// Angle difference reduced to `(-pi, pi]`.
pub fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let neg = flo < 0.0;
    for _ in 0..80 {
        let m = 0.5 * (lo + hi);
        if (f(m) < 0.0) == neg {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Unit normal of the plane through three points, if they span one.
pub fn plane_through(a: &HVec, b: &HVec, c: &HVec) -> Option<HVec> {
    let n = HVec::cross3(a, b, c);
    let scale = a.max_abs() * b.max_abs() * c.max_abs();
    let q = n.norm_sq();
    if !(q > 1e-24 * scale * scale) {
        return None;
    }
    Some(n.to_unit_spacelike())
}

/// Whether the plane contains the tube axis.
pub fn contains_axis(n: &HVec) -> bool {
    n.0[0].abs() < 1e-9 && n.0[3].abs() < 1e-9
}

/// An arc of a plane section of the tube boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionArc {
    /// Unit normal of the plane.
    pub normal: HVec,
    pub section: Section,
    pub psi0: f64,
    pub sweep: f64,
    /// Displacement applied to the first endpoint to reach a non-degenerate plane.
    pub perturbation: f64,
}

impl SectionArc {
    pub fn from_psi(normal: HVec, section: Section, psi0: f64, sweep: f64) -> Self {
        SectionArc { normal, section, psi0, sweep, perturbation: 0.0 }
    }

    pub fn psi(&self, f: f64) -> f64 {
        self.psi0 + f * self.sweep
    }

    pub fn point(&self, f: f64) -> HVec {
        self.section.point(self.psi(f))
    }

    pub fn start(&self) -> HVec {
        self.point(0.0)
    }

    pub fn end(&self) -> HVec {
        self.point(1.0)
    }

    /// Fraction along the arc of the section angle `psi`, if it lies on the arc.
    pub fn frac_of(&self, psi: f64) -> Option<f64> {
        let rel = if self.sweep >= 0.0 {
            (psi - self.psi0).rem_euclid(2.0 * PI)
        } else {
            (self.psi0 - psi).rem_euclid(2.0 * PI)
        };
        let f = rel / self.sweep.abs();
        if f <= 1.0 {
            Some(f)
        } else if 2.0 * PI - rel < 1e-12 {
            Some(0.0)
        } else {
            None
        }
    }

    /// Sub-arc between two fractions.
    pub fn sub(&self, f0: f64, f1: f64) -> SectionArc {
        SectionArc {
            normal: self.normal,
            section: self.section,
            psi0: self.psi(f0),
            sweep: (f1 - f0) * self.sweep,
            perturbation: self.perturbation,
        }
    }

    pub fn reversed(&self) -> SectionArc {
        SectionArc { psi0: self.psi0 + self.sweep, sweep: -self.sweep, ..self.clone() }
    }

    /// Adaptive samples `(fraction, point)`, endpoints included.
    pub fn samples(&self, sag: f64) -> Vec<(f64, HVec)> {
        self.section
            .polyline(self.psi0, self.sweep, sag)
            .into_iter()
            .map(|(psi, x)| ((psi - self.psi0) / self.sweep, x))
            .collect()
    }

    /// Points where the arc meets the plane `<X, n> = 0`, as `(fraction, point)`.
    pub fn plane_hits(&self, n: &HVec, samples: &[(f64, HVec)]) -> Vec<(f64, HVec)> {
        let mut out = Vec::new();
        for w in samples.windows(2) {
            let (fa, fb) = (w[0].1.dot(n), w[1].1.dot(n));
            if (fa < 0.0) == (fb < 0.0) {
                continue;
            }
            let f = bisect(|f| self.point(f).dot(n), w[0].0, w[1].0, fa);
            out.push((f, self.point(f)));
        }
        out
    }

    /// As a curve in cylinder coordinates.
    pub fn trace(&self, sag: f64) -> CylCurve {
        let mut pts = Vec::new();
        let mut last = None;
        for (_, x) in self.samples(sag) {
            let (t, phi) = crate::tube::unwrap_phi(&x, last.unwrap_or(0.0));
            last = Some(phi);
            pts.push((t, phi));
        }
        CylCurve::new(pts, false)
    }

    /// Whether every sample stays at finite distance.
    pub fn is_bounded(&self) -> bool {
        (0..=64).all(|k| {
            let u = self.point(k as f64 / 64.0).klein();
            1.0 - (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) > 1e-12
        })
    }
}

/// Where a perturbed endpoint may move.
pub enum Host<'a> {
    Curve(&'a CylCurve, f64),
    /// Move around the tube at fixed height.
    Around,
}

/// A single attempt at the arc of `L ∩ ∂C` from `p` to `q` with `L` through `s`, `p` and `q`.
/// Prefers the shorter of the two bounded arcs.
pub fn arc_in_plane(cone: &TubeCone, s: &HVec, p: &HVec, q: &HVec) -> Result<SectionArc> {
    let Some(n) = plane_through(s, p, q) else {
        return Err(Error::Degenerate("endpoints and center lie on one geodesic".into()));
    };
    if contains_axis(&n) {
        return Err(Error::Degenerate(format!("plane {:?} contains the axis", n.0)));
    }
    let Some(sec) = cone.section(&n) else {
        return Err(Error::Degenerate(format!("plane {:?} misses the tube", n.0)));
    };
    let (a, b) = (sec.psi_of(p), sec.psi_of(q));
    let d = (b - a).rem_euclid(2.0 * PI);
    let mut options = [d, d - 2.0 * PI];
    if d > PI {
        options.swap(0, 1);
    }
    for sweep in options {
        let arc = SectionArc::from_psi(n, sec, a, sweep);
        if arc.is_bounded() {
            return Ok(arc);
        }
    }
    Err(Error::Degenerate(format!("plane {:?} meets the tube in an unbounded curve", n.0)))
}

/// An arc of `L ∩ ∂C` joining `p` to `q`, where `L` is the plane through `s`, `p` and `q`.
/// When `L` is degenerate, `p` is moved along its host by at most [`MAX_PERTURBATION`].
pub fn plane_section_arc(
    cone: &TubeCone,
    s: &HVec,
    p: &HVec,
    q: &HVec,
    host: Host,
    rng: &mut ChaCha8Rng,
) -> Result<SectionArc> {
    let mut detail = String::new();
    for attempt in 0..=MAX_RETRIES {
        let pp = if attempt == 0 { *p } else { perturb(cone, p, &host, random_step(rng)) };
        match arc_in_plane(cone, s, &pp, q) {
            Ok(mut arc) => {
                arc.perturbation = hdist(&pp, p);
                return Ok(arc);
            }
            Err(e) => detail = e.to_string(),
        }
    }
    Err(Error::Genericity { retries: MAX_RETRIES, detail })
}

/// A signed displacement of magnitude below [`MAX_PERTURBATION`].
pub fn random_step(rng: &mut ChaCha8Rng) -> f64 {
    MAX_PERTURBATION * rng.gen_range(0.2..0.9) * if rng.gen::<bool>() { 1.0 } else { -1.0 }
}

/// Curve parameter displaced by `step` in development length.
pub fn shift_on_curve(cone: &TubeCone, c: &CylCurve, u: f64, step: f64) -> f64 {
    let k = (u.floor().max(0.0) as usize).min(c.segments() - 1);
    let (a, b) = c.segment(k);
    let (da, db) = (cone.develop(a.0, a.1), cone.develop(b.0, b.1));
    let len = (db.0 - da.0).hypot(db.1 - da.1).max(1e-300);
    u + step / len
}

fn perturb(cone: &TubeCone, p: &HVec, host: &Host, step: f64) -> HVec {
    match host {
        Host::Curve(c, u) => c.point_at(cone, shift_on_curve(cone, c, *u, step)),
        Host::Around => {
            let (_, t, phi) = crate::hyperbolic::cylinder_coords(p);
            cone.point(t, phi + step / cone.radius.sinh())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn symmetric_endpoints_give_cross_section_arc() {
        let cone = TubeCone::new(0.7);
        let p = cone.point(0.0, 0.3);
        let q = cone.point(0.0, -0.3);
        let s = crate::hyperbolic::cylinder_point(0.3, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let arc = plane_section_arc(&cone, &s, &p, &q, Host::Around, &mut rng).unwrap();
        for k in 0..=10 {
            let x = arc.point(k as f64 / 10.0);
            let (r, t, phi) = crate::hyperbolic::cylinder_coords(&x);
            assert!((r - 0.7).abs() < 1e-10 && t.abs() < 1e-10 && phi.abs() <= 0.3 + 1e-10);
        }
    }
}
