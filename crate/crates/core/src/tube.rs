//! The drilled tube around the vertical axis: membership form, chord clipping,
//! and plane sections traced as polylines.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::hyperbolic::{cylinder_coords, cylinder_point, hdist, HVec};

/// Closed tube of radius `radius` around the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeCone {
    pub radius: f64,
    tau: f64,
}

impl TubeCone {
    pub fn new(radius: f64) -> Self {
        let t = radius.tanh();
        TubeCone { radius, tau: t * t }
    }

    /// Homogeneous form, negative inside the tube.
    pub fn eval(&self, x: &HVec) -> f64 {
        let v = &x.0;
        v[1] * v[1] + v[2] * v[2] - self.tau * (v[0] * v[0] - v[3] * v[3])
    }

    pub fn bilinear(&self, x: &HVec, y: &HVec) -> f64 {
        let (a, b) = (&x.0, &y.0);
        a[1] * b[1] + a[2] * b[2] - self.tau * (a[0] * b[0] - a[3] * b[3])
    }

    /// Form value normalized to be comparable across points: `tanh^2 r - tanh^2 r_X`.
    pub fn level(&self, x: &HVec) -> f64 {
        let v = &x.0;
        self.eval(x) / (v[0] * v[0] - v[3] * v[3])
    }

    pub fn contains(&self, x: &HVec) -> bool {
        self.eval(x) <= 0.0
    }

    /// Parameters `lambda in (0,1)` where `(1-lambda) a + lambda b` crosses the tube boundary.
    pub fn crossings(&self, a: &HVec, b: &HVec) -> Vec<f64> {
        let fa = self.eval(a);
        let fb = self.eval(b);
        let fab = self.bilinear(a, b);
        let qa = fa - 2.0 * fab + fb;
        let qb = 2.0 * (fab - fa);
        let qc = fa;
        let mut out: Vec<f64> = crate::hyperbolic::solve_quadratic(qa, qb, qc)
            .into_iter()
            .filter(|l| *l > 0.0 && *l < 1.0)
            .collect();
        out.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        out
    }

    /// Radial development of the tube boundary: `(t cosh r, phi sinh r)`.
    pub fn develop(&self, t: f64, phi: f64) -> (f64, f64) {
        (t * self.radius.cosh(), phi * self.radius.sinh())
    }

    pub fn point(&self, t: f64, phi: f64) -> HVec {
        cylinder_point(self.radius, t, phi)
    }

    /// Circumference of a cross-section in the development.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.radius.sinh()
    }

    /// Intersection of the plane `<X, n> = 0` with the tube boundary.
    pub fn section(&self, n: &HVec) -> Option<Section> {
        let st = self.tau.sqrt();
        let np = [st * n.0[1], st * n.0[2], n.0[3]];
        let k = (np[0] * np[0] + np[1] * np[1] + np[2] * np[2]).sqrt();
        if !(k > 0.0) {
            return None;
        }
        let nh = [np[0] / k, np[1] / k, np[2] / k];
        let c = n.0[0] / k;
        if c.abs() >= 1.0 {
            return None;
        }
        let rho = (1.0 - c * c).sqrt();
        let z = if nh[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let d = dot3(&z, &nh);
        let e1 = normalize3([z[0] - d * nh[0], z[1] - d * nh[1], z[2] - d * nh[2]]);
        let e2 = cross3(&nh, &e1);
        Some(Section { center: [c * nh[0], c * nh[1], c * nh[2]], rho, e1, e2, st })
    }
}

/// A plane section of the tube boundary, a circle after rescaling the tube to the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    center: [f64; 3],
    rho: f64,
    e1: [f64; 3],
    e2: [f64; 3],
    st: f64,
}

impl Section {
    pub fn point(&self, psi: f64) -> HVec {
        let (c, s) = (psi.cos(), psi.sin());
        let w = [
            self.center[0] + self.rho * (c * self.e1[0] + s * self.e2[0]),
            self.center[1] + self.rho * (c * self.e1[1] + s * self.e2[1]),
            self.center[2] + self.rho * (c * self.e1[2] + s * self.e2[2]),
        ];
        HVec::from_klein_unchecked([self.st * w[0], self.st * w[1], w[2]])
    }

    /// Angle of the point on the section nearest to `x`.
    pub fn psi_of(&self, x: &HVec) -> f64 {
        let u = x.klein();
        let w = [u[0] / self.st - self.center[0], u[1] / self.st - self.center[1], u[2] - self.center[2]];
        dot3(&w, &self.e2).atan2(dot3(&w, &self.e1))
    }

    /// Whether the section passes through an ideal endpoint of the axis.
    pub fn unbounded(&self) -> bool {
        let top = (self.center[2] + self.rho * (self.e1[2].hypot(self.e2[2]))).abs();
        let bot = (self.center[2] - self.rho * (self.e1[2].hypot(self.e2[2]))).abs();
        top >= 1.0 - 1e-12 || bot >= 1.0 - 1e-12
    }

    /// Adaptive polyline from angle `psi0` sweeping by `sweep` (signed), endpoints included.
    pub fn polyline(&self, psi0: f64, sweep: f64, sag: f64) -> Vec<(f64, HVec)> {
        let mut out = vec![(psi0, self.point(psi0))];
        self.refine(psi0, out[0].1, psi0 + sweep, self.point(psi0 + sweep), sag, 0, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&self, a: f64, pa: HVec, b: f64, pb: HVec, sag: f64, depth: u32, out: &mut Vec<(f64, HVec)>) {
        let m = 0.5 * (a + b);
        let pm = self.point(m);
        let mid = (pa + pb).to_point();
        let min_segments = depth < 2;
        if depth < 40 && (min_segments || (hdist(&pm, &mid) > sag && hdist(&pa, &pb) > 1e-9)) {
            self.refine(a, pa, m, pm, sag, depth + 1, out);
            self.refine(m, pm, b, pb, sag, depth + 1, out);
        } else {
            out.push((b, pb));
        }
    }
}

/// Cylinder coordinates of a tube-boundary point, with `phi` unwrapped near `reference`.
pub fn unwrap_phi(x: &HVec, reference: f64) -> (f64, f64) {
    let (_, t, phi) = cylinder_coords(x);
    let k = ((reference - phi) / (2.0 * PI)).round();
    (t, phi + 2.0 * PI * k)
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(&a, &a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_points_are_on_plane_and_tube() {
        let cone = TubeCone::new(0.8);
        let p = HVec::new(1.0, 0.2, 0.1, 0.05).to_point();
        let q = cone.point(0.3, 1.0);
        let s = cone.point(-0.2, 2.5);
        let n = HVec::cross3(&p, &q, &s);
        let sec = cone.section(&n).unwrap();
        for k in 0..20 {
            let x = sec.point(k as f64 * 0.3);
            assert!(x.dot(&n).abs() < 1e-10 * n.max_abs());
            let (r, _, _) = cylinder_coords(&x);
            assert!((r - 0.8).abs() < 1e-10);
        }
        let psi = sec.psi_of(&q);
        assert!(hdist(&sec.point(psi), &q) < 1e-9);
    }

    #[test]
    fn crossings_of_radial_segment() {
        let cone = TubeCone::new(1.0);
        let a = cylinder_point(0.2, 0.0, 0.0);
        let b = cylinder_point(2.0, 0.0, 0.0);
        let c = cone.crossings(&a, &b);
        assert_eq!(c.len(), 1);
        let x = (a * (1.0 - c[0]) + b * c[0]).to_point();
        assert!((cylinder_coords(&x).0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polyline_respects_sag() {
        let cone = TubeCone::new(0.5);
        let n = HVec::new(0.1, 0.0, 0.3, 1.0);
        let sec = cone.section(&n).unwrap();
        let pl = sec.polyline(0.0, 2.0, 1e-6);
        for w in pl.windows(2) {
            let m = sec.point(0.5 * (w[0].0 + w[1].0));
            let mid = (w[0].1 + w[1].1).to_point();
            assert!(hdist(&m, &mid) <= 1e-6);
        }
    }
}
