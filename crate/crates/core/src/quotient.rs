//! The cyclic quotient `M = H^3 / <g>` of a loxodromic `g`, its injectivity
//! radius and the drilled region `X = N_d(M_[mu, inf))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{cylinder_coords, cylinder_point, HVec, Isometry, Lorentz, PointUHS};

/// Quotient of hyperbolic space by a loxodromic translating along the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeQuotient {
    pub length: f64,
    pub twist: f64,
}

impl TubeQuotient {
    pub fn new(length: f64, twist: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("translation length {length} must be positive")));
        }
        if !(twist > -PI && twist <= PI) {
            return Err(Error::InvalidParameter(format!("twist {twist} must lie in (-pi, pi]")));
        }
        Ok(TubeQuotient { length, twist })
    }

    pub fn holonomy(&self) -> Isometry {
        Isometry::loxodromic(self.length, self.twist)
    }

    /// `g^n` acting on the hyperboloid.
    pub fn power(&self, n: i64) -> Lorentz {
        Lorentz::loxodromic(n as f64 * self.length, n as f64 * self.twist)
    }

    pub fn translate(&self, x: &HVec, n: i64) -> HVec {
        if n == 0 {
            *x
        } else {
            self.power(n).apply(x)
        }
    }

    /// `sinh^2(d/2)` for the displacement of `g^n` at tube radius `r`.
    fn displacement_sinh2(&self, r: f64, n: i64) -> f64 {
        let a = (n as f64 * self.length / 2.0).sinh();
        let b = (n as f64 * self.twist / 2.0).sin();
        a * a * r.cosh().powi(2) + b * b * r.sinh().powi(2)
    }

    /// Displacement `d(p, g^n p)` for a point at tube radius `r`.
    pub fn displacement(&self, r: f64, n: i64) -> f64 {
        2.0 * self.displacement_sinh2(r, n).sqrt().asinh()
    }

    /// Injectivity radius at tube radius `r`, with the growth-bound truncation.
    pub fn inj_at_radius(&self, r: f64) -> f64 {
        let mut best = f64::INFINITY;
        let mut n = 1i64;
        loop {
            let bound = (2.0 * best / self.length).ceil() + 1.0;
            if best.is_finite() && n as f64 > bound {
                break;
            }
            let h = 0.5 * self.displacement(r, n);
            if h < best {
                best = h;
            }
            n += 1;
        }
        best
    }

    /// Injectivity radius at a lift `p`.
    pub fn inj_radius(&self, p: &PointUHS) -> f64 {
        self.inj_at_radius(p.cylinder().0)
    }

    /// Tube radius at which the injectivity radius equals `mu`; zero if the thin part is empty.
    pub fn thick_tube_radius(&self, mu: f64) -> Result<f64> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu {mu} must be positive")));
        }
        if mu <= self.length / 2.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.inj_at_radius(hi) < mu {
            hi *= 2.0;
            if hi > 200.0 {
                return Err(Error::Degenerate("injectivity radius does not reach mu".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.inj_at_radius(mid) < mu {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Radius of the drilled tube: `max(r_mu - d, 0)`.
    pub fn x_tube_radius(&self, mu: f64, d: f64) -> Result<f64> {
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!("d {d} must be positive")));
        }
        Ok((self.thick_tube_radius(mu)? - d).max(0.0))
    }

    /// Infimum of the injectivity radius over `X`.
    pub fn compute_r_empirical(&self, mu: f64, d: f64) -> Result<f64> {
        let rx = self.x_tube_radius(mu, d)?;
        if rx > 0.0 {
            Ok(self.inj_at_radius(rx))
        } else {
            Ok(self.length / 2.0)
        }
    }

    /// Distance in the quotient between the projections of two lifts.
    pub fn quotient_dist(&self, p: &PointUHS, q: &PointUHS) -> f64 {
        self.quotient_dist_h(&p.to_hyperboloid(), &q.to_hyperboloid()).0
    }

    /// Quotient distance and the minimizing power `n` with `d(p, g^n q)` minimal.
    pub fn quotient_dist_h(&self, p: &HVec, q: &HVec) -> (f64, i64) {
        let cp = cylinder_coords(p);
        let cq = cylinder_coords(q);
        self.quotient_dist_cyl(cp, cq)
    }

    /// Quotient distance from cylinder coordinates.
    pub fn quotient_dist_cyl(&self, p: (f64, f64, f64), q: (f64, f64, f64)) -> (f64, i64) {
        let dt = p.1 - q.1;
        let n0 = (dt / self.length).round() as i64;
        let (chp, shp) = (p.0.cosh(), p.0.sinh());
        let (chq, shq) = (q.0.cosh(), q.0.sinh());
        let eval = |n: i64| -> f64 {
            let t = dt - n as f64 * self.length;
            let ph = p.2 - q.2 - n as f64 * self.twist;
            cyl_dist(chp, shp, chq, shq, t, ph)
        };
        let mut best = (eval(n0), n0);
        let mut k = 1i64;
        loop {
            let mut progressed = false;
            for n in [n0 - k, n0 + k] {
                let gap = (dt - n as f64 * self.length).abs();
                if gap < best.0 {
                    progressed = true;
                    let v = eval(n);
                    if v < best.0 || (v == best.0 && n < best.1) {
                        best = (v, n);
                    }
                }
            }
            if !progressed {
                break;
            }
            k += 1;
        }
        best
    }

    /// Representative of `x` with axial coordinate in `[0, length)`.
    pub fn reduce(&self, x: &HVec) -> (HVec, i64) {
        let (_, t, _) = cylinder_coords(x);
        let k = (t / self.length).floor() as i64;
        let mut y = self.translate(x, -k);
        let mut shift = k;
        // Guard against rounding at the period boundary.
        let (_, t2, _) = cylinder_coords(&y);
        if t2 >= self.length {
            y = self.translate(&y, -1);
            shift += 1;
        } else if t2 < 0.0 {
            y = self.translate(&y, 1);
            shift -= 1;
        }
        (y, shift)
    }
}

/// Distance between two points given by cylinder data.
pub(crate) fn cyl_dist(chp: f64, shp: f64, chq: f64, shq: f64, dt: f64, dphi: f64) -> f64 {
    // cosh d = cosh r1 cosh r2 cosh dt - sinh r1 sinh r2 cos dphi, written via sinh^2(d/2)
    // to keep precision for nearby points.
    let sh_t = (dt / 2.0).sinh();
    let s_ph = (dphi / 2.0).sin();
    let dr = ((chp * shq - shp * chq).abs()).asinh();
    let sr = (dr / 2.0).sinh();
    let s2 = sr * sr + chp * chq * sh_t * sh_t + shp * shq * s_ph * s_ph;
    2.0 * s2.max(0.0).sqrt().asinh()
}

/// Thick/thin data of a quotient for given Margulis parameter and drilling depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThickThinData {
    pub mu: f64,
    pub d: f64,
    pub tube_radius_mu: f64,
    pub tube_radius_x: f64,
    pub r_empirical: f64,
}

impl ThickThinData {
    pub fn compute(m: &TubeQuotient, mu: f64, d: f64) -> Result<Self> {
        let tube_radius_mu = m.thick_tube_radius(mu)?;
        let tube_radius_x = m.x_tube_radius(mu, d)?;
        let r_empirical = m.compute_r_empirical(mu, d)?;
        Ok(ThickThinData { mu, d, tube_radius_mu, tube_radius_x, r_empirical })
    }

    pub fn drilled(&self) -> bool {
        self.tube_radius_x > 0.0
    }

    /// Whether a point lies in `X` (closed exterior of the drilled tube).
    pub fn in_x(&self, x: &HVec) -> bool {
        cylinder_coords(x).0 >= self.tube_radius_x
    }
}

/// Point on the drilled-tube boundary.
pub fn tube_point(r: f64, t: f64, phi: f64) -> HVec {
    cylinder_point(r, t, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_injectivity_is_half_length() {
        let m = TubeQuotient::new(0.1, 0.3).unwrap();
        assert!((m.inj_at_radius(0.0) - 0.05).abs() < 1e-14);
    }

    #[test]
    fn invalid_quotients_rejected() {
        assert!(TubeQuotient::new(0.0, 0.1).is_err());
        assert!(TubeQuotient::new(0.1, 4.0).is_err());
    }

    #[test]
    fn no_thin_part_when_mu_small() {
        let m = TubeQuotient::new(1.0, 0.2).unwrap();
        assert_eq!(m.thick_tube_radius(0.5).unwrap(), 0.0);
        assert_eq!(m.x_tube_radius(0.5, 0.1).unwrap(), 0.0);
        assert_eq!(m.compute_r_empirical(0.5, 0.1).unwrap(), 0.5);
    }

    #[test]
    fn x_radius_is_shifted_mu_radius() {
        let m = TubeQuotient::new(0.1, 0.3).unwrap();
        let r = m.thick_tube_radius(0.5).unwrap();
        assert!((m.inj_at_radius(r) - 0.5).abs() < 1e-9);
        assert!((m.x_tube_radius(0.5, 0.5).unwrap() - (r - 0.5)).abs() < 1e-15);
        assert_eq!(m.x_tube_radius(0.5, r + 1.0).unwrap(), 0.0);
    }

    #[test]
    fn quotient_distance_shortcut() {
        let m = TubeQuotient::new(0.1, 0.3).unwrap();
        let p = PointUHS::from_cylinder(0.05, 0.0, 0.0);
        let q = PointUHS::from_cylinder(0.05, 3.0, 1.0);
        let qd = m.quotient_dist(&p, &q);
        assert!(qd < crate::hyperbolic::dist(&p, &q));
        let gq = m.holonomy().apply(&q);
        assert!(m.quotient_dist(&q, &gq) < 1e-7);
    }

    #[test]
    fn reduce_lands_in_period() {
        let m = TubeQuotient::new(0.3, 0.5).unwrap();
        let x = cylinder_point(0.7, 2.05, 0.4);
        let (y, k) = m.reduce(&x);
        let (_, t, _) = cylinder_coords(&y);
        assert!((0.0..0.3).contains(&t));
        assert!((m.translate(&y, k) - x).max_abs() < 1e-10);
    }

    #[test]
    fn cylinder_distance_matches_direct() {
        let a = cylinder_point(0.4, 0.1, 0.2);
        let b = cylinder_point(1.3, -0.5, 2.9);
        let direct = crate::hyperbolic::hdist(&a, &b);
        let cyl = cyl_dist(0.4f64.cosh(), 0.4f64.sinh(), 1.3f64.cosh(), 1.3f64.sinh(), 0.6, 0.2 - 2.9);
        assert!((direct - cyl).abs() < 1e-12);
    }
}
