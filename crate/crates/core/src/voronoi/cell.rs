//! Computation of a single Voronoi cell by ring-wise half-space clipping.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::polytope::{ConvexPolytope, HalfSpace};
use super::{splitmix, Generator, PlaneId};
use crate::error::{Error, Result};
use crate::hyperbolic::{cylinder_coords, hdist, HVec, Lorentz};
use crate::net::Net;
use crate::quotient::{cyl_dist, TubeQuotient};

/// Cylinder data of a net point, cached for distance evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cyl {
    pub r: f64,
    pub t: f64,
    pub phi: f64,
    pub ch: f64,
    pub sh: f64,
}

impl Cyl {
    pub fn of(x: &HVec) -> Self {
        let (r, t, phi) = cylinder_coords(x);
        Cyl { r, t, phi, ch: r.cosh(), sh: r.sinh() }
    }
}

/// Everything a cell computation needs to know about the net.
pub struct CellContext<'a> {
    pub m: TubeQuotient,
    pub lifts: &'a [HVec],
    pub d_sep: f64,
    /// Largest tube radius of the net region.
    pub r_out: f64,
    pub seed: u64,
    pub(crate) cyl: Vec<Cyl>,
    r_max: f64,
}

impl<'a> CellContext<'a> {
    pub fn new(m: TubeQuotient, net: &'a Net) -> Self {
        Self::from_lifts(m, &net.lifts, net.d_sep, net.region.r_out, net.seed)
    }

    pub fn from_lifts(m: TubeQuotient, lifts: &'a [HVec], d_sep: f64, r_out: f64, seed: u64) -> Self {
        let cyl: Vec<Cyl> = lifts.iter().map(Cyl::of).collect();
        let r_max = cyl.iter().map(|c| c.r).fold(0.0, f64::max);
        CellContext { m, lifts, d_sep, r_out, seed, cyl, r_max }
    }

    pub fn len(&self) -> usize {
        self.lifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifts.is_empty()
    }

    pub fn position(&self, g: Generator) -> HVec {
        self.m.translate(&self.lifts[g.j as usize], g.n as i64)
    }

    /// Largest search radius a cell may need before it is declared uncertified.
    pub fn search_cap(&self) -> f64 {
        4.0 * self.d_sep + 2.0 * (2.0 * self.r_out + 0.5 * self.m.length)
    }

    /// Generators `g^n x_j` with `lo < d(x_center, .) <= hi`, `|n| <= depth`, sorted.
    /// The flag reports whether the depth bound cut the search window.
    fn ring(&self, center: &Cyl, own: Option<usize>, lo: f64, hi: f64, depth: i64) -> (Vec<(f64, Generator)>, bool) {
        let l = self.m.length;
        let mut out = Vec::new();
        let mut truncated = false;
        for (j, cj) in self.cyl.iter().enumerate() {
            if (cj.r - center.r).abs() > hi {
                continue;
            }
            let nmin = ((center.t - hi - cj.t) / l).ceil() as i64;
            let nmax = ((center.t + hi - cj.t) / l).floor() as i64;
            if nmin < -depth || nmax > depth {
                truncated = true;
            }
            for n in nmin.max(-depth)..=nmax.min(depth) {
                if own == Some(j) && n == 0 {
                    continue;
                }
                let dt = cj.t + n as f64 * l - center.t;
                let dphi = cj.phi + n as f64 * self.m.twist - center.phi;
                let d = cyl_dist(center.ch, center.sh, cj.ch, cj.sh, dt, dphi);
                if d > lo && d <= hi {
                    out.push((d, Generator::new(j, n)));
                }
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        (out, truncated)
    }

    /// Whether the ideal point of the null vector `l` lies in the open ideal boundary of cell `i`.
    fn ideal_point_in_cell(&self, i: usize, l: &HVec, depth: i64) -> bool {
        let lam = (l.0[1] * l.0[1] + l.0[2] * l.0[2]).sqrt();
        if !(lam > 1e-9 * l.0[0].abs()) {
            return false;
        }
        let tl = 0.5 * ((l.0[0] + l.0[3]) / (l.0[0] - l.0[3])).ln();
        let pl = l.0[2].atan2(l.0[1]);
        let busemann = |c: &Cyl, dt: f64, dphi: f64| c.ch * dt.cosh() - c.sh * dphi.cos();
        let ci = &self.cyl[i];
        let hi = busemann(ci, ci.t - tl, ci.phi - pl);
        let reach = (hi * self.r_max.exp()).max(1.0).acosh();
        let len = self.m.length;
        for (j, cj) in self.cyl.iter().enumerate() {
            let nmin = ((tl - reach - cj.t) / len).ceil() as i64;
            let nmax = ((tl + reach - cj.t) / len).floor() as i64;
            if nmin < -depth || nmax > depth {
                return false;
            }
            for n in nmin..=nmax {
                if j == i && n == 0 {
                    continue;
                }
                let h = busemann(cj, cj.t + n as f64 * len - tl, cj.phi + n as f64 * self.m.twist - pl);
                if h <= hi * (1.0 + 1e-9) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the point `v` lies in the true Voronoi cell of net point `i`.
    fn point_in_cell(&self, i: usize, v: &HVec, depth: i64) -> bool {
        let di = hdist(v, &self.lifts[i]);
        let cv = Cyl::of(v);
        let (ring, truncated) = self.ring(&cv, None, -1.0, di, depth);
        if truncated {
            return false;
        }
        ring.iter().all(|(d, g)| (g.j as usize == i && g.n == 0) || *d >= di - 1e-9)
    }
}

/// Why a cell is excluded from per-cell assertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlagReason {
    /// The cell reaches the sphere at infinity.
    Unbounded,
    /// The cell extends past the outer cutoff of the net region.
    BeyondCutoff,
    /// The search cap was reached before the cell could be certified.
    Uncertified,
}

/// How the face lattice was shown to be independent of the orbit truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    /// The search window never hit the orbit-depth bound.
    Certified,
    /// The window was truncated; recomputing at this larger depth gave the same lattice.
    Doubled(i64),
    /// Flagged cells are not checked.
    Skipped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub center: HVec,
    /// Maps the local Klein chart (center at the origin) to global coordinates.
    pub frame: Lorentz,
    pub polytope: ConvexPolytope,
    pub flag: Option<FlagReason>,
    /// Radius up to which all orbit points were used.
    pub search_radius: f64,
    pub candidates: usize,
    pub depth: i64,
    pub stability: Stability,
}

impl Cell {
    pub fn is_flagged(&self) -> bool {
        self.flag.is_some()
    }

    /// Generators of the bisector faces.
    pub fn face_generators(&self) -> Vec<Generator> {
        self.polytope
            .faces
            .iter()
            .filter_map(|f| match self.polytope.planes[f.plane].id {
                PlaneId::Gen(g) => Some(g),
                PlaneId::Bound(_) => None,
            })
            .collect()
    }

    /// Face lattice as sets of plane ids per vertex, for comparison.
    pub fn lattice(&self) -> BTreeSet<Vec<PlaneId>> {
        self.polytope
            .vertices
            .iter()
            .map(|v| {
                let mut ids: Vec<PlaneId> = v.planes.iter().map(|&p| self.polytope.planes[p].id).collect();
                ids.sort();
                ids
            })
            .collect()
    }

    pub fn vertex_global(&self, k: usize) -> HVec {
        self.frame.apply(&HVec::from_klein_unchecked(self.polytope.vertices[k].u))
    }

    /// Distance from the center to the farthest vertex, infinite if a vertex leaves the ball.
    pub fn max_vertex_distance(&self) -> f64 {
        polytope_radius(&self.polytope)
    }
}

fn polytope_radius(p: &ConvexPolytope) -> f64 {
    let n = p.max_vertex_norm();
    if n >= 1.0 - 1e-15 {
        f64::INFINITY
    } else {
        n.atanh()
    }
}

/// Computes the Voronoi cell of net point `i` using orbit translates with `|n| <= orbit_depth`.
pub fn compute_cell(ctx: &CellContext, i: usize, orbit_depth: i64) -> Result<Cell> {
    let cell = compute_cell_once(ctx, i, orbit_depth)?;
    if cell.flag.is_some() || cell.stability == Stability::Certified {
        return Ok(cell);
    }
    let deeper = compute_cell_once(ctx, i, 2 * orbit_depth)?;
    if deeper.flag.is_some() || deeper.lattice() != cell.lattice() {
        return Err(Error::UnstableCell { cell: i });
    }
    Ok(Cell { stability: Stability::Doubled(2 * orbit_depth), ..cell })
}

fn compute_cell_once(ctx: &CellContext, i: usize, depth: i64) -> Result<Cell> {
    let center = ctx.lifts[i];
    let frame = Lorentz::boost_to(&center);
    let to_local = frame.inverse();
    let ci = ctx.cyl[i];
    let cap = ctx.search_cap();
    let mut poly = ConvexPolytope::cube(1.0);
    let mut lo = -1.0;
    let mut hi = (3.0 * ctx.d_sep).min(cap);
    let mut candidates = 0usize;
    let mut truncated = false;
    let flag;
    loop {
        let (ring, tr) = ctx.ring(&ci, Some(i), lo, hi, depth);
        truncated |= tr;
        candidates += ring.len();
        for (_, g) in &ring {
            let y = to_local.apply(&ctx.position(*g));
            let h = HalfSpace::new(PlaneId::Gen(*g), y.spatial(), y.0[0] - 1.0)?;
            let nudge = if splitmix(ctx.seed ^ splitmix(((g.j as u64) << 32) ^ (g.n as u32 as u64))) & 1 == 0 {
                1.0
            } else {
                -1.0
            };
            poly.clip(h, nudge)?;
        }
        let need = 2.0 * polytope_radius(&poly);
        if need <= hi && !poly.has_bound_faces() {
            flag = if beyond_cutoff(ctx, &poly, &frame) { Some(FlagReason::BeyondCutoff) } else { None };
            break;
        }
        if hi >= cap {
            flag = Some(FlagReason::Uncertified);
            break;
        }
        if let Some(reason) = early_flag(ctx, i, &poly, &frame, depth) {
            flag = Some(reason);
            break;
        }
        lo = hi;
        hi = need.max(1.5 * hi).min(cap);
    }
    let stability = if flag.is_some() {
        Stability::Skipped
    } else if truncated {
        Stability::Doubled(0)
    } else {
        Stability::Certified
    };
    Ok(Cell { index: i, center, frame, polytope: poly, flag, search_radius: hi, candidates, depth, stability })
}

fn beyond_cutoff(ctx: &CellContext, poly: &ConvexPolytope, frame: &Lorentz) -> bool {
    poly.vertices.iter().any(|v| {
        let x = frame.apply(&HVec::from_klein_unchecked(v.u));
        cylinder_coords(&x).0 > ctx.r_out
    })
}

/// Cheap certificates that a partially clipped cell must be flagged.
fn early_flag(ctx: &CellContext, i: usize, poly: &ConvexPolytope, frame: &Lorentz, depth: i64) -> Option<FlagReason> {
    let mut far: Vec<(f64, [f64; 3])> = poly
        .vertices
        .iter()
        .map(|v| (super::polytope::norm(&v.u), v.u))
        .collect();
    far.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for (nrm, u) in far.iter().take(8) {
        if *nrm >= 1.0 {
            let l = frame.apply(&HVec([1.0, u[0] / nrm, u[1] / nrm, u[2] / nrm]));
            if ctx.ideal_point_in_cell(i, &l, depth) {
                return Some(FlagReason::Unbounded);
            }
        } else {
            let x = frame.apply(&HVec::from_klein_unchecked(*u));
            if cylinder_coords(&x).0 > ctx.r_out && ctx.point_in_cell(i, &x, depth) {
                return Some(FlagReason::BeyondCutoff);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::PointUHS;

    #[test]
    fn two_points_on_axis_give_hemisphere() {
        // Large translation length so only the pair interacts.
        let m = TubeQuotient::new(20.0, 0.3).unwrap();
        let a = PointUHS::new(0.0, 0.0, 1.0).unwrap().to_hyperboloid();
        let b = PointUHS::new(0.0, 0.0, 3.0).unwrap().to_hyperboloid();
        let lifts = vec![a, b];
        let ctx = CellContext::from_lifts(m, &lifts, 0.5, 1.0, 1);
        let cell = compute_cell_once(&ctx, 0, 4).unwrap();
        let gens = cell.face_generators();
        assert!(gens.contains(&Generator::new(1, 0)));
        // Points of that face plane lie on the hemisphere of radius sqrt(3).
        let h = cell.polytope.planes.iter().find(|h| h.id == PlaneId::Gen(Generator::new(1, 0))).unwrap();
        let base = [h.a[0] * h.b, h.a[1] * h.b, h.a[2] * h.b];
        let t1 = if h.a[0].abs() < 0.9 { [0.0, -h.a[2], h.a[1]] } else { [-h.a[2], 0.0, h.a[0]] };
        for s in [0.0, 0.1, -0.2] {
            let u = [base[0] + s * t1[0], base[1] + s * t1[1], base[2] + s * t1[2]];
            let p = PointUHS::from_hyperboloid(&cell.frame.apply(&HVec::from_klein(u)));
            let rad = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
            assert!((rad - 3f64.sqrt()).abs() < 1e-9);
        }
    }
}
