//! Convex polytopes in a Klein-model chart, built by incremental half-space clipping.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::PlaneId;
use crate::error::{Error, Result};

/// Half-space `a . u <= b` in a Klein chart, `|a| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub id: PlaneId,
    pub a: [f64; 3],
    pub b: f64,
}

impl HalfSpace {
    pub fn new(id: PlaneId, a: [f64; 3], b: f64) -> Result<Self> {
        let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if !(n > 0.0) || !b.is_finite() {
            return Err(Error::Degenerate("half-space with zero normal".into()));
        }
        Ok(HalfSpace { id, a: [a[0] / n, a[1] / n, a[2] / n], b: b / n })
    }

    pub fn eval(&self, u: &[f64; 3]) -> f64 {
        self.a[0] * u[0] + self.a[1] * u[1] + self.a[2] * u[2] - self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PVertex {
    pub u: [f64; 3],
    /// Indices into the half-space list of the three planes meeting here.
    pub planes: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PFace {
    pub plane: usize,
    /// Vertex cycle, counterclockwise seen from outside.
    pub verts: Vec<usize>,
}

/// Convex polytope with full face lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolytope {
    pub planes: Vec<HalfSpace>,
    pub vertices: Vec<PVertex>,
    pub faces: Vec<PFace>,
    /// Number of plane offsets nudged to avoid near-degenerate vertices.
    pub perturbations: usize,
}

const DEGENERATE_TOL: f64 = 1e-11;

impl ConvexPolytope {
    /// The cube `[-h, h]^3`.
    pub fn cube(h: f64) -> Self {
        let mut planes = Vec::new();
        let dirs = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
        for (k, a) in dirs.iter().enumerate() {
            planes.push(HalfSpace { id: PlaneId::Bound(k as u8), a: *a, b: h });
        }
        // Vertex (sx, sy, sz) lies on planes x: 0|1, y: 2|3, z: 4|5.
        let mut vertices = Vec::new();
        let mut index = HashMap::new();
        for sx in [1i32, -1] {
            for sy in [1i32, -1] {
                for sz in [1i32, -1] {
                    let px = if sx > 0 { 0 } else { 1 };
                    let py = if sy > 0 { 2 } else { 3 };
                    let pz = if sz > 0 { 4 } else { 5 };
                    index.insert((sx, sy, sz), vertices.len());
                    vertices.push(PVertex { u: [sx as f64 * h, sy as f64 * h, sz as f64 * h], planes: [px, py, pz] });
                }
            }
        }
        let v = |x: i32, y: i32, z: i32| index[&(x, y, z)];
        let faces = vec![
            PFace { plane: 0, verts: vec![v(1, -1, -1), v(1, 1, -1), v(1, 1, 1), v(1, -1, 1)] },
            PFace { plane: 1, verts: vec![v(-1, -1, -1), v(-1, -1, 1), v(-1, 1, 1), v(-1, 1, -1)] },
            PFace { plane: 2, verts: vec![v(-1, 1, -1), v(-1, 1, 1), v(1, 1, 1), v(1, 1, -1)] },
            PFace { plane: 3, verts: vec![v(-1, -1, -1), v(1, -1, -1), v(1, -1, 1), v(-1, -1, 1)] },
            PFace { plane: 4, verts: vec![v(-1, -1, 1), v(1, -1, 1), v(1, 1, 1), v(-1, 1, 1)] },
            PFace { plane: 5, verts: vec![v(-1, -1, -1), v(-1, 1, -1), v(1, 1, -1), v(1, -1, -1)] },
        ];
        ConvexPolytope { planes, vertices, faces, perturbations: 0 }
    }

    pub fn num_edges(&self) -> usize {
        self.faces.iter().map(|f| f.verts.len()).sum::<usize>() / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.num_edges() as i64 + self.faces.len() as i64
    }

    /// Largest Euclidean norm of a vertex.
    pub fn max_vertex_norm(&self) -> f64 {
        self.vertices.iter().map(|v| norm(&v.u)).fold(0.0, f64::max)
    }

    pub fn contains(&self, u: &[f64; 3], margin: f64) -> bool {
        self.faces.iter().all(|f| self.planes[f.plane].eval(u) <= margin)
    }

    /// Largest violation of any face constraint at `u` (negative inside).
    pub fn depth(&self, u: &[f64; 3]) -> f64 {
        self.faces.iter().map(|f| self.planes[f.plane].eval(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn has_bound_faces(&self) -> bool {
        self.faces.iter().any(|f| matches!(self.planes[f.plane].id, PlaneId::Bound(_)))
    }

    /// Intersects with a half-space. Returns whether the polytope changed.
    ///
    /// `nudge` supplies the sign of an offset perturbation used when a vertex lies
    /// within tolerance of the new plane.
    pub fn clip(&mut self, mut h: HalfSpace, nudge: f64) -> Result<bool> {
        let mut s: Vec<f64> = self.vertices.iter().map(|v| h.eval(&v.u)).collect();
        if s.iter().any(|x| x.abs() < DEGENERATE_TOL) {
            let mut resolved = false;
            for sign in [nudge, -nudge] {
                let b = h.b + sign * 10.0 * DEGENERATE_TOL;
                let s2: Vec<f64> = self.vertices.iter().map(|v| h.eval(&v.u) - (b - h.b)).collect();
                if s2.iter().all(|x| x.abs() >= DEGENERATE_TOL) {
                    h.b = b;
                    s = s2;
                    resolved = true;
                    self.perturbations += 1;
                    break;
                }
            }
            if !resolved {
                return Err(Error::Degenerate("plane passes through polytope vertices".into()));
            }
        }
        if s.iter().all(|x| *x <= 0.0) {
            return Ok(false);
        }
        if s.iter().all(|x| *x > 0.0) {
            return Err(Error::Degenerate("half-space excludes the whole polytope".into()));
        }
        let pid = self.planes.len();
        self.planes.push(h);
        let inside = |k: usize| s[k] <= 0.0;
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut verts = Vec::with_capacity(self.vertices.len() + 8);
        for (k, v) in self.vertices.iter().enumerate() {
            if inside(k) {
                remap[k] = verts.len();
                verts.push(v.clone());
            }
        }
        let mut cut_cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cap_next: HashMap<usize, usize> = HashMap::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        for f in &self.faces {
            let m = f.verts.len();
            let mut out = Vec::with_capacity(m + 1);
            let mut exit = None;
            let mut entry = None;
            for k in 0..m {
                let v = f.verts[k];
                let w = f.verts[(k + 1) % m];
                if inside(v) {
                    out.push(remap[v]);
                }
                if inside(v) != inside(w) {
                    let key = (v.min(w), v.max(w));
                    let x = match cut_cache.get(&key) {
                        Some(&x) => x,
                        None => {
                            let (pv, pw) = (&self.vertices[v], &self.vertices[w]);
                            let lam = s[v] / (s[v] - s[w]);
                            let u = [
                                pv.u[0] + lam * (pw.u[0] - pv.u[0]),
                                pv.u[1] + lam * (pw.u[1] - pv.u[1]),
                                pv.u[2] + lam * (pw.u[2] - pv.u[2]),
                            ];
                            let common: Vec<usize> = pv.planes.iter().copied().filter(|p| pw.planes.contains(p)).collect();
                            if common.len() != 2 {
                                return Err(Error::Degenerate("edge is not the meet of two planes".into()));
                            }
                            let x = verts.len();
                            verts.push(PVertex { u, planes: [common[0], common[1], pid] });
                            cut_cache.insert(key, x);
                            x
                        }
                    };
                    out.push(x);
                    if inside(v) {
                        exit = Some(x);
                    } else {
                        entry = Some(x);
                    }
                }
            }
            match (exit, entry) {
                (Some(a), Some(b)) => {
                    cap_next.insert(b, a);
                }
                (None, None) => {}
                _ => return Err(Error::Degenerate("face crossed an odd number of times".into())),
            }
            if out.len() >= 3 {
                faces.push(PFace { plane: f.plane, verts: out });
            }
        }
        let start = *cap_next.keys().min().ok_or_else(|| Error::Degenerate("empty cap".into()))?;
        let mut cap = vec![start];
        let mut cur = start;
        loop {
            let nx = *cap_next.get(&cur).ok_or_else(|| Error::Degenerate("open cap cycle".into()))?;
            if nx == start {
                break;
            }
            cap.push(nx);
            cur = nx;
            if cap.len() > cap_next.len() {
                return Err(Error::Degenerate("cap cycle does not close".into()));
            }
        }
        if cap.len() != cap_next.len() {
            return Err(Error::Degenerate("cap splits into several cycles".into()));
        }
        faces.push(PFace { plane: pid, verts: cap });
        self.vertices = verts;
        self.faces = faces;
        Ok(true)
    }
}

pub(crate) fn norm(u: &[f64; 3]) -> f64 {
    (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voronoi::Generator;

    fn gen(j: u32) -> PlaneId {
        PlaneId::Gen(Generator { j, n: 0 })
    }

    #[test]
    fn cube_is_valid() {
        let c = ConvexPolytope::cube(1.0);
        assert_eq!(c.euler_characteristic(), 2);
        assert!(c.contains(&[0.0, 0.0, 0.0], 0.0));
        for f in &c.faces {
            for &v in &f.verts {
                assert!(c.planes[f.plane].eval(&c.vertices[v].u).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn corner_cut_adds_triangle() {
        let mut c = ConvexPolytope::cube(1.0);
        let h = HalfSpace::new(gen(0), [1.0, 1.0, 1.0], 2.5).unwrap();
        assert!(c.clip(h, 1.0).unwrap());
        assert_eq!(c.vertices.len(), 10);
        assert_eq!(c.faces.len(), 7);
        assert_eq!(c.euler_characteristic(), 2);
        let cap = c.faces.last().unwrap();
        assert_eq!(cap.verts.len(), 3);
    }

    #[test]
    fn orientation_is_outward() {
        let mut c = ConvexPolytope::cube(1.0);
        c.clip(HalfSpace::new(gen(0), [0.3, 0.2, 1.0], 0.4).unwrap(), 1.0).unwrap();
        c.clip(HalfSpace::new(gen(1), [-0.5, 0.7, -0.2], 0.5).unwrap(), 1.0).unwrap();
        for f in &c.faces {
            let p = &c.planes[f.plane];
            let vs: Vec<[f64; 3]> = f.verts.iter().map(|&v| c.vertices[v].u).collect();
            let mut nrm = [0.0; 3];
            for k in 0..vs.len() {
                let a = vs[k];
                let b = vs[(k + 1) % vs.len()];
                nrm[0] += (a[1] - b[1]) * (a[2] + b[2]);
                nrm[1] += (a[2] - b[2]) * (a[0] + b[0]);
                nrm[2] += (a[0] - b[0]) * (a[1] + b[1]);
            }
            let dot = nrm[0] * p.a[0] + nrm[1] * p.a[1] + nrm[2] * p.a[2];
            assert!(dot > 0.0);
        }
        assert_eq!(c.euler_characteristic(), 2);
    }

    #[test]
    fn redundant_plane_is_ignored() {
        let mut c = ConvexPolytope::cube(1.0);
        assert!(!c.clip(HalfSpace::new(gen(0), [1.0, 0.0, 0.0], 2.0).unwrap(), 1.0).unwrap());
    }

    #[test]
    fn plane_through_vertex_is_nudged() {
        let mut c = ConvexPolytope::cube(1.0);
        assert!(c.clip(HalfSpace::new(gen(0), [1.0, 1.0, 1.0], 1.0).unwrap(), 1.0).unwrap());
        assert_eq!(c.perturbations, 1);
        assert_eq!(c.euler_characteristic(), 2);
    }
}
