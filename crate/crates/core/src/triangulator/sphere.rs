//! Triangulated 2-spheres and coning them to balls.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BoundaryKind, Triangulation};
use crate::error::{Error, Result};
use crate::hyperbolic::HVec;

/// Oriented triangles on vertices `0..vertices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereTriangulation {
    pub vertices: usize,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereCheck {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Each directed edge appears once and its reverse appears once.
    pub oriented_closed: bool,
    pub euler_characteristic: i64,
}

impl SphereCheck {
    pub fn is_sphere(&self) -> bool {
        self.oriented_closed && self.euler_characteristic == 2 && 3 * self.faces == 2 * self.edges
    }
}

impl SphereTriangulation {
    fn directed(&self) -> BTreeMap<(u32, u32), usize> {
        let mut m = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                m.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        m
    }

    pub fn check(&self) -> SphereCheck {
        let mut directed: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *directed.entry((tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        let oriented_closed = directed.iter().all(|(&(a, b), &c)| c == 1 && directed.get(&(b, a)) == Some(&1));
        let edges: BTreeSet<(u32, u32)> = directed.keys().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        let used: BTreeSet<u32> = self.triangles.iter().flatten().copied().collect();
        let (v, e, f) = (used.len(), edges.len(), self.triangles.len());
        SphereCheck {
            vertices: v,
            edges: e,
            faces: f,
            oriented_closed,
            euler_characteristic: v as i64 - e as i64 + f as i64,
        }
    }
}

/// A random simplicial 2-sphere with `vertices >= 4` vertices: the boundary of a tetrahedron
/// refined by random stellar subdivisions of triangles, then shuffled by random edge flips.
pub fn random_sphere(vertices: usize, seed: u64) -> Result<SphereTriangulation> {
    if vertices < 4 {
        return Err(Error::InvalidParameter("a triangulated sphere needs at least 4 vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SphereTriangulation { vertices: 4, triangles: vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]] };
    while s.vertices < vertices {
        let t = rng.gen_range(0..s.triangles.len());
        let [a, b, c] = s.triangles[t];
        let v = s.vertices as u32;
        s.triangles[t] = [a, b, v];
        s.triangles.push([b, c, v]);
        s.triangles.push([c, a, v]);
        s.vertices += 1;
    }
    for _ in 0..3 * vertices {
        let t = rng.gen_range(0..s.triangles.len());
        let k = rng.gen_range(0..3);
        flip(&mut s, t, k);
    }
    Ok(s)
}

/// Flips edge `k` of triangle `t` when the result stays simplicial.
fn flip(s: &mut SphereTriangulation, t: usize, k: usize) -> bool {
    let tri = s.triangles[t];
    let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
    let directed = s.directed();
    let Some(&u) = directed.get(&(b, a)) else { return false };
    let other = s.triangles[u];
    let d = *other.iter().find(|x| **x != a && **x != b).unwrap();
    if c == d || directed.contains_key(&(c, d)) || directed.contains_key(&(d, c)) {
        return false;
    }
    s.triangles[t] = [a, d, c];
    s.triangles[u] = [d, b, c];
    true
}

/// Cones an oriented sphere from a new vertex. Vertex `k` of the sphere keeps label `k`, the
/// apex gets label `sphere.vertices`. Every tetrahedron face opposite the apex is boundary.
pub fn cone_sphere(sphere: &SphereTriangulation, positions: Option<&[HVec]>) -> Result<Triangulation> {
    let o = sphere.vertices as u32;
    let mut tri = Triangulation {
        vertices: match positions {
            Some(p) => p.to_vec(),
            None => vec![HVec::ORIGIN; sphere.vertices + 1],
        },
        tets: sphere.triangles.iter().map(|t| [o, t[0], t[1], t[2]]).collect(),
        gluings: vec![],
        boundary: vec![],
    };
    let directed = sphere.directed();
    for (t, face) in sphere.triangles.iter().enumerate() {
        tri.boundary.push((t as u32, 0, BoundaryKind::Thin));
        for k in 0..3 {
            let (a, b) = (face[k], face[(k + 1) % 3]);
            if a > b {
                continue;
            }
            let u = *directed
                .get(&(b, a))
                .ok_or_else(|| Error::InvalidTriangulation(format!("edge {a}-{b} has no reverse")))?;
            let opp_t = 1 + (k + 2) % 3;
            let other = sphere.triangles[u];
            let m = other.iter().position(|x| *x != a && *x != b).unwrap();
            tri.glue_by_labels(t as u32, opp_t as u8, u as u32, 1 + m as u8)?;
        }
    }
    Ok(tri)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flips_keep_a_sphere() {
        let s = random_sphere(12, 3).unwrap();
        assert!(s.check().is_sphere());
        assert_eq!(s.check().vertices, 12);
    }
}
