//! Cutting each handlebody piece of a cell into a ball, triangulating its boundary, and
//! coning from an interior vertex; then gluing the cells along their shared faces.

pub mod assemble;
pub mod ball;
pub mod cut;
pub mod faces;
pub mod retraction;
pub mod sphere;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use assemble::{triangulate_cells, Assembly, AssemblyReport, CellTriangulationReport, VertexCensus};
pub use ball::{boundary_sphere, BoundarySphere};
pub use cut::{build_cut_complex, CutComplex, CutFace};
pub use retraction::{retract_to_tube, retraction_point};
pub use sphere::{cone_sphere, random_sphere, SphereTriangulation};

use crate::error::{Error, Result};
use crate::hyperbolic::HVec;

/// Why a tetrahedron face is not glued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundaryKind {
    /// On the boundary of `X`.
    Thin,
    /// On a face toward a cell that is not triangulated.
    Cutoff,
}

/// Face `face` of tetrahedron `a.0` (opposite its vertex `a.1`) glued to face `b.1` of `b.0`;
/// `perm[k]` is the vertex of `b.0` that vertex `k` of `a.0` is identified with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub a: (u32, u8),
    pub b: (u32, u8),
    pub perm: [u8; 4],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Triangulation {
    pub vertices: Vec<HVec>,
    pub tets: Vec<[u32; 4]>,
    pub gluings: Vec<Gluing>,
    pub boundary: Vec<(u32, u8, BoundaryKind)>,
}

/// Checks of a triangulation against its gluing table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangulationReport {
    pub vertices: usize,
    pub tets: usize,
    pub gluings: usize,
    pub thin_boundary: usize,
    pub cutoff_boundary: usize,
    /// Tetrahedron faces listed neither in a gluing nor as boundary.
    pub unlisted: usize,
    /// Tetrahedron faces listed more than once.
    pub overlisted: usize,
    /// Gluings that are not bijections matching opposite vertices.
    pub malformed: usize,
    /// Gluings identifying vertices with different labels.
    pub label_mismatches: usize,
    /// Gluings that reverse the orientation convention.
    pub orientation_violations: usize,
    /// Tetrahedra with a repeated vertex label.
    pub degenerate_tets: usize,
    /// Largest number of tetrahedra sharing one triangle of vertex labels, for information.
    pub max_label_triangle_multiplicity: usize,
    /// Euler characteristic of the glued complex.
    pub euler_characteristic: i64,
}

impl TriangulationReport {
    /// Every face is glued to exactly one partner or marked as boundary, labels agree and
    /// the gluings are orientation consistent.
    pub fn valid(&self) -> bool {
        self.unlisted == 0
            && self.overlisted == 0
            && self.malformed == 0
            && self.label_mismatches == 0
            && self.orientation_violations == 0
            && self.degenerate_tets == 0
    }
}

fn parity(p: &[u8; 4]) -> bool {
    let mut odd = false;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                odd = !odd;
            }
        }
    }
    odd
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
    fn classes(&mut self) -> usize {
        (0..self.0.len()).filter(|&x| self.find(x) == x).count()
    }
}

const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn edge_index(a: usize, b: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    EDGES.iter().position(|e| *e == (a, b)).unwrap()
}

impl Triangulation {
    /// Glue face `fa` of `ta` to face `fb` of `tb`, matching vertices by label.
    pub fn glue_by_labels(&mut self, ta: u32, fa: u8, tb: u32, fb: u8) -> Result<()> {
        let (a, b) = (self.tets[ta as usize], self.tets[tb as usize]);
        let mut perm = [0u8; 4];
        perm[fa as usize] = fb;
        for k in (0..4).filter(|k| *k != fa as usize) {
            let hits: Vec<usize> = (0..4).filter(|&m| m != fb as usize && b[m] == a[k]).collect();
            if hits.len() != 1 {
                return Err(Error::InvalidTriangulation(format!(
                    "faces ({ta},{fa}) and ({tb},{fb}) do not carry the same vertex labels"
                )));
            }
            perm[k] = hits[0] as u8;
        }
        self.gluings.push(Gluing { a: (ta, fa), b: (tb, fb), perm });
        Ok(())
    }

    pub fn validate(&self) -> TriangulationReport {
        let nt = self.tets.len();
        let mut rep = TriangulationReport {
            vertices: self.vertices.len(),
            tets: nt,
            gluings: self.gluings.len(),
            ..Default::default()
        };
        let mut listed = vec![0u32; 4 * nt];
        for g in &self.gluings {
            for (t, f) in [g.a, g.b] {
                if (t as usize) < nt && f < 4 {
                    listed[4 * t as usize + f as usize] += 1;
                }
            }
            let mut seen = [false; 4];
            for &p in &g.perm {
                if p < 4 {
                    seen[p as usize] = true;
                }
            }
            if seen.iter().any(|s| !s) || g.perm[g.a.1 as usize] != g.b.1 || g.a.0 as usize >= nt || g.b.0 as usize >= nt
            {
                rep.malformed += 1;
                continue;
            }
            let (ta, tb) = (self.tets[g.a.0 as usize], self.tets[g.b.0 as usize]);
            if (0..4).any(|k| k != g.a.1 as usize && ta[k] != tb[g.perm[k] as usize]) {
                rep.label_mismatches += 1;
            }
            // With every tetrahedron carrying the orientation of its vertex order, a gluing
            // respects orientation exactly when its permutation is odd.
            if !parity(&g.perm) {
                rep.orientation_violations += 1;
            }
        }
        for (t, f, kind) in &self.boundary {
            if (*t as usize) < nt && *f < 4 {
                listed[4 * *t as usize + *f as usize] += 1;
            }
            match kind {
                BoundaryKind::Thin => rep.thin_boundary += 1,
                BoundaryKind::Cutoff => rep.cutoff_boundary += 1,
            }
        }
        rep.unlisted = listed.iter().filter(|c| **c == 0).count();
        rep.overlisted = listed.iter().filter(|c| **c > 1).count();
        let mut triples: BTreeMap<[u32; 3], usize> = BTreeMap::new();
        for t in &self.tets {
            let mut s = *t;
            s.sort();
            if s.windows(2).any(|w| w[0] == w[1]) {
                rep.degenerate_tets += 1;
            }
            for k in 0..4 {
                let mut tri: Vec<u32> = (0..4).filter(|m| *m != k).map(|m| t[m]).collect();
                tri.sort();
                *triples.entry([tri[0], tri[1], tri[2]]).or_default() += 1;
            }
        }
        rep.max_label_triangle_multiplicity = triples.values().copied().max().unwrap_or(0);
        if rep.malformed == 0 {
            rep.euler_characteristic = self.euler_characteristic();
        }
        rep
    }

    /// `V - E + F - T` of the complex obtained by performing the gluings.
    pub fn euler_characteristic(&self) -> i64 {
        let nt = self.tets.len();
        let mut verts = Dsu::new(4 * nt);
        let mut edges = Dsu::new(6 * nt);
        let mut faces = 4 * nt;
        for g in &self.gluings {
            faces -= 1;
            let (ta, tb) = (g.a.0 as usize, g.b.0 as usize);
            let opp = g.a.1 as usize;
            let others: Vec<usize> = (0..4).filter(|k| *k != opp).collect();
            for &k in &others {
                verts.union(4 * ta + k, 4 * tb + g.perm[k] as usize);
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    let (x, y) = (others[i], others[j]);
                    edges.union(
                        6 * ta + edge_index(x, y),
                        6 * tb + edge_index(g.perm[x] as usize, g.perm[y] as usize),
                    );
                }
            }
        }
        verts.classes() as i64 - edges.classes() as i64 + faces as i64 - nt as i64
    }
}
