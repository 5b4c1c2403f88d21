//! Global assembly: cut every processed cell, subdivide the faces once, cone each boundary
//! sphere from its center and glue the cones along shared face triangles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ball::{boundary_sphere, BoundarySphere, TriOuter};
use super::cut::{build_cut_complex, CutComplex};
use super::faces::{insert_chord_crossings, split_annuli, subdivide_faces};
use super::{BoundaryKind, Gluing, Triangulation, TriangulationReport};
use crate::error::{Error, Result};
use crate::net::ConstantsTable;
use crate::voronoi::clip::clip_to_x;
use crate::voronoi::registry::{CellKeys, FaceKey, LKey, PointKey, Registry};

/// Points of a cell's boundary spheres sorted into the classes the counting argument uses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VertexCensus {
    /// Polytope vertices in `X`.
    pub cell_vertices: usize,
    /// Points where the cell's own cutting disks meet polytope edges.
    pub edge_points: usize,
    /// Exit points of radial segments on faces.
    pub exit_points: usize,
    /// Crossings of polytope edges with the tube.
    pub tube_crossings: usize,
    /// Vertices of the connecting graphs.
    pub graph_vertices: usize,
    /// Points outside the five classes: polyline refinement, chord crossings, annulus split
    /// ends and points placed by neighboring cells.
    pub other: usize,
    pub bounds: [f64; 5],
    pub bound_total: f64,
}

impl VertexCensus {
    pub fn counted(&self) -> usize {
        self.cell_vertices + self.edge_points + self.exit_points + self.tube_crossings + self.graph_vertices
    }

    pub fn ok(&self) -> bool {
        let c = [self.cell_vertices, self.edge_points, self.exit_points, self.tube_crossings, self.graph_vertices];
        c.iter().zip(self.bounds).all(|(n, b)| *n as f64 <= b) && self.counted() as f64 <= self.bound_total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTriangulationReport {
    pub cell: usize,
    pub components: usize,
    pub genus: Vec<i64>,
    pub cut_faces: Vec<usize>,
    pub interior_edges: Vec<usize>,
    pub cut_attempts: Vec<usize>,
    /// `(vertices, triangles, Euler characteristic, is a sphere)` per boundary sphere.
    pub spheres: Vec<(usize, usize, i64, bool)>,
    pub tets: usize,
    pub tet_bound: f64,
    pub census: VertexCensus,
    /// Cut faces at most `2g - 1` and `2 C1 - 1`, interior edges at most `4 C1 - 2`, and
    /// interior edges all of valence three.
    pub cut_bounds_ok: bool,
    pub tets_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyReport {
    pub cells: Vec<CellTriangulationReport>,
    pub total_tets: usize,
    pub max_cell_tets: usize,
    pub tet_bound: f64,
    pub annulus_splits: usize,
    pub chord_crossings: usize,
    pub shared_faces_checked: usize,
    /// Face triangles glued between two tetrahedra.
    pub interior_face_triangles: usize,
    pub triangulation: TriangulationReport,
}

impl AssemblyReport {
    pub fn ok(&self) -> bool {
        self.triangulation.valid()
            && self.cells.iter().all(|c| c.tets_ok && c.cut_bounds_ok && c.census.ok() && c.spheres.iter().all(|s| s.3))
    }
}

/// Output of [`triangulate_cells`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assembly {
    pub triangulation: Triangulation,
    pub report: AssemblyReport,
    /// Cutting complexes per processed cell and component.
    pub cuts: Vec<Vec<CutComplex>>,
}

/// Ids of quotient points: keys with their lift dropped, in key order.
fn vertex_ids(spheres: &[BoundarySphere]) -> BTreeMap<PointKey, u32> {
    let keys: BTreeSet<PointKey> =
        spheres.iter().flat_map(|s| s.triangles.iter().flat_map(|t| t.keys.iter().map(|k| k.key))).collect();
    keys.into_iter().enumerate().map(|(i, k)| (k, i as u32)).collect()
}

/// Triangulates the cells in `cells`. Faces toward cells outside the list are left as
/// cutoff boundary.
pub fn triangulate_cells(
    reg: &mut Registry,
    cells: &[CellKeys],
    k: &ConstantsTable,
    seed: u64,
) -> Result<Assembly> {
    let annulus_splits = split_annuli(reg)?;
    let mut cuts: Vec<Vec<CutComplex>> = Vec::with_capacity(cells.len());
    for keys in cells {
        let clipped = clip_to_x(reg, keys)?;
        let mut cc = Vec::with_capacity(clipped.components.len());
        for (ci, comp) in clipped.components.iter().enumerate() {
            cc.push(build_cut_complex(reg, keys, comp, ci, seed)?);
        }
        cuts.push(cc);
    }
    let chord_crossings = insert_chord_crossings(reg)?;
    let subdivisions = subdivide_faces(reg)?;

    let mut spheres: Vec<BoundarySphere> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    for (n, keys) in cells.iter().enumerate() {
        let clipped = clip_to_x(reg, keys)?;
        if clipped.components.len() != cuts[n].len() {
            return Err(Error::Degenerate(format!("cell {}: components changed while cutting", keys.index)));
        }
        for (ci, comp) in clipped.components.iter().enumerate() {
            spheres.push(boundary_sphere(reg, keys, comp, ci, &cuts[n][ci], &subdivisions)?);
            owner.push(n);
        }
    }

    let ids = vertex_ids(&spheres);
    let mut tri = Triangulation::default();
    tri.vertices = ids.keys().map(|key| reg.pos(key)).collect();
    let mut centers = Vec::with_capacity(spheres.len());
    for s in &spheres {
        centers.push(tri.vertices.len() as u32);
        tri.vertices.push(s.center);
    }

    let processed: BTreeSet<usize> = cells.iter().map(|c| c.index).collect();
    let mut face_tets: BTreeMap<(FaceKey, usize), Vec<(u32, [LKey; 3], usize)>> = BTreeMap::new();
    let mut seen: BTreeMap<(usize, FaceKey, bool), BTreeMap<usize, [LKey; 3]>> = BTreeMap::new();
    let mut cell_tets = vec![0usize; cells.len()];
    for (si, s) in spheres.iter().enumerate() {
        let base = tri.tets.len() as u32;
        let o = centers[si];
        for t in &s.triangles {
            tri.tets.push([o, ids[&t.keys[0].key], ids[&t.keys[1].key], ids[&t.keys[2].key]]);
        }
        cell_tets[owner[si]] += s.triangles.len();
        for (ti, t) in s.triangles.iter().enumerate() {
            let tet = base + ti as u32;
            for e in 0..3 {
                let (u, f) = s.adjacent[ti][e];
                if (u as usize, f as usize) < (ti, e) {
                    continue;
                }
                let mut perm = [0u8; 4];
                perm[1 + e] = 1 + ((f as usize + 1) % 3) as u8;
                perm[1 + (e + 1) % 3] = 1 + f;
                perm[1 + (e + 2) % 3] = 1 + ((f as usize + 2) % 3) as u8;
                tri.gluings.push(Gluing {
                    a: (tet, 1 + ((e + 2) % 3) as u8),
                    b: (base + u, 1 + ((f as usize + 2) % 3) as u8),
                    perm,
                });
            }
            match t.outer {
                TriOuter::Thin => tri.boundary.push((tet, 0, BoundaryKind::Thin)),
                TriOuter::Cut { .. } => {}
                TriOuter::Face { key, index, shift, side_a } => {
                    let local = t.keys.map(|k| k.shifted(-shift));
                    face_tets.entry((key, index)).or_default().push((tet, local, owner[si]));
                    let canonical = if side_a { local } else { [local[0], local[2], local[1]] };
                    seen.entry((cells[owner[si]].index, key, side_a)).or_default().insert(index, canonical);
                }
            }
        }
        for (a, b) in s.cut_pairs() {
            tri.gluings.push(Gluing { a: (base + a, 0), b: (base + b, 0), perm: [0, 1, 3, 2] });
        }
    }

    let mut interior_face_triangles = 0;
    for ((fk, _), entries) in &face_tets {
        match entries.as_slice() {
            [(ta, ka, ca), (tb, kb, cb)] => {
                let mut perm = [0u8; 4];
                for p in 0..3 {
                    let q = kb.iter().position(|x| *x == ka[p]).ok_or(Error::SharedFaceMismatch {
                        a: cells[*ca].index,
                        b: cells[*cb].index,
                    })?;
                    perm[p + 1] = q as u8 + 1;
                }
                tri.gluings.push(Gluing { a: (*ta, 0), b: (*tb, 0), perm });
                interior_face_triangles += 1;
            }
            [(ta, _, ca)] => {
                let me = cells[*ca].index as u32;
                let other = if fk.0[0].j == me { fk.0[1].j } else { fk.0[0].j };
                if processed.contains(&(other as usize)) && fk.0[0].j != fk.0[1].j {
                    return Err(Error::InvalidTriangulation(format!(
                        "face triangle of cell {me} has no partner in processed cell {other}"
                    )));
                }
                tri.boundary.push((*ta, 0, BoundaryKind::Cutoff));
            }
            _ => return Err(Error::InvalidTriangulation("face triangle used more than twice".into())),
        }
    }

    // Each side serializes the triangles it used on every shared face; both must agree.
    let mut shared_faces_checked = 0;
    let serialize = |m: &BTreeMap<usize, [LKey; 3]>| format!("{m:?}").into_bytes();
    for ((cell, fk, side_a), m) in &seen {
        if !side_a {
            continue;
        }
        let other = if fk.0[0].j as usize == *cell { fk.0[1].j as usize } else { fk.0[0].j as usize };
        let Some(m2) = seen.get(&(other, *fk, false)) else { continue };
        shared_faces_checked += 1;
        if serialize(m) != serialize(m2) {
            return Err(Error::SharedFaceMismatch { a: *cell, b: other });
        }
    }

    let tet_bound = (6.0 * k.cbar0 - 4.0) * k.c0;
    let mut reports = Vec::with_capacity(cells.len());
    for (n, keys) in cells.iter().enumerate() {
        let mine: Vec<&BoundarySphere> = spheres.iter().zip(&owner).filter(|(_, o)| **o == n).map(|(s, _)| s).collect();
        let distinct: BTreeSet<LKey> =
            mine.iter().flat_map(|s| s.triangles.iter().flat_map(|t| t.keys.iter().copied())).collect();
        let cc = &cuts[n];
        let census = VertexCensus {
            cell_vertices: distinct.iter().filter(|k| matches!(k.key, PointKey::Vertex(_))).count(),
            edge_points: cc.iter().map(|c| c.edge_points()).sum(),
            exit_points: cc.iter().map(|c| c.interior_edges()).sum(),
            tube_crossings: distinct.iter().filter(|k| matches!(k.key, PointKey::Crossing(..))).count(),
            graph_vertices: cc.iter().map(|c| c.vertex_keys.len()).sum(),
            other: 0,
            bounds: [k.c0, k.c1 * (2.0 * k.c1 - 1.0), k.c2 * (4.0 * k.c1 - 2.0), 2.0 * k.c1, 8.0 * k.c1 - 4.0],
            bound_total: k.cbar0,
        };
        let census = VertexCensus { other: distinct.len().saturating_sub(census.counted()), ..census };
        let cut_bounds_ok = cc.iter().all(|c| {
            let f = c.faces.len() as f64;
            let g = c.genus as f64;
            (c.genus == 0 || f <= 2.0 * g - 1.0)
                && f <= 2.0 * k.c1 - 1.0
                && c.interior_edges() as f64 <= 4.0 * k.c1 - 2.0
                && c.interior_valences_ok()
        }) && mine.iter().all(|s| s.triangles.len() as f64 <= 6.0 * k.cbar0 - 4.0);
        reports.push(CellTriangulationReport {
            cell: keys.index,
            components: cc.len(),
            genus: cc.iter().map(|c| c.genus).collect(),
            cut_faces: cc.iter().map(|c| c.faces.len()).collect(),
            interior_edges: cc.iter().map(|c| c.interior_edges()).collect(),
            cut_attempts: cc.iter().map(|c| c.attempts).collect(),
            spheres: mine.iter().map(|s| (s.vertices, s.triangles.len(), s.euler_characteristic, s.is_sphere())).collect(),
            tets: cell_tets[n],
            tet_bound,
            census,
            cut_bounds_ok,
            tets_ok: cell_tets[n] as f64 <= tet_bound,
        });
    }
    let triangulation = tri.validate();
    let report = AssemblyReport {
        total_tets: tri.tets.len(),
        max_cell_tets: cell_tets.iter().copied().max().unwrap_or(0),
        tet_bound,
        cells: reports,
        annulus_splits,
        chord_crossings,
        shared_faces_checked,
        interior_face_triangles,
        triangulation,
    };
    Ok(Assembly { triangulation: tri, report, cuts })
}
