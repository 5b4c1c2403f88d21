//! A cell intersected with `X`: components, boundary cycles on the tube, and counts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::registry::{CellKeys, FaceXClass, LKey, PointKey, Registry};
use crate::error::{Error, Result};

/// A component of `face ∩ X` of one cell face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PieceRef {
    /// Index into the cell's face list.
    pub face: usize,
    pub piece: usize,
}

/// A boundary curve of the cell's trace on the tube, oriented with the trace on its left
/// when seen from inside the tube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    /// Points in the cell frame; the cycle closes implicitly.
    pub points: Vec<LKey>,
    /// Face arcs traversed, as `(cell face, arc index, traversed in sweep order)`.
    pub arcs: Vec<(usize, usize, bool)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub pieces: Vec<PieceRef>,
    pub cycles: Vec<Cycle>,
    /// Cell faces meeting this component.
    pub faces: usize,
    pub segments: usize,
    pub vertices: usize,
    /// Euler characteristic of the part of the boundary lying on cell faces.
    pub euler_face_part: i64,
    pub genus: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClippedCell {
    pub index: usize,
    pub tube_radius: f64,
    pub components: Vec<Component>,
    pub faces_meeting_x: usize,
    pub segments: usize,
    /// Largest number of segments contributed by a single edge.
    pub max_edge_segments: usize,
    pub vertices_in_x: usize,
    pub disk_faces: usize,
    pub annulus_faces: usize,
    /// Whether the cell meets the closure of the thin side.
    pub meets_thin: bool,
    /// Connectivity of the thin side of the cell, from its facet adjacency graph.
    pub thin_connected: bool,
}

impl ClippedCell {
    pub fn max_genus(&self) -> i64 {
        self.components.iter().map(|c| c.genus).max().unwrap_or(0)
    }
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
}

fn is_skeleton(k: &LKey) -> bool {
    matches!(k.key, PointKey::Vertex(_) | PointKey::Crossing(..))
}

/// Boundary of a piece in the cell frame, oriented outward from the cell.
pub fn piece_boundary_cell(reg: &Registry, keys: &CellKeys, p: PieceRef) -> Vec<LKey> {
    let cf = &keys.faces[p.face];
    let mut b: Vec<LKey> = reg.piece_boundary(&cf.key, p.piece).into_iter().map(|k| k.shifted(cf.shift)).collect();
    if !cf.side_a {
        b.reverse();
    }
    b
}

/// Points of a face arc in the cell frame, in the direction the trace on the tube runs.
pub fn arc_chain_cell(reg: &Registry, keys: &CellKeys, face: usize, arc: usize) -> (Vec<LKey>, bool) {
    let cf = &keys.faces[face];
    let closed = reg.faces[&cf.key].arcs[arc].closed;
    let forward = cf.side_a == closed;
    let chain = reg.arc_chain(&cf.key, arc, forward).into_iter().map(|k| k.shifted(cf.shift)).collect();
    (chain, forward)
}

/// Computes the components of `cell ∩ X` and their counts.
pub fn clip_to_x(reg: &Registry, keys: &CellKeys) -> Result<ClippedCell> {
    let cell = keys.index;
    let mut refs = Vec::new();
    let mut faces_meeting_x = 0;
    let (mut disk_faces, mut annulus_faces) = (0, 0);
    for (fi, cf) in keys.faces.iter().enumerate() {
        let fg = &reg.faces[&cf.key];
        match fg.class {
            FaceXClass::Empty => {}
            FaceXClass::Whole => faces_meeting_x += 1,
            FaceXClass::Annulus => {
                faces_meeting_x += 1;
                annulus_faces += 1;
            }
            FaceXClass::Disks(_) => {
                faces_meeting_x += 1;
                disk_faces += 1;
            }
        }
        for pi in 0..fg.pieces.len() {
            refs.push(PieceRef { face: fi, piece: pi });
        }
    }
    let bounds: Vec<Vec<LKey>> = refs.iter().map(|p| piece_boundary_cell(reg, keys, *p)).collect();
    let mut dsu = Dsu::new(refs.len());
    let mut owner: BTreeMap<LKey, usize> = BTreeMap::new();
    for (n, b) in bounds.iter().enumerate() {
        for k in b.iter().filter(|k| is_skeleton(k)) {
            match owner.get(k) {
                Some(&m) => dsu.union(n, m),
                None => {
                    owner.insert(*k, n);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for n in 0..refs.len() {
        groups.entry(dsu.find(n)).or_default().push(n);
    }

    // Edge segments, counted per edge from the crossing parameters.
    let mut cell_edges: BTreeMap<(super::registry::EdgeKey, i32), bool> = BTreeMap::new();
    for cf in &keys.faces {
        let fg = &reg.faces[&cf.key];
        for (ek, es, _) in &fg.edges {
            let e = &reg.edges[ek];
            let in0 = match e.ends[0].key {
                PointKey::Vertex(v) => reg.vertices[&v].in_x,
                _ => true,
            };
            cell_edges.insert((*ek, es + cf.shift), in0);
        }
    }
    let mut segments = 0;
    let mut max_edge_segments = 0;
    for ((ek, _), in0) in &cell_edges {
        let s = reg.edges[ek].segments(*in0);
        segments += s;
        max_edge_segments = max_edge_segments.max(s);
    }
    let vertices_in_x = keys.vertices.iter().filter(|(v, _)| reg.vertices[v].in_x).count();

    let mut components = Vec::new();
    let mut seg_total = 0;
    for members in groups.values() {
        let pieces: Vec<PieceRef> = members.iter().map(|&n| refs[n]).collect();
        let mut verts: BTreeSet<LKey> = BTreeSet::new();
        let mut steps: BTreeSet<(LKey, LKey)> = BTreeSet::new();
        let mut arcs = 0i64;
        let mut closed_arcs = 0i64;
        let mut chi_pieces = 0i64;
        let mut face_set = BTreeSet::new();
        for &n in members {
            let p = refs[n];
            face_set.insert(p.face);
            let fg = &reg.faces[&keys.faces[p.face].key];
            let piece = &fg.pieces[p.piece];
            let skel: Vec<LKey> = bounds[n].iter().copied().filter(is_skeleton).collect();
            verts.extend(skel.iter().copied());
            match piece.arc {
                Some(a) if fg.arcs[a].closed => closed_arcs += 1,
                Some(_) => {
                    arcs += 1;
                    chi_pieces += 1;
                }
                None => chi_pieces += 1,
            }
            let m = skel.len();
            let open_arc = matches!(piece.arc, Some(a) if !fg.arcs[a].closed);
            for k in 0..m {
                let (a, b) = (skel[k], skel[(k + 1) % m]);
                // In a piece closed by an arc, the step from the exit back to the entry is the arc.
                if open_arc && k + 1 == m {
                    continue;
                }
                steps.insert(if a < b { (a, b) } else { (b, a) });
            }
        }
        let v = verts.len() as i64 + closed_arcs;
        let e = steps.len() as i64 + arcs + closed_arcs;
        let chi = v - e + chi_pieces;
        let cycles = component_cycles(reg, keys, &pieces)?;
        // A closed surface meets no tube: a sphere. Otherwise the face part is the
        // boundary surface with the trace removed, a planar trace with one more curve than the genus.
        let genus = if cycles.is_empty() { (2 - chi) / 2 } else { 1 - chi };
        let consistent = if cycles.is_empty() { chi == 2 } else { cycles.len() as i64 == genus + 1 };
        if !consistent {
            return Err(Error::Degenerate(format!(
                "cell {cell}: face part has Euler characteristic {chi} with {} trace curves",
                cycles.len()
            )));
        }
        let comp_vertices = verts.iter().filter(|k| matches!(k.key, PointKey::Vertex(_))).count();
        seg_total += steps.len();
        components.push(Component {
            pieces,
            cycles,
            faces: face_set.len(),
            segments: steps.len(),
            vertices: comp_vertices,
            euler_face_part: chi,
            genus,
        });
    }
    if seg_total != segments {
        return Err(Error::Degenerate(format!(
            "cell {cell}: segment count from pieces ({seg_total}) disagrees with edge crossings ({segments})"
        )));
    }
    let (meets_thin, thin_connected) = thin_side_connectivity(reg, keys, &components);
    Ok(ClippedCell {
        index: cell,
        tube_radius: reg.cone.map_or(0.0, |c| c.radius),
        components,
        faces_meeting_x,
        segments,
        max_edge_segments,
        vertices_in_x,
        disk_faces,
        annulus_faces,
        meets_thin,
        thin_connected,
    })
}

fn component_cycles(reg: &Registry, keys: &CellKeys, pieces: &[PieceRef]) -> Result<Vec<Cycle>> {
    let mut cycles = Vec::new();
    let mut open: BTreeMap<LKey, (Vec<LKey>, (usize, usize, bool))> = BTreeMap::new();
    for p in pieces {
        let fg = &reg.faces[&keys.faces[p.face].key];
        let Some(a) = fg.pieces[p.piece].arc else { continue };
        let (chain, fwd) = arc_chain_cell(reg, keys, p.face, a);
        if fg.arcs[a].closed {
            cycles.push(Cycle { points: chain, arcs: vec![(p.face, a, fwd)] });
        } else {
            open.insert(chain[0], (chain, (p.face, a, fwd)));
        }
    }
    while let Some((&start, _)) = open.iter().next() {
        let mut points = Vec::new();
        let mut arcs = Vec::new();
        let mut at = start;
        loop {
            let (chain, arc) = open.remove(&at).ok_or_else(|| {
                Error::Degenerate(format!("cell {}: trace on the tube does not close", keys.index))
            })?;
            points.extend_from_slice(&chain[..chain.len() - 1]);
            arcs.push(arc);
            at = *chain.last().unwrap();
            if at == start {
                break;
            }
        }
        cycles.push(Cycle { points, arcs });
    }
    Ok(cycles)
}

/// Builds the adjacency graph of the thin-side facets (face parts inside the tube and the
/// trace cycles on the tube) and reports whether it is connected.
fn thin_side_connectivity(reg: &Registry, keys: &CellKeys, components: &[Component]) -> (bool, bool) {
    let mut nodes: Vec<usize> = Vec::new();
    for (fi, cf) in keys.faces.iter().enumerate() {
        if reg.faces[&cf.key].class != FaceXClass::Whole {
            nodes.push(fi);
        }
    }
    if nodes.is_empty() {
        return (false, true);
    }
    let index: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(n, f)| (*f, n)).collect();
    let n_faces = nodes.len();
    let mut links: Vec<(usize, usize)> = Vec::new();
    let mut owner: BTreeMap<LKey, usize> = BTreeMap::new();
    for (&fi, &n) in &index {
        let cf = &keys.faces[fi];
        let fg = &reg.faces[&cf.key];
        let mut pts: Vec<LKey> = Vec::new();
        for k in 0..fg.cycle.len() {
            let v = fg.cycle[k];
            if let PointKey::Vertex(vk) = v.key {
                if !reg.vertices[&vk].in_x {
                    pts.push(v.shifted(cf.shift));
                }
            }
            for (_, c) in reg.face_edge_crossings(fg, k) {
                pts.push(c.shifted(cf.shift));
            }
        }
        for p in pts {
            match owner.get(&p) {
                Some(&m) => links.push((n, m)),
                None => {
                    owner.insert(p, n);
                }
            }
        }
    }
    // Each component's trace on the tube is one node, touching the faces its arcs lie on.
    let mut traces = 0;
    for c in components {
        if c.cycles.is_empty() {
            continue;
        }
        for cy in &c.cycles {
            for (fi, _, _) in &cy.arcs {
                links.push((index[fi], n_faces + traces));
            }
        }
        traces += 1;
    }
    let extra = traces;
    let mut dsu = Dsu::new(n_faces + extra);
    for (a, b) in links {
        dsu.union(a, b);
    }
    let root = dsu.find(0);
    let connected = (0..n_faces + extra).all(|k| dsu.find(k) == root);
    (true, connected)
}
