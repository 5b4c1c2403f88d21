//! Canonical keys and geometry of cell vertices, edges and faces, shared by all cells.
//!
//! A vertex, edge or face of a Voronoi cell is determined by the set of orbit
//! points equidistant from it. Shifting every element of such a set by the
//! same power of the holonomy gives the same object in the quotient, so each
//! set is stored once, normalized so that its lexicographically least shift
//! is used. Objects seen from a cell carry the shift back to the cell frame.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cell::Cell;
use super::{Generator, PlaneId};
use crate::error::{Error, Result};
use crate::hyperbolic::{hdist, HVec, Lorentz};
use crate::quotient::TubeQuotient;
use crate::tube::{cross3, dot3, Section, TubeCone};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexKey(pub [Generator; 4]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey(pub [Generator; 3]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceKey(pub [Generator; 2]);

/// Normal form of a generator set under the holonomy: returns `(c, s)` with
/// `gens = c` shifted by `s`.
pub fn canonicalize<const K: usize>(gens: [Generator; K]) -> ([Generator; K], i32) {
    let mut best: Option<([Generator; K], i32)> = None;
    for e in gens.iter() {
        let s = e.n;
        let mut c = gens.map(|g| g.shifted(-s));
        c.sort();
        if best.map_or(true, |(b, _)| c < b) {
            best = Some((c, s));
        }
    }
    best.expect("nonempty generator set")
}

/// Identity of a point used by the boundary subdivision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointKey {
    Vertex(VertexKey),
    /// Crossing of a cell edge with the tube boundary.
    Crossing(EdgeKey, u8),
    /// Additional point on a cell edge.
    EdgeExtra(EdgeKey, u32),
    /// Interior point of a traced arc on a face.
    Arc(FaceKey, u16, u32),
    /// Additional point on a face or on one of its arcs.
    FaceExtra(FaceKey, u32),
    /// Point owned by a single component of a single cell: `(cell, component, id)`.
    Private(u32, u32, u32),
}

/// A point key placed in some frame by a holonomy shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LKey {
    pub key: PointKey,
    pub shift: i32,
}

impl LKey {
    pub fn new(key: PointKey, shift: i32) -> Self {
        LKey { key, shift }
    }

    pub fn shifted(self, s: i32) -> Self {
        LKey { key: self.key, shift: self.shift + s }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexGeom {
    pub pos: HVec,
    /// `tanh^2 r - tanh^2 r_X`; nonnegative exactly in `X`.
    pub level: f64,
    pub in_x: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeGeom {
    /// Endpoints in the edge frame, sorted.
    pub ends: [LKey; 2],
    /// Projective parameters of tube crossings along `ends[0] -> ends[1]`.
    pub lambdas: Vec<f64>,
    pub crossings: Vec<HVec>,
    /// Extra points `(lambda, id, position)`, sorted by parameter.
    pub extras: Vec<(f64, u32, HVec)>,
}

impl EdgeGeom {
    /// Number of components of the edge inside `X`.
    pub fn segments(&self, in0: bool) -> usize {
        let mut n = 0;
        let mut inside = in0;
        if inside {
            n += 1;
        }
        for _ in &self.lambdas {
            inside = !inside;
            if inside {
                n += 1;
            }
        }
        n
    }
}

/// How a face meets `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceXClass {
    Empty,
    Whole,
    Annulus,
    Disks(usize),
}

/// Boundary crossing on a face: edge index in the face cycle and the lifted key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceCrossing {
    pub edge: usize,
    pub key: LKey,
}

/// A component of `face ∩ X`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacePiece {
    /// Entry into `X` along the boundary; `None` for whole and annulus pieces.
    pub enter: Option<FaceCrossing>,
    pub exit: Option<FaceCrossing>,
    /// Cycle indices of the face vertices on this piece, in order.
    pub vertices: Vec<usize>,
    /// Arc closing the piece (from `exit` back to `enter`), or the inner circle of an annulus.
    pub arc: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArcGeom {
    pub section: Section,
    pub from: LKey,
    pub to: LKey,
    pub psi0: f64,
    pub sweep: f64,
    pub closed: bool,
    /// Interior polyline points in the face frame; keyed `Arc(face, index, k + 1)`.
    pub points: Vec<HVec>,
    /// Extra points `(psi, id, position)`, sorted along the sweep.
    pub extras: Vec<(f64, u32, HVec)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceGeom {
    /// Bisector normal `G_b - G_a`; the side of generator `a` is `<X, normal> <= 0`.
    pub normal: HVec,
    /// Vertex keys in the face frame, counterclockwise seen from the side of `a`'s exterior.
    pub cycle: Vec<LKey>,
    /// Edge from `cycle[k]` to `cycle[k+1]`: key, shift relative to the face, reversed flag.
    pub edges: Vec<(EdgeKey, i32, bool)>,
    pub class: FaceXClass,
    pub pieces: Vec<FacePiece>,
    pub arcs: Vec<ArcGeom>,
    /// Extra points inside the face `(id, position)`.
    pub extras: Vec<(u32, HVec)>,
}

/// Who cut a chord into a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChordOwner {
    /// A cutting disk of the cell on side `a` (`true`) or side `b` of the face.
    Side(bool),
    /// A segment splitting an annulus piece into disks.
    Split,
}

/// A straight segment drawn on a face, with crossings by other chords inserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceChord {
    pub owner: ChordOwner,
    /// Endpoints in the face frame.
    pub ends: [LKey; 2],
    /// All points from `ends[0]` to `ends[1]`.
    pub points: Vec<LKey>,
}

/// A face of a particular cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFace {
    pub key: FaceKey,
    /// Face frame to cell frame.
    pub shift: i32,
    /// Whether the cell is the first generator of the key (canonical orientation).
    pub side_a: bool,
    pub neighbor: Generator,
    /// Polytope face index.
    pub face: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKeys {
    pub index: usize,
    pub vertices: Vec<(VertexKey, i32)>,
    pub faces: Vec<CellFace>,
}

/// Global store of canonical geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Registry {
    pub m: TubeQuotient,
    pub cone: Option<TubeCone>,
    pub sag: f64,
    pub lifts: Vec<HVec>,
    pub vertices: BTreeMap<VertexKey, VertexGeom>,
    pub edges: BTreeMap<EdgeKey, EdgeGeom>,
    pub faces: BTreeMap<FaceKey, FaceGeom>,
    pub private: BTreeMap<(u32, u32, u32), HVec>,
    pub chords: BTreeMap<FaceKey, Vec<FaceChord>>,
}

const TANGENCY_TOL: f64 = 1e-12;

impl Registry {
    pub fn new(m: TubeQuotient, lifts: Vec<HVec>, tube_radius: f64, sag: f64) -> Self {
        let cone = if tube_radius > 0.0 { Some(TubeCone::new(tube_radius)) } else { None };
        Registry {
            m,
            cone,
            sag,
            lifts,
            vertices: BTreeMap::new(),
            edges: BTreeMap::new(),
            faces: BTreeMap::new(),
            private: BTreeMap::new(),
            chords: BTreeMap::new(),
        }
    }

    pub fn gen_pos(&self, g: Generator) -> HVec {
        self.m.translate(&self.lifts[g.j as usize], g.n as i64)
    }

    pub fn shift(&self, x: &HVec, s: i32) -> HVec {
        self.m.translate(x, s as i64)
    }

    /// Canonical position of a point key.
    pub fn pos(&self, k: &PointKey) -> HVec {
        match k {
            PointKey::Vertex(v) => self.vertices[v].pos,
            PointKey::Crossing(e, i) => self.edges[e].crossings[*i as usize],
            PointKey::EdgeExtra(e, id) => {
                self.edges[e].extras.iter().find(|x| x.1 == *id).expect("registered edge extra").2
            }
            PointKey::Arc(f, a, k) => {
                let arc = &self.faces[f].arcs[*a as usize];
                if arc.closed {
                    if *k == 0 {
                        arc.section.point(arc.psi0)
                    } else {
                        arc.points[*k as usize - 1]
                    }
                } else {
                    arc.points[*k as usize - 1]
                }
            }
            PointKey::FaceExtra(f, id) => {
                let fg = &self.faces[f];
                if let Some(x) = fg.extras.iter().find(|x| x.0 == *id) {
                    return x.1;
                }
                for arc in &fg.arcs {
                    if let Some(x) = arc.extras.iter().find(|x| x.1 == *id) {
                        return x.2;
                    }
                }
                panic!("unregistered face extra")
            }
            PointKey::Private(c, j, id) => self.private[&(*c, *j, *id)],
        }
    }

    /// Position of a lifted key.
    pub fn lpos(&self, k: &LKey) -> HVec {
        self.shift(&self.pos(&k.key), k.shift)
    }

    fn vertex_position(&self, gens: &[Generator; 4]) -> Result<HVec> {
        let g0 = self.gen_pos(gens[0]);
        let b = Lorentz::boost_to(&g0);
        let bi = b.inverse();
        let loc: Vec<HVec> = gens[1..].iter().map(|g| bi.apply(&self.gen_pos(*g)) - HVec::ORIGIN).collect();
        let v = HVec::cross3(&loc[0], &loc[1], &loc[2]);
        if !(v.norm_sq() < 0.0) {
            return Err(Error::Degenerate("equidistant point of four generators is not finite".into()));
        }
        Ok(b.apply(&v.to_point()))
    }

    /// Records the vertices, edges and faces of a bounded cell and returns their keys.
    pub fn register_cell(&mut self, cell: &Cell) -> Result<CellKeys> {
        let i = cell.index;
        let me = Generator::new(i, 0);
        let poly = &cell.polytope;
        let gen_of = |p: usize| -> Result<Generator> {
            match poly.planes[p].id {
                PlaneId::Gen(g) => Ok(g),
                PlaneId::Bound(_) => Err(Error::Degenerate(format!("cell {i} has a bounding-box face"))),
            }
        };
        let mut vkeys = Vec::with_capacity(poly.vertices.len());
        for (vi, v) in poly.vertices.iter().enumerate() {
            let gens = [me, gen_of(v.planes[0])?, gen_of(v.planes[1])?, gen_of(v.planes[2])?];
            let (c, s) = canonicalize(gens);
            let key = VertexKey(c);
            if !self.vertices.contains_key(&key) {
                let pos = self.vertex_position(&c)?;
                let (level, in_x) = match &self.cone {
                    Some(cone) => {
                        let l = cone.level(&pos);
                        if l.abs() < TANGENCY_TOL {
                            return Err(Error::Tangency { cell: i, detail: "cell vertex on the tube boundary".into() });
                        }
                        (l, l > 0.0)
                    }
                    None => (1.0, true),
                };
                self.vertices.insert(key, VertexGeom { pos, level, in_x });
            }
            let reg = self.shift(&self.vertices[&key].pos, s);
            if hdist(&reg, &cell.vertex_global(vi)) > 1e-7 {
                return Err(Error::Degenerate(format!("cell {i} vertex disagrees with its canonical position")));
            }
            vkeys.push((key, s));
        }
        let mut faces = Vec::with_capacity(poly.faces.len());
        for (fi, f) in poly.faces.iter().enumerate() {
            let g = gen_of(f.plane)?;
            let m = f.verts.len();
            let mut edge_keys = Vec::with_capacity(m);
            for k in 0..m {
                let (a, b) = (f.verts[k], f.verts[(k + 1) % m]);
                let pa = &poly.vertices[a].planes;
                let other: Vec<usize> =
                    pa.iter().copied().filter(|p| *p != f.plane && poly.vertices[b].planes.contains(p)).collect();
                if other.len() != 1 {
                    return Err(Error::Degenerate(format!("cell {i}: face edge without a unique second plane")));
                }
                let (c, s) = canonicalize([me, g, gen_of(other[0])?]);
                let ek = EdgeKey(c);
                if !self.edges.contains_key(&ek) {
                    let la = LKey::new(PointKey::Vertex(vkeys[a].0), vkeys[a].1 - s);
                    let lb = LKey::new(PointKey::Vertex(vkeys[b].0), vkeys[b].1 - s);
                    let ends = if la <= lb { [la, lb] } else { [lb, la] };
                    let geom = self.edge_geometry(ends, i)?;
                    self.edges.insert(ek, geom);
                }
                edge_keys.push((ek, s));
            }
            let (c, s) = canonicalize([me, g]);
            let fk = FaceKey(c);
            let side_a = c[0] == Generator { j: i as u32, n: -s };
            // Cycle and edges in the face frame, canonical orientation.
            let mut cyc: Vec<LKey> =
                f.verts.iter().map(|&v| LKey::new(PointKey::Vertex(vkeys[v].0), vkeys[v].1 - s)).collect();
            let mut eds: Vec<(EdgeKey, i32)> = edge_keys.iter().map(|(e, es)| (*e, es - s)).collect();
            if !side_a {
                cyc.reverse();
                // Edge k joined cyc[k] and cyc[k+1]; after reversal edge order shifts by one.
                eds.reverse();
                eds.rotate_left(1);
            }
            let start = (0..cyc.len()).min_by_key(|&k| cyc[k]).unwrap();
            cyc.rotate_left(start);
            eds.rotate_left(start);
            let edges: Vec<(EdgeKey, i32, bool)> = eds
                .iter()
                .enumerate()
                .map(|(k, (e, es))| {
                    let from = cyc[k];
                    let rev = self.edges[e].ends[0].shifted(*es) != from;
                    (*e, *es, rev)
                })
                .collect();
            match self.faces.get(&fk) {
                Some(existing) => {
                    if existing.cycle != cyc || existing.edges != edges {
                        return Err(Error::SharedFaceMismatch { a: i, b: g.j as usize });
                    }
                }
                None => {
                    let normal = self.gen_pos(c[1]) - self.gen_pos(c[0]);
                    self.faces.insert(
                        fk,
                        FaceGeom {
                            normal,
                            cycle: cyc,
                            edges,
                            class: FaceXClass::Whole,
                            pieces: vec![],
                            arcs: vec![],
                            extras: vec![],
                        },
                    );
                }
            }
            faces.push(CellFace { key: fk, shift: s, side_a, neighbor: g, face: fi });
        }
        Ok(CellKeys { index: i, vertices: vkeys, faces })
    }

    fn edge_geometry(&self, ends: [LKey; 2], cell: usize) -> Result<EdgeGeom> {
        let (mut lambdas, mut crossings) = (vec![], vec![]);
        if let Some(cone) = &self.cone {
            let a = self.lpos(&ends[0]);
            let b = self.lpos(&ends[1]);
            let ls = cone.crossings(&a, &b);
            let ia = cone.level(&a) > 0.0;
            let ib = cone.level(&b) > 0.0;
            if (ls.len() % 2 == 1) != (ia != ib) {
                return Err(Error::Tangency { cell, detail: "edge crossing parity disagrees with endpoints".into() });
            }
            if ls.len() == 2 && (ls[1] - ls[0]) < 1e-9 {
                return Err(Error::Tangency { cell, detail: "edge tangent to the tube".into() });
            }
            for l in ls {
                crossings.push((a * (1.0 - l) + b * l).to_point());
                lambdas.push(l);
            }
        }
        Ok(EdgeGeom { ends, lambdas, crossings, extras: vec![] })
    }

    fn vertex_in_x(&self, k: &LKey) -> bool {
        match k.key {
            PointKey::Vertex(v) => self.vertices[&v].in_x,
            _ => true,
        }
    }

    /// Crossings met when walking edge `k` of a face, in walking order.
    pub fn face_edge_crossings(&self, f: &FaceGeom, k: usize) -> Vec<(f64, LKey)> {
        let (ek, es, rev) = f.edges[k];
        let e = &self.edges[&ek];
        let mut out: Vec<(f64, LKey)> = e
            .lambdas
            .iter()
            .enumerate()
            .map(|(c, l)| (if rev { 1.0 - l } else { *l }, LKey::new(PointKey::Crossing(ek, c as u8), es)))
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }

    /// Extra points met when walking edge `k` of a face, in walking order.
    pub fn face_edge_extras(&self, f: &FaceGeom, k: usize) -> Vec<(f64, LKey)> {
        let (ek, es, rev) = f.edges[k];
        let e = &self.edges[&ek];
        let mut out: Vec<(f64, LKey)> = e
            .extras
            .iter()
            .map(|(l, id, _)| (if rev { 1.0 - l } else { *l }, LKey::new(PointKey::EdgeExtra(ek, *id), es)))
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }

    /// Computes `face ∩ X` for every registered face.
    pub fn finalize_faces(&mut self) -> Result<()> {
        let keys: Vec<FaceKey> = self.faces.keys().copied().collect();
        for fk in keys {
            let (class, pieces, arcs) = self.face_pieces(&fk)?;
            let f = self.faces.get_mut(&fk).unwrap();
            f.class = class;
            f.pieces = pieces;
            f.arcs = arcs;
        }
        Ok(())
    }

    fn face_pieces(&self, fk: &FaceKey) -> Result<(FaceXClass, Vec<FacePiece>, Vec<ArcGeom>)> {
        let f = &self.faces[fk];
        let m = f.cycle.len();
        let cone = match &self.cone {
            Some(c) => *c,
            None => {
                return Ok((
                    FaceXClass::Whole,
                    vec![FacePiece { enter: None, exit: None, vertices: (0..m).collect(), arc: None }],
                    vec![],
                ))
            }
        };
        let cell = fk.0[0].j as usize;
        // Events along the boundary: (edge, key, entering X?).
        let mut events: Vec<(usize, LKey, bool)> = Vec::new();
        for k in 0..m {
            let mut inside = self.vertex_in_x(&f.cycle[k]);
            for (_, key) in self.face_edge_crossings(f, k) {
                inside = !inside;
                events.push((k, key, inside));
            }
            if inside != self.vertex_in_x(&f.cycle[(k + 1) % m]) {
                return Err(Error::Tangency { cell, detail: "face boundary status inconsistent".into() });
            }
        }
        let positions: Vec<HVec> = f.cycle.iter().map(|k| self.lpos(k)).collect();
        if events.is_empty() {
            if !self.vertex_in_x(&f.cycle[0]) {
                return Ok((FaceXClass::Empty, vec![], vec![]));
            }
            let whole = FacePiece { enter: None, exit: None, vertices: (0..m).collect(), arc: None };
            if let Some(sec) = cone.section(&f.normal) {
                let p = sec.point(0.0);
                if point_in_polygon(&positions, &f.normal, &p) {
                    if sec.unbounded() {
                        return Err(Error::Tangency { cell, detail: "face meets an ideal end of the tube".into() });
                    }
                    let pl = sec.polyline(0.0, 2.0 * std::f64::consts::PI, self.sag);
                    let first = LKey::new(PointKey::Arc(*fk, 0, 0), 0);
                    let points: Vec<HVec> = pl[1..pl.len() - 1].iter().map(|x| x.1).collect();
                    let arc = ArcGeom {
                        section: sec,
                        from: first,
                        to: first,
                        psi0: 0.0,
                        sweep: 2.0 * std::f64::consts::PI,
                        closed: true,
                        points,
                        extras: vec![],
                    };
                    return Ok((FaceXClass::Annulus, vec![FacePiece { arc: Some(0), ..whole }], vec![arc]));
                }
            }
            return Ok((FaceXClass::Whole, vec![whole], vec![]));
        }
        let sec = cone
            .section(&f.normal)
            .ok_or_else(|| Error::Tangency { cell, detail: "face crosses the tube without a section".into() })?;
        let psis: Vec<f64> = events.iter().map(|(_, k, _)| sec.psi_of(&self.lpos(k))).collect();
        let ne = events.len();
        let mut pieces = Vec::new();
        let mut arcs = Vec::new();
        for e in 0..ne {
            if !events[e].2 {
                continue;
            }
            let x = (e + 1) % ne;
            if events[x].2 {
                return Err(Error::Tangency { cell, detail: "consecutive entries into X".into() });
            }
            let (ke, kx) = (events[e].0, events[x].0);
            let mut verts = Vec::new();
            if !(ke == kx && x > e) {
                let mut k = ke;
                loop {
                    k = (k + 1) % m;
                    verts.push(k);
                    if k == kx {
                        break;
                    }
                }
            }
            // Arc from the exit back to the entry, avoiding other crossings and staying in the face.
            let (p_out, p_in) = (psis[x], psis[e]);
            let fwd = (p_in - p_out).rem_euclid(2.0 * std::f64::consts::PI);
            let mut chosen = None;
            for sweep in [fwd, fwd - 2.0 * std::f64::consts::PI] {
                let clear = psis.iter().enumerate().all(|(q, p)| {
                    if q == e || q == x {
                        return true;
                    }
                    let rel = if sweep > 0.0 {
                        (p - p_out).rem_euclid(2.0 * std::f64::consts::PI)
                    } else {
                        (p_out - p).rem_euclid(2.0 * std::f64::consts::PI)
                    };
                    rel > sweep.abs()
                });
                let mid = sec.point(p_out + 0.5 * sweep);
                if clear && point_in_polygon(&positions, &f.normal, &mid) {
                    if chosen.is_some() {
                        return Err(Error::Tangency { cell, detail: "ambiguous arc on face".into() });
                    }
                    chosen = Some(sweep);
                }
            }
            let sweep = chosen.ok_or_else(|| Error::Tangency { cell, detail: "no arc closes a face piece".into() })?;
            let pl = sec.polyline(p_out, sweep, self.sag);
            let points: Vec<HVec> = pl[1..pl.len() - 1].iter().map(|x| x.1).collect();
            arcs.push(ArcGeom {
                section: sec,
                from: events[x].1,
                to: events[e].1,
                psi0: p_out,
                sweep,
                closed: false,
                points,
                extras: vec![],
            });
            pieces.push(FacePiece {
                enter: Some(FaceCrossing { edge: ke, key: events[e].1 }),
                exit: Some(FaceCrossing { edge: kx, key: events[x].1 }),
                vertices: verts,
                arc: Some(arcs.len() - 1),
            });
        }
        let n = pieces.len();
        Ok((FaceXClass::Disks(n), pieces, arcs))
    }

    /// Boundary of a face piece in the face frame, counterclockwise in canonical orientation.
    /// Includes crossings, edge extras, arc points and arc extras.
    pub fn piece_boundary(&self, fk: &FaceKey, piece: usize) -> Vec<LKey> {
        let f = &self.faces[fk];
        let p = &f.pieces[piece];
        let m = f.cycle.len();
        let mut out = Vec::new();
        match (p.enter, p.exit) {
            (Some(en), Some(ex)) => {
                out.push(en.key);
                let le = self.crossing_param(f, en.edge, &en.key);
                let lx = self.crossing_param(f, ex.edge, &ex.key);
                if en.edge == ex.edge && p.vertices.is_empty() {
                    out.extend(self.extras_between(f, en.edge, le, lx));
                } else {
                    out.extend(self.extras_between(f, en.edge, le, 2.0));
                    for (c, &v) in p.vertices.iter().enumerate() {
                        out.push(f.cycle[v]);
                        let hi = if c + 1 == p.vertices.len() { lx } else { 2.0 };
                        out.extend(self.extras_between(f, v, -1.0, hi));
                    }
                }
                out.push(ex.key);
                out.extend(self.arc_points(fk, p.arc.unwrap(), false));
            }
            _ => {
                for k in 0..m {
                    out.push(f.cycle[k]);
                    out.extend(self.extras_between(f, k, -1.0, 2.0));
                }
            }
        }
        out
    }

    fn crossing_param(&self, f: &FaceGeom, edge: usize, key: &LKey) -> f64 {
        self.face_edge_crossings(f, edge).into_iter().find(|(_, k)| k == key).map(|x| x.0).unwrap()
    }

    fn extras_between(&self, f: &FaceGeom, edge: usize, lo: f64, hi: f64) -> Vec<LKey> {
        self.face_edge_extras(f, edge).into_iter().filter(|(l, _)| *l > lo && *l < hi).map(|x| x.1).collect()
    }

    /// Interior points of an arc (polyline and extras) in sweep order, or reversed.
    pub fn arc_points(&self, fk: &FaceKey, a: usize, reversed: bool) -> Vec<LKey> {
        let arc = &self.faces[fk].arcs[a];
        let mut items: Vec<(f64, LKey)> = Vec::new();
        let n = arc.points.len();
        for k in 0..n {
            let psi = arc.section.psi_of(&arc.points[k]);
            items.push((self.sweep_param(arc, psi), LKey::new(PointKey::Arc(*fk, a as u16, k as u32 + 1), 0)));
        }
        for (psi, id, _) in &arc.extras {
            items.push((self.sweep_param(arc, *psi), LKey::new(PointKey::FaceExtra(*fk, *id), 0)));
        }
        items.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut out: Vec<LKey> = items.into_iter().map(|x| x.1).collect();
        if arc.closed {
            out.insert(0, arc.from);
        }
        if reversed {
            out.reverse();
            if arc.closed {
                out.rotate_right(1);
            }
        }
        out
    }

    /// All points of an arc in the face frame. Open arcs include both endpoints; closed
    /// arcs start at their base point and close implicitly.
    pub fn arc_chain(&self, fk: &FaceKey, a: usize, forward: bool) -> Vec<LKey> {
        let arc = &self.faces[fk].arcs[a];
        if arc.closed {
            return self.arc_points(fk, a, !forward);
        }
        let mut out = vec![arc.from];
        out.extend(self.arc_points(fk, a, false));
        out.push(arc.to);
        if !forward {
            out.reverse();
        }
        out
    }

    pub fn next_edge_extra_id(&self, ek: &EdgeKey) -> u32 {
        self.edges[ek].extras.iter().map(|x| x.1 + 1).max().unwrap_or(0)
    }

    /// Next free id among the extras of a face and of its arcs.
    pub fn next_face_extra_id(&self, fk: &FaceKey) -> u32 {
        let f = &self.faces[fk];
        let a = f.extras.iter().map(|x| x.0 + 1).max().unwrap_or(0);
        let b = f.arcs.iter().flat_map(|arc| arc.extras.iter().map(|x| x.1 + 1)).max().unwrap_or(0);
        a.max(b)
    }

    /// Adds a point on an edge at projective parameter `lambda` along `ends[0] -> ends[1]`.
    pub fn insert_edge_extra(&mut self, ek: &EdgeKey, lambda: f64, id: u32, pos: HVec) {
        let e = self.edges.get_mut(ek).expect("registered edge");
        let at = e.extras.partition_point(|x| x.0 < lambda);
        e.extras.insert(at, (lambda, id, pos));
    }

    pub fn insert_face_extra(&mut self, fk: &FaceKey, id: u32, pos: HVec) {
        self.faces.get_mut(fk).expect("registered face").extras.push((id, pos));
    }

    /// Adds a point on arc `a` of a face at section angle `psi`.
    pub fn insert_arc_extra(&mut self, fk: &FaceKey, a: usize, psi: f64, id: u32, pos: HVec) {
        let key = self.sweep_param(&self.faces[fk].arcs[a], psi);
        let arc = &self.faces[fk].arcs[a];
        let at = arc.extras.partition_point(|x| self.sweep_param(arc, x.0) < key);
        self.faces.get_mut(fk).unwrap().arcs[a].extras.insert(at, (psi, id, pos));
    }

    /// Fraction of the sweep at which angle `psi` lies.
    pub fn sweep_param(&self, arc: &ArcGeom, psi: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        let rel = if arc.sweep > 0.0 { (psi - arc.psi0).rem_euclid(tau) } else { (arc.psi0 - psi).rem_euclid(tau) };
        rel / arc.sweep.abs()
    }
}

/// Whether `p` (on the plane of the convex polygon) lies inside it.
pub fn point_in_polygon(poly: &[HVec], normal: &HVec, p: &HVec) -> bool {
    let n = [normal.0[1], normal.0[2], normal.0[3]];
    let pts: Vec<[f64; 3]> = poly.iter().map(|x| x.klein()).collect();
    let q = p.klein();
    let m = pts.len();
    let mut sign = 0.0;
    for k in 0..m {
        let a = pts[k];
        let b = pts[(k + 1) % m];
        let e = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [q[0] - a[0], q[1] - a[1], q[2] - a[2]];
        let s = dot3(&cross3(&e, &w), &n);
        if sign == 0.0 {
            sign = s.signum();
        } else if s * sign < 0.0 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_is_shift_invariant() {
        let g = [Generator::new(3, 2), Generator::new(1, -1), Generator::new(3, 0)];
        let (c, s) = canonicalize(g);
        let (c2, s2) = canonicalize(g.map(|x| x.shifted(5)));
        assert_eq!(c, c2);
        assert_eq!(s2, s + 5);
        let mut back = c.map(|x| x.shifted(s));
        back.sort();
        let mut orig = g;
        orig.sort();
        assert_eq!(back, orig);
    }
}
