//! Cutting disks of a cell component: preimages of the connecting graph's arcs under the
//! retraction toward an interior point of the tube.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone_graph::arc::{bisect, wrap, MAX_RETRIES};
use crate::cone_graph::{build_graph, ConeGraph, CylCurve, SectionArc, VertexSite};
use crate::error::{Error, Result};
use crate::hyperbolic::{cylinder_coords, HVec, Lorentz};
use crate::tube::{unwrap_phi, TubeCone};
use crate::voronoi::clip::{arc_chain_cell, Component};
use crate::voronoi::registry::{CellKeys, ChordOwner, EdgeKey, FaceChord, FaceKey, LKey, PointKey, Registry};

/// One cutting disk: the part of a plane through the center lying over an arc of the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutFace {
    /// Graph arc from `ends[0]` to `ends[1]`.
    pub arc: SectionArc,
    /// Unit normal of the plane, in the cell frame.
    pub normal: HVec,
    pub ends: [usize; 2],
    /// Interior polyline points of the arc, from `ends[0]` to `ends[1]`.
    pub alpha: Vec<LKey>,
    /// Points on the cell boundary from the far side of `ends[1]` to the far side of `ends[0]`.
    pub chain: Vec<LKey>,
    /// Consecutive chain points with the cell face carrying the segment between them.
    pub chords: Vec<(usize, LKey, LKey)>,
}

/// The cutting complex of one component of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutComplex {
    pub cell: usize,
    pub component: usize,
    pub genus: i64,
    pub s: Option<HVec>,
    pub graph: Option<ConeGraph>,
    /// Key of each graph vertex in the cell frame.
    pub vertex_keys: Vec<LKey>,
    /// Where the ray from the center through an interior graph vertex leaves the cell.
    pub exits: Vec<Option<LKey>>,
    pub faces: Vec<CutFace>,
    pub attempts: usize,
}

impl CutComplex {
    pub fn empty(cell: usize, component: usize, genus: i64) -> Self {
        CutComplex {
            cell,
            component,
            genus,
            s: None,
            graph: None,
            vertex_keys: vec![],
            exits: vec![],
            faces: vec![],
            attempts: 0,
        }
    }

    /// Edges of the complex in the interior of the cell: one radial segment per interior
    /// graph vertex.
    pub fn interior_edges(&self) -> usize {
        self.exits.iter().flatten().count()
    }

    /// Interior edges all have valence 3.
    pub fn interior_valences_ok(&self) -> bool {
        let mut deg = vec![0usize; self.vertex_keys.len()];
        for f in &self.faces {
            deg[f.ends[0]] += 1;
            deg[f.ends[1]] += 1;
        }
        self.exits.iter().enumerate().all(|(v, w)| w.is_none() || deg[v] == 3)
    }

    /// Cell-boundary points added on polytope edges by the chains.
    pub fn edge_points(&self) -> usize {
        self.faces
            .iter()
            .flat_map(|f| f.chain.iter())
            .filter(|k| matches!(k.key, PointKey::EdgeExtra(..)))
            .count()
    }
}

/// Boundary polyline of a component, one entry per cycle point: the point and the face arc
/// carrying the segment to the next point.
struct CyclePoint {
    key: LKey,
    pos: HVec,
    face: usize,
    arc: usize,
}

fn cycle_points(reg: &Registry, keys: &CellKeys, comp: &Component) -> Result<Vec<Vec<CyclePoint>>> {
    let mut out = Vec::new();
    for cy in &comp.cycles {
        let mut pts = Vec::new();
        for &(face, arc, _) in &cy.arcs {
            let (chain, _) = arc_chain_cell(reg, keys, face, arc);
            let closed = reg.faces[&keys.faces[face].key].arcs[arc].closed;
            let take = if closed { chain.len() } else { chain.len() - 1 };
            for k in &chain[..take] {
                pts.push(CyclePoint { key: *k, pos: reg.lpos(k), face, arc });
            }
        }
        if pts.iter().map(|p| p.key).ne(cy.points.iter().copied()) {
            return Err(Error::Degenerate(format!("cell {}: cycle points disagree with its arcs", keys.index)));
        }
        out.push(pts);
    }
    Ok(out)
}

/// Cell polytope in the cell frame, described by bisector normals and edges.
struct CellGeom {
    /// The cell is `<X, n> <= 0` for every face normal.
    normals: Vec<HVec>,
    /// `(edge key, shift to the cell frame, adjacent cell faces, endpoint positions)`.
    edges: Vec<(EdgeKey, i32, Vec<usize>, HVec, HVec)>,
}

impl CellGeom {
    fn new(reg: &Registry, keys: &CellKeys) -> Self {
        let center = reg.lifts[keys.index];
        let normals = keys.faces.iter().map(|cf| reg.gen_pos(cf.neighbor) - center).collect();
        let mut map: BTreeMap<(EdgeKey, i32), Vec<usize>> = BTreeMap::new();
        for (fi, cf) in keys.faces.iter().enumerate() {
            for (ek, es, _) in &reg.faces[&cf.key].edges {
                map.entry((*ek, es + cf.shift)).or_default().push(fi);
            }
        }
        let edges = map
            .into_iter()
            .map(|((ek, es), faces)| {
                let e = &reg.edges[&ek];
                (ek, es, faces, reg.lpos(&e.ends[0].shifted(es)), reg.lpos(&e.ends[1].shifted(es)))
            })
            .collect();
        CellGeom { normals, edges }
    }

    /// Largest normalized face value; nonpositive inside the cell.
    fn depth(&self, x: &HVec) -> f64 {
        self.normals.iter().map(|n| x.dot(n) / (x.0[0] * n.max_abs())).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Face through which the ray from `s` through `a` leaves the cell, and the exit point.
    fn exit(&self, s: &HVec, a: &HVec) -> Result<(usize, HVec)> {
        let mut hits: Vec<(f64, usize)> = Vec::new();
        for (fi, n) in self.normals.iter().enumerate() {
            let (ss, aa) = (s.dot(n), a.dot(n));
            if aa > ss {
                hits.push((ss / (ss - aa), fi));
            }
        }
        hits.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let Some(&(l, fi)) = hits.first() else {
            return Err(Error::Degenerate("ray from the center never leaves the cell".into()));
        };
        if l < 1.0 - 1e-9 {
            return Err(Error::Genericity { retries: 0, detail: "graph vertex outside the cell".into() });
        }
        if hits.len() > 1 && hits[1].0 - l < 1e-9 * l {
            return Err(Error::Genericity { retries: 0, detail: "exit ray meets a cell edge".into() });
        }
        Ok((fi, (*s * (1.0 - l) + *a * l).to_point()))
    }
}

/// Angle around the center inside a plane through it.
struct PlaneAngle {
    chart: Lorentz,
    e1: [f64; 3],
    e2: [f64; 3],
}

impl PlaneAngle {
    fn new(s: &HVec, normal: &HVec, start: &HVec) -> Self {
        let chart = Lorentz::boost_to(s).inverse();
        let n = chart.apply(normal).spatial();
        let nn = norm(&n);
        let n = [n[0] / nn, n[1] / nn, n[2] / nn];
        let u = chart.apply(start).klein();
        let d = dot(&u, &n);
        let e1 = unit([u[0] - d * n[0], u[1] - d * n[1], u[2] - d * n[2]]);
        let e2 = cross(&n, &e1);
        PlaneAngle { chart, e1, e2 }
    }

    fn angle(&self, x: &HVec) -> f64 {
        let u = self.chart.apply(x).klein();
        dot(&u, &self.e2).atan2(dot(&u, &self.e1))
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = norm(&a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Registrations collected during an attempt, applied only when it succeeds.
#[derive(Default)]
struct Pending {
    edge: Vec<(EdgeKey, f64, u32, HVec)>,
    face: Vec<(FaceKey, u32, HVec)>,
    arc: Vec<(FaceKey, usize, f64, u32, HVec)>,
    private: Vec<((u32, u32, u32), HVec)>,
    chords: Vec<(FaceKey, FaceChord)>,
    next_edge: BTreeMap<EdgeKey, u32>,
    next_face: BTreeMap<FaceKey, u32>,
    next_private: u32,
}

impl Pending {
    fn edge_id(&mut self, reg: &Registry, ek: &EdgeKey) -> u32 {
        let e = self.next_edge.entry(*ek).or_insert_with(|| reg.next_edge_extra_id(ek));
        *e += 1;
        *e - 1
    }

    fn face_id(&mut self, reg: &Registry, fk: &FaceKey) -> u32 {
        let e = self.next_face.entry(*fk).or_insert_with(|| reg.next_face_extra_id(fk));
        *e += 1;
        *e - 1
    }

    fn private(&mut self, cell: usize, comp: usize, pos: HVec) -> LKey {
        let k = (cell as u32, comp as u32, self.next_private);
        self.next_private += 1;
        self.private.push((k, pos));
        LKey::new(PointKey::Private(k.0, k.1, k.2), 0)
    }

    fn commit(self, reg: &mut Registry) {
        for (ek, l, id, pos) in self.edge {
            reg.insert_edge_extra(&ek, l, id, pos);
        }
        for (fk, id, pos) in self.face {
            reg.insert_face_extra(&fk, id, pos);
        }
        for (fk, a, psi, id, pos) in self.arc {
            reg.insert_arc_extra(&fk, a, psi, id, pos);
        }
        for (k, pos) in self.private {
            reg.private.insert(k, pos);
        }
        for (fk, c) in self.chords {
            reg.chords.entry(fk).or_default().push(c);
        }
    }
}

fn generic(detail: &str) -> Error {
    Error::Genericity { retries: 0, detail: detail.into() }
}

/// Builds the cutting complex of component `comp` of a cell and registers its new boundary
/// points and face chords. Genus-zero components get an empty complex.
pub fn build_cut_complex(
    reg: &mut Registry,
    keys: &CellKeys,
    comp: &Component,
    comp_index: usize,
    seed: u64,
) -> Result<CutComplex> {
    if comp.genus == 0 {
        return Ok(CutComplex::empty(keys.index, comp_index, 0));
    }
    let cone = reg.cone.ok_or_else(|| Error::Degenerate("cutting requires a tube".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (keys.index as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
    let mut last = String::new();
    for attempt in 0..=MAX_RETRIES {
        match try_cut(reg, keys, comp, comp_index, &cone, attempt, &mut rng) {
            Ok((mut cut, pending)) => {
                cut.attempts = attempt + 1;
                pending.commit(reg);
                return Ok(cut);
            }
            Err(e @ (Error::Genericity { .. } | Error::Degenerate(_))) => last = e.to_string(),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Genericity { retries: MAX_RETRIES, detail: format!("cell {}: {last}", keys.index) })
}

fn try_cut(
    reg: &Registry,
    keys: &CellKeys,
    comp: &Component,
    comp_index: usize,
    cone: &TubeCone,
    attempt: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(CutComplex, Pending)> {
    let cell = keys.index;
    let geom = CellGeom::new(reg, keys);
    let cycles = cycle_points(reg, keys, comp)?;

    // Center: weighted hyperboloid mean of the boundary curves, inside the tube and the cell.
    let mut sum = HVec::new(0.0, 0.0, 0.0, 0.0);
    for p in cycles.iter().flatten() {
        let w = if attempt == 0 { 1.0 } else { rng.gen_range(0.5..1.5) };
        sum = sum + p.pos * w;
    }
    let s = sum.to_point();
    if cone.level(&s) > -1e-9 || geom.depth(&s) > -1e-9 || cylinder_coords(&s).0 < 1e-6 {
        return Err(generic("center candidate is not interior"));
    }

    let curves: Vec<CylCurve> = cycles
        .iter()
        .map(|c| {
            let mut last = 0.0;
            let pts = c
                .iter()
                .map(|p| {
                    let (t, phi) = unwrap_phi(&p.pos, last);
                    last = phi;
                    (t, phi)
                })
                .collect();
            CylCurve::new(pts, true)
        })
        .collect();
    let graph = build_graph(cone, &s, curves, reg.sag, rng.gen())?;
    let report = graph.check();
    if !report.ok() {
        return Err(generic("connecting graph fails its checks"));
    }
    let samples: Vec<Vec<(f64, HVec)>> = graph.arcs.iter().map(|a| a.arc.samples(reg.sag)).collect();
    // Arc ends sit on boundary polylines, which stray from the true faces by up to the sag.
    let slack = 4.0 * reg.sag + 1e-10;
    for smp in &samples {
        if smp.iter().any(|(_, x)| geom.depth(x) > slack) {
            return Err(generic("graph arc leaves the cell"));
        }
    }

    let mut pending = Pending::default();
    let nv = graph.vertices.len();
    let mut vkeys = Vec::with_capacity(nv);
    let mut exits = vec![None; nv];
    // Cell faces carrying the far end of each graph vertex's radial segment.
    let mut wfaces: Vec<Vec<usize>> = vec![vec![]; nv];
    let arc_at = |v: usize| -> Result<usize> {
        let hits: Vec<usize> = (0..graph.arcs.len()).filter(|&a| graph.arcs[a].ends.contains(&v)).collect();
        if hits.len() != 1 {
            return Err(Error::Degenerate("curve vertex without a unique arc".into()));
        }
        Ok(hits[0])
    };
    for (v, gv) in graph.vertices.iter().enumerate() {
        match gv.site {
            VertexSite::Curve { curve, param } => {
                let normal = graph.arcs[arc_at(v)?].arc.normal;
                let pts = &cycles[curve];
                let n = pts.len();
                let k0 = param.floor() as usize % n;
                let mut found = None;
                for k in [k0, (k0 + n - 1) % n, (k0 + 1) % n] {
                    let (p, q) = (&pts[k], &pts[(k + 1) % n]);
                    let cf = &keys.faces[p.face];
                    let fk = cf.key;
                    let sec = reg.faces[&fk].arcs[p.arc].section;
                    let nf = reg.shift(&normal, -cf.shift);
                    let pa = sec.psi_of(&reg.shift(&p.pos, -cf.shift));
                    let pb = pa + wrap(sec.psi_of(&reg.shift(&q.pos, -cf.shift)) - pa);
                    let g = |psi: f64| sec.point(psi).dot(&nf);
                    let (ga, gb) = (g(pa), g(pb));
                    if (ga < 0.0) == (gb < 0.0) || ga == 0.0 || gb == 0.0 {
                        continue;
                    }
                    let psi = bisect(g, pa, pb, ga);
                    let rel = (psi - pa) / (pb - pa);
                    if !(1e-9..=1.0 - 1e-9).contains(&rel) {
                        return Err(generic("graph vertex on a corner of the boundary curve"));
                    }
                    found = Some((p.face, p.arc, psi, fk, cf.shift, sec.point(psi)));
                    break;
                }
                let (face, arc, psi, fk, shift, pos_f) =
                    found.ok_or_else(|| generic("graph vertex does not polish onto its face arc"))?;
                let id = pending.face_id(reg, &fk);
                pending.arc.push((fk, arc, psi, id, pos_f));
                vkeys.push(LKey::new(PointKey::FaceExtra(fk, id), shift));
                wfaces[v] = vec![face];
            }
            VertexSite::Interior => {
                vkeys.push(pending.private(cell, comp_index, gv.pos));
                let (fi, w) = geom.exit(&s, &gv.pos)?;
                if cone.level(&w) <= 0.0 {
                    return Err(generic("exit point inside the tube"));
                }
                let cf = &keys.faces[fi];
                let id = pending.face_id(reg, &cf.key);
                pending.face.push((cf.key, id, reg.shift(&w, -cf.shift)));
                exits[v] = Some(LKey::new(PointKey::FaceExtra(cf.key, id), cf.shift));
                wfaces[v] = vec![fi];
            }
        }
    }

    let mut faces = Vec::with_capacity(graph.arcs.len());
    for (ai, ga) in graph.arcs.iter().enumerate() {
        let arc = &ga.arc;
        let normal = arc.normal;
        let [v0, v1] = ga.ends;
        let smp = &samples[ai];
        let alpha: Vec<LKey> =
            smp[1..smp.len() - 1].iter().map(|(_, x)| pending.private(cell, comp_index, *x)).collect();
        let pa = PlaneAngle::new(&s, &normal, &graph.vertices[v0].pos);
        let mut total = 0.0;
        let mut prev = pa.angle(&smp[0].1);
        for (_, x) in &smp[1..] {
            let a = pa.angle(x);
            total += wrap(a - prev);
            prev = a;
        }
        let span = total.abs();
        let dir = total.signum();
        if span < 1e-9 || span > 2.0 * PI - 1e-9 {
            return Err(generic("graph arc subtends a degenerate angle"));
        }
        // Boundary points of the plane section of the cell lying over the arc.
        let mut crossings: Vec<(f64, LKey, Vec<usize>)> = Vec::new();
        for (ek, es, efaces, a, b) in &geom.edges {
            let (fa, fb) = (a.dot(&normal), b.dot(&normal));
            let scale = a.0[0].max(b.0[0]);
            if fa.abs() < 1e-12 * scale || fb.abs() < 1e-12 * scale {
                return Err(generic("cutting plane through a cell vertex"));
            }
            if (fa < 0.0) == (fb < 0.0) {
                continue;
            }
            let l = fa / (fa - fb);
            let x = (*a * (1.0 - l) + *b * l).to_point();
            let rel = (dir * pa.angle(&x)).rem_euclid(2.0 * PI);
            if rel < 1e-9 || (rel - span).abs() < 1e-9 || rel > 2.0 * PI - 1e-9 {
                return Err(generic("cutting plane boundary point over an arc endpoint"));
            }
            if rel > span {
                continue;
            }
            if cone.level(&x) <= 0.0 {
                return Err(generic("chain point inside the tube"));
            }
            let id = pending.edge_id(reg, ek);
            pending.edge.push((*ek, l, id, reg.shift(&x, -es)));
            crossings.push((rel, LKey::new(PointKey::EdgeExtra(*ek, id), *es), efaces.clone()));
        }
        crossings.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        let far = |v: usize| exits[v].unwrap_or(vkeys[v]);
        let mut chain = vec![far(v1)];
        let mut sites = vec![wfaces[v1].clone()];
        for (_, k, f) in &crossings {
            chain.push(*k);
            sites.push(f.clone());
        }
        chain.push(far(v0));
        sites.push(wfaces[v0].clone());
        let mut chords = Vec::new();
        for k in 0..chain.len() - 1 {
            let a: BTreeSet<usize> = sites[k].iter().copied().collect();
            let common: Vec<usize> = sites[k + 1].iter().copied().filter(|f| a.contains(f)).collect();
            if common.len() != 1 {
                return Err(generic("consecutive chain points do not share one face"));
            }
            let fi = common[0];
            let cf = &keys.faces[fi];
            chords.push((fi, chain[k], chain[k + 1]));
            pending.chords.push((
                cf.key,
                FaceChord {
                    owner: ChordOwner::Side(cf.side_a),
                    ends: [chain[k].shifted(-cf.shift), chain[k + 1].shifted(-cf.shift)],
                    points: vec![],
                },
            ));
        }
        faces.push(CutFace { arc: arc.clone(), normal, ends: ga.ends, alpha, chain, chords });
    }
    let cut = CutComplex {
        cell,
        component: comp_index,
        genus: comp.genus,
        s: Some(s),
        graph: Some(graph),
        vertex_keys: vkeys,
        exits,
        faces,
        attempts: 0,
    };
    Ok((cut, pending))
}
