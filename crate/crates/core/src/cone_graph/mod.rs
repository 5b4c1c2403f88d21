//! Connecting graphs on the tube boundary: arcs in planes through a fixed point that join a
//! family of disjoint closed curves into a connected trivalent graph whose arcs are bridges.

pub mod arc;
pub mod tree;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use arc::{plane_section_arc, CylCurve, Host, SectionArc};

use crate::error::{Error, Result};
use crate::hyperbolic::{hdist, HVec};
use crate::tube::TubeCone;

/// Distance below which a plane hit is identified with a graph vertex.
const VERTEX_TOL: f64 = 1e-9;

/// Where a graph vertex sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VertexSite {
    /// On curve `curve` at polyline parameter `param`.
    Curve { curve: usize, param: f64 },
    /// Where three arcs meet away from the curves.
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub pos: HVec,
    pub site: VertexSite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphArc {
    pub arc: SectionArc,
    /// Vertex at the start and at the end of the arc.
    pub ends: [usize; 2],
}

/// Counters describing how the graph was built.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub case_one: usize,
    pub case_two: usize,
    pub step_one: usize,
    pub step_two: usize,
    pub pruned: usize,
    pub splits: usize,
    pub valence_four: usize,
    pub retries: usize,
    pub max_perturbation: f64,
    /// Arc counts after each pruning step; strictly decreasing within a curve insertion.
    pub measure: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeGraph {
    pub radius: f64,
    pub s: HVec,
    pub curves: Vec<CylCurve>,
    pub vertices: Vec<GraphVertex>,
    pub arcs: Vec<GraphArc>,
    pub stats: BuildStats,
}

/// Result of checking the four graph properties and the tree contraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub n: usize,
    pub arcs: usize,
    pub connected: bool,
    pub trivalent: bool,
    pub all_bridges: bool,
    pub contraction_is_tree: bool,
    pub arcs_disjoint: bool,
    /// Largest `|<X, n>|` over sampled arc points, for unit plane normals.
    pub plane_residual: f64,
    /// Largest deviation of sampled arc points from the tube radius.
    pub tube_residual: f64,
}

impl GraphReport {
    pub fn edge_bound_holds(&self) -> bool {
        self.n == 0 && self.arcs == 0 || self.arcs + 1 <= 2 * self.n
    }

    pub fn ok(&self) -> bool {
        self.connected
            && self.trivalent
            && self.all_bridges
            && self.contraction_is_tree
            && self.arcs_disjoint
            && self.edge_bound_holds()
            && self.plane_residual < 1e-8
            && self.tube_residual < 1e-8
    }
}

/// Graph elements of the combinatorial structure.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Edge {
    Arc(usize),
    Curve(usize),
}

struct Work {
    cone: TubeCone,
    s: HVec,
    sag: f64,
    curves: Vec<CylCurve>,
    active: Vec<bool>,
    verts: Vec<Option<GraphVertex>>,
    arcs: Vec<Option<WArc>>,
    rng: ChaCha8Rng,
    stats: BuildStats,
}

struct WArc {
    arc: SectionArc,
    ends: [usize; 2],
    samples: Vec<(f64, HVec)>,
}

/// A point of the current graph met by a plane.
#[derive(Debug, Clone, Copy)]
enum Target {
    Vertex(usize),
    Curve(usize, f64),
    Arc(usize, f64),
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    pos: HVec,
    target: Target,
}

impl Work {
    fn new(cone: TubeCone, s: HVec, curves: Vec<CylCurve>, sag: f64, seed: u64) -> Self {
        let n = curves.len();
        Work {
            cone,
            s,
            sag,
            curves,
            active: vec![false; n],
            verts: vec![],
            arcs: vec![],
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: BuildStats::default(),
        }
    }

    fn add_vertex(&mut self, pos: HVec, site: VertexSite) -> usize {
        self.verts.push(Some(GraphVertex { pos, site }));
        self.verts.len() - 1
    }

    fn add_arc(&mut self, arc: SectionArc, ends: [usize; 2]) -> usize {
        let samples = arc.samples(self.sag);
        self.arcs.push(Some(WArc { arc, ends, samples }));
        self.arcs.len() - 1
    }

    fn arc_count(&self) -> usize {
        self.arcs.iter().flatten().count()
    }

    /// Vertices on a curve sorted by parameter.
    fn curve_vertices(&self, c: usize) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = self
            .verts
            .iter()
            .enumerate()
            .filter_map(|(i, v)| match v {
                Some(GraphVertex { site: VertexSite::Curve { curve, param }, .. }) if *curve == c => Some((*param, i)),
                _ => None,
            })
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }

    /// Nodes are live vertices plus one phantom per active curve without vertices.
    /// Returns node count, vertex-to-node map, phantom node per curve, and the edge list.
    #[allow(clippy::type_complexity)]
    fn structure(&self) -> (usize, BTreeMap<usize, usize>, BTreeMap<usize, usize>, Vec<(usize, usize, Edge)>) {
        let mut node = BTreeMap::new();
        let mut n = 0;
        for (i, v) in self.verts.iter().enumerate() {
            if v.is_some() {
                node.insert(i, n);
                n += 1;
            }
        }
        let mut phantom = BTreeMap::new();
        let mut edges = Vec::new();
        for c in 0..self.curves.len() {
            if !self.active[c] {
                continue;
            }
            let vs = self.curve_vertices(c);
            if vs.is_empty() {
                phantom.insert(c, n);
                edges.push((n, n, Edge::Curve(c)));
                n += 1;
                continue;
            }
            for k in 0..vs.len() {
                let (a, b) = (vs[k].1, vs[(k + 1) % vs.len()].1);
                edges.push((node[&a], node[&b], Edge::Curve(c)));
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            if let Some(a) = a {
                edges.push((node[&a.ends[0]], node[&a.ends[1]], Edge::Arc(i)));
            }
        }
        (n, node, phantom, edges)
    }

    fn components(&self, skip: &[usize]) -> (Vec<usize>, usize, BTreeMap<usize, usize>, BTreeMap<usize, usize>) {
        let (n, node, phantom, edges) = self.structure();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (a, b, e) in &edges {
            if let Edge::Arc(i) = e {
                if skip.contains(i) {
                    continue;
                }
            }
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut label = BTreeMap::new();
        let comp: Vec<usize> = (0..n)
            .map(|x| {
                let r = find(&mut parent, x);
                let l = label.len();
                *label.entry(r).or_insert(l)
            })
            .collect();
        (comp, label.len(), node, phantom)
    }

    fn valence(&self, v: usize) -> usize {
        let mut k = 0;
        for a in self.arcs.iter().flatten() {
            k += a.ends.iter().filter(|e| **e == v).count();
        }
        if let Some(GraphVertex { site: VertexSite::Curve { .. }, .. }) = &self.verts[v] {
            k += 2;
        }
        k
    }

    fn is_bridge(&self, a: usize) -> bool {
        let (_, count, _, _) = self.components(&[a]);
        let (_, base, _, _) = self.components(&[]);
        count > base
    }

    /// Component label of a target, given the labels computed by `components`.
    fn target_component(
        &self,
        t: &Target,
        comp: &[usize],
        node: &BTreeMap<usize, usize>,
        phantom: &BTreeMap<usize, usize>,
    ) -> Option<usize> {
        match t {
            Target::Vertex(v) => node.get(v).map(|n| comp[*n]),
            Target::Curve(c, _) => {
                if let Some(p) = phantom.get(c) {
                    return Some(comp[*p]);
                }
                self.curve_vertices(*c).first().map(|(_, v)| comp[node[v]])
            }
            Target::Arc(a, _) => self.arcs[*a].as_ref().map(|a| comp[node[&a.ends[0]]]),
        }
    }

    /// All points where the plane meets active curves and live arcs.
    fn plane_hits(&self, n: &HVec, extra_curve: Option<usize>) -> Vec<Hit> {
        let mut out = Vec::new();
        for c in 0..self.curves.len() {
            if !self.active[c] && extra_curve != Some(c) {
                continue;
            }
            for (u, x) in self.curves[c].plane_hits(&self.cone, n) {
                out.push(Hit { pos: x, target: Target::Curve(c, u) });
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            let Some(a) = a else { continue };
            if (a.arc.normal - *n).max_abs() < 1e-12 || (a.arc.normal + *n).max_abs() < 1e-12 {
                continue;
            }
            for (f, x) in a.arc.plane_hits(n, &a.samples) {
                out.push(Hit { pos: x, target: Target::Arc(i, f) });
            }
        }
        for (v, gv) in self.verts.iter().enumerate() {
            if let Some(gv) = gv {
                if (gv.pos.dot(n) / gv.pos.0[0]).abs() < 1e-10 {
                    out.push(Hit { pos: gv.pos, target: Target::Vertex(v) });
                }
            }
        }
        // Identify hits with nearby vertices.
        for h in out.iter_mut() {
            for (v, gv) in self.verts.iter().enumerate() {
                if let Some(gv) = gv {
                    if hdist(&gv.pos, &h.pos) < VERTEX_TOL {
                        h.target = Target::Vertex(v);
                    }
                }
            }
        }
        out
    }

    /// Creates (or reuses) a vertex at a hit, splitting the host arc if needed.
    fn attach(&mut self, h: &Hit) -> usize {
        match h.target {
            Target::Vertex(v) => v,
            Target::Curve(c, u) => self.add_vertex(h.pos, VertexSite::Curve { curve: c, param: u }),
            Target::Arc(a, f) => self.split_arc(a, f, h.pos, VertexSite::Interior),
        }
    }

    fn split_arc(&mut self, a: usize, f: f64, pos: HVec, site: VertexSite) -> usize {
        let w = self.arcs[a].take().expect("live arc");
        let v = self.add_vertex(pos, site);
        self.add_arc(w.arc.sub(0.0, f), [w.ends[0], v]);
        self.add_arc(w.arc.sub(f, 1.0), [v, w.ends[1]]);
        self.stats.splits += 1;
        v
    }

    /// Joins the component containing `p` to another component by an arc in a plane through `s`.
    /// Walking from `p` towards `q`, the arc runs from the last point on `p`'s side to the first
    /// point on the other side. `side_p` classifies graph points and returns `None` for points
    /// to ignore.
    fn connect(&mut self, p: Hit, q: Hit, side_p: &dyn Fn(&Work, &Target) -> Option<bool>) -> Result<()> {
        let mut detail = String::new();
        for attempt in 0..=arc::MAX_RETRIES {
            // Retries move p along its curve, or move the guide point q when p is fixed.
            let (start, start_target, guide_q) = if attempt == 0 {
                (p.pos, p.target, q.pos)
            } else {
                let step = arc::random_step(&mut self.rng);
                self.stats.retries += 1;
                match p.target {
                    Target::Curve(c, u) => {
                        let u2 = arc::shift_on_curve(&self.cone, &self.curves[c], u, step);
                        (self.curves[c].point_at(&self.cone, u2), Target::Curve(c, u2), q.pos)
                    }
                    _ => {
                        let (_, t, phi) = crate::hyperbolic::cylinder_coords(&q.pos);
                        (p.pos, p.target, self.cone.point(t, phi + step / self.cone.radius.sinh()))
                    }
                }
            };
            let guide = match arc::arc_in_plane(&self.cone, &self.s, &start, &guide_q) {
                Ok(mut g) => {
                    g.perturbation = hdist(&start, &p.pos).max(hdist(&guide_q, &q.pos));
                    g
                }
                Err(e) => {
                    detail = e.to_string();
                    continue;
                }
            };
            let extra = match start_target {
                Target::Curve(c, _) if !self.active[c] => Some(c),
                _ => None,
            };
            let mut along: Vec<(f64, Hit, bool)> = Vec::new();
            let mut hits = self.plane_hits(&guide.normal, extra);
            if (q.pos.dot(&guide.normal) / q.pos.0[0]).abs() < 1e-10 {
                hits.push(q);
            }
            for h in hits {
                if hdist(&h.pos, &start) < 1e-7 {
                    continue;
                }
                let Some(f) = walk_fraction(&guide, &h.pos) else { continue };
                if let Some(side) = side_p(self, &h.target) {
                    along.push((f, h, side));
                }
            }
            along.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let Some(first_other) = along.iter().position(|x| !x.2) else {
                detail = "the walk towards the target meets nothing".into();
                continue;
            };
            let (f1, h1) = along[..first_other]
                .iter()
                .rev()
                .map(|x| (x.0, x.1))
                .next()
                .unwrap_or((0.0, Hit { pos: start, target: start_target }));
            let (f2, h2) = (along[first_other].0, along[first_other].1);
            // Endpoints must not land on vertices that are already trivalent.
            let full = |w: &Work, h: &Hit| matches!(h.target, Target::Vertex(v) if w.valence(v) >= 3);
            if full(self, &h1) || full(self, &h2) || f2 - f1 < 1e-9 {
                detail = "arc endpoint falls on a vertex".into();
                continue;
            }
            self.stats.max_perturbation = self.stats.max_perturbation.max(guide.perturbation);
            let a = self.attach(&h1);
            // Attaching may have split the arc that holds the second endpoint.
            let h2 = self.relocate(&h2);
            let b = self.attach(&h2);
            for h in [&h1, &h2] {
                if let Target::Curve(ci, _) = h.target {
                    self.active[ci] = true;
                }
            }
            self.add_arc(guide.sub(f1, f2), [a, b]);
            return Ok(());
        }
        Err(Error::Genericity { retries: arc::MAX_RETRIES, detail })
    }


    /// Re-resolves a hit against the current arcs after a split.
    fn relocate(&self, h: &Hit) -> Hit {
        match h.target {
            Target::Arc(a, _) if self.arcs[a].is_none() => {
                for (i, w) in self.arcs.iter().enumerate() {
                    let Some(w) = w else { continue };
                    if let Some(f) = w.arc.frac_of(w.arc.section.psi_of(&h.pos)) {
                        if f > 0.0 && f < 1.0 && hdist(&w.arc.point(f), &h.pos) < 1e-9 {
                            return Hit { pos: h.pos, target: Target::Arc(i, f) };
                        }
                    }
                }
                for (v, gv) in self.verts.iter().enumerate() {
                    if let Some(gv) = gv {
                        if hdist(&gv.pos, &h.pos) < VERTEX_TOL {
                            return Hit { pos: h.pos, target: Target::Vertex(v) };
                        }
                    }
                }
                *h
            }
            _ => *h,
        }
    }

    /// Nearest pair of sample points between curve `c` and the active graph.
    fn nearest_pair(&self, c: usize) -> Option<(Hit, Hit)> {
        let dev = |x: &HVec| {
            let (_, t, phi) = crate::hyperbolic::cylinder_coords(x);
            (t, phi)
        };
        let dist = |a: (f64, f64), b: (f64, f64)| {
            let dt = (a.0 - b.0) * self.cone.radius.cosh();
            let dp = arc::wrap(a.1 - b.1) * self.cone.radius.sinh();
            dt.hypot(dp)
        };
        let mut targets: Vec<(HVec, Target)> = Vec::new();
        for (ci, curve) in self.curves.iter().enumerate() {
            if !self.active[ci] {
                continue;
            }
            for k in 0..curve.segments() {
                let u = k as f64 + 0.5;
                targets.push((curve.point_at(&self.cone, u), Target::Curve(ci, u)));
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            let Some(a) = a else { continue };
            for w in a.samples.windows(2) {
                let f = 0.5 * (w[0].0 + w[1].0);
                targets.push((a.arc.point(f), Target::Arc(i, f)));
            }
        }
        targets.retain(|(x, _)| self.verts.iter().flatten().all(|v| hdist(&v.pos, x) > 1e-4));
        let tdev: Vec<(f64, f64)> = targets.iter().map(|t| dev(&t.0)).collect();
        let curve = &self.curves[c];
        let mut best: Option<(f64, usize, usize)> = None;
        for k in 0..curve.segments() {
            let p = dev(&curve.point_at(&self.cone, k as f64 + 0.5));
            for (j, td) in tdev.iter().enumerate() {
                let d = dist(p, *td);
                if best.map_or(true, |b| d < b.0) {
                    best = Some((d, k, j));
                }
            }
        }
        let (_, k, j) = best?;
        let u = k as f64 + 0.5;
        let p = Hit { pos: curve.point_at(&self.cone, u), target: Target::Curve(c, u) };
        Some((p, Hit { pos: targets[j].0, target: targets[j].1 }))
    }

    /// Points where curve `c` crosses live arcs, as `(arc, fraction, point, curve parameter)`.
    fn curve_arc_crossings(&self, c: usize) -> Vec<(usize, f64, HVec, f64)> {
        let mut out = Vec::new();
        for (i, a) in self.arcs.iter().enumerate() {
            let Some(a) = a else { continue };
            for (u, x) in self.curves[c].plane_hits(&self.cone, &a.arc.normal) {
                if let Some(f) = a.arc.frac_of(a.arc.section.psi_of(&x)) {
                    if f > 0.0 && f < 1.0 && hdist(&a.arc.point(f), &x) < 1e-7 {
                        out.push((i, f, x, u));
                    }
                }
            }
        }
        out
    }

    fn remove_arc(&mut self, a: usize) {
        self.arcs[a] = None;
    }

    fn live_vertices(&self) -> Vec<usize> {
        (0..self.verts.len()).filter(|v| self.verts[*v].is_some()).collect()
    }

    fn arcs_at(&self, v: usize) -> Vec<usize> {
        (0..self.arcs.len())
            .filter(|a| self.arcs[*a].as_ref().map_or(false, |w| w.ends.contains(&v)))
            .collect()
    }

    fn is_interior(&self, v: usize) -> bool {
        matches!(self.verts[v], Some(GraphVertex { site: VertexSite::Interior, .. }))
    }

    /// Removes dangling and two-valent structure until every vertex has valence 3 or 4.
    /// Returns whether anything changed.
    fn step_two(&mut self) -> Result<bool> {
        let mut changed = false;
        loop {
            let mut acted = false;
            for v in self.live_vertices() {
                let arcs = self.arcs_at(v);
                if !self.is_interior(v) {
                    if arcs.is_empty() {
                        // A curve point without arcs is no longer a vertex.
                        self.verts[v] = None;
                        acted = true;
                    }
                    continue;
                }
                let val = self.valence(v);
                if val >= 3 {
                    continue;
                }
                let before = self.arc_count();
                if val <= 1 {
                    for a in arcs {
                        self.remove_arc(a);
                    }
                    self.verts[v] = None;
                    self.stats.pruned += 1;
                } else {
                    self.step_two_at(v)?;
                    self.stats.step_two += 1;
                }
                let after = self.arc_count();
                self.stats.measure.push(after);
                if after >= before {
                    return Err(Error::Genericity {
                        retries: 0,
                        detail: format!("pruning did not reduce the arc count ({before} -> {after})"),
                    });
                }
                acted = true;
                changed = true;
                break;
            }
            if !acted {
                return Ok(changed);
            }
        }
    }

    fn step_two_at(&mut self, v: usize) -> Result<()> {
        let arcs = self.arcs_at(v);
        let far = |w: &WArc| if w.ends[0] == v { w.ends[1] } else { w.ends[0] };
        let v1 = far(self.arcs[arcs[0]].as_ref().unwrap());
        let v2 = far(self.arcs[arcs[arcs.len() - 1]].as_ref().unwrap());
        for a in &arcs {
            self.remove_arc(*a);
        }
        self.verts[v] = None;
        let (comp, count, node, phantom) = self.components(&[]);
        if count <= 1 || comp[node[&v1]] == comp[node[&v2]] {
            return Ok(());
        }
        let c1 = comp[node[&v1]];
        let p = self.endpoint_near(v1);
        let q = self.endpoint_near(v2);
        let side = move |w: &Work, t: &Target| w.target_component(t, &comp, &node, &phantom).map(|c| c == c1);
        self.connect(p, q, &side)
    }

    /// The vertex itself if it can take another arc, otherwise a nearby point on an incident
    /// curve or arc.
    fn endpoint_near(&self, v: usize) -> Hit {
        let gv = self.verts[v].as_ref().unwrap();
        if self.valence(v) <= 2 {
            return Hit { pos: gv.pos, target: Target::Vertex(v) };
        }
        if let VertexSite::Curve { curve, param } = gv.site {
            let vs = self.curve_vertices(curve);
            let n = self.curves[curve].segments() as f64;
            let k = vs.iter().position(|x| x.1 == v).unwrap();
            let next = vs[(k + 1) % vs.len()].0;
            let gap = if vs.len() == 1 { n } else { (next - param).rem_euclid(n) };
            let u = param + (0.02 * gap).min(0.25);
            return Hit { pos: self.curves[curve].point_at(&self.cone, u), target: Target::Curve(curve, u) };
        }
        let a = self.arcs_at(v)[0];
        let w = self.arcs[a].as_ref().unwrap();
        let f = if w.ends[0] == v { 0.02 } else { 0.98 };
        Hit { pos: w.arc.point(f), target: Target::Arc(a, f) }
    }

    /// Adds curve `c` to the connected graph on the previously added curves.
    fn insert_curve(&mut self, c: usize) -> Result<()> {
        let crossings = self.curve_arc_crossings(c);
        if crossings.is_empty() {
            self.stats.case_one += 1;
            let (p, q) = self.nearest_pair(c).expect("graph is nonempty");
            let side = move |_: &Work, t: &Target| match t {
                Target::Curve(ci, _) if *ci == c => Some(true),
                _ => Some(false),
            };
            self.connect(p, q, &side)?;
            self.active[c] = true;
            return Ok(());
        }
        self.stats.case_two += 1;
        // Subdivide the arcs at the crossings, last fraction first so indices stay valid.
        let mut by_arc: BTreeMap<usize, Vec<(f64, HVec, f64)>> = BTreeMap::new();
        for (a, f, x, u) in crossings {
            by_arc.entry(a).or_default().push((f, x, u));
        }
        for (a, mut list) in by_arc {
            list.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
            let (mut cur, mut scale) = (a, 1.0);
            for (f, x, u) in list {
                let w = self.arcs[cur].take().unwrap();
                let v = self.add_vertex(x, VertexSite::Curve { curve: c, param: u });
                let g = f / scale;
                cur = self.add_arc(w.arc.sub(0.0, g), [w.ends[0], v]);
                self.add_arc(w.arc.sub(g, 1.0), [v, w.ends[1]]);
                self.stats.splits += 1;
                scale = f;
            }
        }
        self.active[c] = true;
        self.step_two()?;
        loop {
            let candidates: Vec<usize> = (0..self.arcs.len()).filter(|a| self.arcs[*a].is_some()).collect();
            let mut removable = Vec::new();
            for a in candidates {
                if !self.is_bridge(a) {
                    removable.push(a);
                }
            }
            if removable.is_empty() {
                break;
            }
            // Prefer arcs whose removal leaves no two-valent junction.
            let pick = removable
                .iter()
                .copied()
                .find(|a| {
                    let w = self.arcs[*a].as_ref().unwrap();
                    w.ends.iter().all(|v| !self.is_interior(*v) || self.valence(*v) > 3)
                })
                .unwrap_or(removable[0]);
            let before = self.arc_count();
            self.remove_arc(pick);
            self.stats.step_one += 1;
            self.stats.measure.push(self.arc_count());
            debug_assert!(self.arc_count() < before);
            self.step_two()?;
        }
        Ok(())
    }

    /// Splits every four-valent curve vertex by sliding one arc endpoint along the curve.
    fn resolve_valence_four(&mut self) -> Result<()> {
        loop {
            let Some(x) = self.live_vertices().into_iter().find(|v| !self.is_interior(*v) && self.arcs_at(*v).len() >= 2)
            else {
                return Ok(());
            };
            let h1 = self.arcs_at(x)[0];
            let w = self.arcs[h1].as_ref().unwrap();
            let (y, from_y) = if w.ends[1] == x { (w.ends[0], w.arc.clone()) } else { (w.ends[1], w.arc.reversed()) };
            let VertexSite::Curve { curve, param } = self.verts[x].unwrap_site() else { unreachable!() };
            let mut done = false;
            'outer: for dist in [1e-4, 3e-5, 1e-5, 3e-4, 1e-3] {
                for sign in [1.0, -1.0] {
                    let c = &self.curves[curve];
                    let k = (param.floor() as usize).min(c.segments() - 1);
                    let (a, b) = c.segment(k);
                    let (da, db) = (self.cone.develop(a.0, a.1), self.cone.develop(b.0, b.1));
                    let len = (db.0 - da.0).hypot(db.1 - da.1).max(1e-300);
                    let u = param + sign * dist / len;
                    let xp = c.point_at(&self.cone, u);
                    let ypos = self.verts[y].as_ref().unwrap().pos;
                    let Some(n) = arc::plane_through(&self.s, &ypos, &xp) else { continue };
                    if arc::contains_axis(&n) {
                        continue;
                    }
                    let Some(sec) = self.cone.section(&n) else { continue };
                    let (ps, pe) = (sec.psi_of(&ypos), sec.psi_of(&xp));
                    let d = (pe - ps).rem_euclid(2.0 * PI);
                    // The plane normal may flip, so match the old arc by its midpoint.
                    let mid = from_y.point(0.5);
                    let cand = [d, d - 2.0 * PI]
                        .into_iter()
                        .map(|sw| SectionArc::from_psi(n, sec, ps, sw))
                        .min_by(|a, b| hdist(&a.point(0.5), &mid).total_cmp(&hdist(&b.point(0.5), &mid)))
                        .unwrap();
                    if hdist(&cand.point(0.5), &mid) > 0.1 || !cand.is_bounded() {
                        continue;
                    }
                    // The new arc must meet the graph only at its endpoints.
                    let saved = self.arcs[h1].take();
                    let clean = self.plane_hits(&n, None).iter().all(|h| {
                        let Some(f) = cand.frac_of(sec.psi_of(&h.pos)) else { return true };
                        hdist(&h.pos, &ypos) < 1e-7 || hdist(&h.pos, &xp) < 1e-7 || f <= 0.0 || f >= 1.0
                    });
                    self.arcs[h1] = saved;
                    if !clean {
                        continue;
                    }
                    self.remove_arc(h1);
                    let nv = self.add_vertex(xp, VertexSite::Curve { curve, param: u });
                    self.add_arc(cand, [y, nv]);
                    self.stats.valence_four += 1;
                    done = true;
                    break 'outer;
                }
            }
            if !done {
                return Err(Error::Genericity {
                    retries: arc::MAX_RETRIES,
                    detail: "a four-valent vertex could not be split".into(),
                });
            }
        }
    }

    fn finish(self) -> ConeGraph {
        let mut map = BTreeMap::new();
        let mut vertices = Vec::new();
        for (i, v) in self.verts.iter().enumerate() {
            if let Some(v) = v {
                map.insert(i, vertices.len());
                vertices.push(v.clone());
            }
        }
        let arcs = self
            .arcs
            .iter()
            .flatten()
            .map(|w| GraphArc { arc: w.arc.clone(), ends: [map[&w.ends[0]], map[&w.ends[1]]] })
            .collect();
        ConeGraph { radius: self.cone.radius, s: self.s, curves: self.curves, vertices, arcs, stats: self.stats }
    }
}

/// Fraction of `x` along the walk, allowing round-off just past the far end.
fn walk_fraction(guide: &SectionArc, x: &HVec) -> Option<f64> {
    let psi = guide.section.psi_of(x);
    let rel = if guide.sweep >= 0.0 { (psi - guide.psi0).rem_euclid(2.0 * PI) } else { (guide.psi0 - psi).rem_euclid(2.0 * PI) };
    let f = rel / guide.sweep.abs();
    if f <= 1.0 + 1e-9 {
        Some(f.min(1.0))
    } else if 2.0 * PI - rel < 1e-12 {
        Some(0.0)
    } else {
        None
    }
}

trait SiteOf {
    fn unwrap_site(&self) -> VertexSite;
}

impl SiteOf for Option<GraphVertex> {
    fn unwrap_site(&self) -> VertexSite {
        self.as_ref().expect("live vertex").site
    }
}

/// Builds the connecting graph for the curves `curves` around the interior point `s`.
pub fn build_graph(cone: &TubeCone, s: &HVec, curves: Vec<CylCurve>, sag: f64, seed: u64) -> Result<ConeGraph> {
    let (r, _, _) = crate::hyperbolic::cylinder_coords(s);
    if !(r < cone.radius) || r < 1e-12 {
        return Err(Error::InvalidParameter("the center must lie inside the tube and off its axis".into()));
    }
    for c in &curves {
        if !c.closed || c.points.len() < 3 {
            return Err(Error::InvalidParameter("curves must be closed polylines".into()));
        }
    }
    let mut w = Work::new(*cone, *s, curves, sag, seed);
    if w.curves.is_empty() {
        return Ok(w.finish());
    }
    w.active[0] = true;
    for c in 1..w.curves.len() {
        w.insert_curve(c)?;
    }
    w.resolve_valence_four()?;
    Ok(w.finish())
}

impl ConeGraph {
    pub fn n(&self) -> usize {
        self.curves.len().saturating_sub(1)
    }

    /// Checks connectivity, trivalence, the bridge property, the edge bound, the tree
    /// contraction and the plane and tube residuals.
    pub fn check(&self) -> GraphReport {
        let cone = TubeCone::new(self.radius);
        let nv = self.vertices.len();
        let nc = self.curves.len();
        // Curve edges between consecutive vertices; phantom nodes for bare curves.
        let mut per_curve: Vec<Vec<(f64, usize)>> = vec![vec![]; nc];
        for (i, v) in self.vertices.iter().enumerate() {
            if let VertexSite::Curve { curve, param } = v.site {
                per_curve[curve].push((param, i));
            }
        }
        let mut n_nodes = nv;
        let mut edges: Vec<(usize, usize, Option<usize>)> = Vec::new();
        let mut curve_node = vec![0usize; nc];
        for (c, list) in per_curve.iter_mut().enumerate() {
            list.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            if list.is_empty() {
                curve_node[c] = n_nodes;
                edges.push((n_nodes, n_nodes, None));
                n_nodes += 1;
            } else {
                curve_node[c] = list[0].1;
                for k in 0..list.len() {
                    edges.push((list[k].1, list[(k + 1) % list.len()].1, None));
                }
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            edges.push((a.ends[0], a.ends[1], Some(i)));
        }
        let count_components = |skip: Option<usize>| -> usize {
            let mut parent: Vec<usize> = (0..n_nodes).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                p[x] = r;
                r
            }
            let mut count = n_nodes;
            for (a, b, tag) in &edges {
                if tag.is_some() && *tag == skip {
                    continue;
                }
                let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
                if ra != rb {
                    parent[ra] = rb;
                    count -= 1;
                }
            }
            count
        };
        let base = count_components(None);
        let connected = base == 1;
        let mut valence = vec![0usize; n_nodes];
        for (a, b, _) in &edges {
            valence[*a] += 1;
            valence[*b] += 1;
        }
        let trivalent = (0..nv).all(|v| valence[v] == 3);
        let all_bridges = (0..self.arcs.len()).all(|i| count_components(Some(i)) > base);
        // Contract each curve to a point.
        let mut contracted: Vec<usize> = (0..nv).collect();
        for (i, v) in self.vertices.iter().enumerate() {
            if let VertexSite::Curve { curve, .. } = v.site {
                contracted[i] = nv + curve;
            }
        }
        let mut tree_nodes: std::collections::BTreeSet<usize> = (0..nc).map(|c| nv + c).collect();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.site == VertexSite::Interior {
                tree_nodes.insert(i);
            }
        }
        let ids: BTreeMap<usize, usize> = tree_nodes.iter().enumerate().map(|(k, n)| (*n, k)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        let mut acyclic = true;
        for a in &self.arcs {
            let (x, y) = (ids[&contracted[a.ends[0]]], ids[&contracted[a.ends[1]]]);
            let mut rx = x;
            while parent[rx] != rx {
                rx = parent[rx];
            }
            let mut ry = y;
            while parent[ry] != ry {
                ry = parent[ry];
            }
            if rx == ry {
                acyclic = false;
            } else {
                parent[rx] = ry;
            }
        }
        let contraction_is_tree = acyclic && self.arcs.len() + 1 == ids.len();
        let (mut plane_residual, mut tube_residual) = (0.0f64, 0.0f64);
        let mut samples = Vec::new();
        for a in &self.arcs {
            let pts: Vec<HVec> = (0..=32).map(|k| a.arc.point(k as f64 / 32.0)).collect();
            for x in &pts {
                plane_residual = plane_residual.max((x.dot(&a.arc.normal) / x.0[0]).abs());
                let (r, _, _) = crate::hyperbolic::cylinder_coords(x);
                tube_residual = tube_residual.max((r - self.radius).abs());
            }
            samples.push(a.arc.samples(1e-4));
        }
        let _ = cone;
        let arcs_disjoint = self.arcs_meet_only_at_vertices(&samples);
        GraphReport {
            n: self.n(),
            arcs: self.arcs.len(),
            connected,
            trivalent,
            all_bridges,
            contraction_is_tree,
            arcs_disjoint,
            plane_residual,
            tube_residual,
        }
    }

    /// Arcs cross neither each other nor the curves away from graph vertices.
    fn arcs_meet_only_at_vertices(&self, samples: &[Vec<(f64, HVec)>]) -> bool {
        let cone = TubeCone::new(self.radius);
        let near_vertex = |x: &HVec| self.vertices.iter().any(|v| hdist(&v.pos, x) < 1e-7);
        for (i, a) in self.arcs.iter().enumerate() {
            for (j, b) in self.arcs.iter().enumerate() {
                if i == j {
                    continue;
                }
                for (f, x) in a.arc.plane_hits(&b.arc.normal, &samples[i]) {
                    let _ = f;
                    if let Some(g) = b.arc.frac_of(b.arc.section.psi_of(&x)) {
                        if g > 0.0 && g < 1.0 && !near_vertex(&x) && hdist(&b.arc.point(g), &x) < 1e-7 {
                            return false;
                        }
                    }
                }
            }
            for c in &self.curves {
                for (_, x) in c.plane_hits(&cone, &a.arc.normal) {
                    if let Some(g) = a.arc.frac_of(a.arc.section.psi_of(&x)) {
                        if g > 0.0 && g < 1.0 && !near_vertex(&x) && hdist(&a.arc.point(g), &x) < 1e-7 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// A seeded system of `n + 1` disjoint simple closed curves on the tube of radius `radius`,
/// mixing curves around the tube with nested and side-by-side disk boundaries, and an
/// interior point off the axis.
pub fn random_curve_system(radius: f64, n: usize, seed: u64) -> (Vec<CylCurve>, HVec) {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aspect = radius.cosh() / radius.sinh();
    let samples = 48;
    let slot = 0.5;
    let mut curves = Vec::new();
    let mut j = 0usize;
    while curves.len() < n + 1 {
        let t0 = slot * j as f64;
        j += 1;
        let left = n + 1 - curves.len();
        match rng.gen_range(0..3) {
            0 => {
                let (amp, k, c) = (rng.gen_range(0.0..0.12), rng.gen_range(1..4) as f64, rng.gen_range(0.0..2.0 * PI));
                let pts = (0..samples)
                    .map(|i| {
                        let phi = 2.0 * PI * i as f64 / samples as f64;
                        (t0 + amp * (k * phi + c).sin(), phi)
                    })
                    .collect();
                curves.push(CylCurve::new(pts, true));
            }
            1 => {
                // Nested disks about one center.
                let phi0 = rng.gen_range(0.0..2.0 * PI);
                let depth = rng.gen_range(1..=3).min(left);
                let mut rho = rng.gen_range(0.15..0.2);
                let (mut ct, mut cp) = (t0, phi0);
                for _ in 0..depth {
                    curves.push(ellipse(ct, cp, rho, aspect, samples));
                    let next = rho * rng.gen_range(0.4..0.7);
                    let room = 0.8 * (rho - next);
                    let ang = rng.gen_range(0.0..2.0 * PI);
                    ct += room * rng.gen_range(0.0..1.0) * ang.cos();
                    cp += room * rng.gen_range(0.0..1.0) * ang.sin() * aspect;
                    rho = next;
                }
            }
            _ => {
                // Disks side by side around the tube.
                let count = rng.gen_range(1..=3).min(left);
                let phi0 = rng.gen_range(0.0..2.0 * PI);
                let rho = (0.8 * PI / (count as f64 * aspect)).min(0.18);
                for i in 0..count {
                    let phi = phi0 + 2.0 * PI * i as f64 / count as f64;
                    curves.push(ellipse(t0 + rng.gen_range(-0.03..0.03), phi, rho * rng.gen_range(0.6..1.0), aspect, samples));
                }
            }
        }
    }
    curves.truncate(n + 1);
    curves.shuffle(&mut rng);
    let tmid = 0.5 * slot * (j - 1) as f64;
    let s = crate::hyperbolic::cylinder_point(radius * rng.gen_range(0.3..0.7), tmid, rng.gen_range(0.0..2.0 * PI));
    (curves, s)
}

fn ellipse(t0: f64, phi0: f64, rho: f64, aspect: f64, samples: usize) -> CylCurve {
    let pts = (0..samples)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / samples as f64;
            (t0 + rho * a.cos(), phi0 + rho * aspect * a.sin())
        })
        .collect();
    CylCurve::new(pts, true)
}

/// Whether no two curves cross, tested on the development with the angle wrapped.
pub fn curves_disjoint(cone: &TubeCone, curves: &[CylCurve]) -> bool {
    let period = cone.period();
    let dev = |c: &CylCurve| -> Vec<((f64, f64), (f64, f64))> {
        (0..c.segments())
            .map(|k| {
                let (a, b) = c.segment(k);
                (cone.develop(a.0, a.1), cone.develop(b.0, b.1))
            })
            .collect()
    };
    let segs: Vec<_> = curves.iter().map(dev).collect();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            for a in &segs[i] {
                for b in &segs[j] {
                    for shift in [-period, 0.0, period] {
                        let c = ((b.0 .0, b.0 .1 + shift), (b.1 .0, b.1 .1 + shift));
                        if arc::segments_cross(a.0, a.1, c.0, c.1, 0.0) {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}
