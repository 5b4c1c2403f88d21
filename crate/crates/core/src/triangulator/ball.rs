//! The boundary sphere of a cell component cut open along its cutting disks: face regions,
//! the trace on the tube, and two copies of every cutting disk.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::cut::{cross, dot, unit, CutComplex};
use super::faces::{FaceChart, FaceSubdivision};
use crate::cone_graph::arc::wrap;
use crate::error::{Error, Result};
use crate::hyperbolic::{cylinder_coords, cylinder_point, HVec, Lorentz};
use crate::voronoi::clip::Component;
use crate::voronoi::registry::{CellKeys, ChordOwner, FaceKey, LKey, Registry};

/// What a triangle of the boundary sphere lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriOuter {
    /// Triangle `index` of a shared face, in that face's numbering, seen through a face
    /// frame shift from one of its two sides.
    Face { key: FaceKey, index: usize, shift: i32, side_a: bool },
    /// On the tube.
    Thin,
    /// Triangle `index` of a copy of cutting disk `cut`.
    Cut { cut: usize, index: usize, plus: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallTriangle {
    /// Cell frame keys, counterclockwise seen from outside the ball.
    pub keys: [LKey; 3],
    pub outer: TriOuter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Role {
    Face { face: usize },
    Trace,
    Cut { cut: usize, plus: bool },
}

struct Polygon {
    role: Role,
    keys: Vec<LKey>,
    triangles: Vec<[usize; 3]>,
    outer: Vec<TriOuter>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySphere {
    pub cell: usize,
    pub component: usize,
    pub triangles: Vec<BallTriangle>,
    /// Neighbor across edge `k` (from `keys[k]` to `keys[k+1]`) of each triangle.
    pub adjacent: Vec<[(u32, u8); 3]>,
    pub polygons: usize,
    pub vertices: usize,
    pub edges: usize,
    pub euler_characteristic: i64,
    pub connected: bool,
    /// Weighted center of the boundary points.
    pub center: HVec,
}

impl BoundarySphere {
    pub fn is_sphere(&self) -> bool {
        self.connected
            && self.euler_characteristic == 2
            && 3 * self.triangles.len() == 2 * self.edges
            && self.triangles.len() + 4 == 2 * self.vertices
    }

    /// Pairs of triangles on the two copies of a cutting disk that are identified.
    pub fn cut_pairs(&self) -> Vec<(u32, u32)> {
        let mut plus = BTreeMap::new();
        let mut minus = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let TriOuter::Cut { cut, index, plus: p } = tri.outer {
                if p { plus.insert((cut, index), t as u32) } else { minus.insert((cut, index), t as u32) };
            }
        }
        plus.iter().map(|(k, a)| (*a, minus[k])).collect()
    }
}

fn bad(keys: &CellKeys, comp: usize, detail: &str) -> Error {
    Error::InvalidTriangulation(format!("cell {} component {comp}: {detail}", keys.index))
}

/// Fan from the least key occurring once.
fn fan_unique(keys: &[LKey]) -> Option<Vec<[usize; 3]>> {
    let mut count: BTreeMap<LKey, usize> = BTreeMap::new();
    for k in keys {
        *count.entry(*k).or_default() += 1;
    }
    let m = keys.len();
    let a = (0..m).filter(|&k| count[&keys[k]] == 1).min_by_key(|&k| keys[k])?;
    Some((1..m - 1).map(|j| [a, (a + j) % m, (a + j + 1) % m]).collect())
}

fn reversed(keys: &[LKey], tris: &[[usize; 3]]) -> (Vec<LKey>, Vec<[usize; 3]>) {
    let m = keys.len();
    let k: Vec<LKey> = keys.iter().rev().copied().collect();
    let t = tris.iter().map(|t| [m - 1 - t[0], m - 1 - t[2], m - 1 - t[1]]).collect();
    (k, t)
}

/// Karcher mean on the hyperboloid.
pub fn karcher_mean(points: &[HVec], iterations: usize) -> HVec {
    let mut sum = HVec::new(0.0, 0.0, 0.0, 0.0);
    for p in points {
        sum = sum + *p;
    }
    let mut x = sum.to_point();
    for _ in 0..iterations {
        let mut v = HVec::new(0.0, 0.0, 0.0, 0.0);
        for p in points {
            let c = (-x.dot(p)).max(1.0);
            let d = c.acosh();
            let f = if d < 1e-12 { 1.0 } else { d / d.sinh() };
            v = v + (*p - x * c) * (f / points.len() as f64);
        }
        let n = v.dot(&v).max(0.0).sqrt();
        if n < 1e-15 {
            break;
        }
        x = (x * n.cosh() + v * (n.sinh() / n)).to_point();
    }
    x
}

struct SideRef {
    poly: usize,
    idx: usize,
    from: LKey,
    to: LKey,
}

/// Assembles the boundary sphere of component `comp_index` of a cell. `cut` is the
/// component's cutting complex and `subdivisions` the face triangulations.
pub fn boundary_sphere(
    reg: &Registry,
    keys: &CellKeys,
    comp: &Component,
    comp_index: usize,
    cut: &CutComplex,
    subdivisions: &BTreeMap<FaceKey, FaceSubdivision>,
) -> Result<BoundarySphere> {
    let err = |d: &str| bad(keys, comp_index, d);
    let mut polys: Vec<Polygon> = Vec::new();

    for p in &comp.pieces {
        let cf = &keys.faces[p.face];
        let sub = subdivisions.get(&cf.key).ok_or_else(|| err("face without a subdivision"))?;
        for sp in sub.polygons.iter().filter(|sp| sp.piece == p.piece) {
            let ks: Vec<LKey> = sp.keys.iter().map(|k| k.shifted(cf.shift)).collect();
            let outer: Vec<TriOuter> =
                (0..sp.triangles.len()).map(|t| TriOuter::Face { key: cf.key, index: sp.offset + t, shift: cf.shift, side_a: cf.side_a }).collect();
            let (ks, tris) = if cf.side_a { (ks, sp.triangles.clone()) } else { reversed(&ks, &sp.triangles) };
            polys.push(Polygon { role: Role::Face { face: p.face }, keys: ks, triangles: tris, outer });
        }
    }

    if comp.genus == 0 {
        for cy in &comp.cycles {
            let tris = fan_unique(&cy.points).ok_or_else(|| err("trace polygon without a fan apex"))?;
            let outer = vec![TriOuter::Thin; tris.len()];
            polys.push(Polygon { role: Role::Trace, keys: cy.points.clone(), triangles: tris, outer });
        }
    } else {
        let s = cut.s.ok_or_else(|| err("cutting complex without a center"))?;
        let chart = Lorentz::boost_to(&s).inverse();
        let trace = trace_polygon(reg, comp, cut).ok_or_else(|| err("trace cut open is not a single disk"))?;
        let tris = fan_unique(&trace).ok_or_else(|| err("trace polygon without a fan apex"))?;
        let outer = vec![TriOuter::Thin; tris.len()];
        polys.push(Polygon { role: Role::Trace, keys: trace, triangles: tris, outer });
        for (e, f) in cut.faces.iter().enumerate() {
            let k = cut_polygon(reg, keys, cut, e).ok_or_else(|| err("cutting disk chord not registered"))?;
            let u: Vec<[f64; 3]> = k.iter().map(|x| chart.apply(&reg.lpos(x)).klein()).collect();
            let mut nu = [0.0; 3];
            for i in 0..u.len() {
                let c = cross(&u[i], &u[(i + 1) % u.len()]);
                nu = [nu[0] + c[0], nu[1] + c[1], nu[2] + c[2]];
            }
            let nh = chart.apply(&f.normal).spatial();
            let tris = super::faces::fan_any(&k);
            let (rk, rt) = reversed(&k, &tris);
            let (pk, pt, mk, mt) = if dot(&nu, &nh) < 0.0 { (k, tris, rk, rt) } else { (rk, rt, k, tris) };
            let n = pt.len();
            polys.push(Polygon {
                role: Role::Cut { cut: e, plus: true },
                keys: pk,
                triangles: pt,
                outer: (0..n).map(|i| TriOuter::Cut { cut: e, index: i, plus: true }).collect(),
            });
            polys.push(Polygon {
                role: Role::Cut { cut: e, plus: false },
                keys: mk,
                triangles: mt,
                outer: (0..n).map(|i| TriOuter::Cut { cut: e, index: i, plus: false }).collect(),
            });
        }
    }

    // Sides grouped by their endpoints.
    let mut groups: BTreeMap<(LKey, LKey), Vec<SideRef>> = BTreeMap::new();
    for (pi, p) in polys.iter().enumerate() {
        let m = p.keys.len();
        for i in 0..m {
            let (a, b) = (p.keys[i], p.keys[(i + 1) % m]);
            let key = if a < b { (a, b) } else { (b, a) };
            groups.entry(key).or_default().push(SideRef { poly: pi, idx: i, from: a, to: b });
        }
    }
    let mut charts: BTreeMap<usize, FaceChart> = BTreeMap::new();
    let mut glue: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for (pair, sides) in &groups {
        match sides.len() {
            2 => glue.push(((sides[0].poly, sides[0].idx), (sides[1].poly, sides[1].idx))),
            4 => {
                let cuts: Vec<&SideRef> = sides.iter().filter(|s| matches!(polys[s.poly].role, Role::Cut { .. })).collect();
                let others: Vec<&SideRef> =
                    sides.iter().filter(|s| !matches!(polys[s.poly].role, Role::Cut { .. })).collect();
                if cuts.len() != 2 || others.len() != 2 {
                    return Err(err("side shared by four polygons is not on a cutting disk"));
                }
                let Role::Cut { cut: e, .. } = polys[cuts[0].poly].role else { unreachable!() };
                let normal = cut.faces[e].normal;
                let mut signs = Vec::new();
                for o in &others {
                    let x = left_offset(reg, keys, &polys[o.poly], o, &mut charts)
                        .ok_or_else(|| err("no side test for a polygon side"))?;
                    signs.push(x.dot(&normal));
                }
                if (signs[0] > 0.0) == (signs[1] > 0.0) {
                    return Err(err("both neighbors of a cutting disk lie on one side"));
                }
                let plus_of = |s: &SideRef| matches!(polys[s.poly].role, Role::Cut { plus: true, .. });
                let (kp, km) = if plus_of(cuts[0]) { (cuts[0], cuts[1]) } else { (cuts[1], cuts[0]) };
                let (yp, ym) = if signs[0] > 0.0 { (others[0], others[1]) } else { (others[1], others[0]) };
                glue.push(((kp.poly, kp.idx), (yp.poly, yp.idx)));
                glue.push(((km.poly, km.idx), (ym.poly, ym.idx)));
                for (x, y) in [(kp, yp), (km, ym)] {
                    if x.from != y.to {
                        return Err(err("cutting disk glued against its orientation"));
                    }
                }
            }
            6 => glue.extend(radial_gluing(reg, &polys, cut, *pair, sides).ok_or_else(|| err("radial edge not resolved"))?),
            n => return Err(err(&format!("side shared by {n} polygons"))),
        }
    }
    for ((pa, ia), (pb, ib)) in &glue {
        let a = &polys[*pa];
        let b = &polys[*pb];
        let (af, at) = (a.keys[*ia], a.keys[(ia + 1) % a.keys.len()]);
        let (bf, bt) = (b.keys[*ib], b.keys[(ib + 1) % b.keys.len()]);
        if af != bt || at != bf {
            return Err(err("glued sides do not run in opposite directions"));
        }
    }

    // Triangles and their adjacency.
    let mut triangles = Vec::new();
    let mut side_slot: BTreeMap<(usize, usize), (u32, u8)> = BTreeMap::new();
    let mut diag: BTreeMap<(usize, usize, usize), (u32, u8)> = BTreeMap::new();
    let mut adjacent: Vec<[(u32, u8); 3]> = Vec::new();
    let mut diagonals = 0usize;
    let mut sides = 0usize;
    for (pi, p) in polys.iter().enumerate() {
        let m = p.keys.len();
        sides += m;
        diagonals += p.triangles.len().saturating_sub(1);
        for (ti, t) in p.triangles.iter().enumerate() {
            let id = triangles.len() as u32;
            triangles.push(BallTriangle { keys: [p.keys[t[0]], p.keys[t[1]], p.keys[t[2]]], outer: p.outer[ti] });
            adjacent.push([(u32::MAX, 0); 3]);
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                if b == (a + 1) % m {
                    side_slot.insert((pi, a), (id, e as u8));
                } else {
                    diag.insert((pi, a, b), (id, e as u8));
                }
            }
        }
    }
    for (&(pi, a, b), &(t, e)) in &diag {
        let &(u, f) = diag.get(&(pi, b, a)).ok_or_else(|| err("fan diagonal without a partner"))?;
        adjacent[t as usize][e as usize] = (u, f);
    }
    for (x, y) in &glue {
        let (ta, ea) = side_slot[x];
        let (tb, eb) = side_slot[y];
        adjacent[ta as usize][ea as usize] = (tb, eb);
        adjacent[tb as usize][eb as usize] = (ta, ea);
    }
    if adjacent.iter().flatten().any(|x| x.0 == u32::MAX) {
        return Err(err("unmatched triangle edge"));
    }

    // Vertices: corners identified across glued sides.
    let mut offsets = Vec::with_capacity(polys.len());
    let mut total = 0;
    for p in &polys {
        offsets.push(total);
        total += p.keys.len();
    }
    let mut dsu: Vec<usize> = (0..total).collect();
    fn find(d: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while d[r] != r {
            r = d[r];
        }
        let mut y = x;
        while d[y] != r {
            let n = d[y];
            d[y] = r;
            y = n;
        }
        r
    }
    for ((pa, ia), (pb, ib)) in &glue {
        let (ma, mb) = (polys[*pa].keys.len(), polys[*pb].keys.len());
        for (x, y) in [(offsets[*pa] + ia, offsets[*pb] + (ib + 1) % mb), (offsets[*pa] + (ia + 1) % ma, offsets[*pb] + ib)] {
            let (rx, ry) = (find(&mut dsu, x), find(&mut dsu, y));
            dsu[rx.max(ry)] = rx.min(ry);
        }
    }
    let vertices = (0..total).filter(|&x| find(&mut dsu, x) == x).count();
    let edges = sides / 2 + diagonals;
    let euler_characteristic = vertices as i64 - edges as i64 + triangles.len() as i64;

    let mut comp_dsu: Vec<usize> = (0..triangles.len()).collect();
    for (t, adj) in adjacent.iter().enumerate() {
        for (u, _) in adj {
            let (rx, ry) = (find(&mut comp_dsu, t), find(&mut comp_dsu, *u as usize));
            comp_dsu[rx.max(ry)] = rx.min(ry);
        }
    }
    let connected = (0..triangles.len()).all(|t| find(&mut comp_dsu, t) == 0);

    let distinct: BTreeSet<LKey> = polys.iter().flat_map(|p| p.keys.iter().copied()).collect();
    let pts: Vec<HVec> = distinct.iter().map(|k| reg.lpos(k)).collect();
    let center = karcher_mean(&pts, 20);
    Ok(BoundarySphere {
        cell: keys.index,
        component: comp_index,
        triangles,
        adjacent,
        polygons: polys.len(),
        vertices,
        edges,
        euler_characteristic,
        connected,
        center,
    })
}

/// The trace on the tube cut open along the graph arcs, as one polygon walked with the
/// region on its left in the development `(t cosh r, phi sinh r)`.
fn trace_polygon(reg: &Registry, comp: &Component, cut: &CutComplex) -> Option<Vec<LKey>> {
    let mut half: Vec<(LKey, LKey)> = Vec::new();
    for cy in &comp.cycles {
        let m = cy.points.len();
        for k in 0..m {
            half.push((cy.points[k], cy.points[(k + 1) % m]));
        }
    }
    for f in &cut.faces {
        let mut chain = vec![cut.vertex_keys[f.ends[0]]];
        chain.extend(f.alpha.iter().copied());
        chain.push(cut.vertex_keys[f.ends[1]]);
        for w in chain.windows(2) {
            half.push((w[0], w[1]));
            half.push((w[1], w[0]));
        }
    }
    let mut tp: BTreeMap<LKey, (f64, f64)> = BTreeMap::new();
    let mut r = 0.0;
    for (a, _) in &half {
        tp.entry(*a).or_insert_with(|| {
            let (rr, t, phi) = cylinder_coords(&reg.lpos(a));
            r = rr;
            (t, phi)
        });
    }
    let (ch, sh) = (r.cosh(), r.sinh());
    let angle = |a: &LKey, b: &LKey| {
        let (p, q) = (tp[a], tp[b]);
        (wrap(q.1 - p.1) * sh).atan2((q.0 - p.0) * ch)
    };
    let mut outs: BTreeMap<LKey, Vec<(f64, usize)>> = BTreeMap::new();
    for (h, (a, b)) in half.iter().enumerate() {
        outs.entry(*a).or_default().push((angle(a, b), h));
    }
    for v in outs.values_mut() {
        v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    }
    let mut used = vec![false; half.len()];
    let mut keys = Vec::new();
    let mut h = 0;
    while !used[h] {
        used[h] = true;
        let (a, b) = half[h];
        keys.push(a);
        let back = angle(&b, &a);
        let o = outs.get(&b)?;
        h = o.iter().rev().find(|(t, _)| *t < back - 1e-12).unwrap_or(o.last().unwrap()).1;
    }
    (h == 0 && used.iter().all(|u| *u)).then_some(keys)
}

/// Boundary of cutting disk `e`: the arc, then the chain back with chord crossings.
fn cut_polygon(reg: &Registry, keys: &CellKeys, cut: &CutComplex, e: usize) -> Option<Vec<LKey>> {
    let f = &cut.faces[e];
    let (a0, a1) = (cut.vertex_keys[f.ends[0]], cut.vertex_keys[f.ends[1]]);
    let mut out = vec![a0];
    out.extend(f.alpha.iter().copied());
    out.push(a1);
    let mut chain = vec![f.chain[0]];
    for (fi, p, q) in &f.chords {
        let cf = &keys.faces[*fi];
        let (p0, q0) = (p.shifted(-cf.shift), q.shifted(-cf.shift));
        let ch = reg.chords.get(&cf.key)?.iter().find(|c| c.owner == ChordOwner::Side(cf.side_a) && c.ends == [p0, q0])?;
        chain.extend(ch.points[1..].iter().map(|k| k.shifted(cf.shift)));
    }
    if chain.first() == Some(&a1) {
        chain.remove(0);
    }
    if chain.last() == Some(&a0) {
        chain.pop();
    }
    out.extend(chain);
    Some(out)
}

/// A point just to the left of a polygon side, on the polygon's side of the cutting plane.
fn left_offset(
    reg: &Registry,
    keys: &CellKeys,
    poly: &Polygon,
    s: &SideRef,
    charts: &mut BTreeMap<usize, FaceChart>,
) -> Option<HVec> {
    match poly.role {
        Role::Face { face } => {
            let cf = &keys.faces[face];
            let chart = charts.entry(face).or_insert_with(|| FaceChart::new(reg, &cf.key));
            let a = chart.to_2d(&reg.lpos(&s.from.shifted(-cf.shift)));
            let b = chart.to_2d(&reg.lpos(&s.to.shifted(-cf.shift)));
            let sign = if cf.side_a { 1.0 } else { -1.0 };
            let left = [-(b[1] - a[1]) * sign, (b[0] - a[0]) * sign];
            let p = [0.5 * (a[0] + b[0]) + 0.25 * left[0], 0.5 * (a[1] + b[1]) + 0.25 * left[1]];
            Some(reg.shift(&chart.from_2d(p).to_point(), cf.shift))
        }
        Role::Trace => {
            let (r, ta, pa) = cylinder_coords(&reg.lpos(&s.from));
            let (_, tb, pb) = cylinder_coords(&reg.lpos(&s.to));
            let (ch, sh) = (r.cosh(), r.sinh());
            let d = [(tb - ta) * ch, wrap(pb - pa) * sh];
            let len = d[0].hypot(d[1]);
            // Keep the offset well short of wrapping around a thin tube.
            let k = if len > 0.0 { (0.25 * len).min(0.05 * sh) / len } else { 0.0 };
            let t = 0.5 * (ta + tb) - k * d[1] / ch;
            let phi = pa + 0.5 * wrap(pb - pa) + k * d[0] / sh;
            Some(cylinder_point(r, t, phi))
        }
        Role::Cut { .. } => None,
    }
}

/// Pairs the six copies of a radial segment from an interior graph vertex to the cell
/// boundary: consecutive cutting disks around the segment bound one wedge each.
fn radial_gluing(
    reg: &Registry,
    polys: &[Polygon],
    cut: &CutComplex,
    pair: (LKey, LKey),
    sides: &[SideRef],
) -> Option<Vec<((usize, usize), (usize, usize))>> {
    let v = (0..cut.vertex_keys.len()).find(|&v| cut.exits[v].is_some() && (cut.vertex_keys[v] == pair.0 || cut.vertex_keys[v] == pair.1))?;
    let chart = Lorentz::boost_to(&cut.s?).inverse();
    let ua = chart.apply(&reg.lpos(&cut.vertex_keys[v])).klein();
    let d = unit(ua);
    let z = if d[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let f1 = unit(cross(&d, &z));
    let f2 = cross(&d, &f1);
    let mut around: Vec<(f64, usize, [f64; 3], [f64; 3])> = Vec::new();
    for (e, f) in cut.faces.iter().enumerate() {
        let frac = if f.ends[0] == v {
            1e-3
        } else if f.ends[1] == v {
            1.0 - 1e-3
        } else {
            continue;
        };
        let up = chart.apply(&f.arc.point(frac)).klein();
        let w = [up[0] - ua[0], up[1] - ua[1], up[2] - ua[2]];
        let k = dot(&w, &d);
        let t = unit([w[0] - k * d[0], w[1] - k * d[1], w[2] - k * d[2]]);
        let n = unit(chart.apply(&f.normal).spatial());
        around.push((dot(&t, &f2).atan2(dot(&t, &f1)), e, t, n));
    }
    if around.len() != 3 {
        return None;
    }
    around.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let find = |e: usize, plus: bool| {
        sides.iter().find(|s| polys[s.poly].role == Role::Cut { cut: e, plus }).map(|s| (s.poly, s.idx))
    };
    let mut out = Vec::new();
    for i in 0..3 {
        let (_, ei, ti, ni) = around[i];
        let (_, ej, tj, nj) = around[(i + 1) % 3];
        let pi = dot(&ni, &cross(&d, &ti)) > 0.0;
        let dj = cross(&d, &tj);
        let pj = dot(&nj, &[-dj[0], -dj[1], -dj[2]]) > 0.0;
        out.push((find(ei, pi)?, find(ej, pj)?));
    }
    let used: BTreeSet<(usize, usize)> = out.iter().flat_map(|(a, b)| [*a, *b]).collect();
    (used.len() == 6).then_some(out)
}
