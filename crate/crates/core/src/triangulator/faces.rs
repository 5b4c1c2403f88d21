//! Subdivision of each registered face by the chords cut into it, and fan triangulations of
//! the resulting regions. Computed once per face in its own frame, so both cells sharing a
//! face see the same triangles.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::cut::{cross, dot, unit};
use crate::cone_graph::arc::wrap;
use crate::error::{Error, Result};
use crate::hyperbolic::{HVec, Lorentz};
use crate::voronoi::registry::{ChordOwner, FaceChord, FaceKey, FaceXClass, LKey, PointKey, Registry};

/// Klein chart of a face plane, oriented counterclockwise as seen from the exterior of the
/// face's first cell.
#[derive(Debug, Clone)]
pub struct FaceChart {
    to_local: Lorentz,
    to_global: Lorentz,
    p0: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
}

impl FaceChart {
    pub fn new(reg: &Registry, fk: &FaceKey) -> Self {
        let f = &reg.faces[fk];
        let mut c = HVec::new(0.0, 0.0, 0.0, 0.0);
        for k in &f.cycle {
            c = c + reg.lpos(k);
        }
        let to_global = Lorentz::boost_to(&c.to_point());
        let to_local = to_global.inverse();
        let n = to_local.apply(&f.normal);
        let ns = n.spatial();
        let q = dot(&ns, &ns);
        let p0 = [n.0[0] * ns[0] / q, n.0[0] * ns[1] / q, n.0[0] * ns[2] / q];
        let nh = unit(ns);
        let z = if nh[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let d = dot(&z, &nh);
        let e1 = unit([z[0] - d * nh[0], z[1] - d * nh[1], z[2] - d * nh[2]]);
        let e2 = cross(&nh, &e1);
        FaceChart { to_local, to_global, p0, e1, e2 }
    }

    pub fn to_2d(&self, x: &HVec) -> [f64; 2] {
        let u = self.to_local.apply(x).klein();
        let w = [u[0] - self.p0[0], u[1] - self.p0[1], u[2] - self.p0[2]];
        [dot(&w, &self.e1), dot(&w, &self.e2)]
    }

    pub fn from_2d(&self, p: [f64; 2]) -> HVec {
        let u = [
            self.p0[0] + p[0] * self.e1[0] + p[1] * self.e2[0],
            self.p0[1] + p[0] * self.e1[1] + p[1] * self.e2[1],
            self.p0[2] + p[0] * self.e1[2] + p[1] * self.e2[2],
        ];
        self.to_global.apply(&HVec::from_klein_unchecked(u))
    }
}

pub(crate) fn signed_area(pts: &[[f64; 2]]) -> f64 {
    let m = pts.len();
    (0..m).map(|k| {
        let (a, b) = (pts[k], pts[(k + 1) % m]);
        a[0] * b[1] - a[1] * b[0]
    })
    .sum::<f64>()
        * 0.5
}

/// Angle of the section point nearest to `p`, by sampling and golden-section refinement.
fn nearest_psi(sec: &crate::tube::Section, p: &HVec) -> f64 {
    let f = |psi: f64| -p.dot(&sec.point(psi));
    let n = 720;
    let h = 2.0 * PI / n as f64;
    let k = (0..n).min_by(|a, b| f(*a as f64 * h).partial_cmp(&f(*b as f64 * h)).unwrap()).unwrap();
    let (mut lo, mut hi) = (k as f64 * h - h, k as f64 * h + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Splits every annulus piece into two disks by two segments from outer vertices to their
/// nearest points on the inner circle. Returns the number of faces split.
pub fn split_annuli(reg: &mut Registry) -> Result<usize> {
    let annuli: Vec<FaceKey> =
        reg.faces.iter().filter(|(_, f)| f.class == FaceXClass::Annulus).map(|(k, _)| *k).collect();
    for fk in &annuli {
        let f = &reg.faces[fk];
        let sec = f.arcs[0].section;
        let psis: Vec<f64> = f.cycle.iter().map(|k| nearest_psi(&sec, &reg.lpos(k))).collect();
        let far = (1..psis.len())
            .max_by(|a, b| wrap(psis[*a] - psis[0]).abs().partial_cmp(&wrap(psis[*b] - psis[0]).abs()).unwrap())
            .unwrap();
        if wrap(psis[far] - psis[0]).abs() < 1e-6 {
            return Err(Error::Genericity { retries: 0, detail: "annulus split segments coincide".into() });
        }
        for v in [0, far] {
            let from = reg.faces[fk].cycle[v];
            let id = reg.next_face_extra_id(fk);
            let pos = sec.point(psis[v]);
            reg.insert_arc_extra(fk, 0, psis[v], id, pos);
            let to = LKey::new(PointKey::FaceExtra(*fk, id), 0);
            reg.chords.entry(*fk).or_default().push(FaceChord {
                owner: ChordOwner::Split,
                ends: [from, to],
                points: vec![],
            });
        }
    }
    Ok(annuli.len())
}

fn crosses(a: ChordOwner, b: ChordOwner) -> bool {
    match (a, b) {
        (ChordOwner::Side(x), ChordOwner::Side(y)) => x != y,
        (ChordOwner::Split, ChordOwner::Split) => false,
        _ => true,
    }
}

/// Parameters of the proper intersection of segments `ab` and `cd`.
fn segment_hit(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Option<(f64, f64)> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den.abs() < 1e-300 {
        return None;
    }
    let w = [c[0] - a[0], c[1] - a[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / den;
    let u = (w[0] * r[1] - w[1] * r[0]) / den;
    let inside = |x: f64| x > 1e-9 && x < 1.0 - 1e-9;
    (inside(t) && inside(u)).then_some((t, u))
}

/// Registers the crossing points between chords of different cells on each face and fills in
/// every chord's point list. Returns the number of crossings.
pub fn insert_chord_crossings(reg: &mut Registry) -> Result<usize> {
    let faces: Vec<FaceKey> = reg.chords.keys().copied().collect();
    let mut total = 0;
    for fk in faces {
        let chart = FaceChart::new(reg, &fk);
        let chords = reg.chords[&fk].clone();
        let ends: Vec<[[f64; 2]; 2]> = chords
            .iter()
            .map(|c| [chart.to_2d(&reg.lpos(&c.ends[0])), chart.to_2d(&reg.lpos(&c.ends[1]))])
            .collect();
        let mut along: Vec<Vec<(f64, LKey)>> = vec![vec![]; chords.len()];
        for i in 0..chords.len() {
            for j in i + 1..chords.len() {
                if !crosses(chords[i].owner, chords[j].owner) {
                    continue;
                }
                let Some((t, u)) = segment_hit(ends[i][0], ends[i][1], ends[j][0], ends[j][1]) else { continue };
                let p = [ends[i][0][0] + t * (ends[i][1][0] - ends[i][0][0]), ends[i][0][1] + t * (ends[i][1][1] - ends[i][0][1])];
                let id = reg.next_face_extra_id(&fk);
                reg.insert_face_extra(&fk, id, chart.from_2d(p).to_point());
                let key = LKey::new(PointKey::FaceExtra(fk, id), 0);
                along[i].push((t, key));
                along[j].push((u, key));
                total += 1;
            }
        }
        let list = reg.chords.get_mut(&fk).unwrap();
        for (c, mut hits) in list.iter_mut().zip(along) {
            hits.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            c.points = std::iter::once(c.ends[0]).chain(hits.into_iter().map(|h| h.1)).chain([c.ends[1]]).collect();
        }
    }
    Ok(total)
}

/// A region of a face piece cut out by the chords, with its fan triangulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubPolygon {
    pub piece: usize,
    /// Boundary in the face frame, counterclockwise in canonical orientation.
    pub keys: Vec<LKey>,
    /// Triangles as indices into `keys`.
    pub triangles: Vec<[usize; 3]>,
    /// Index of the first triangle in the face's triangle numbering.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceSubdivision {
    pub polygons: Vec<SubPolygon>,
    pub triangles: usize,
}

impl FaceSubdivision {
    /// Triangles of the face as keys in the face frame, in canonical orientation.
    pub fn key_triangles(&self) -> Vec<[LKey; 3]> {
        let mut out = Vec::with_capacity(self.triangles);
        for p in &self.polygons {
            for t in &p.triangles {
                out.push([p.keys[t[0]], p.keys[t[1]], p.keys[t[2]]]);
            }
        }
        out
    }
}

fn nondisk(fk: &FaceKey, detail: &str) -> Error {
    Error::NonDiskFace(format!("face {:?}: {detail}", fk.0))
}

/// Regions and fan triangles of every face piece.
pub fn subdivide_faces(reg: &Registry) -> Result<BTreeMap<FaceKey, FaceSubdivision>> {
    let mut out = BTreeMap::new();
    for (fk, f) in &reg.faces {
        if f.pieces.is_empty() {
            continue;
        }
        out.insert(*fk, subdivide_face(reg, fk)?);
    }
    Ok(out)
}

fn subdivide_face(reg: &Registry, fk: &FaceKey) -> Result<FaceSubdivision> {
    let f = &reg.faces[fk];
    let chart = FaceChart::new(reg, fk);
    let chords = reg.chords.get(fk).map(|c| c.as_slice()).unwrap_or(&[]);
    // Boundary loops of each piece.
    let mut loops: Vec<Vec<Vec<LKey>>> = Vec::new();
    let mut owner: BTreeMap<LKey, usize> = BTreeMap::new();
    for (pi, piece) in f.pieces.iter().enumerate() {
        let mut ls = vec![reg.piece_boundary(fk, pi)];
        if let Some(a) = piece.arc.filter(|a| f.arcs[*a].closed) {
            let mut inner = reg.arc_chain(fk, a, true);
            let pts: Vec<[f64; 2]> = inner.iter().map(|k| chart.to_2d(&reg.lpos(k))).collect();
            if signed_area(&pts) > 0.0 {
                inner.reverse();
            }
            ls.push(inner);
        }
        for l in &ls {
            for k in l {
                owner.insert(*k, pi);
            }
        }
        loops.push(ls);
    }
    // Chords grouped by shared points, each group inside a single piece.
    let mut group: Vec<usize> = (0..chords.len()).collect();
    fn find(g: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while g[r] != r {
            r = g[r];
        }
        g[x] = r;
        r
    }
    let mut at: BTreeMap<LKey, usize> = BTreeMap::new();
    for (c, ch) in chords.iter().enumerate() {
        for k in &ch.points {
            if let Some(&d) = at.get(k) {
                let (ra, rb) = (find(&mut group, c), find(&mut group, d));
                group[ra.max(rb)] = ra.min(rb);
            } else {
                at.insert(*k, c);
            }
        }
    }
    let mut group_piece: BTreeMap<usize, usize> = BTreeMap::new();
    for (c, ch) in chords.iter().enumerate() {
        let r = find(&mut group, c);
        for k in &ch.points {
            if let Some(&p) = owner.get(k) {
                if *group_piece.entry(r).or_insert(p) != p {
                    return Err(nondisk(fk, "chord group touches two pieces"));
                }
            }
        }
    }

    let mut polygons = Vec::new();
    let mut offset = 0;
    for (pi, ls) in loops.iter().enumerate() {
        let mut half: Vec<(LKey, LKey)> = Vec::new();
        for l in ls {
            for k in 0..l.len() {
                half.push((l[k], l[(k + 1) % l.len()]));
            }
        }
        for (c, ch) in chords.iter().enumerate() {
            let r = find(&mut group, c);
            match group_piece.get(&r) {
                Some(&p) if p == pi => {}
                Some(_) => continue,
                None => return Err(nondisk(fk, "chord group away from every piece boundary")),
            }
            for w in ch.points.windows(2) {
                half.push((w[0], w[1]));
                half.push((w[1], w[0]));
            }
        }
        let regions = trace_regions(reg, &chart, fk, &half)?;
        let nodes: BTreeSet<LKey> = half.iter().map(|h| h.0).collect();
        let boundary_half = ls.iter().map(|l| l.len()).sum::<usize>();
        let edges = (half.len() - boundary_half) / 2 + boundary_half;
        let chi_exp = if ls.len() == 1 { 1 } else { 0 };
        if nodes.len() as i64 - edges as i64 + regions.len() as i64 != chi_exp {
            return Err(nondisk(fk, "piece arrangement has the wrong Euler characteristic"));
        }
        let pairs: BTreeSet<(LKey, LKey)> = half.iter().map(|&(a, b)| if a < b { (a, b) } else { (b, a) }).collect();
        for keys in regions {
            let triangles = fan(&keys, &pairs);
            let n = triangles.len();
            polygons.push(SubPolygon { piece: pi, keys, triangles, offset });
            offset += n;
        }
    }
    Ok(FaceSubdivision { polygons, triangles: offset })
}

/// Faces to the left of the half-edges, by turning to the next outgoing edge clockwise
/// from the reversed incoming one.
fn trace_regions(reg: &Registry, chart: &FaceChart, fk: &FaceKey, half: &[(LKey, LKey)]) -> Result<Vec<Vec<LKey>>> {
    let mut pos: BTreeMap<LKey, [f64; 2]> = BTreeMap::new();
    for (a, b) in half {
        for k in [a, b] {
            pos.entry(*k).or_insert_with(|| chart.to_2d(&reg.lpos(k)));
        }
    }
    let angle = |a: &LKey, b: &LKey| {
        let (p, q) = (pos[a], pos[b]);
        (q[1] - p[1]).atan2(q[0] - p[0])
    };
    let mut out_edges: BTreeMap<LKey, Vec<(f64, usize)>> = BTreeMap::new();
    let mut index: BTreeMap<(LKey, LKey), usize> = BTreeMap::new();
    for (h, (a, b)) in half.iter().enumerate() {
        if index.insert((*a, *b), h).is_some() {
            return Err(nondisk(fk, "repeated half-edge"));
        }
        out_edges.entry(*a).or_default().push((angle(a, b), h));
    }
    for v in out_edges.values_mut() {
        v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        if v.windows(2).any(|w| w[1].0 - w[0].0 < 1e-12) {
            return Err(nondisk(fk, "overlapping edges at a point"));
        }
    }
    let mut used = vec![false; half.len()];
    let mut regions = Vec::new();
    for start in 0..half.len() {
        if used[start] {
            continue;
        }
        let mut keys = Vec::new();
        let mut h = start;
        loop {
            if used[h] {
                if h != start {
                    return Err(nondisk(fk, "region walk does not close"));
                }
                break;
            }
            used[h] = true;
            let (a, b) = half[h];
            keys.push(a);
            let back = angle(&b, &a);
            let outs = out_edges.get(&b).ok_or_else(|| nondisk(fk, "dead end in the arrangement"))?;
            let pick = outs.iter().rev().find(|(t, _)| *t < back - 1e-12).unwrap_or(outs.last().unwrap());
            h = pick.1;
        }
        let pts: Vec<[f64; 2]> = keys.iter().map(|k| pos[k]).collect();
        if signed_area(&pts) <= 0.0 {
            return Err(nondisk(fk, "region is not positively oriented"));
        }
        let distinct: BTreeSet<&LKey> = keys.iter().collect();
        if distinct.len() != keys.len() {
            return Err(nondisk(fk, "region boundary repeats a point"));
        }
        regions.push(keys);
    }
    Ok(regions)
}

/// Fan from the least key whose diagonals are not already edges, or from the least key.
fn fan(keys: &[LKey], edges: &BTreeSet<(LKey, LKey)>) -> Vec<[usize; 3]> {
    let m = keys.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&k| keys[k]);
    let apex = order
        .iter()
        .copied()
        .find(|&a| {
            (2..m.saturating_sub(1)).all(|j| {
                let b = keys[(a + j) % m];
                !edges.contains(&if keys[a] < b { (keys[a], b) } else { (b, keys[a]) })
            })
        })
        .unwrap_or(order[0]);
    fan_from(m, apex)
}

pub(crate) fn fan_from(m: usize, a: usize) -> Vec<[usize; 3]> {
    (1..m - 1).map(|j| [a, (a + j) % m, (a + j + 1) % m]).collect()
}

/// Fan from the least key.
pub(crate) fn fan_any(keys: &[LKey]) -> Vec<[usize; 3]> {
    let a = (0..keys.len()).min_by_key(|&k| keys[k]).unwrap();
    fan_from(keys.len(), a)
}
