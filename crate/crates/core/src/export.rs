//! Versioned plain-text documents for nets, cells, connecting graphs and triangulations.
//!
//! Every document starts with a `thickpart-<kind> <version>` header line. Points are written
//! in upper half-space coordinates `x y z`.

use std::fmt::Write as _;

use crate::hyperbolic::{HVec, PointUHS};
use crate::net::Net;
use crate::triangulator::{BoundaryKind, CutComplex, Triangulation};
use crate::voronoi::cell::Cell;
use crate::voronoi::PlaneId;

pub const VERSION: u32 = 1;

fn uhs(x: &HVec) -> String {
    let p = PointUHS::from_hyperboloid(x);
    format!("{} {} {}", p.x, p.y, p.z)
}

pub fn net_document(net: &Net) -> String {
    let mut s = String::new();
    let r = &net.region;
    let _ = writeln!(s, "thickpart-net {VERSION}");
    let _ = writeln!(s, "separation {}", net.d_sep);
    let _ = writeln!(s, "seed {}", net.seed);
    let _ = writeln!(s, "region length {} twist {} r_in {} r_out {}", r.length, r.twist, r.r_in, r.r_out);
    let _ = writeln!(s, "points {}", net.lifts.len());
    for x in &net.lifts {
        let _ = writeln!(s, "{}", uhs(x));
    }
    s
}

fn flag_name(c: &Cell) -> String {
    match c.flag {
        None => "none".into(),
        Some(f) => format!("{f:?}").to_lowercase(),
    }
}

/// Cells as vertex lists and faces with the generator `(j, n)` of each bisector.
pub fn mesh_document(cells: &[Cell]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "thickpart-mesh {VERSION}");
    let _ = writeln!(s, "cells {}", cells.len());
    for c in cells {
        let p = &c.polytope;
        let _ = writeln!(s, "cell {} flag {} vertices {} faces {}", c.index, flag_name(c), p.vertices.len(), p.faces.len());
        for k in 0..p.vertices.len() {
            if c.is_flagged() {
                let u = p.vertices[k].u;
                let _ = writeln!(s, "k {} {} {}", u[0], u[1], u[2]);
            } else {
                let _ = writeln!(s, "v {}", uhs(&c.vertex_global(k)));
            }
        }
        for f in &p.faces {
            let tag = match p.planes[f.plane].id {
                PlaneId::Gen(g) => format!("{} {}", g.j, g.n),
                PlaneId::Bound(b) => format!("bound {b}"),
            };
            let idx: Vec<String> = f.verts.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "f {tag} : {}", idx.join(" "));
        }
    }
    s
}

/// Non-flagged cells as one OFF polygon mesh.
pub fn mesh_off(cells: &[Cell]) -> String {
    let live: Vec<&Cell> = cells.iter().filter(|c| !c.is_flagged()).collect();
    let nv: usize = live.iter().map(|c| c.polytope.vertices.len()).sum();
    let nf: usize = live.iter().map(|c| c.polytope.faces.len()).sum();
    let mut s = String::new();
    let _ = writeln!(s, "OFF");
    let _ = writeln!(s, "{nv} {nf} 0");
    for c in &live {
        for k in 0..c.polytope.vertices.len() {
            let _ = writeln!(s, "{}", uhs(&c.vertex_global(k)));
        }
    }
    let mut base = 0;
    for c in &live {
        for f in &c.polytope.faces {
            let idx: Vec<String> = f.verts.iter().map(|v| (base + v).to_string()).collect();
            let _ = writeln!(s, "{} {}", idx.len(), idx.join(" "));
        }
        base += c.polytope.vertices.len();
    }
    s
}

/// Connecting graphs: boundary curves as `(t, phi)` polylines and arcs with their planes.
pub fn graph_document(cuts: &[Vec<CutComplex>]) -> String {
    let mut s = String::new();
    let graphs: Vec<&CutComplex> = cuts.iter().flatten().filter(|c| c.graph.is_some()).collect();
    let _ = writeln!(s, "thickpart-graphs {VERSION}");
    let _ = writeln!(s, "graphs {}", graphs.len());
    for c in graphs {
        let g = c.graph.as_ref().unwrap();
        let _ = writeln!(
            s,
            "graph cell {} component {} genus {} radius {} center {} curves {} vertices {} arcs {}",
            c.cell,
            c.component,
            c.genus,
            g.radius,
            uhs(&g.s),
            g.curves.len(),
            g.vertices.len(),
            g.arcs.len()
        );
        for (k, cv) in g.curves.iter().enumerate() {
            let _ = writeln!(s, "curve {k} closed {} points {}", cv.closed, cv.points.len());
            for (t, phi) in &cv.points {
                let _ = writeln!(s, "{t} {phi}");
            }
        }
        for (k, v) in g.vertices.iter().enumerate() {
            let _ = writeln!(s, "vertex {k} {}", uhs(&v.pos));
        }
        for (k, a) in g.arcs.iter().enumerate() {
            let n = a.arc.normal.0;
            let _ = writeln!(
                s,
                "arc {k} ends {} {} normal {} {} {} {} psi0 {} sweep {}",
                a.ends[0], a.ends[1], n[0], n[1], n[2], n[3], a.arc.psi0, a.arc.sweep
            );
        }
    }
    s
}

/// Vertex, tetrahedron, gluing and boundary tables.
pub fn triangulation_document(t: &Triangulation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "thickpart-triangulation {VERSION}");
    let _ = writeln!(s, "vertices {}", t.vertices.len());
    for (i, x) in t.vertices.iter().enumerate() {
        let _ = writeln!(s, "{i} {}", uhs(x));
    }
    let _ = writeln!(s, "tetrahedra {}", t.tets.len());
    for (i, v) in t.tets.iter().enumerate() {
        let _ = writeln!(s, "{i} {} {} {} {}", v[0], v[1], v[2], v[3]);
    }
    let _ = writeln!(s, "gluings {}", t.gluings.len());
    for g in &t.gluings {
        let p = g.perm;
        let _ = writeln!(s, "{} {} {} {} {}{}{}{}", g.a.0, g.a.1, g.b.0, g.b.1, p[0], p[1], p[2], p[3]);
    }
    let _ = writeln!(s, "boundary {}", t.boundary.len());
    for (tet, face, kind) in &t.boundary {
        let k = match kind {
            BoundaryKind::Thin => "thin",
            BoundaryKind::Cutoff => "cutoff",
        };
        let _ = writeln!(s, "{tet} {face} {k}");
    }
    s
}

/// Flat gluing list: the tetrahedron count, then one line `tet face adjacent p0 p1 p2 p3` per
/// glued pair, where vertex `k` of `tet` goes to vertex `pk` of `adjacent` and `face` is the
/// face opposite vertex `face`. Unlisted faces are boundary.
pub fn gluing_list(t: &Triangulation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", t.tets.len());
    for g in &t.gluings {
        let p = g.perm;
        let _ = writeln!(s, "{} {} {} {} {} {} {}", g.a.0, g.a.1, g.b.0, p[0], p[1], p[2], p[3]);
    }
    s
}

/// Parses [`gluing_list`] output back into `(tets, [(tet, face, adjacent, perm)])`.
pub fn parse_gluing_list(text: &str) -> Option<(usize, Vec<(u32, u8, u32, [u8; 4])>)> {
    let mut lines = text.lines();
    let n = lines.next()?.trim().parse().ok()?;
    let mut out = Vec::new();
    for l in lines {
        let f: Vec<u32> = l.split_whitespace().map(|x| x.parse().ok()).collect::<Option<_>>()?;
        if f.len() != 7 {
            return None;
        }
        out.push((f[0], f[1] as u8, f[2], [f[3] as u8, f[4] as u8, f[5] as u8, f[6] as u8]));
    }
    Some((n, out))
}
