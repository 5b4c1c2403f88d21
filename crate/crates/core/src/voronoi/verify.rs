//! Checks of clipped cells against the explicit constants, the distance identity on cells,
//! injectivity of the projection, and nearest-center classification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cell::{Cell, CellContext};
use super::clip::ClippedCell;
use super::PlaneId;
use crate::hyperbolic::{hdist, HVec};
use crate::net::ConstantsTable;
use crate::quotient::ThickThinData;

/// Measured counts of a clipped cell next to the bounds they must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellBoundsReport {
    pub cell: usize,
    pub faces_meeting_x: usize,
    pub segments: usize,
    pub vertices_in_x: usize,
    pub components: usize,
    pub genus: i64,
    pub max_edge_segments: usize,
    pub thin_connected: bool,
    pub faces_ok: bool,
    pub segments_ok: bool,
    pub vertices_ok: bool,
    pub components_ok: bool,
    pub genus_ok: bool,
    pub edge_segments_ok: bool,
}

impl CellBoundsReport {
    pub fn ok(&self) -> bool {
        self.faces_ok
            && self.segments_ok
            && self.vertices_ok
            && self.components_ok
            && self.genus_ok
            && self.edge_segments_ok
            && self.thin_connected
    }
}

pub fn verify_cell_bounds(clipped: &ClippedCell, k: &ConstantsTable) -> CellBoundsReport {
    let genus = clipped.max_genus();
    let components = clipped.components.len();
    CellBoundsReport {
        cell: clipped.index,
        faces_meeting_x: clipped.faces_meeting_x,
        segments: clipped.segments,
        vertices_in_x: clipped.vertices_in_x,
        components,
        genus,
        max_edge_segments: clipped.max_edge_segments,
        thin_connected: clipped.thin_connected,
        faces_ok: clipped.faces_meeting_x as f64 <= k.c2,
        segments_ok: clipped.segments as f64 <= k.c1,
        vertices_ok: clipped.vertices_in_x as f64 <= k.c0,
        components_ok: components as f64 <= k.c0,
        genus_ok: genus as f64 <= k.c1,
        edge_segments_ok: clipped.max_edge_segments <= 2,
    }
}

/// Distance identity, boundary identification and injectivity checks on one cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub cell: usize,
    pub samples: usize,
    /// Largest `|d(x_i, p) - d_M(x_i, p)|` over the samples.
    pub max_deviation: f64,
    /// Points on faces shared with a translate of the same net point.
    pub boundary_checks: usize,
    /// Largest `|d(p, x_i) - d(p', x_i)|` for identified boundary points `p, p'`.
    pub max_boundary_deviation: f64,
    /// Identified boundary points whose partner left the cell.
    pub boundary_misses: usize,
    /// Samples in `X` that were checked for orbit identifications.
    pub injectivity_samples: usize,
    /// Samples in `X` with a nontrivial translate strictly inside the cell.
    pub orbit_identifications: usize,
}

impl DistanceReport {
    pub fn ok(&self) -> bool {
        self.max_deviation < 1e-8
            && self.max_boundary_deviation < 1e-8
            && self.boundary_misses == 0
            && self.orbit_identifications == 0
    }
}

/// Uniform point of the polytope in its Klein chart, by rejection from the bounding box.
fn sample_polytope(cell: &Cell, rng: &mut ChaCha8Rng) -> Option<[f64; 3]> {
    let p = &cell.polytope;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in &p.vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(v.u[k]);
            hi[k] = hi[k].max(v.u[k]);
        }
    }
    for _ in 0..10_000 {
        let u = [rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1]), rng.gen_range(lo[2]..=hi[2])];
        if p.contains(&u, 0.0) && u.iter().map(|x| x * x).sum::<f64>() < 1.0 {
            return Some(u);
        }
    }
    None
}

fn sample_face(cell: &Cell, face: usize, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let vs = &cell.polytope.faces[face].verts;
    let w: Vec<f64> = vs.iter().map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    let mut u = [0.0; 3];
    for (k, v) in vs.iter().enumerate() {
        for c in 0..3 {
            u[c] += w[k] / total * cell.polytope.vertices[*v].u[c];
        }
    }
    u
}

fn to_global(cell: &Cell, u: &[f64; 3]) -> HVec {
    cell.frame.apply(&HVec::from_klein_unchecked(*u))
}

fn to_local(cell: &Cell, x: &HVec) -> [f64; 3] {
    cell.frame.inverse().apply(x).klein()
}

/// Samples `samples` points of the cell and compares the distance to its center in the
/// universal cover with the quotient distance. Also checks that points on faces shared with a
/// translate of the same center are equidistant from it with their partner, and that no
/// sampled point of the cell in `X` has a nontrivial translate strictly inside the cell.
pub fn check_distance_identity(
    ctx: &CellContext,
    cell: &Cell,
    tt: &ThickThinData,
    samples: usize,
    seed: u64,
) -> DistanceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (cell.index as u64).wrapping_mul(0x9e37_79b9));
    let mut rep = DistanceReport { cell: cell.index, ..Default::default() };
    let center = cell.center;
    let depth = cell.depth.max(1);
    for _ in 0..samples {
        let Some(u) = sample_polytope(cell, &mut rng) else { break };
        let p = to_global(cell, &u);
        rep.samples += 1;
        let cover = hdist(&center, &p);
        let (quotient, _) = ctx.m.quotient_dist_h(&center, &p);
        rep.max_deviation = rep.max_deviation.max((cover - quotient).abs());
        if tt.in_x(&p) {
            rep.injectivity_samples += 1;
            let identified = (1..=depth).any(|n| {
                [n, -n].iter().any(|&k| cell.polytope.depth(&to_local(cell, &ctx.m.translate(&p, k))) < -1e-9)
            });
            if identified {
                rep.orbit_identifications += 1;
            }
        }
    }
    for (fi, f) in cell.polytope.faces.iter().enumerate() {
        let PlaneId::Gen(g) = cell.polytope.planes[f.plane].id else { continue };
        if g.j as usize != cell.index || g.n == 0 {
            continue;
        }
        for _ in 0..8 {
            let u = sample_face(cell, fi, &mut rng);
            let p = to_global(cell, &u);
            let q = ctx.m.translate(&p, -(g.n as i64));
            rep.boundary_checks += 1;
            let dev = (hdist(&p, &center) - hdist(&q, &center)).abs();
            rep.max_boundary_deviation = rep.max_boundary_deviation.max(dev);
            if !cell.polytope.contains(&to_local(cell, &q), 1e-9) {
                rep.boundary_misses += 1;
            }
        }
    }
    rep
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NearestCenterReport {
    pub samples: usize,
    /// Samples within the margin band of a bisector, not judged.
    pub in_band: usize,
    /// Samples whose nearest center belongs to a flagged cell.
    pub skipped: usize,
    pub agreements: usize,
    pub mismatches: usize,
}

/// Classifies random points of the quotient by their nearest net point in the quotient metric
/// and checks that each lies in that cell's polytope and outside the runner-up's polytope.
/// Points whose two smallest distances differ by less than `band` are not judged.
pub fn nearest_center_check(
    ctx: &CellContext,
    cells: &[Option<&Cell>],
    samples: usize,
    band: f64,
    seed: u64,
) -> NearestCenterReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = NearestCenterReport::default();
    let n = ctx.len();
    if n < 2 {
        return rep;
    }
    // Sample near the net: a random net point displaced by up to twice the separation.
    while rep.samples < samples {
        let j = rng.gen_range(0..n);
        let dir = loop {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0f64..1.0)];
            let q: f64 = v.iter().map(|x| x * x).sum();
            if q <= 1.0 && q > 1e-6 {
                break v;
            }
        };
        let rad = 2.0 * ctx.d_sep * rng.gen::<f64>().cbrt();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let k = rad.tanh() / norm;
        let local = HVec::from_klein_unchecked([dir[0] * k, dir[1] * k, dir[2] * k]);
        let p = crate::hyperbolic::Lorentz::boost_to(&ctx.lifts[j]).apply(&local);
        rep.samples += 1;
        let mut best = (f64::INFINITY, 0usize, 0i64);
        let mut second = (f64::INFINITY, 0usize, 0i64);
        for (i, x) in ctx.lifts.iter().enumerate() {
            let (d, shift) = ctx.m.quotient_dist_h(x, &p);
            if d < best.0 {
                second = best;
                best = (d, i, shift);
            } else if d < second.0 {
                second = (d, i, shift);
            }
        }
        let (Some(c1), Some(c2)) = (cells[best.1], cells[second.1]) else {
            rep.skipped += 1;
            continue;
        };
        if c1.is_flagged() || c2.is_flagged() {
            rep.skipped += 1;
            continue;
        }
        if second.0 - best.0 < band {
            rep.in_band += 1;
            continue;
        }
        let in_first = c1.polytope.depth(&to_local(c1, &ctx.m.translate(&p, best.2))) <= 0.0;
        let in_second = c2.polytope.depth(&to_local(c2, &ctx.m.translate(&p, second.2))) <= 0.0;
        if in_first && !in_second {
            rep.agreements += 1;
        } else {
            rep.mismatches += 1;
        }
    }
    rep
}
