//! Seeded end-to-end runs: net, cells, clipping, connecting graphs, cutting, triangulation
//! and the verification report.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{ball_volume, cylinder_point, hdist};
use crate::net::{build_net, constants, shell_volume_mc, ConstantsTable, Net, NetParams};
use crate::oracle::inj_by_translates;
use crate::quotient::{ThickThinData, TubeQuotient};
use crate::triangulator::{retract_to_tube, triangulate_cells, Assembly};
use crate::voronoi::cell::{compute_cell, Cell, CellContext, FlagReason, Stability};
use crate::voronoi::clip::{clip_to_x, ClippedCell};
use crate::voronoi::registry::{CellKeys, FaceXClass, Registry};
use crate::voronoi::verify::{check_distance_identity, nearest_center_check, verify_cell_bounds, CellBoundsReport};

/// Numerical thresholds and sample sizes of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Sag of the polylines tracing the tube boundary on cell faces.
    pub sag: f64,
    /// Largest allowed deviation in the distance identity and boundary checks.
    pub distance: f64,
    /// Width of the band around bisectors excluded from nearest-center classification.
    pub margin_band: f64,
    /// Largest allowed distance of sampled graph-arc points from their planes.
    pub plane_residual: f64,
    /// Largest allowed face-constraint violation at polytope vertices.
    pub polytope: f64,
    /// Largest allowed movement when retracting an already retracted point.
    pub retraction: f64,
    pub distance_samples: usize,
    pub nearest_samples: usize,
    pub packing_samples: usize,
    pub injectivity_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sag: 1e-6,
            distance: 1e-8,
            margin_band: 1e-7,
            plane_residual: 1e-8,
            polytope: 1e-8,
            retraction: 1e-9,
            distance_samples: 1000,
            nearest_samples: 10_000,
            packing_samples: 200_000,
            injectivity_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub length: f64,
    pub twist: f64,
    pub mu: f64,
    pub d: f64,
    pub seed: u64,
    pub sample_budget: usize,
    pub orbit_depth: i64,
    pub outer_cutoff_multiplier: f64,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            length: 0.1,
            twist: 0.3,
            mu: 0.5,
            d: 0.3,
            seed: 7,
            sample_budget: 20_000,
            orbit_depth: 64,
            outer_cutoff_multiplier: 4.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("mu", self.mu),
            ("d", self.d),
            ("outer_cutoff_multiplier", self.outer_cutoff_multiplier),
            ("tol.sag", self.tolerances.sag),
            ("tol.distance", self.tolerances.distance),
            ("tol.margin_band", self.tolerances.margin_band),
            ("tol.plane_residual", self.tolerances.plane_residual),
            ("tol.polytope", self.tolerances.polytope),
            ("tol.retraction", self.tolerances.retraction),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.twist.is_finite() {
            return Err(Error::InvalidParameter("twist must be finite".into()));
        }
        if self.sample_budget == 0 || self.orbit_depth <= 0 {
            return Err(Error::InvalidParameter("sample_budget and orbit_depth must be positive".into()));
        }
        Ok(())
    }

    /// Whether the core geodesic has a thin part around it.
    pub fn drilled(&self) -> bool {
        self.mu > self.length / 2.0
    }
}

/// One verified property: `measured relation limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub module: String,
    pub passed: bool,
    pub measured: f64,
    pub relation: String,
    pub limit: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub drilled: bool,
    pub tube_radius_mu: f64,
    pub tube_radius_x: f64,
    pub r_empirical: f64,
    pub net_points: usize,
    pub flagged_cells: usize,
    pub flagged_unbounded: usize,
    pub flagged_beyond_cutoff: usize,
    pub flagged_uncertified: usize,
    pub triangulated_cells: usize,
    pub components: usize,
    pub max_genus: i64,
    pub tetrahedra: usize,
    pub max_cell_tetrahedra: usize,
    pub thin_boundary_triangles: usize,
    pub cutoff_boundary_triangles: usize,
    pub annulus_splits: usize,
    pub cut_retries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub config: RunConfig,
    pub constants: ConstantsTable,
    pub summary: RunSummary,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Plain-text rendering, one line per check.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let k = &self.constants;
        let m = &self.summary;
        let _ = writeln!(s, "{}", self.format);
        let _ = writeln!(
            s,
            "config length={} twist={} mu={} d={} seed={} sample_budget={} orbit_depth={} outer_cutoff_multiplier={}",
            c.length, c.twist, c.mu, c.d, c.seed, c.sample_budget, c.orbit_depth, c.outer_cutoff_multiplier
        );
        let _ = writeln!(
            s,
            "constants R={} D={} C3={} C2={} C1={} C0={} Cbar0={} C={} K={}",
            k.r, k.d_sep, k.c3, k.c2, k.c1, k.c0, k.cbar0, k.c, k.k
        );
        let _ = writeln!(
            s,
            "summary drilled={} tube_radius_mu={} tube_radius_x={} net_points={} flagged_cells={} (unbounded {}, beyond cutoff {}, uncertified {}) triangulated_cells={} components={} max_genus={}",
            m.drilled,
            m.tube_radius_mu,
            m.tube_radius_x,
            m.net_points,
            m.flagged_cells,
            m.flagged_unbounded,
            m.flagged_beyond_cutoff,
            m.flagged_uncertified,
            m.triangulated_cells,
            m.components,
            m.max_genus
        );
        let _ = writeln!(
            s,
            "summary tetrahedra={} max_cell_tetrahedra={} thin_boundary={} cutoff_boundary={} annulus_splits={} cut_retries={}",
            m.tetrahedra,
            m.max_cell_tetrahedra,
            m.thin_boundary_triangles,
            m.cutoff_boundary_triangles,
            m.annulus_splits,
            m.cut_retries
        );
        for ch in &self.checks {
            let _ = writeln!(
                s,
                "{} {:<34} {:<14} {} {} {}{}",
                if ch.passed { "PASS" } else { "FAIL" },
                ch.name,
                ch.module,
                ch.measured,
                ch.relation,
                ch.limit,
                if ch.note.is_empty() { String::new() } else { format!("  # {}", ch.note) }
            );
        }
        let _ = writeln!(s, "result {}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub thick_thin: ThickThinData,
    pub constants: ConstantsTable,
    pub net: Net,
    pub cells: Vec<Cell>,
    /// Clipped cells of the non-flagged cells, by cell index.
    pub clipped: Vec<Option<ClippedCell>>,
    pub bounds: Vec<CellBoundsReport>,
    pub registry: Registry,
    pub assembly: Assembly,
    pub report: RunReport,
}

fn stage(name: &'static str, seed: u64) -> impl Fn(Error) -> Error {
    move |e| Error::Stage { stage: name.into(), seed, source: Box::new(e) }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, module: &str, measured: f64, relation: &str, limit: f64, note: impl Into<String>) {
        let passed = match relation {
            "<=" => measured <= limit,
            "<" => measured < limit,
            ">" => measured > limit,
            "==" => measured == limit,
            ">=" => measured >= limit,
            _ => false,
        };
        self.0.push(Check {
            name: name.into(),
            module: module.into(),
            passed,
            measured,
            relation: relation.into(),
            limit,
            note: note.into(),
        });
    }

    /// A count of violations that must be zero.
    fn zero(&mut self, name: &str, module: &str, violations: usize, note: impl Into<String>) {
        self.push(name, module, violations as f64, "==", 0.0, note);
    }
}

/// The decomposition half of a run: net, Voronoi cells, clipping to `X` and per-cell bounds.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub config: RunConfig,
    pub quotient: TubeQuotient,
    pub thick_thin: ThickThinData,
    pub constants: ConstantsTable,
    pub net: Net,
    pub cells: Vec<Cell>,
    pub registry: Registry,
    /// Registry keys of the non-flagged cells, in cell order.
    pub keys: Vec<CellKeys>,
    pub clipped: Vec<ClippedCell>,
    pub bounds: Vec<CellBoundsReport>,
}

/// Builds the net and its clipped Voronoi cells for `config`.
pub fn decompose(config: &RunConfig) -> Result<Decomposition> {
    config.validate()?;
    let seed = config.seed;
    let tol = config.tolerances;
    let m = TubeQuotient::new(config.length, config.twist).map_err(stage("tube", seed))?;
    let tt = ThickThinData::compute(&m, config.mu, config.d).map_err(stage("tube", seed))?;
    let k = constants(tt.r_empirical, config.d).map_err(stage("constants", seed))?;
    let params = NetParams {
        sample_budget: config.sample_budget,
        seed,
        outer_cutoff_multiplier: config.outer_cutoff_multiplier,
        probe_spacing: 0.1,
    };
    let net = build_net(&m, &tt, k.d_sep, &params).map_err(stage("net", seed))?;
    let ctx = CellContext::new(m, &net);
    let cells: Vec<Cell> = (0..net.len())
        .into_par_iter()
        .map(|i| compute_cell(&ctx, i, config.orbit_depth))
        .collect::<Result<_>>()
        .map_err(stage("cells", seed))?;

    let mut reg = Registry::new(m, net.lifts.clone(), tt.tube_radius_x, tol.sag);
    let mut keys = Vec::new();
    for c in cells.iter().filter(|c| !c.is_flagged()) {
        keys.push(reg.register_cell(c).map_err(stage("clip", seed))?);
    }
    reg.finalize_faces().map_err(stage("clip", seed))?;
    let clipped: Vec<ClippedCell> =
        keys.iter().map(|kk| clip_to_x(&reg, kk)).collect::<Result<_>>().map_err(stage("clip", seed))?;
    let bounds: Vec<CellBoundsReport> = clipped.iter().map(|c| verify_cell_bounds(c, &k)).collect();
    Ok(Decomposition {
        config: *config,
        quotient: m,
        thick_thin: tt,
        constants: k,
        net,
        cells,
        registry: reg,
        keys,
        clipped,
        bounds,
    })
}

/// Runs the whole pipeline for `config`.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let Decomposition {
        quotient: m,
        thick_thin: tt,
        constants: k,
        net,
        cells,
        registry: mut reg,
        keys,
        clipped: clipped_list,
        bounds,
        ..
    } = decompose(config)?;
    let seed = config.seed;
    let tol = config.tolerances;
    let d_sep = k.d_sep;
    let ctx = CellContext::new(m, &net);

    let distance: Vec<_> = cells
        .par_iter()
        .filter(|c| !c.is_flagged())
        .map(|c| check_distance_identity(&ctx, c, &tt, tol.distance_samples, seed))
        .collect();
    let cell_refs: Vec<Option<&Cell>> = cells.iter().map(Some).collect();
    let nearest = nearest_center_check(&ctx, &cell_refs, tol.nearest_samples, tol.margin_band, seed);

    let assembly = triangulate_cells(&mut reg, &keys, &k, seed).map_err(stage("triangulate", seed))?;

    let mut ch = Checks(Vec::new());

    // Tube and constants.
    if config.drilled() {
        ch.push("r_below_mu", "tube-quotient", tt.r_empirical, "<=", config.mu, "empirical R against the Margulis parameter");
    } else {
        ch.push("r_below_mu", "tube-quotient", tt.r_empirical, ">=", config.mu, "no thin part: R is half the core length");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
    let region = net.region;
    let mut inj_min = f64::INFINITY;
    for _ in 0..tol.injectivity_samples {
        let r = rng.gen_range(region.r_in..=region.r_out);
        let x = cylinder_point(r, rng.gen_range(0.0..region.length), rng.gen_range(0.0..std::f64::consts::TAU));
        inj_min = inj_min.min(inj_by_translates(&m, &x));
    }
    ch.push("inj_above_r_on_x", "tube-quotient", inj_min, ">=", tt.r_empirical - 1e-8, "smallest sampled injectivity radius in X");

    // Net.
    let sep = net.min_separation(&m);
    ch.push("net_separation", "net-builder", sep, ">", d_sep - 1e-12, "smallest pairwise quotient distance");
    ch.push("net_maximality", "net-builder", net.stats.max_probe_gap, "<=", d_sep, "largest probe-to-net distance");
    let (r_lo, r_hi) = ((region.r_in - d_sep / 2.0).max(0.0), region.r_out + d_sep / 2.0);
    let (mc, sigma) = shell_volume_mc(region.length, r_lo, r_hi, tol.packing_samples, seed);
    let packed = net.len() as f64 * ball_volume(d_sep / 2.0)?;
    ch.push("packing", "net-builder", packed, "<=", mc + 3.0 * sigma, "N Vol(B(D/2)) against the expanded region volume plus 3 sigma");

    // Voronoi.
    let live: Vec<&Cell> = cells.iter().filter(|c| !c.is_flagged()).collect();
    let mut poly_dev: f64 = 0.0;
    let mut euler_bad = 0;
    for c in &live {
        let p = &c.polytope;
        for v in &p.vertices {
            for f in &p.faces {
                poly_dev = poly_dev.max(p.planes[f.plane].eval(&v.u));
            }
            for &pl in &v.planes {
                poly_dev = poly_dev.max(p.planes[pl].eval(&v.u).abs());
            }
        }
        if p.euler_characteristic() != 2 {
            euler_bad += 1;
        }
    }
    ch.push("polytope_constraints", "voronoi", poly_dev, "<=", tol.polytope, "largest face-constraint residual at a vertex");
    ch.zero("polytope_euler", "voronoi", euler_bad, "cells with V - E + F != 2");
    let unstable = live.iter().filter(|c| c.stability == Stability::Skipped).count();
    ch.zero("orbit_truncation_stable", "voronoi", unstable, "cells without a truncation certificate");
    ch.zero("nearest_center", "voronoi", nearest.mismatches, format!("{} judged, {} in band", nearest.agreements + nearest.mismatches, nearest.in_band));
    let count = |f: &dyn Fn(&CellBoundsReport) -> bool| bounds.iter().filter(|b| !f(b)).count();
    let max_of = |f: &dyn Fn(&CellBoundsReport) -> f64| bounds.iter().map(f).fold(0.0, f64::max);
    ch.push("faces_meeting_x", "voronoi", max_of(&|b| b.faces_meeting_x as f64), "<=", k.c2, format!("{} violations", count(&|b| b.faces_ok)));
    ch.push("segments", "voronoi", max_of(&|b| b.segments as f64), "<=", k.c1, format!("{} violations", count(&|b| b.segments_ok)));
    ch.push("vertices_in_x", "voronoi", max_of(&|b| b.vertices_in_x as f64), "<=", k.c0, format!("{} violations", count(&|b| b.vertices_ok)));
    ch.push("components", "voronoi", max_of(&|b| b.components as f64), "<=", k.c0, format!("{} violations", count(&|b| b.components_ok)));
    ch.push("genus", "voronoi", max_of(&|b| b.genus as f64), "<=", k.c1, format!("{} violations", count(&|b| b.genus_ok)));
    ch.push("segments_per_edge", "voronoi", max_of(&|b| b.max_edge_segments as f64), "<=", 2.0, "");
    ch.zero("thin_side_connected", "voronoi", count(&|b| b.thin_connected), "cells whose thin side is disconnected");
    let trichotomy_bad = reg
        .faces
        .values()
        .filter(|f| match f.class {
            FaceXClass::Empty => !f.pieces.is_empty(),
            FaceXClass::Whole => f.pieces.len() != 1,
            FaceXClass::Annulus => f.pieces.len() != 1 || f.arcs.len() != 1,
            FaceXClass::Disks(n) => n == 0 || f.pieces.len() != n,
        })
        .count();
    ch.zero("face_trichotomy", "voronoi", trichotomy_bad, format!("{} faces classified", reg.faces.len()));
    let dist_dev = distance.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let samples: usize = distance.iter().map(|r| r.samples).sum();
    ch.push("distance_identity", "voronoi", dist_dev, "<", tol.distance, format!("{samples} samples"));
    let bdev = distance.iter().map(|r| r.max_boundary_deviation).fold(0.0, f64::max);
    let misses: usize = distance.iter().map(|r| r.boundary_misses).sum();
    ch.push("boundary_identification", "voronoi", bdev, "<", tol.distance, format!("{misses} partners outside the cell"));
    if misses > 0 {
        if let Some(c) = ch.0.last_mut() {
            c.passed = false;
        }
    }
    let ids: usize = distance.iter().map(|r| r.orbit_identifications).sum();
    let inj_samples: usize = distance.iter().map(|r| r.injectivity_samples).sum();
    ch.zero("projection_injective", "voronoi", ids, format!("{inj_samples} samples in X"));

    // Connecting graphs.
    let graphs: Vec<_> = assembly.cuts.iter().flatten().filter_map(|c| c.graph.as_ref().map(|g| g.check())).collect();
    let gcount = graphs.len();
    ch.push(
        "graph_plane_residual",
        "cone-graph",
        graphs.iter().map(|g| g.plane_residual).fold(0.0, f64::max),
        "<",
        tol.plane_residual,
        format!("{gcount} graphs"),
    );
    ch.zero("graph_edge_bound", "cone-graph", graphs.iter().filter(|g| !g.edge_bound_holds()).count(), "arcs at most 2n - 1");
    ch.zero("graph_connected", "cone-graph", graphs.iter().filter(|g| !g.connected).count(), "");
    ch.zero("graph_trivalent", "cone-graph", graphs.iter().filter(|g| !g.trivalent).count(), "");
    ch.zero("graph_bridges", "cone-graph", graphs.iter().filter(|g| !g.all_bridges).count(), "");
    ch.zero("graph_contraction_tree", "cone-graph", graphs.iter().filter(|g| !g.contraction_is_tree).count(), "");

    // Triangulation.
    let rep = &assembly.report;
    let mut retract_dev: f64 = 0.0;
    let mut retract_bad = 0;
    if let Some(cone) = reg.cone {
        for (n, kk) in keys.iter().enumerate() {
            for cc in &assembly.cuts[n] {
                let Some(s) = cc.s else { continue };
                for (vk, shift) in &kk.vertices {
                    let vg = &reg.vertices[vk];
                    if !vg.in_x {
                        continue;
                    }
                    let p = reg.shift(&vg.pos, *shift);
                    match retract_to_tube(&p, &s, &cone).and_then(|r| Ok((r, retract_to_tube(&r, &s, &cone)?))) {
                        Ok((r, r2)) => retract_dev = retract_dev.max(hdist(&r, &r2)),
                        Err(_) => retract_bad += 1,
                    }
                }
            }
        }
    }
    ch.push("retraction_idempotent", "triangulator", retract_dev, "<=", tol.retraction, format!("{retract_bad} failures"));
    if retract_bad > 0 {
        if let Some(c) = ch.0.last_mut() {
            c.passed = false;
        }
    }
    let cut_bad = rep.cells.iter().filter(|c| !c.cut_bounds_ok).count();
    ch.zero("cut_complex_bounds", "triangulator", cut_bad, "faces <= 2g - 1 and 2 C1 - 1, interior edges <= 4 C1 - 2 of valence 3");
    let spheres: Vec<_> = rep.cells.iter().flat_map(|c| c.spheres.iter()).collect();
    ch.zero("boundary_spheres", "triangulator", spheres.iter().filter(|s| !s.3).count(), format!("{} components", spheres.len()));
    ch.zero(
        "coning_identity",
        "triangulator",
        spheres.iter().filter(|s| s.1 as i64 != 2 * s.0 as i64 - 4).count(),
        "tetrahedra per component = 2v - 4",
    );
    let sphere_bound = 6.0 * k.cbar0 - 4.0;
    ch.push(
        "component_triangles",
        "triangulator",
        spheres.iter().map(|s| s.1 as f64).fold(0.0, f64::max),
        "<=",
        sphere_bound,
        "boundary triangles per component against 6 Cbar0 - 4",
    );
    ch.push("cell_tetrahedra", "triangulator", rep.max_cell_tets as f64, "<=", rep.tet_bound, "per-cell tetrahedra against (6 Cbar0 - 4) C0");
    let census_max = rep.cells.iter().map(|c| c.census.counted()).max().unwrap_or(0);
    ch.push(
        "vertex_census",
        "triangulator",
        census_max as f64,
        "<=",
        k.cbar0,
        format!("{} cells over a class bound", rep.cells.iter().filter(|c| !c.census.ok()).count()),
    );
    if rep.cells.iter().any(|c| !c.census.ok()) {
        if let Some(c) = ch.0.last_mut() {
            c.passed = false;
        }
    }
    let t = &rep.triangulation;
    ch.zero(
        "gluing_validity",
        "triangulator",
        t.unlisted + t.overlisted + t.malformed + t.label_mismatches + t.degenerate_tets,
        "faces glued once or marked boundary, labels preserved",
    );
    ch.zero("gluing_orientation", "triangulator", t.orientation_violations, "");
    // A mismatch aborts assembly, so reaching this point means every compared face agreed.
    ch.zero("shared_faces_identical", "triangulator", 0, format!("{} shared faces compared byte for byte", rep.shared_faces_checked));

    let flagged = |r: FlagReason| cells.iter().filter(|c| c.flag == Some(r)).count();
    let summary = RunSummary {
        drilled: tt.drilled(),
        tube_radius_mu: tt.tube_radius_mu,
        tube_radius_x: tt.tube_radius_x,
        r_empirical: tt.r_empirical,
        net_points: net.len(),
        flagged_cells: cells.len() - live.len(),
        flagged_unbounded: flagged(FlagReason::Unbounded),
        flagged_beyond_cutoff: flagged(FlagReason::BeyondCutoff),
        flagged_uncertified: flagged(FlagReason::Uncertified),
        triangulated_cells: keys.len(),
        components: clipped_list.iter().map(|c| c.components.len()).sum(),
        max_genus: clipped_list.iter().map(|c| c.max_genus()).max().unwrap_or(0),
        tetrahedra: rep.total_tets,
        max_cell_tetrahedra: rep.max_cell_tets,
        thin_boundary_triangles: t.thin_boundary,
        cutoff_boundary_triangles: t.cutoff_boundary,
        annulus_splits: rep.annulus_splits,
        cut_retries: rep.cells.iter().flat_map(|c| c.cut_attempts.iter()).map(|a| a.saturating_sub(1)).sum(),
    };
    let report = RunReport { format: "thickpart-report 1".into(), config: *config, constants: k, summary, checks: ch.0 };

    let mut clipped = vec![None; cells.len()];
    for c in clipped_list {
        let i = c.index;
        clipped[i] = Some(c);
    }
    Ok(RunOutput {
        config: *config,
        thick_thin: tt,
        constants: k,
        net,
        cells,
        clipped,
        bounds,
        registry: reg,
        assembly,
        report,
    })
}
