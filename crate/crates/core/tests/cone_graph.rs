use thickpart_core::cone_graph::{build_graph, curves_disjoint, random_curve_system, CylCurve};
use thickpart_core::hyperbolic::cylinder_point;
use thickpart_core::tube::TubeCone;

fn circle(t: f64) -> CylCurve {
    CylCurve::new((0..40).map(|i| (t, std::f64::consts::TAU * i as f64 / 40.0)).collect(), true)
}

#[test]
fn single_curve_needs_no_arcs() {
    let cone = TubeCone::new(0.5);
    let g = build_graph(&cone, &cylinder_point(0.2, 0.0, 0.0), vec![circle(0.0)], 1e-6, 1).unwrap();
    assert!(g.arcs.is_empty());
    let r = g.check();
    assert!(r.ok(), "{r:?}");
}

#[test]
fn two_circles_are_joined_by_one_bridge() {
    let cone = TubeCone::new(0.5);
    let s = cylinder_point(0.25, 0.1, 0.4);
    let g = build_graph(&cone, &s, vec![circle(0.0), circle(0.3)], 1e-6, 2).unwrap();
    let r = g.check();
    assert_eq!(r.arcs, 1);
    assert!(r.ok(), "{r:?}");
}

#[test]
fn random_systems_satisfy_all_graph_properties() {
    let cone = TubeCone::new(0.5);
    let mut max_arcs = 0;
    for seed in 0..100u64 {
        let n = (seed % 7) as usize;
        let (curves, s) = random_curve_system(0.5, n, seed);
        assert!(curves_disjoint(&cone, &curves), "seed {seed}");
        let g = build_graph(&cone, &s, curves, 1e-6, seed).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let r = g.check();
        assert!(r.ok(), "seed {seed}: {r:?} {:?}", g.stats);
        max_arcs = max_arcs.max(r.arcs);
    }
    assert!(max_arcs > 0);
}
