use thickpart_core::hyperbolic::{cylinder_point, hdist};
use thickpart_core::pipeline::{run, RunConfig};
use thickpart_core::triangulator::{cone_sphere, random_sphere, retract_to_tube, BoundaryKind};
use thickpart_core::tube::TubeCone;

#[test]
fn random_spheres_are_spheres() {
    for n in [4, 5, 9, 40] {
        let s = random_sphere(n, n as u64).unwrap();
        let c = s.check();
        assert!(c.is_sphere(), "{n}: {c:?}");
        assert_eq!(c.vertices, n);
        assert_eq!(c.faces, 2 * n - 4);
    }
    assert!(random_sphere(3, 0).is_err());
}

#[test]
fn coning_a_sphere_gives_a_ball() {
    let s = random_sphere(12, 3).unwrap();
    let t = cone_sphere(&s, None).unwrap();
    let rep = t.validate();
    assert!(rep.valid(), "{rep:?}");
    assert_eq!(rep.tets, 20);
    assert_eq!(rep.gluings, 30);
    assert_eq!(rep.thin_boundary, 20);
    assert_eq!(rep.euler_characteristic, 1);
    assert!(t.boundary.iter().all(|b| b.1 == 0 && b.2 == BoundaryKind::Thin));
}

#[test]
fn validation_catches_broken_gluings() {
    let s = random_sphere(8, 1).unwrap();
    let good = cone_sphere(&s, None).unwrap();

    let mut even = good.clone();
    let g = &mut even.gluings[0];
    let free: Vec<usize> = (0..4).filter(|&k| k != g.a.1 as usize).collect();
    g.perm.swap(free[0], free[1]);
    let rep = even.validate();
    assert!(rep.orientation_violations > 0 && rep.label_mismatches > 0);

    let mut missing = good.clone();
    missing.gluings.pop();
    assert_eq!(missing.validate().unlisted, 2);

    let mut doubled = good.clone();
    doubled.boundary.push(doubled.boundary[0]);
    assert_eq!(doubled.validate().overlisted, 1);
}

#[test]
fn retraction_lands_on_the_tube_and_is_idempotent() {
    let cone = TubeCone::new(0.7);
    let s = cylinder_point(0.2, 0.3, 1.0);
    for (r, t, phi) in [(1.5, 0.0, 0.0), (0.7000001, 2.0, -1.0), (3.0, -1.0, 2.5)] {
        let p = cylinder_point(r, t, phi);
        let q = retract_to_tube(&p, &s, &cone).unwrap();
        assert!(cone.level(&q).abs() < 1e-9);
        let q2 = retract_to_tube(&q, &s, &cone).unwrap();
        assert!(hdist(&q, &q2) < 1e-9);
        // The image lies on the segment toward the center.
        assert!((hdist(&p, &q) + hdist(&q, &s) - hdist(&p, &s)).abs() < 1e-9);
    }
    assert!(retract_to_tube(&s, &s, &cone).is_err());
    assert!(retract_to_tube(&cylinder_point(2.0, 0.0, 0.0), &cylinder_point(1.0, 0.0, 0.0), &cone).is_err());
}

#[test]
fn thin_tube_run_with_cutting_graphs() {
    let cfg = RunConfig { length: 0.8, twist: 0.5, mu: 0.45, d: 0.4, seed: 11, ..RunConfig::default() };
    let o = run(&cfg).unwrap();
    assert!(o.report.passed(), "{}", o.report.to_text());
    let graphs = o.assembly.cuts.iter().flatten().filter(|c| c.graph.is_some()).count();
    assert!(graphs > 0);
    assert!(o.assembly.cuts.iter().flatten().all(|c| c.interior_valences_ok()));
    let rep = o.assembly.triangulation.validate();
    assert!(rep.valid(), "{rep:?}");
    assert!(rep.thin_boundary > 0);
}
