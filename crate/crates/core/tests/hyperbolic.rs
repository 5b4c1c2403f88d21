use num_complex::Complex64;
use proptest::prelude::*;
use thickpart_core::hyperbolic::{
    ball_volume, bisector, cylinder_coords, cylinder_point, dist, dist_to_geodesic, hdist, Geodesic, HVec, Isometry,
    Lorentz, PointKlein, PointUHS,
};
use thickpart_core::oracle::simpson;

fn point() -> impl Strategy<Value = PointUHS> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.05..5.0f64).prop_map(|(x, y, z)| PointUHS::new(x, y, z).unwrap())
}

fn isometry() -> impl Strategy<Value = Isometry> {
    prop::array::uniform4((-2.0..2.0f64, -2.0..2.0f64))
        .prop_filter("invertible", |m| {
            let c = |k: usize| Complex64::new(m[k].0, m[k].1);
            (c(0) * c(3) - c(1) * c(2)).norm() > 0.1
        })
        .prop_map(|m| {
            let c = |k: usize| Complex64::new(m[k].0, m[k].1);
            Isometry::normalized(c(0), c(1), c(2), c(3)).unwrap()
        })
}

proptest! {
    #[test]
    fn mobius_maps_preserve_distance(p in point(), q in point(), g in isometry()) {
        let d0 = dist(&p, &q);
        let d1 = dist(&g.apply(&p), &g.apply(&q));
        prop_assert!((d0 - d1).abs() <= 1e-8 * (1.0 + d0));
    }

    #[test]
    fn models_agree_on_distance(p in point(), q in point()) {
        let a = dist(&p, &q);
        let b = hdist(&p.to_hyperboloid(), &q.to_hyperboloid());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
    }

    #[test]
    fn bisector_points_are_equidistant(p in point(), q in point(), t in 0.0..1.0f64) {
        prop_assume!(dist(&p, &q) > 1e-3);
        let b = bisector(&p, &q).unwrap();
        // The hyperbolic midpoint lies on the bisector and the centers lie on opposite sides.
        let m = thickpart_core::hyperbolic::geodesic_lerp(&p.to_hyperboloid(), &q.to_hyperboloid(), 0.5);
        let mp = PointUHS::from_hyperboloid(&m);
        prop_assert!((dist(&mp, &p) - dist(&mp, &q)).abs() < 1e-9);
        prop_assert!(b.side(&p) * b.side(&q) < 0.0);
        let x = PointUHS::from_hyperboloid(&thickpart_core::hyperbolic::geodesic_lerp(&p.to_hyperboloid(), &q.to_hyperboloid(), t));
        let closer_to_p = dist(&x, &p) < dist(&x, &q);
        prop_assert!(closer_to_p == (b.side(&x) * b.side(&p) > 0.0) || (dist(&x, &p) - dist(&x, &q)).abs() < 1e-9);
    }

    #[test]
    fn cylinder_coordinates_round_trip(r in 0.01..3.0f64, t in -2.0..2.0f64, phi in -3.0..3.0f64) {
        let (r2, t2, phi2) = cylinder_coords(&cylinder_point(r, t, phi));
        prop_assert!((r - r2).abs() < 1e-10 && (t - t2).abs() < 1e-10 && (phi - phi2).abs() < 1e-10);
        let p = PointUHS::from_cylinder(r, t, phi);
        prop_assert!((dist_to_geodesic(&p, &Geodesic::vertical_axis()) - r).abs() < 1e-9);
    }

    #[test]
    fn klein_chart_round_trips(p in point()) {
        let k = p.to_klein();
        let back = PointKlein::new(k.u).unwrap().to_uhs();
        prop_assert!(dist(&p, &back) < 1e-8);
    }

    #[test]
    fn loxodromic_matches_in_both_models(p in point(), l in 0.01..2.0f64, th in -3.0..3.0f64) {
        let a = Isometry::loxodromic(l, th).apply(&p);
        let b = PointUHS::from_hyperboloid(&Lorentz::loxodromic(l, th).apply(&p.to_hyperboloid()));
        prop_assert!(dist(&a, &b) < 1e-9);
        prop_assert!((dist_to_geodesic(&p, &Geodesic::vertical_axis()) - dist_to_geodesic(&a, &Geodesic::vertical_axis())).abs() < 1e-8);
    }
}

#[test]
fn ball_volume_matches_quadrature() {
    for k in 0..=30 {
        let r = 0.1 * k as f64;
        let q = simpson(&|t: f64| 4.0 * std::f64::consts::PI * t.sinh().powi(2), 0.0, r, 1e-13);
        let v = ball_volume(r).unwrap();
        assert!((v - q).abs() <= 1e-10 * (1.0 + q), "r = {r}: {v} vs {q}");
    }
    assert!(ball_volume(-1.0).is_err());
}

#[test]
fn far_apart_points_keep_their_distance() {
    let x = cylinder_point(0.5, 0.0, 1.0);
    for t in [10.0, 50.0, 200.0] {
        let y = cylinder_point(0.5, t, 1.0);
        let d = hdist(&x, &y);
        // Same radius and angle: cosh d = cosh^2 r cosh t - sinh^2 r.
        let expected = (0.5f64.cosh().powi(2) * t.cosh() - 0.5f64.sinh().powi(2)).acosh();
        assert!((d - expected).abs() < 1e-9 * expected, "t = {t}: {d} vs {expected}");
    }
}

#[test]
fn invalid_points_are_rejected() {
    assert!(PointUHS::new(0.0, 0.0, 0.0).is_err());
    assert!(PointUHS::new(0.0, 0.0, -1.0).is_err());
    assert!(PointKlein::new([1.0, 0.0, 0.0]).is_err());
    assert!(Isometry::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).is_err());
    let z = HVec::new(1.0, 0.0, 0.0, 0.0);
    assert!(hdist(&z, &z) == 0.0);
}
