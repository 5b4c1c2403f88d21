use thickpart_core::hyperbolic::{cylinder_coords, cylinder_point, hdist, PointUHS};
use thickpart_core::oracle::{inj_by_translates, inj_oracle};
use thickpart_core::quotient::{ThickThinData, TubeQuotient};

#[test]
fn injectivity_radius_matches_brute_force_translates() {
    for (l, th) in [(0.1, 0.3), (0.05, 1.0), (0.8, -2.0), (1.5, 0.0)] {
        let m = TubeQuotient::new(l, th).unwrap();
        let rep = inj_oracle(&m, 40, 400, 5);
        assert!(rep.passed(), "{l} {th}: {:?}", rep.counterexamples);
    }
}

#[test]
fn injectivity_radius_grows_with_the_tube_radius() {
    let m = TubeQuotient::new(0.1, 0.3).unwrap();
    let mut last = 0.0;
    for k in 0..40 {
        let v = m.inj_at_radius(0.1 * k as f64);
        assert!(v >= last - 1e-12);
        last = v;
    }
    assert!((m.inj_at_radius(0.0) - 0.05).abs() < 1e-12);
}

#[test]
fn thick_tube_radius_solves_inj_equals_mu() {
    let m = TubeQuotient::new(0.1, 0.3).unwrap();
    let r = m.thick_tube_radius(0.5).unwrap();
    assert!((m.inj_at_radius(r) - 0.5).abs() < 1e-9);
    let tt = ThickThinData::compute(&m, 0.5, 0.3).unwrap();
    assert!(tt.drilled());
    assert!((tt.tube_radius_x - (r - 0.3)).abs() < 1e-12);
    assert!(tt.r_empirical <= 0.5 && tt.r_empirical > 0.0);
    assert!(tt.in_x(&cylinder_point(tt.tube_radius_x + 1e-6, 0.0, 0.0)));
    assert!(!tt.in_x(&cylinder_point(tt.tube_radius_x * 0.5, 0.0, 0.0)));
}

#[test]
fn short_enough_mu_leaves_no_thin_part() {
    let m = TubeQuotient::new(1.2, 0.3).unwrap();
    let tt = ThickThinData::compute(&m, 0.5, 0.4).unwrap();
    assert!(!tt.drilled());
    assert_eq!(tt.tube_radius_mu, 0.0);
    assert_eq!(tt.r_empirical, 0.6);
}

#[test]
fn quotient_distance_is_the_orbit_minimum() {
    let m = TubeQuotient::new(0.3, 0.7).unwrap();
    let p = cylinder_point(0.4, 0.1, 0.2);
    let q = cylinder_point(0.9, 2.3, -1.0);
    let (d, n) = m.quotient_dist_h(&p, &q);
    let brute = (-50..=50).map(|k| hdist(&p, &m.translate(&q, k))).fold(f64::INFINITY, f64::min);
    assert!((d - brute).abs() < 1e-12);
    assert!((hdist(&p, &m.translate(&q, n)) - d).abs() < 1e-12);
    let (d2, _) = m.quotient_dist_h(&q, &p);
    assert!((d - d2).abs() < 1e-12);
    let pu = PointUHS::from_hyperboloid(&p);
    let qu = PointUHS::from_hyperboloid(&q);
    assert!((m.quotient_dist(&pu, &qu) - d).abs() < 1e-12);
}

#[test]
fn reduce_lands_in_one_period() {
    let m = TubeQuotient::new(0.25, 0.4).unwrap();
    for t in [-3.7, -0.25, 0.0, 0.1, 0.25, 5.01] {
        let x = cylinder_point(0.6, t, 0.3);
        let (y, k) = m.reduce(&x);
        let (_, ty, _) = cylinder_coords(&y);
        assert!((0.0..0.25).contains(&ty), "t = {t} reduced to {ty}");
        assert!(hdist(&m.translate(&y, k), &x) < 1e-9);
    }
    assert!((inj_by_translates(&m, &cylinder_point(0.0, 0.0, 0.0)) - 0.125).abs() < 1e-12);
}

#[test]
fn bad_parameters_are_rejected() {
    assert!(TubeQuotient::new(0.0, 0.1).is_err());
    assert!(TubeQuotient::new(0.1, 4.0).is_err());
    let m = TubeQuotient::new(0.1, 0.3).unwrap();
    assert!(m.thick_tube_radius(-1.0).is_err());
    assert!(m.x_tube_radius(0.5, 0.0).is_err());
}
