use thickpart_core::hyperbolic::{ball_volume, cylinder_coords, cylinder_point};
use thickpart_core::net::{build_net, constants, shell_volume, shell_volume_mc, Net, NetParams, Region};
use thickpart_core::quotient::{ThickThinData, TubeQuotient};

fn setup() -> (TubeQuotient, ThickThinData, f64) {
    let m = TubeQuotient::new(0.5, 0.3).unwrap();
    let tt = ThickThinData::compute(&m, 0.4, 0.4).unwrap();
    let k = constants(tt.r_empirical, 0.4).unwrap();
    (m, tt, k.d_sep)
}

#[test]
fn net_is_separated_maximal_and_inside_the_region() {
    let (m, tt, d) = setup();
    let net = build_net(&m, &tt, d, &NetParams::default()).unwrap();
    assert!(net.len() > 10);
    assert!(net.min_separation(&m) > d);
    assert!(net.stats.max_probe_gap <= d);
    for x in &net.lifts {
        let (r, t, _) = cylinder_coords(x);
        assert!(net.region.contains_radius(r));
        assert!((0.0..m.length).contains(&t));
    }
    // Packing: disjoint D/2 balls fit in the D/2-expanded shell.
    let r = net.region;
    let room = shell_volume(r.length, (r.r_in - d / 2.0).max(0.0), r.r_out + d / 2.0);
    assert!(net.len() as f64 * ball_volume(d / 2.0).unwrap() <= room);
}

#[test]
fn nets_are_deterministic_in_the_seed() {
    let (m, tt, d) = setup();
    let a = build_net(&m, &tt, d, &NetParams::default()).unwrap();
    let b = build_net(&m, &tt, d, &NetParams::default()).unwrap();
    assert_eq!(a, b);
    let c = build_net(&m, &tt, d, &NetParams { seed: 99, ..NetParams::default() }).unwrap();
    assert_ne!(a.lifts, c.lifts);
}

#[test]
fn explicit_point_sets_are_checked_for_separation() {
    let (m, tt, d) = setup();
    let region = Region::new(&m, &tt, d, 4.0);
    let far = [cylinder_point(tt.tube_radius_x + 0.1, 0.0, 0.0), cylinder_point(tt.tube_radius_x + 0.1, 0.0, 3.0)];
    let net = Net::from_points(&m, region, d, &far).unwrap();
    assert_eq!(net.len(), 2);
    let near = [far[0], cylinder_point(tt.tube_radius_x + 0.1, 0.01, 0.0)];
    assert!(Net::from_points(&m, region, d, &near).is_err());
    // A translate of a point is the same point of the quotient.
    let orbit = [far[0], m.translate(&far[0], 3)];
    assert!(Net::from_points(&m, region, d, &orbit).is_err());
}

#[test]
fn monte_carlo_shell_volume_matches_the_closed_form() {
    let (mean, sigma) = shell_volume_mc(0.3, 0.4, 1.6, 200_000, 3);
    let exact = shell_volume(0.3, 0.4, 1.6);
    assert!((mean - exact).abs() <= 4.0 * sigma, "{mean} +- {sigma} vs {exact}");
}

#[test]
fn separation_is_the_smaller_of_r_and_d() {
    assert_eq!(constants(0.3, 0.4).unwrap().d_sep, 0.3);
    assert_eq!(constants(0.5, 0.2).unwrap().d_sep, 0.2);
    assert!(constants(0.0, 0.2).is_err());
    let k = constants(0.4, 0.4).unwrap();
    assert!(k.c3 > 0.0 && k.c2 > 1.0 && k.c1 < k.c0 && k.c0 < k.cbar0 && k.k == k.c * k.c);
}
