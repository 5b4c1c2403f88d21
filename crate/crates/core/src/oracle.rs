//! Brute-force and quadrature cross-checks of the closed forms used by the pipeline.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone_graph::tree::tree_edge_bound_oracle;
use crate::hyperbolic::{ball_volume, cylinder_point, hdist, HVec, PointUHS};
use crate::quotient::TubeQuotient;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub counterexamples: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// All labeled trees on up to `max_vertices` vertices against `|E| <= 2k - 3`.
pub fn tree_oracle(max_vertices: usize) -> OracleReport {
    let r = tree_edge_bound_oracle(max_vertices);
    let mut counterexamples = Vec::new();
    if r.violations > 0 {
        counterexamples.push(format!("{} trees with more than 2k - 3 edges", r.violations));
    }
    OracleReport { name: "tree".into(), cases: r.trees as usize, max_deviation: 0.0, counterexamples }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `eps`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, eps, 50)
}

/// Ball volumes on `radii` against quadrature of `4 pi sinh^2`.
pub fn volume_oracle(radii: &[f64], tol: f64) -> OracleReport {
    let mut rep = OracleReport { name: "volume".into(), cases: 0, max_deviation: 0.0, counterexamples: vec![] };
    for &r in radii {
        let q = simpson(&|t: f64| 4.0 * PI * t.sinh().powi(2), 0.0, r, 1e-13);
        let dev = match ball_volume(r) {
            Ok(v) => (v - q).abs(),
            Err(_) => f64::INFINITY,
        };
        rep.cases += 1;
        rep.max_deviation = rep.max_deviation.max(dev);
        if !(dev < tol) {
            rep.counterexamples.push(format!("r = {r}: closed form and quadrature differ by {dev}"));
        }
    }
    rep
}

/// Half the smallest displacement of `x` under nontrivial powers of the holonomy, walking
/// powers until `n l` exceeds twice the best value found.
pub fn inj_by_translates(m: &TubeQuotient, x: &HVec) -> f64 {
    let mut best = f64::INFINITY;
    let mut n = 1i64;
    while (n as f64) * m.length <= 2.0 * best {
        best = best.min(0.5 * hdist(x, &m.translate(x, n)));
        n += 1;
    }
    best
}

/// Truncated injectivity radius against a sweep over `1 <= |n| <= max_power`.
pub fn inj_oracle(m: &TubeQuotient, samples: usize, max_power: i64, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = OracleReport { name: "inj".into(), cases: 0, max_deviation: 0.0, counterexamples: vec![] };
    for _ in 0..samples {
        let x = cylinder_point(rng.gen_range(0.0..2.0), rng.gen_range(0.0..m.length), rng.gen_range(0.0..2.0 * PI));
        let fast = m.inj_radius(&PointUHS::from_hyperboloid(&x));
        let mut brute = f64::INFINITY;
        for n in 1..=max_power {
            brute = brute.min(0.5 * hdist(&x, &m.translate(&x, n))).min(0.5 * hdist(&x, &m.translate(&x, -n)));
        }
        let dev = (fast - brute).abs();
        rep.cases += 1;
        rep.max_deviation = rep.max_deviation.max(dev);
        if dev > 1e-9 * brute.max(1.0) {
            rep.counterexamples.push(format!("point {x:?}: truncated {fast}, brute force {brute}"));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_a_cubic() {
        let v = simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
    }
}
