//! Maximal separated nets in the drilled region and the derived constants.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{ball_volume, cylinder_coords, cylinder_point, HVec, PointUHS};
use crate::quotient::{ThickThinData, TubeQuotient};

/// Fundamental region of the truncated drilled shell: one period along the axis,
/// tube radius in `[r_in, r_out]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub length: f64,
    pub twist: f64,
    pub r_in: f64,
    pub r_out: f64,
}

impl Region {
    pub fn new(m: &TubeQuotient, tt: &ThickThinData, d_sep: f64, outer_cutoff_multiplier: f64) -> Self {
        Region {
            length: m.length,
            twist: m.twist,
            r_in: tt.tube_radius_x,
            r_out: tt.tube_radius_x + outer_cutoff_multiplier * d_sep,
        }
    }

    /// Exact volume of the shell per period.
    pub fn volume(&self) -> f64 {
        shell_volume(self.length, self.r_in, self.r_out)
    }

    pub fn contains_radius(&self, r: f64) -> bool {
        r >= self.r_in && r <= self.r_out
    }
}

/// Volume of `{r_in <= r <= r_out}` per axial period `length`.
pub fn shell_volume(length: f64, r_in: f64, r_out: f64) -> f64 {
    PI * length * (r_out.sinh().powi(2) - r_in.sinh().powi(2))
}

/// Tuning knobs for net construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub sample_budget: usize,
    pub seed: u64,
    pub outer_cutoff_multiplier: f64,
    /// Probe grid spacing as a fraction of `D`.
    pub probe_spacing: f64,
}

impl Default for NetParams {
    fn default() -> Self {
        NetParams { sample_budget: 20_000, seed: 7, outer_cutoff_multiplier: 4.0, probe_spacing: 0.1 }
    }
}

/// A `D`-separated set in the quotient, stored as lifts with axial coordinate in `[0, length)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub points: Vec<PointUHS>,
    pub lifts: Vec<HVec>,
    pub d_sep: f64,
    pub seed: u64,
    pub region: Region,
    pub stats: NetStats,
}

/// Bookkeeping from the maximality certificate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NetStats {
    pub candidates: usize,
    pub candidate_insertions: usize,
    pub probes: usize,
    pub probe_insertions: usize,
    pub probe_spacing: f64,
    /// Largest distance from a probe to its nearest net point.
    pub max_probe_gap: f64,
}

impl Net {
    /// Wraps an explicit point set after checking separation and region membership.
    pub fn from_points(m: &TubeQuotient, region: Region, d_sep: f64, points: &[HVec]) -> Result<Self> {
        if !(d_sep > 0.0) {
            return Err(Error::InvalidParameter("separation must be positive".into()));
        }
        let mut lifts = Vec::with_capacity(points.len());
        for p in points {
            let (y, _) = m.reduce(p);
            lifts.push(y);
        }
        for a in 0..lifts.len() {
            for b in (a + 1)..lifts.len() {
                let (dq, _) = m.quotient_dist_h(&lifts[a], &lifts[b]);
                if dq <= d_sep {
                    return Err(Error::InvalidParameter(format!("points {a} and {b} are not separated ({dq})")));
                }
            }
        }
        let points = lifts.iter().map(PointUHS::from_hyperboloid).collect();
        Ok(Net { points, lifts, d_sep, seed: 0, region, stats: NetStats::default() })
    }

    pub fn len(&self) -> usize {
        self.lifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifts.is_empty()
    }

    /// Minimum pairwise quotient distance (infinite for a single point).
    pub fn min_separation(&self, m: &TubeQuotient) -> f64 {
        let n = self.lifts.len();
        (0..n)
            .into_par_iter()
            .map(|a| {
                let mut best = f64::INFINITY;
                for b in (a + 1)..n {
                    best = best.min(m.quotient_dist_h(&self.lifts[a], &self.lifts[b]).0);
                }
                // Self-translates also count as distinct points of the lift set.
                best
            })
            .reduce(|| f64::INFINITY, f64::min)
    }
}

/// Spatial hash over translates of net points, keyed on hyperboloid spatial coordinates.
struct NetIndex {
    cell: f64,
    cosh_d: f64,
    span: i64,
    buckets: HashMap<[i64; 3], Vec<HVec>>,
}

impl NetIndex {
    fn new(m: &TubeQuotient, region: &Region, d_sep: f64) -> Self {
        let span = (d_sep / m.length).ceil() as i64 + 1;
        let t_max = (span + 1) as f64 * m.length;
        let x0_max = region.r_out.cosh() * t_max.cosh() * d_sep.cosh();
        NetIndex { cell: x0_max * d_sep, cosh_d: d_sep.cosh(), span, buckets: HashMap::new() }
    }

    fn key(&self, x: &HVec) -> [i64; 3] {
        [
            (x.0[1] / self.cell).floor() as i64,
            (x.0[2] / self.cell).floor() as i64,
            (x.0[3] / self.cell).floor() as i64,
        ]
    }

    fn insert(&mut self, m: &TubeQuotient, x: &HVec) {
        for n in -self.span..=self.span {
            let y = m.translate(x, n);
            let k = self.key(&y);
            self.buckets.entry(k).or_default().push(y);
        }
    }

    /// Largest `-<x, y>` below the separation threshold, i.e. whether `x` is within `D`.
    fn covered(&self, x: &HVec) -> bool {
        self.nearest_cosh(x, true) <= self.cosh_d
    }

    /// Smallest `cosh` distance to an indexed point within the search window.
    fn nearest_cosh(&self, x: &HVec, early: bool) -> f64 {
        let k = self.key(x);
        let mut best = f64::INFINITY;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(b) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for y in b {
                            let c = -x.dot(y);
                            if c < best {
                                best = c;
                                if early && best <= self.cosh_d {
                                    return best;
                                }
                            }
                        }
                    }
                }
            }
        }
        best
    }
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Moves `x` by hyperbolic distance `eps` in a random tangent direction.
fn jitter(x: &HVec, eps: f64, rng: &mut ChaCha8Rng) -> HVec {
    let w = HVec([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
    let v = w + *x * w.dot(x);
    let n = v.norm_sq();
    if !(n > 1e-24) {
        return *x;
    }
    let v = v * (1.0 / n.sqrt());
    (*x * eps.cosh() + v * eps.sinh()).to_point()
}

struct Builder<'a> {
    m: &'a TubeQuotient,
    region: Region,
    index: NetIndex,
    lifts: Vec<HVec>,
    rng: ChaCha8Rng,
    eps: f64,
}

impl Builder<'_> {
    /// Inserts a jittered copy of `x` if it is separated from the current net.
    fn try_insert(&mut self, x: &HVec) -> bool {
        if self.index.covered(x) {
            return false;
        }
        let mut y = jitter(x, self.eps, &mut self.rng);
        let (r, _, _) = cylinder_coords(&y);
        if !self.region.contains_radius(r) || self.index.covered(&y) {
            y = *x;
        }
        let (y, _) = self.m.reduce(&y);
        self.index.insert(self.m, &y);
        self.lifts.push(y);
        true
    }
}

/// Probe grid covering the fundamental region with hyperbolic step at most `spacing`.
pub fn probe_grid(region: &Region, spacing: f64) -> Vec<HVec> {
    let nr = (((region.r_out - region.r_in) / spacing).ceil() as usize).max(1);
    let dr = (region.r_out - region.r_in) / nr as f64;
    let mut out = Vec::new();
    for kr in 0..nr {
        let r = region.r_in + (kr as f64 + 0.5) * dr;
        let nt = ((region.length * r.cosh() / spacing).ceil() as usize).max(1);
        let np = ((2.0 * PI * r.sinh() / spacing).ceil() as usize).max(1);
        for kt in 0..nt {
            let t = (kt as f64 + 0.5) * region.length / nt as f64;
            for kp in 0..np {
                let phi = (kp as f64 + 0.5) * 2.0 * PI / np as f64;
                out.push(cylinder_point(r, t, phi));
            }
        }
    }
    out
}

/// Greedy maximal `D`-separated net over a quasi-random candidate stream,
/// completed and certified on a probe grid.
pub fn build_net(m: &TubeQuotient, tt: &ThickThinData, d_sep: f64, params: &NetParams) -> Result<Net> {
    if !(d_sep > 0.0) {
        return Err(Error::InvalidParameter(format!("separation {d_sep} must be positive")));
    }
    if params.sample_budget == 0 {
        return Err(Error::InvalidParameter("sample budget must be positive".into()));
    }
    let region = Region::new(m, tt, d_sep, params.outer_cutoff_multiplier);
    if !(region.r_out > region.r_in) {
        return Err(Error::InvalidParameter("empty region".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let shift: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let mut b = Builder {
        m,
        region,
        index: NetIndex::new(m, &region, d_sep),
        lifts: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(params.seed ^ 0x9e37_79b9_7f4a_7c15),
        eps: 1e-6 * d_sep,
    };
    let (s_in, s_out) = (region.r_in.sinh().powi(2), region.r_out.sinh().powi(2));
    for i in 1..=params.sample_budget as u64 {
        let u = [
            (halton(i, 2) + shift[0]).fract(),
            (halton(i, 3) + shift[1]).fract(),
            (halton(i, 5) + shift[2]).fract(),
        ];
        let r = (s_in + u[0] * (s_out - s_in)).sqrt().asinh();
        let x = cylinder_point(r, u[1] * region.length, 2.0 * PI * u[2]);
        b.try_insert(&x);
    }
    let candidate_insertions = b.lifts.len();

    // Probe grid: at least ten probes per candidate, step at most `probe_spacing * D`.
    let mut spacing = params.probe_spacing * d_sep;
    let target = 10 * params.sample_budget;
    let mut probes = probe_grid(&region, spacing);
    while probes.len() < target {
        spacing *= (probes.len() as f64 / target as f64).cbrt() * 0.95;
        probes = probe_grid(&region, spacing);
    }
    let uncovered: Vec<usize> = {
        let idx = &b.index;
        probes.par_iter().enumerate().filter(|(_, p)| !idx.covered(p)).map(|(i, _)| i).collect()
    };
    let mut probe_insertions = 0usize;
    for &i in &uncovered {
        if b.try_insert(&probes[i]) {
            probe_insertions += 1;
        }
    }
    let idx = &b.index;
    let gaps: Vec<f64> = probes.par_iter().map(|p| idx.nearest_cosh(p, false).max(1.0).acosh()).collect();
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let still = gaps.iter().filter(|g| **g > d_sep).count();
    if probe_insertions > params.sample_budget || still > 0 {
        return Err(Error::CoverageGap { uncovered: probe_insertions.max(still), max_gap });
    }
    let lifts = b.lifts;
    let points = lifts.iter().map(PointUHS::from_hyperboloid).collect();
    Ok(Net {
        points,
        lifts,
        d_sep,
        seed: params.seed,
        region,
        stats: NetStats {
            candidates: params.sample_budget,
            candidate_insertions,
            probes: probes.len(),
            probe_insertions,
            probe_spacing: spacing,
            max_probe_gap: max_gap,
        },
    })
}

/// The explicit constants of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub r: f64,
    pub d_sep: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub cbar0: f64,
    pub c: f64,
    pub k: f64,
}

impl ConstantsTable {
    /// Constants for a given separation `D` (with `r` recorded alongside).
    pub fn for_separation(r: f64, d_sep: f64) -> Result<Self> {
        if !(d_sep > 0.0) || !(r > 0.0) {
            return Err(Error::InvalidParameter("constants need positive R and D".into()));
        }
        let vh = ball_volume(d_sep / 2.0)?;
        let c3 = 1.0 / vh;
        let c2 = ball_volume(2.5 * d_sep)? / vh;
        let c1 = c2 * (c2 - 1.0);
        let c0 = 2.0 * c1;
        let cbar0 = c0 + c1 * (2.0 * c1 - 1.0) + c2 * (4.0 * c1 - 2.0) + 2.0 * c1 + (8.0 * c1 - 4.0);
        let c = c3.max((6.0 * cbar0 - 4.0) * c0);
        Ok(ConstantsTable { r, d_sep, c3, c2, c1, c0, cbar0, c, k: c * c })
    }
}

/// Constants from `R` and the drilling depth `d`, with `D = min(R, d)`.
pub fn constants(r: f64, d: f64) -> Result<ConstantsTable> {
    if !(r > 0.0) || !(d > 0.0) || !r.is_finite() || !d.is_finite() {
        return Err(Error::InvalidParameter(format!("R = {r} and d = {d} must be positive")));
    }
    ConstantsTable::for_separation(r, r.min(d))
}

/// Monte Carlo volume of the shell `{r_in <= r <= r_out}` per period, as `(mean, sigma)`.
///
/// Samples uniformly in `(r, t, phi)` over `[0, r_box]` and weights by the volume element.
pub fn shell_volume_mc(length: f64, r_in: f64, r_out: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_box = r_out * 1.05 + 0.01;
    let box_vol = r_box * length * 2.0 * PI;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..samples {
        let r: f64 = rng.gen::<f64>() * r_box;
        let t: f64 = rng.gen::<f64>() * length;
        let phi: f64 = rng.gen::<f64>() * 2.0 * PI;
        let (rr, _, _) = cylinder_coords(&cylinder_point(r, t, phi));
        let w = if rr >= r_in && rr <= r_out { r.sinh() * r.cosh() * box_vol } else { 0.0 };
        sum += w;
        sum2 += w * w;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}
