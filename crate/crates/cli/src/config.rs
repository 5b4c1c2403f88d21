//! Run configuration files: a `thickpart-config 1` header, then `key = value` lines.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown and repeated keys are errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thickpart_core::pipeline::RunConfig;

pub const HEADER: &str = "thickpart-config";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn num<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError { line, message: format!("bad value {v:?} for {key}") })
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let mut c = RunConfig::default();
    let mut header = false;
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if !header {
            let mut w = l.split_whitespace();
            if w.next() != Some(HEADER) {
                return Err(ConfigError { line, message: format!("expected header `{HEADER} {VERSION}`") });
            }
            match w.next().and_then(|v| v.parse::<u32>().ok()) {
                Some(VERSION) if w.next().is_none() => {}
                _ => return Err(ConfigError { line, message: format!("unsupported config version, expected {VERSION}") }),
            }
            header = true;
            continue;
        }
        let Some((k, v)) = l.split_once('=') else {
            return Err(ConfigError { line, message: "expected `key = value`".into() });
        };
        let (k, v) = (k.trim(), v.trim());
        if !seen.insert(k.to_string()) {
            return Err(ConfigError { line, message: format!("repeated key {k}") });
        }
        let t = &mut c.tolerances;
        match k {
            "length" => c.length = num(k, v, line)?,
            "twist" => c.twist = num(k, v, line)?,
            "mu" => c.mu = num(k, v, line)?,
            "d" => c.d = num(k, v, line)?,
            "seed" => c.seed = num(k, v, line)?,
            "sample_budget" => c.sample_budget = num(k, v, line)?,
            "orbit_depth" => c.orbit_depth = num(k, v, line)?,
            "outer_cutoff_multiplier" => c.outer_cutoff_multiplier = num(k, v, line)?,
            "tol.sag" => t.sag = num(k, v, line)?,
            "tol.distance" => t.distance = num(k, v, line)?,
            "tol.margin_band" => t.margin_band = num(k, v, line)?,
            "tol.plane_residual" => t.plane_residual = num(k, v, line)?,
            "tol.polytope" => t.polytope = num(k, v, line)?,
            "tol.retraction" => t.retraction = num(k, v, line)?,
            "tol.distance_samples" => t.distance_samples = num(k, v, line)?,
            "tol.nearest_samples" => t.nearest_samples = num(k, v, line)?,
            "tol.packing_samples" => t.packing_samples = num(k, v, line)?,
            "tol.injectivity_samples" => t.injectivity_samples = num(k, v, line)?,
            _ => return Err(ConfigError { line, message: format!("unknown key {k}") }),
        }
    }
    if !header {
        return Err(ConfigError { line: 0, message: format!("missing header `{HEADER} {VERSION}`") });
    }
    c.validate().map_err(|e| ConfigError { line: 0, message: e.to_string() })?;
    Ok(c)
}

/// Writes every key, so that `parse(&render(c)) == c`.
pub fn render(c: &RunConfig) -> String {
    let t = &c.tolerances;
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER} {VERSION}");
    let _ = writeln!(s, "length = {}", c.length);
    let _ = writeln!(s, "twist = {}", c.twist);
    let _ = writeln!(s, "mu = {}", c.mu);
    let _ = writeln!(s, "d = {}", c.d);
    let _ = writeln!(s, "seed = {}", c.seed);
    let _ = writeln!(s, "sample_budget = {}", c.sample_budget);
    let _ = writeln!(s, "orbit_depth = {}", c.orbit_depth);
    let _ = writeln!(s, "outer_cutoff_multiplier = {}", c.outer_cutoff_multiplier);
    let _ = writeln!(s, "tol.sag = {}", t.sag);
    let _ = writeln!(s, "tol.distance = {}", t.distance);
    let _ = writeln!(s, "tol.margin_band = {}", t.margin_band);
    let _ = writeln!(s, "tol.plane_residual = {}", t.plane_residual);
    let _ = writeln!(s, "tol.polytope = {}", t.polytope);
    let _ = writeln!(s, "tol.retraction = {}", t.retraction);
    let _ = writeln!(s, "tol.distance_samples = {}", t.distance_samples);
    let _ = writeln!(s, "tol.nearest_samples = {}", t.nearest_samples);
    let _ = writeln!(s, "tol.packing_samples = {}", t.packing_samples);
    let _ = writeln!(s, "tol.injectivity_samples = {}", t.injectivity_samples);
    s
}
