use std::path::PathBuf;
use std::process::Command;

use clap::Parser;
use thickpart_cli::config::{parse, render};
use thickpart_cli::{execute, Cli, EXIT_FAILED, EXIT_OK};
use thickpart_core::export::parse_gluing_list;
use thickpart_core::pipeline::RunConfig;

const SMALL: &str = "thickpart-config 1
# thin tube with genus-one boundary components
length = 0.8
twist = 0.5
mu = 0.45
d = 0.4
seed = 11
tol.distance_samples = 100
tol.nearest_samples = 2000
tol.packing_samples = 20000
tol.injectivity_samples = 1000
";

const NO_THIN: &str = "thickpart-config 1
length = 1.2
twist = 0.3
mu = 0.5
d = 0.4
tol.distance_samples = 100
tol.nearest_samples = 2000
tol.packing_samples = 20000
tol.injectivity_samples = 1000
";

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("thickpart-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let cli = Cli::try_parse_from(std::iter::once("thickpart").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    let code = execute(&cli, &mut out).unwrap();
    (code, String::from_utf8(out).unwrap())
}

fn write_config(dir: &PathBuf, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_round_trips_through_render() {
    let c = parse(SMALL).unwrap();
    assert_eq!(c.length, 0.8);
    assert_eq!(c.seed, 11);
    assert_eq!(c.tolerances.nearest_samples, 2000);
    assert_eq!(parse(&render(&c)).unwrap(), c);
    assert_eq!(parse(&render(&RunConfig::default())).unwrap(), RunConfig::default());
}

#[test]
fn config_rejects_malformed_input() {
    assert!(parse("length = 1\n").is_err());
    assert!(parse("thickpart-config 2\n").is_err());
    assert!(parse("thickpart-config 1\nlength = 1\nlength = 2\n").is_err());
    assert!(parse("thickpart-config 1\nradius = 1\n").is_err());
    assert!(parse("thickpart-config 1\nlength = abc\n").is_err());
    assert!(parse("thickpart-config 1\nlength\n").is_err());
    let e = parse("thickpart-config 1\nmu = -1\n").unwrap_err();
    assert!(e.message.contains("mu"));
    assert!(parse("").is_err());
}

#[test]
fn constants_prints_every_entry_with_its_formula() {
    let (code, out) = run_cli(&["constants", "--r", "0.2", "--d", "0.1"]);
    assert_eq!(code, EXIT_OK);
    let names: Vec<&str> = out.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names, ["R", "D", "C3", "C2", "C1", "C0", "Cbar0", "C", "K"]);
    assert!(out.contains("min{R, d}"));
    assert!(out.contains("C^2"));
    let d_line = out.lines().nth(1).unwrap();
    let d: f64 = d_line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert_eq!(d, 0.1);
}

#[test]
fn constants_computes_r_from_the_manifold() {
    let (code, out) = run_cli(&["constants"]);
    assert_eq!(code, EXIT_OK);
    let r: f64 = out.lines().next().unwrap().split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(r > 0.0 && r <= 0.5);
}

#[test]
fn oracles_run_by_name() {
    let (code, out) = run_cli(&["oracle", "tree", "--max", "7"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("counterexamples 0"));
    let (code, _) = run_cli(&["oracle", "volume"]);
    assert_eq!(code, EXIT_OK);
    let (code, _) = run_cli(&["oracle", "inj", "--samples", "20"]);
    assert_eq!(code, EXIT_OK);
    let cli = Cli::try_parse_from(["thickpart", "oracle", "spheres"]).unwrap();
    assert!(execute(&cli, &mut Vec::new()).is_err());
}

#[test]
fn run_writes_artifacts_and_is_deterministic() {
    let dir = scratch("det");
    let cfg = write_config(&dir, SMALL);
    let a = dir.join("a");
    let b = dir.join("b");
    let (code, out) = run_cli(&["--config", &cfg, "--out", a.to_str().unwrap(), "run"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("result pass"));
    let (code, _) = run_cli(&["--config", &cfg, "--out", b.to_str().unwrap(), "run"]);
    assert_eq!(code, EXIT_OK);
    let names = [
        "net.txt",
        "cells.txt",
        "cells.off",
        "graphs.txt",
        "triangulation.txt",
        "gluings.txt",
        "config.txt",
        "report.txt",
        "report.json",
    ];
    for n in names {
        let x = std::fs::read(a.join(n)).unwrap();
        let y = std::fs::read(b.join(n)).unwrap();
        assert!(!x.is_empty(), "{n} is empty");
        assert_eq!(x, y, "{n} differs between identical runs");
    }

    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for c in checks {
        assert!(seen.insert(c["name"].as_str().unwrap().to_string()), "check listed twice");
        assert_eq!(c["passed"], true, "{c}");
    }
    let text = std::fs::read_to_string(a.join("report.txt")).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), checks.len());

    let (tets, gl) = parse_gluing_list(&std::fs::read_to_string(a.join("gluings.txt")).unwrap()).unwrap();
    assert_eq!(tets as u64, report["summary"]["tetrahedra"].as_u64().unwrap());
    assert!(!gl.is_empty());
    assert_eq!(parse(&std::fs::read_to_string(a.join("config.txt")).unwrap()).unwrap(), parse(SMALL).unwrap());
    let graphs = std::fs::read_to_string(a.join("graphs.txt")).unwrap();
    assert!(graphs.starts_with("thickpart-graphs 1\n"));
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = scratch("seed");
    let cfg = write_config(&dir, SMALL);
    let a = dir.join("a");
    let b = dir.join("b");
    run_cli(&["--config", &cfg, "--out", a.to_str().unwrap(), "--export", "mesh", "run"]);
    run_cli(&["--config", &cfg, "--out", b.to_str().unwrap(), "--export", "mesh", "--seed", "12", "run"]);
    assert_ne!(std::fs::read(a.join("net.txt")).unwrap(), std::fs::read(b.join("net.txt")).unwrap());
    assert!(!a.join("report.txt").exists());
}

#[test]
fn verify_only_writes_nothing() {
    let dir = scratch("verify");
    let cfg = write_config(&dir, NO_THIN);
    let out_dir = dir.join("out");
    let (code, out) = run_cli(&["--config", &cfg, "--out", out_dir.to_str().unwrap(), "--verify-only", "run"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(!out_dir.exists());
    assert!(out.contains("drilled=false"));
    assert!(out.contains("thin_boundary=0"));
}

#[test]
fn a_failing_check_gives_exit_status_one() {
    let dir = scratch("fail");
    // A polytope tolerance far below rounding error cannot be met.
    let cfg = write_config(&dir, &NO_THIN.replace("d = 0.4\n", "d = 0.4\ntol.polytope = 1e-300\n"));
    let (code, out) = run_cli(&["--config", &cfg, "--verify-only", "run"]);
    assert_eq!(code, EXIT_FAILED, "{out}");
    assert!(out.contains("FAIL polytope_constraints"));
}

#[test]
fn binary_reports_errors_with_status_two() {
    let bin = env!("CARGO_BIN_EXE_thickpart");
    let st = Command::new(bin).args(["oracle", "nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("unknown oracle"));
    let st = Command::new(bin).env("THICKPART_THREADS", "zero").args(["oracle", "tree", "--max", "4"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = Command::new(bin).env("THICKPART_THREADS", "2").args(["oracle", "tree", "--max", "4"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let st = Command::new(bin).args(["--config", "/nonexistent/run.cfg", "run"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}
