//! Command-line front end: subcommands, artifact writing and thread configuration.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thickpart_core::export;
use thickpart_core::net::{constants, ConstantsTable};
use thickpart_core::oracle::{inj_oracle, tree_oracle, volume_oracle, OracleReport};
use thickpart_core::pipeline::{run, RunConfig, RunOutput};
use thickpart_core::quotient::{ThickThinData, TubeQuotient};

/// Exit status when every check passes.
pub const EXIT_OK: i32 = 0;
/// Exit status when a check fails or an oracle finds a counterexample.
pub const EXIT_FAILED: i32 = 1;
/// Exit status for usage, configuration and pipeline errors.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Export {
    Mesh,
    Triangulation,
    Report,
}

#[derive(Debug, Parser)]
#[command(name = "thickpart", version, about = "Thick-part decomposition and triangulation runs")]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Artifact directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "thickpart-out")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run and verify without writing artifacts.
    #[arg(long, global = true)]
    pub verify_only: bool,
    /// Artifact groups to write (default: all).
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub export: Vec<Export>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the constant table with its defining formulas.
    Constants {
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        /// Injectivity lower bound; computed from the configured manifold when absent.
        #[arg(long)]
        r: Option<f64>,
    },
    /// Run the pipeline end to end and write its artifacts.
    Run,
    /// Run a cross-check: tree, volume or inj.
    Oracle {
        name: String,
        /// Largest tree size for the tree oracle.
        #[arg(long, default_value_t = 10)]
        max: usize,
        /// Sample count for the inj oracle.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

/// Caps the global thread pool from `THICKPART_THREADS`.
pub fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("THICKPART_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("THICKPART_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("THICKPART_THREADS must be a positive integer".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut c = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            config::parse(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    Ok(c)
}

/// The constant table with the defining formula of each entry.
pub fn constants_table(k: &ConstantsTable, r_source: &str) -> String {
    let rows = [
        ("R", k.r, r_source.to_string()),
        ("D", k.d_sep, "min{R, d}".into()),
        ("C3", k.c3, "1 / Vol(B(D/2))".into()),
        ("C2", k.c2, "Vol(B(2.5 D)) / Vol(B(D/2))".into()),
        ("C1", k.c1, "C2 (C2 - 1)".into()),
        ("C0", k.c0, "2 C1".into()),
        ("Cbar0", k.cbar0, "C0 + C1 (2 C1 - 1) + C2 (4 C1 - 2) + 2 C1 + (8 C1 - 4)".into()),
        ("C", k.c, "max{C3, (6 Cbar0 - 4) C0}".into()),
        ("K", k.k, "C^2".into()),
    ];
    let mut s = String::new();
    for (name, v, f) in rows {
        s.push_str(&format!("{name:<6} = {v:<24e} {f}\n"));
    }
    s
}

fn cmd_constants(cfg: &RunConfig, mu: Option<f64>, d: Option<f64>, r: Option<f64>, out: &mut dyn Write) -> Result<i32, String> {
    let mu = mu.unwrap_or(cfg.mu);
    let d = d.unwrap_or(cfg.d);
    if !(mu > 0.0) || !(d > 0.0) {
        return Err(format!("mu and d must be positive, got mu = {mu}, d = {d}"));
    }
    let (r, source) = match r {
        Some(r) => (r, "given".to_string()),
        None => {
            let m = TubeQuotient::new(cfg.length, cfg.twist).map_err(|e| e.to_string())?;
            let tt = ThickThinData::compute(&m, mu, d).map_err(|e| e.to_string())?;
            (tt.r_empirical, format!("inf of inj over X (length {}, twist {})", cfg.length, cfg.twist))
        }
    };
    let k = constants(r, d).map_err(|e| e.to_string())?;
    write!(out, "{}", constants_table(&k, &source)).map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

/// Writes the selected artifact groups of a run into `dir`.
pub fn write_artifacts(o: &RunOutput, dir: &Path, groups: &[Export]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files: Vec<(&str, String)> = Vec::new();
    if groups.contains(&Export::Mesh) {
        files.push(("net.txt", export::net_document(&o.net)));
        files.push(("cells.txt", export::mesh_document(&o.cells)));
        files.push(("cells.off", export::mesh_off(&o.cells)));
        files.push(("graphs.txt", export::graph_document(&o.assembly.cuts)));
    }
    if groups.contains(&Export::Triangulation) {
        files.push(("triangulation.txt", export::triangulation_document(&o.assembly.triangulation)));
        files.push(("gluings.txt", export::gluing_list(&o.assembly.triangulation)));
    }
    if groups.contains(&Export::Report) {
        files.push(("config.txt", config::render(&o.config)));
        files.push(("report.txt", o.report.to_text()));
        let json = serde_json::to_string_pretty(&o.report).map_err(std::io::Error::other)?;
        files.push(("report.json", json + "\n"));
    }
    let mut written = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        written.push(p);
    }
    Ok(written)
}

fn cmd_run(cli: &Cli, cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, String> {
    let o = run(cfg).map_err(|e| e.to_string())?;
    write!(out, "{}", o.report.to_text()).map_err(|e| e.to_string())?;
    if !cli.verify_only {
        let groups = if cli.export.is_empty() {
            vec![Export::Mesh, Export::Triangulation, Export::Report]
        } else {
            cli.export.clone()
        };
        let written = write_artifacts(&o, &cli.out, &groups).map_err(|e| format!("{}: {e}", cli.out.display()))?;
        for p in written {
            writeln!(out, "wrote {}", p.display()).map_err(|e| e.to_string())?;
        }
    }
    Ok(if o.report.passed() { EXIT_OK } else { EXIT_FAILED })
}

pub fn oracle_by_name(name: &str, cfg: &RunConfig, max: usize, samples: usize) -> Result<OracleReport, String> {
    match name {
        "tree" => Ok(tree_oracle(max)),
        "volume" => {
            let grid: Vec<f64> = (0..=30).map(|k| 0.1 * k as f64).collect();
            Ok(volume_oracle(&grid, 1e-10))
        }
        "inj" => {
            let m = TubeQuotient::new(cfg.length, cfg.twist).map_err(|e| e.to_string())?;
            Ok(inj_oracle(&m, samples, 1000, cfg.seed))
        }
        _ => Err(format!("unknown oracle {name:?}; expected tree, volume or inj")),
    }
}

/// Runs a parsed command line, writing human-readable output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, String> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Constants { mu, d, r } => cmd_constants(&cfg, *mu, *d, *r, out),
        Command::Run => cmd_run(cli, &cfg, out),
        Command::Oracle { name, max, samples } => {
            let rep = oracle_by_name(name, &cfg, *max, *samples)?;
            writeln!(out, "oracle {} cases {} max_deviation {}", rep.name, rep.cases, rep.max_deviation).map_err(|e| e.to_string())?;
            for c in &rep.counterexamples {
                writeln!(out, "counterexample {c}").map_err(|e| e.to_string())?;
            }
            writeln!(out, "counterexamples {}", rep.counterexamples.len()).map_err(|e| e.to_string())?;
            Ok(if rep.passed() { EXIT_OK } else { EXIT_FAILED })
        }
    }
}
