//! The `hyperlat` command line: `build`, `analyze` and `simulate`.
//!
//! Exit codes: 1 usage, 2 input validation, 3 mathematical invariant
//! failure, 4 runtime or simulation failure. Every successful command writes
//! a `manifest.json` next to its outputs.
//!
//! Seed precedence for `simulate`: `--seed`, then `HYPERLAT_SEED`, then the
//! config file. Other flags override their config-file values.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::css::analyze;
use crate::error::{Error, LatticeError};
use crate::fuchsian::{build_generators, BravaisSignature, QuotientSpec};
use crate::lattice::{build_periodic_graph, build_unit_cell, predicted_counts, PeriodicGraph, PredictedCounts};
use crate::montecarlo::{estimate_threshold, run_codes, SimCode, SimConfig};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_RUNTIME: u8 = 4;

pub const SEED_ENV: &str = "HYPERLAT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "hyperlat",
    version,
    about = "Hyperbolic lattices, their surface codes and threshold experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a periodic {p,q} lattice from a quotient of its Bravais group.
    Build(BuildArgs),
    /// Compute the cycle basis, code and distances of a built lattice.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo threshold experiment.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Tessellation, as `p,q`.
    #[arg(long, value_parser = parse_pair)]
    pub pattern: [usize; 2],
    /// Bravais lattice, as `pB,qB`.
    #[arg(long, value_parser = parse_pair)]
    pub bravais: [usize; 2],
    /// Quotient specification (JSON).
    #[arg(long)]
    pub quotient: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory written by `build`.
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads; defaults to the config value or all logical cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_pair(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|e| format!("{a:?}: {e}"))?,
            b.parse().map_err(|e| format!("{b:?}: {e}"))?,
        ]),
        _ => Err(format!("expected two comma-separated integers, got {s:?}")),
    }
}

/// A failed command: the error and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: Error,
}

impl Failure {
    fn input(e: impl Into<Error>) -> Self {
        Failure {
            code: EXIT_INPUT,
            error: e.into(),
        }
    }

    fn invariant(e: impl Into<Error>) -> Self {
        Failure {
            code: EXIT_INVARIANT,
            error: e.into(),
        }
    }

    fn runtime(e: impl Into<Error>) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            error: e.into(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Errors go to stderr as `error: <Name>: <message>`.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Build(a) => cmd_build(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Simulate(a) => cmd_simulate(&a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}: {}", f.error.name(), f.error);
            f.code
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub version: String,
    pub inputs: Vec<InputDigest>,
    pub wall_seconds: f64,
    pub summary: serde_json::Value,
}

/// Lattice metadata written by `build` and read back by `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeInfo {
    pub pattern: [usize; 2],
    pub bravais: [usize; 2],
    pub bravais_genus: usize,
    pub cells: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub genus: usize,
}

fn digest(path: &Path, bytes: &[u8]) -> InputDigest {
    InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(Error::io(path, e)))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?)
        .map_err(|e| Failure::input(Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e))))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::runtime(Error::io(path, e)))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write(dir, "manifest.json", &(text + "\n"))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::runtime(Error::io(dir, e)))
}

/// Counts report: measured against predicted.
pub fn counts_report(measured: [usize; 4], predicted: &PredictedCounts) -> String {
    let want = [predicted.v, predicted.e, predicted.f, predicted.genus];
    let mut s = String::from("quantity measured predicted\n");
    for ((name, m), p) in ["V", "E", "F", "h"].iter().zip(measured).zip(want) {
        let _ = writeln!(s, "{name} {m} {p}");
    }
    let slash = |v: [usize; 4]| v.map(|x| x.to_string()).join("/");
    let _ = writeln!(s, "V/E/F/h {} (predicted {})", slash(measured), slash(want));
    s
}

/// Measured `(V, E, F, h)` of a closed lattice, checked against `predicted`.
fn verified_counts(g: &PeriodicGraph, predicted: &PredictedCounts) -> Result<[usize; 4], Failure> {
    g.check_structure(predicted).map_err(Failure::invariant)?;
    let f = g.face_count_hint();
    let h = g.euler_genus(f).map_err(Failure::invariant)?;
    if h != predicted.genus {
        return Err(Failure::invariant(LatticeError::CountMismatch(format!(
            "genus {h}, predicted {}",
            predicted.genus
        ))));
    }
    Ok([g.num_vertices, g.num_edges(), f, h])
}

pub fn cmd_build(args: &BuildArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let [p, q] = args.pattern;
    let bytes = read(&args.quotient)?;
    let text = String::from_utf8_lossy(&bytes);
    let spec = QuotientSpec::from_json(&text).map_err(Failure::input)?;
    let sig = spec.signature();
    if [sig.p_b, sig.q_b] != args.bravais {
        return Err(Failure::input(crate::error::QuotientError::SignatureMismatch {
            left: format!("{{{},{}}}", args.bravais[0], args.bravais[1]),
            right: sig.to_string(),
        }));
    }
    let gs = build_generators(sig).map_err(Failure::input)?;
    let cell = build_unit_cell(p, q, &gs).map_err(Failure::input)?;
    let predicted = predicted_counts(p, q, sig.genus, spec.index()).map_err(Failure::input)?;
    let g = build_periodic_graph(&cell, &spec).map_err(Failure::input)?;
    let measured = verified_counts(&g, &predicted)?;

    let out = &args.out;
    create_dir(out)?;
    write(out, "edges.txt", &g.edge_list())?;
    write(out, "edge_labels.txt", &g.label_list().unwrap_or_default())?;
    write(out, "pbc_edges.txt", &g.pbc_list())?;
    write(out, "coords.txt", &g.coordinate_list().unwrap_or_default())?;
    write(out, "graph.dot", &g.to_dot())?;
    let report = counts_report(measured, &predicted);
    write(out, "counts.txt", &report)?;
    let info = LatticeInfo {
        pattern: args.pattern,
        bravais: args.bravais,
        bravais_genus: sig.genus,
        cells: spec.index(),
        vertices: measured[0],
        edges: measured[1],
        faces: measured[2],
        genus: measured[3],
    };
    write(
        out,
        "lattice.json",
        &(serde_json::to_string_pretty(&info).expect("serializes") + "\n"),
    )?;
    write(out, "quotient.json", &text)?;
    print!("{report}");
    write_manifest(
        out,
        &RunManifest {
            command: "build".into(),
            config: serde_json::json!({
                "pattern": args.pattern,
                "bravais": args.bravais,
                "quotient": args.quotient.display().to_string(),
                "out": out.display().to_string(),
            }),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: vec![digest(&args.quotient, &bytes)],
            wall_seconds: start.elapsed().as_secs_f64(),
            summary: serde_json::to_value(&info).expect("serializes"),
        },
    )
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let dir = &args.input;
    let info_path = dir.join("lattice.json");
    let info_text = read_text(&info_path)?;
    let info: LatticeInfo = serde_json::from_str(&info_text)
        .map_err(|e| Failure::input(LatticeError::ParseError(format!("{}: {e}", info_path.display()))))?;
    let [p, q] = info.pattern;
    let mut inputs = vec![digest(&info_path, info_text.as_bytes())];
    let mut load = |name: &str| -> Result<String, Failure> {
        let path = dir.join(name);
        let text = read_text(&path)?;
        inputs.push(digest(&path, text.as_bytes()));
        Ok(text)
    };
    let edges = load("edges.txt")?;
    let labels = load("edge_labels.txt")?;
    let pbc = load("pbc_edges.txt")?;
    let predicted = predicted_counts(p, q, info.bravais_genus, info.cells).map_err(Failure::input)?;
    let labels = (!labels.trim().is_empty()).then_some(labels.as_str());
    let g = PeriodicGraph::from_exports(p, q, predicted.v, &edges, labels, &pbc).map_err(|e| match e {
        LatticeError::ParseError(_) => Failure::input(e),
        _ => Failure::invariant(e),
    })?;
    verified_counts(&g, &predicted)?;
    let sig = BravaisSignature::new(info.bravais[0], info.bravais[1], info.bravais_genus).map_err(Failure::input)?;
    let gs = build_generators(sig).map_err(Failure::input)?;
    let a = analyze(&g, Some(&gs)).map_err(Failure::invariant)?;
    a.hcb.check(&g).map_err(Failure::invariant)?;
    let code = &a.code;
    if code.k != predicted.k {
        return Err(Failure::invariant(crate::error::CssError::InvariantViolation(format!(
            "k = {}, predicted {}",
            code.k, predicted.k
        ))));
    }
    let summary = format!("[[{},{},{},{}]]", code.n, code.k, a.d_z, a.d_x);
    write(dir, "hcb.txt", &a.hcb.export())?;
    write(dir, "dual_hcb.txt", &a.dual_hcb.export())?;
    write(
        dir,
        "code.txt",
        &code.export(a.d_z, a.d_x, p, q, info.cells, predicted.genus),
    )?;
    write(dir, "summary.txt", &format!("{summary}\n"))?;
    println!("{summary}");
    write_manifest(
        dir,
        &RunManifest {
            command: "analyze".into(),
            config: serde_json::json!({ "in": dir.display().to_string() }),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs,
            wall_seconds: start.elapsed().as_secs_f64(),
            summary: serde_json::json!({
                "n": code.n, "k": code.k, "d_z": a.d_z, "d_x": a.d_x, "code": summary,
            }),
        },
    )
}

/// The config with command-line and environment overrides applied.
pub fn effective_config(args: &SimulateArgs, env_seed: Option<&str>) -> Result<SimConfig, Failure> {
    let mut config = SimConfig::load(&args.config).map_err(Failure::input)?;
    if let Some(s) = env_seed {
        config.seed = s
            .trim()
            .parse()
            .map_err(|e| Failure::input(Error::ConfigInvalid(format!("{SEED_ENV}={s:?}: {e}"))))?;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = args.threads {
        config.threads = Some(t);
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    config.validate().map_err(Failure::input)?;
    if config.quotients.is_empty() {
        return Err(Failure::input(Error::ConfigInvalid("no quotient files".into())));
    }
    Ok(config)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let env_seed = std::env::var(SEED_ENV).ok();
    let config = effective_config(args, env_seed.as_deref())?;
    let mut inputs = vec![digest(&args.config, &read(&args.config)?)];
    let mut codes = Vec::with_capacity(config.quotients.len());
    for path in &config.quotients {
        let bytes = std::fs::read(path).map_err(|e| Failure::runtime(Error::io(path, e)))?;
        inputs.push(digest(path, &bytes));
        let spec = QuotientSpec::from_json(&String::from_utf8_lossy(&bytes)).map_err(Failure::runtime)?;
        codes.push(SimCode::prepare(config.pattern, &spec).map_err(Failure::runtime)?);
    }
    let result = run_codes(&codes, &config).map_err(Failure::runtime)?;
    let out = &args.out;
    create_dir(out)?;
    write(out, "results.csv", &result.to_csv())?;
    let warnings = result.monotonicity_warnings();
    if !warnings.is_empty() {
        write(out, "warnings.txt", &(warnings.join("\n") + "\n"))?;
    }
    let threshold = match estimate_threshold(&result) {
        Ok(t) => {
            if t.found {
                println!("threshold crossings in [{:.4}, {:.4}]", t.p_low, t.p_high);
            } else {
                println!("no crossing within [{:.4}, {:.4}]", t.p_low, t.p_high);
            }
            serde_json::to_value(&t).expect("serializes")
        }
        Err(e) => serde_json::json!({ "error": e.to_string() }),
    };
    let distances: Vec<_> = codes
        .iter()
        .map(|c| serde_json::json!({ "N": c.cells, "n": c.code.n, "k": c.code.k, "d_z": c.d_z, "d_x": c.d_x }))
        .collect();
    write_manifest(
        out,
        &RunManifest {
            command: "simulate".into(),
            config: serde_json::to_value(&config).expect("serializes"),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs,
            wall_seconds: start.elapsed().as_secs_f64(),
            summary: serde_json::json!({
                "threshold": threshold,
                "codes": distances,
                "warnings": warnings,
            }),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_parse() {
        assert_eq!(parse_pair("8,3"), Ok([8, 3]));
        assert_eq!(parse_pair(" 10 , 5 "), Ok([10, 5]));
        assert!(parse_pair("8").is_err());
        assert!(parse_pair("8,x").is_err());
        assert!(parse_pair("1,2,3").is_err());
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run(["hyperlat"]), EXIT_USAGE);
        assert_eq!(run(["hyperlat", "build", "--pattern", "8"]), EXIT_USAGE);
        assert_eq!(run(["hyperlat", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["hyperlat", "--version"]), 0);
    }

    #[test]
    fn report_layout() {
        let p = predicted_counts(8, 3, 2, 1).unwrap();
        let r = counts_report([16, 24, 6, 2], &p);
        assert!(r.starts_with("quantity measured predicted\nV 16 16\n"));
        assert!(r.ends_with("V/E/F/h 16/24/6/2 (predicted 16/24/6/2)\n"));
    }

    #[test]
    fn seed_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"pattern":[8,3],"quotients":["q.json"],"p_grid":[0.01],"trials":5,"seed":1}"#,
        )
        .unwrap();
        let mut args = SimulateArgs {
            config: path,
            threads: None,
            seed: None,
            trials: None,
            out: ".".into(),
        };
        assert_eq!(effective_config(&args, None).unwrap().seed, 1);
        assert_eq!(effective_config(&args, Some("9")).unwrap().seed, 9);
        args.seed = Some(4);
        args.trials = Some(2);
        let c = effective_config(&args, Some("9")).unwrap();
        assert_eq!((c.seed, c.trials), (4, 2));
        assert_eq!(effective_config(&args, Some("x")).unwrap_err().code, EXIT_INPUT);
    }
}
