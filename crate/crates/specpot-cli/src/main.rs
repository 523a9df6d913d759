//! Command-line front end: build and mutate weighted quivers and species
//! with potential, compute Jacobian truncations, probe non-degeneracy, and
//! verify the witness-script fixture corpus.
//!
//! Exit codes: 0 success, 1 mathematical failure, 2 input error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use specpot::fixtures::{run_fixture, FixtureCase};
use specpot::pathalg::{format_element, parse_element};
use specpot::sp::{jacobian_dims, mutate, nondegeneracy_probe, restrict_sp, SpeciesWithPotential};
use specpot::surface::{build_sp, from_spec, SurfaceSpec};
use specpot::wquiver::{
    quiver_from_json, quiver_to_dot, quiver_to_json, to_matrix, wq_isomorphic, wq_mutate,
    WeightedQuiver,
};

#[derive(Parser)]
#[command(name = "specpot", version, about = "species with potential toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted quiver operations
    Quiver {
        #[command(subcommand)]
        cmd: QuiverCmd,
    },
    /// Species-with-potential operations
    Sp {
        #[command(subcommand)]
        cmd: SpCmd,
    },
    /// Run verification fixtures
    Verify {
        /// fixture files
        paths: Vec<PathBuf>,
        /// run every .json fixture in the given directory
        #[arg(long)]
        all: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum QuiverCmd {
    /// Load a quiver (or surface) file and print its matrix
    Build {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Mutate at one or more vertices
    Mutate {
        file: PathBuf,
        #[arg(long = "at", required = true)]
        at: Vec<String>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide weighted-quiver isomorphism (exit 0 if isomorphic)
    Iso {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        labeled: bool,
    },
}

#[derive(Subcommand)]
enum SpCmd {
    /// Build the species with potential of a surface or SP bundle
    Build {
        file: PathBuf,
        #[arg(short = 'N', long)]
        truncation: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Mutate the SP at one or more vertices
    Mutate {
        file: PathBuf,
        #[arg(long = "at", required = true)]
        at: Vec<String>,
        #[arg(short = 'N', long)]
        truncation: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Per-degree dimensions of the truncated Jacobian quotient
    Jacobian {
        file: PathBuf,
        #[arg(short = 'N', long, default_value_t = 8)]
        truncation: usize,
    },
    /// Random mutation sequences, reporting 2-acyclicity
    Probe {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        len: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Restrict to a vertex subset
    Restrict {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        keep: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

fn load_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Accepts a bare quiver file, an SP bundle, or a surface spec.
fn load_quiver(path: &Path) -> Result<WeightedQuiver> {
    let v = load_json(path)?;
    if v.get("pieces").is_some() {
        let spec: SurfaceSpec = serde_json::from_value(v)?;
        let (tagged, _) = from_spec(&spec)?;
        return Ok(specpot::surface::build_quiver(&tagged.map)?);
    }
    let qv = v.get("quiver").cloned().unwrap_or(v);
    Ok(quiver_from_json(&qv)?)
}

fn load_sp(path: &Path, trunc: Option<usize>) -> Result<SpeciesWithPotential> {
    let v = load_json(path)?;
    if v.get("pieces").is_some() {
        let spec: SurfaceSpec = serde_json::from_value(v)?;
        let (tagged, x) = from_spec(&spec)?;
        return Ok(build_sp(&tagged, &x, trunc.or(Some(12)))?);
    }
    let qv = v
        .get("quiver")
        .cloned()
        .ok_or_else(|| anyhow!("expected an SP bundle with \"quiver\" and \"potential\""))?;
    let q = quiver_from_json(&qv)?;
    let text = v
        .get("potential")
        .and_then(|p| p.as_str())
        .ok_or_else(|| anyhow!("missing \"potential\""))?;
    let n = trunc.or_else(|| v.get("truncation").and_then(|t| t.as_u64()).map(|t| t as usize));
    let pot = parse_element(&q, text).map_err(|e| anyhow!("potential: {e}"))?.truncated(n);
    Ok(SpeciesWithPotential::new(q, pot)?)
}

fn sp_to_json(sp: &SpeciesWithPotential) -> serde_json::Value {
    serde_json::json!({
        "quiver": quiver_to_json(&sp.quiver),
        "potential": format_element(&sp.quiver, &sp.potential),
        "truncation": sp.potential.trunc,
    })
}

fn print_matrix(q: &WeightedQuiver) -> Result<()> {
    let m = to_matrix(q)?;
    println!("weights: {:?}", m.d);
    for row in &m.b {
        println!("{row:?}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Quiver { cmd } => match cmd {
            QuiverCmd::Build { file, json, dot } => {
                let q = load_quiver(&file)?;
                if let Some(path) = dot {
                    std::fs::write(path, quiver_to_dot(&q))?;
                }
                if json {
                    println!("{}", serde_json::to_string_pretty(&quiver_to_json(&q))?);
                } else {
                    print_matrix(&q)?;
                }
                Ok(ExitCode::SUCCESS)
            }
            QuiverCmd::Mutate { file, at, json, dot } => {
                let mut q = load_quiver(&file)?;
                for vid in &at {
                    let k = q.vertex_ix(vid)?;
                    q = wq_mutate(&q, k)?;
                }
                if let Some(path) = dot {
                    std::fs::write(path, quiver_to_dot(&q))?;
                }
                if json {
                    println!("{}", serde_json::to_string_pretty(&quiver_to_json(&q))?);
                } else if q.is_two_acyclic() {
                    print_matrix(&q)?;
                } else {
                    println!("quiver has 2-cycles:");
                    for a in &q.arrows {
                        println!("  {}: {} -> {}", a.id, q.vertices[a.tail].id, q.vertices[a.head].id);
                    }
                }
                Ok(ExitCode::SUCCESS)
            }
            QuiverCmd::Iso { a, b, labeled } => {
                let qa = load_quiver(&a)?;
                let qb = load_quiver(&b)?;
                match wq_isomorphic(&qa, &qb, labeled) {
                    Some(iso) => {
                        for (x, y) in &iso.vertex_map {
                            println!("{x} -> {y}");
                        }
                        Ok(ExitCode::SUCCESS)
                    }
                    None => {
                        println!("not isomorphic");
                        Ok(ExitCode::from(1))
                    }
                }
            }
        },
        Command::Sp { cmd } => match cmd {
            SpCmd::Build { file, truncation, json } => {
                let sp = load_sp(&file, truncation)?;
                if json {
                    println!("{}", serde_json::to_string_pretty(&sp_to_json(&sp))?);
                } else {
                    println!("{}", format_element(&sp.quiver, &sp.potential));
                }
                Ok(ExitCode::SUCCESS)
            }
            SpCmd::Mutate { file, at, truncation, json } => {
                let mut sp = load_sp(&file, truncation)?;
                for vid in &at {
                    let k = sp.quiver.vertex_ix(vid)?;
                    sp = mutate(&sp, k)?;
                }
                if json {
                    println!("{}", serde_json::to_string_pretty(&sp_to_json(&sp))?);
                } else {
                    println!("{}", format_element(&sp.quiver, &sp.potential));
                }
                Ok(ExitCode::SUCCESS)
            }
            SpCmd::Jacobian { file, truncation } => {
                let sp = load_sp(&file, Some(truncation + 2))?;
                let dims = jacobian_dims(&sp, truncation)?;
                println!("{dims:?}");
                Ok(ExitCode::SUCCESS)
            }
            SpCmd::Probe { file, len, trials, seed, json } => {
                let sp = load_sp(&file, None)?;
                let ids: Vec<String> = sp.quiver.vertices.iter().map(|v| v.id.clone()).collect();
                let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
                let mut next = move || {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    state
                };
                let mut seqs = Vec::new();
                for _ in 0..trials {
                    let mut s = Vec::new();
                    let mut last = usize::MAX;
                    for _ in 0..len {
                        let mut k = next() as usize % ids.len();
                        if k == last {
                            k = (k + 1) % ids.len();
                        }
                        last = k;
                        s.push(ids[k].clone());
                    }
                    seqs.push(s);
                }
                let report = nondegeneracy_probe(&sp, &seqs)?;
                if json {
                    let rows: Vec<serde_json::Value> = report
                        .sequences
                        .iter()
                        .map(|steps| {
                            serde_json::json!(steps
                                .iter()
                                .map(|s| serde_json::json!({"vertex": s.vertex, "two_acyclic": s.two_acyclic, "quiver_hash": format!("{:016x}", s.quiver_hash)}))
                                .collect::<Vec<_>>())
                        })
                        .collect();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "failures": report.failures,
                            "sequences": rows,
                        }))?
                    );
                } else {
                    println!("sequences: {}, failures: {}", report.sequences.len(), report.failures);
                }
                Ok(if report.failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
            }
            SpCmd::Restrict { file, keep, json } => {
                let sp = load_sp(&file, None)?;
                let set: BTreeSet<String> = keep.into_iter().collect();
                let out = restrict_sp(&sp, &set)?;
                if json {
                    println!("{}", serde_json::to_string_pretty(&sp_to_json(&out))?);
                } else {
                    println!("{}", format_element(&out.quiver, &out.potential));
                }
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Verify { paths, all } => {
            let mut files = paths;
            if let Some(dir) = all {
                let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)?
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
                    .collect();
                entries.sort();
                files.extend(entries);
            }
            if files.is_empty() {
                return Err(anyhow!("no fixtures given"));
            }
            let mut failed = false;
            for path in files {
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let case: FixtureCase = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                let report = run_fixture(&case)?;
                if report.passed() {
                    println!("PASS {}", report.name);
                } else {
                    failed = true;
                    println!(
                        "FAIL {} (witness_valid={} cyclic={} reduced_iso={}{})",
                        report.name,
                        report.witness_valid,
                        report.cyclic_match,
                        report.reduced_quivers_isomorphic,
                        report
                            .first_difference
                            .as_ref()
                            .map(|d| format!(", first difference {d}"))
                            .unwrap_or_default()
                    );
                }
            }
            Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
    }
}
