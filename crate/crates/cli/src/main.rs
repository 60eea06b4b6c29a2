use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mfdo_core::decremental::new_dec_oracle;
use mfdo_core::graph::{DiGraph, VertexId};
use mfdo_core::harness::{
    bench, build_any, parse_workload, pieces_of, run_workload, space_of, verify, verify_decremental, verify_oracle,
    workload_gen, BuildParams, RunReport, Sample, WorkloadKind,
};
use mfdo_core::io::{load_oracle, save_oracle, OracleKind, QueryMode};
use mfdo_core::patterns::{count_patterns_audit, ShiftSet};
use mfdo_core::rdiv::{build_r_division, suggested_r, validate_r_division, AuditConstants};
use mfdo_core::{load_graph, IoError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "mfdo", version, about = "Distance and reachability oracles over r-divisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Piece size; defaults to n^(2/(3h-2)).
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minor-exclusion exponent used for the default r and audit thresholds.
    #[arg(long, default_value_t = 5)]
    h: u32,
    /// Also write the JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Unweighted,
    Weighted,
    Bottleneck,
    Approx,
}

impl From<Kind> for OracleKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Unweighted => OracleKind::Unweighted,
            Kind::Weighted => OracleKind::Weighted,
            Kind::Bottleneck => OracleKind::Bottleneck,
            Kind::Approx => OracleKind::Approx,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Unweighted,
    Weighted,
    Bottleneck,
    Approx,
    Decremental,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Rand,
    Det,
}

impl From<Mode> for QueryMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Rand => QueryMode::Randomized,
            Mode::Det => QueryMode::Deterministic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WorkloadShape {
    Teardown,
    Mixed,
}

#[derive(Args, Clone)]
struct ApproxFlags {
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Upper bound on edge weights (bounded approximate oracle).
    #[arg(long = "W")]
    max_weight: Option<f64>,
    /// Use the bottleneck-windowed approximate oracle.
    #[arg(long)]
    unbounded: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build an oracle and write it to a file.
    Build {
        #[arg(long, value_enum)]
        kind: Kind,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        approx: ApproxFlags,
        graph: PathBuf,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Answer `u v` lines from a query file, printing `u v d`.
    Query {
        oracle: PathBuf,
        queries: PathBuf,
        #[arg(long, value_enum, default_value = "rand")]
        query_mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check an oracle against the brute-force reference.
    Verify {
        #[arg(long, value_enum)]
        kind: VerifyKind,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        approx: ApproxFlags,
        /// Number of sampled pairs, or `all`.
        #[arg(long, default_value = "all")]
        sample: String,
        #[arg(long, value_enum, default_value = "rand")]
        query_mode: Mode,
        /// Verify this oracle file instead of building one.
        #[arg(long)]
        oracle: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
        graph: PathBuf,
    },
    /// Build for several r and report sizes and probe statistics.
    Bench {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Comma-separated piece sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        approx: ApproxFlags,
        #[arg(long, default_value_t = 1000)]
        queries: usize,
        #[arg(long, value_enum, default_value = "rand")]
        query_mode: Mode,
        /// Record wall-clock build times (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
        graph: PathBuf,
    },
    /// Run a `D u v` / `Q u v` workload through the decremental oracle.
    Decr {
        #[command(flatten)]
        common: Common,
        graph: PathBuf,
        #[arg(long)]
        workload: PathBuf,
    },
    /// Report the r-division of a graph.
    Rdiv {
        #[command(flatten)]
        common: Common,
        graph: PathBuf,
    },
    /// Count distinct multiball restrictions per piece.
    AuditPatterns {
        #[command(flatten)]
        common: Common,
        /// Comma-separated finite shifts, e.g. `-1,0,2`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        shifts: String,
        /// Fail when the fitted slope exceeds this; defaults to h - 1 + 0.5.
        #[arg(long)]
        max_slope: Option<f64>,
        graph: PathBuf,
    },
    /// Generate a deletion/query workload.
    WorkloadGen {
        #[arg(long, value_enum, default_value = "teardown")]
        kind: WorkloadShape,
        #[arg(long, default_value_t = 5)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        graph: PathBuf,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Print table sizes and pattern counts of an oracle file.
    Stats { oracle: PathBuf },
}

fn read_graph(path: &Path) -> Result<DiGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn resolve_r(common: &Common, g: &DiGraph) -> usize {
    common.r.unwrap_or_else(|| suggested_r(g.n(), common.h))
}

fn emit(value: &impl Serialize, json: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    if let Err(e) = writeln!(io::stdout().lock(), "{text}") {
        if e.kind() != io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    if let Some(path) = json {
        fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn params(common: &Common, approx: &ApproxFlags, g: &DiGraph) -> BuildParams {
    BuildParams {
        r: resolve_r(common, g),
        seed: common.seed,
        eps: approx.eps,
        max_weight: approx.max_weight,
        unbounded: approx.unbounded,
    }
}

fn parse_sample(s: &str) -> Result<Sample> {
    if s == "all" {
        return Ok(Sample::All);
    }
    Ok(Sample::Count(s.parse().with_context(|| format!("bad --sample {s:?}"))?))
}

fn parse_pairs(text: &str, n: usize) -> Result<Vec<(VertexId, VertexId)>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            bail!("query line {}: {line:?}", i + 1);
        };
        let (u, v): (usize, usize) = (a.parse()?, b.parse()?);
        if u >= n || v >= n {
            bail!("query line {}: vertex out of range for n = {n}", i + 1);
        }
        pairs.push((u, v));
    }
    Ok(pairs)
}

fn verdict_code(report: &RunReport) -> ExitCode {
    if report.verdict {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build { kind, common, approx, graph, out } => {
            let g = read_graph(&graph)?;
            let p = params(&common, &approx, &g);
            let oracle = build_any(kind.into(), &g, &p)?;
            save_oracle(&out, &oracle).with_context(|| format!("writing {}", out.display()))?;
            let summary = json!({
                "kind": oracle.kind().name(),
                "n": g.n(),
                "m": g.m(),
                "r": p.r,
                "seed": p.seed,
                "space": space_of(&oracle),
            });
            emit(&summary, common.json.as_deref())?;
        }
        Command::Query { oracle, queries, query_mode, seed } => {
            let o = load_oracle(&oracle).with_context(|| format!("loading {}", oracle.display()))?;
            let text = fs::read_to_string(&queries).with_context(|| format!("reading {}", queries.display()))?;
            let pairs = parse_pairs(&text, o.n())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            for (u, v) in pairs {
                let (d, _) = o.query(u, v, query_mode.into(), &mut rng);
                writeln!(out, "{u} {v} {d}")?;
            }
        }
        Command::Verify { kind, common, approx, sample, query_mode, oracle, timing, graph } => {
            let g = read_graph(&graph)?;
            let p = params(&common, &approx, &g);
            let sample = parse_sample(&sample)?;
            let built = oracle.is_none();
            let report = match (kind, oracle) {
                (VerifyKind::Decremental, _) => verify_decremental(&g, &p, sample),
                (_, Some(path)) => match load_oracle(&path) {
                    Ok(o) => verify_oracle(&o, &g, &p, sample, query_mode.into()),
                    Err(
                        e @ (IoError::BadMagic | IoError::BadVersion(_) | IoError::BadKind(_) | IoError::Payload(_)),
                    ) => RunReport {
                        kind: "unknown".to_string(),
                        n: g.n(),
                        m: g.m(),
                        r: p.r,
                        seed: p.seed,
                        error: Some(e.to_string()),
                        ..Default::default()
                    },
                    Err(e) => return Err(e).with_context(|| format!("loading {}", path.display())),
                },
                (k, None) => {
                    let k = match k {
                        VerifyKind::Unweighted => OracleKind::Unweighted,
                        VerifyKind::Weighted => OracleKind::Weighted,
                        VerifyKind::Bottleneck => OracleKind::Bottleneck,
                        VerifyKind::Approx => OracleKind::Approx,
                        VerifyKind::Decremental => unreachable!(),
                    };
                    verify(k, &g, &p, sample, query_mode.into(), timing)
                }
            };
            emit(&report, common.json.as_deref())?;
            if built && report.compared == 0 && report.error.is_some() {
                return Ok(ExitCode::from(2));
            }
            return Ok(verdict_code(&report));
        }
        Command::Bench { kind, r, seed, json, approx, queries, query_mode, timing, graph } => {
            let g = read_graph(&graph)?;
            let base =
                BuildParams { r: 1, seed, eps: approx.eps, max_weight: approx.max_weight, unbounded: approx.unbounded };
            let reports = bench(kind.into(), &g, &r, &base, queries, query_mode.into(), timing);
            emit(&reports, json.as_deref())?;
            if reports.iter().any(|r| r.error.is_some()) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Decr { common, graph, workload } => {
            let g = read_graph(&graph)?;
            let text = fs::read_to_string(&workload).with_context(|| format!("reading {}", workload.display()))?;
            let ops = parse_workload(&text).map_err(|e| anyhow::anyhow!("workload {e}"))?;
            let mut o = new_dec_oracle(&g, resolve_r(&common, &g), common.seed);
            let answers = run_workload(&mut o, &ops)?;
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            for (u, v, r) in answers {
                writeln!(out, "{u} {v} {r}")?;
            }
        }
        Command::Rdiv { common, graph } => {
            let g = read_graph(&graph)?;
            let r = resolve_r(&common, &g);
            let rd = build_r_division(&g, r, common.seed);
            let rep = validate_r_division(&g, &rd);
            let pieces: Vec<_> = rd
                .pieces
                .iter()
                .map(|p| json!({"id": p.id, "edges": p.edge_ids.len(), "vertices": p.n(), "boundary": p.k()}))
                .collect();
            let value = json!({
                "n": g.n(),
                "m": g.m(),
                "r": r,
                "seed": common.seed,
                "piece_count": rep.piece_count,
                "max_edges": rep.max_edges,
                "max_boundary": rep.max_boundary,
                "boundary_union": rep.boundary_union,
                "cover_ok": rep.cover_ok,
                "audit_ok": AuditConstants::default().check(&rep, g.n(), r),
                "pieces": pieces,
            });
            emit(&value, common.json.as_deref())?;
        }
        Command::AuditPatterns { common, shifts, max_slope, graph } => {
            let g = read_graph(&graph)?;
            let r = resolve_r(&common, &g);
            let deltas = shifts
                .split(',')
                .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad shift {s:?}")))
                .collect::<Result<Vec<_>>>()?;
            let shifts = ShiftSet::closed(deltas)?;
            let rd = build_r_division(&g, r, common.seed);
            let sources: Vec<VertexId> = (0..g.n()).collect();
            let audit = count_patterns_audit(&g, &rd, &shifts, &sources);
            let limit = max_slope.unwrap_or(common.h as f64 - 1.0 + 0.5);
            let pass = audit.slope.is_none_or(|s| s <= limit);
            let value = json!({
                "r": r,
                "ell": shifts.ell(),
                "pieces": audit.pieces,
                "slope": audit.slope,
                "max_slope": limit,
                "pass": pass,
            });
            emit(&value, common.json.as_deref())?;
            if !pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::WorkloadGen { kind, queries, seed, graph, out } => {
            let g = read_graph(&graph)?;
            let kind = match kind {
                WorkloadShape::Teardown => WorkloadKind::Teardown { queries },
                WorkloadShape::Mixed => WorkloadKind::Mixed { queries },
            };
            let text = workload_gen(&g, kind, seed);
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Stats { oracle } => {
            let o = load_oracle(&oracle).with_context(|| format!("loading {}", oracle.display()))?;
            let pieces = pieces_of(&o);
            let value = json!({
                "kind": o.kind().name(),
                "n": o.n(),
                "space": space_of(&o),
                "piece_count": pieces.len(),
                "patterns": pieces.iter().map(|p| p.patterns).sum::<usize>(),
                "pieces": pieces,
            });
            emit(&value, None)?;
        }
    }
    Ok(ExitCode::SUCCESS)
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
