//! Differential verification, benchmarking and workload generation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{build_approx, ApproxMode};
use crate::decremental::reach::reach_reference;
use crate::decremental::{build_bottleneck_oracle, new_dec_oracle, DecReachOracle};
use crate::error::OracleError;
use crate::graph::{apsp_reference, bottleneck_apsp_reference, DiGraph, Dist, DistMatrix, VertexId};
use crate::io::{AnyOracle, OracleKind, QueryMode};
use crate::unweighted::{build_unweighted_oracle, UnweightedOptions, Wiener};
use crate::weighted::{build_weighted_oracle, WeightedOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub r: usize,
    pub seed: u64,
    pub eps: f64,
    /// Weight bound for the bounded approximate oracle.
    pub max_weight: Option<f64>,
    /// Force the unbounded approximate oracle.
    pub unbounded: bool,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams { r: 16, seed: 0, eps: 0.5, max_weight: None, unbounded: false }
    }
}

pub fn build_any(kind: OracleKind, g: &DiGraph, p: &BuildParams) -> Result<AnyOracle, OracleError> {
    Ok(match kind {
        OracleKind::Unweighted => {
            AnyOracle::Unweighted(build_unweighted_oracle(g, p.r, p.seed, UnweightedOptions::default())?)
        }
        OracleKind::Weighted => AnyOracle::Weighted(build_weighted_oracle(g, p.r, p.seed, WeightedOptions::default())?),
        OracleKind::Bottleneck => AnyOracle::Bottleneck(build_bottleneck_oracle(g, p.r, p.seed)),
        OracleKind::Approx => {
            let bounded = !p.unbounded && g.min_weight().is_none_or(|w| w >= 1.0);
            let mode = if bounded { ApproxMode::Bounded { max_weight: p.max_weight } } else { ApproxMode::Unbounded };
            AnyOracle::Approx(build_approx(g, p.r, p.eps, mode, p.seed)?)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sample {
    All,
    Count(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PieceSummary {
    pub boundary: usize,
    pub vertices: usize,
    /// Distinct patterns, restricted vectors or boundary sets, per kind.
    pub patterns: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: String,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Only filled when timing is requested, so reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build_ms: Option<f64>,
    pub space: BTreeMap<String, usize>,
    pub pieces: Vec<PieceSummary>,
    pub boundary_union: usize,
    pub queries: usize,
    pub probes_mean: f64,
    pub probes_max: usize,
    pub compared: usize,
    pub mismatches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn space_of(o: &AnyOracle) -> BTreeMap<String, usize> {
    let mut s = BTreeMap::new();
    let mut put = |k: &str, v: usize| {
        s.insert(k.to_string(), v);
    };
    match o {
        AnyOracle::Unweighted(o) => {
            let b = o.space();
            put("to_boundary", b.to_boundary);
            put("intra_piece", b.intra_piece);
            put("balls", b.balls);
            put("ball_bits", b.ball_bits);
            put("ball_rows", b.ball_rows);
            put("source_refs", b.source_refs);
            put("patterns", b.patterns);
        }
        AnyOracle::Weighted(o) => {
            let b = o.space();
            put("to_boundary", b.to_boundary);
            put("intra_piece", b.intra_piece);
            put("shifts", b.shifts);
            put("y_vectors", b.y_vectors);
            put("x_words", b.x_words);
            put("source_refs", b.source_refs);
        }
        AnyOracle::Bottleneck(o) => {
            put("intra_timestamps", o.pieces.iter().map(|p| p.intra_death.len()).sum());
            put("tree_timestamps", o.pieces.iter().flat_map(|p| &p.tree_death).map(Vec::len).sum());
            put("versions", o.pieces.iter().flat_map(|p| &p.versions).map(Vec::len).sum());
        }
        AnyOracle::Approx(o) => {
            put("intra_piece", o.pieces.iter().map(|p| p.d_g.len()).sum());
            put("set_rows", o.pieces.iter().flat_map(|p| &p.rows).map(Vec::len).sum());
            put("entries", o.pieces.iter().flat_map(|p| &p.entries).map(Vec::len).sum());
        }
    }
    s
}

pub fn pieces_of(o: &AnyOracle) -> Vec<PieceSummary> {
    match o {
        AnyOracle::Unweighted(o) => o
            .pieces
            .iter()
            .map(|t| PieceSummary {
                boundary: t.stats.boundary,
                vertices: t.stats.vertices,
                patterns: t.stats.distinct_patterns,
            })
            .collect(),
        AnyOracle::Weighted(o) => {
            o.rd.pieces
                .iter()
                .zip(&o.pieces)
                .map(|(p, w)| PieceSummary {
                    boundary: p.k(),
                    vertices: p.n(),
                    patterns: w.y_count.iter().map(|&c| c as usize).sum(),
                })
                .collect()
        }
        AnyOracle::Bottleneck(o) => {
            o.rd.pieces
                .iter()
                .zip(&o.pieces)
                .map(|(p, b)| PieceSummary { boundary: p.k(), vertices: p.n(), patterns: b.tree_death.len() })
                .collect()
        }
        AnyOracle::Approx(o) => {
            o.rd.pieces
                .iter()
                .zip(&o.pieces)
                .map(|(p, a)| PieceSummary { boundary: p.k(), vertices: p.n(), patterns: a.rows.len() })
                .collect()
        }
    }
}

fn division_of(o: &AnyOracle) -> &crate::rdiv::RDivision {
    match o {
        AnyOracle::Unweighted(o) => &o.rd,
        AnyOracle::Weighted(o) => &o.rd,
        AnyOracle::Bottleneck(o) => &o.rd,
        AnyOracle::Approx(o) => &o.rd,
    }
}

fn base_report(kind: &str, g: &DiGraph, p: &BuildParams) -> RunReport {
    RunReport { kind: kind.to_string(), n: g.n(), m: g.m(), r: p.r, seed: p.seed, ..Default::default() }
}

fn sample_pairs(n: usize, sample: Sample, rng: &mut impl Rng) -> Vec<(VertexId, VertexId)> {
    match sample {
        Sample::All => (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).collect(),
        Sample::Count(k) => (0..k).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect(),
    }
}

fn reference_for(kind: OracleKind, g: &DiGraph) -> DistMatrix {
    match kind {
        OracleKind::Bottleneck => bottleneck_apsp_reference(g),
        _ => apsp_reference(g),
    }
}

/// Builds an oracle and checks it against the matching reference.
pub fn verify(
    kind: OracleKind,
    g: &DiGraph,
    p: &BuildParams,
    sample: Sample,
    mode: QueryMode,
    timing: bool,
) -> RunReport {
    let start = Instant::now();
    let oracle = match build_any(kind, g, p) {
        Ok(o) => o,
        Err(e) => {
            let mut rep = base_report(kind.name(), g, p);
            rep.error = Some(e.to_string());
            return rep;
        }
    };
    let mut rep = verify_oracle(&oracle, g, p, sample, mode);
    if timing {
        rep.build_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    rep
}

/// Checks an already built (possibly loaded) oracle. Panics while querying
/// count as a failed verdict.
pub fn verify_oracle(oracle: &AnyOracle, g: &DiGraph, p: &BuildParams, sample: Sample, mode: QueryMode) -> RunReport {
    let kind = oracle.kind();
    let mut rep = base_report(kind.name(), g, p);
    if oracle.n() != g.n() {
        rep.error = Some(format!("oracle has {} vertices, graph has {}", oracle.n(), g.n()));
        return rep;
    }
    let eps = match oracle {
        AnyOracle::Approx(o) => Some(o.eps),
        _ => None,
    };
    rep.eps = eps;
    let result = catch_unwind(AssertUnwindSafe(|| {
        rep.space = space_of(oracle);
        rep.pieces = pieces_of(oracle);
        rep.boundary_union = division_of(oracle).boundary_union.len();
        let reference = reference_for(kind, g);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let pairs = sample_pairs(g.n(), sample, &mut rng);
        let seeds: Vec<u64> = pairs.iter().map(|_| rng.gen()).collect();
        let outcomes: Vec<(bool, usize, f64)> = pairs
            .par_iter()
            .zip(&seeds)
            .map(|(&(u, v), &s)| {
                let mut qrng = ChaCha8Rng::seed_from_u64(s);
                let (got, probes) = oracle.query(u, v, mode, &mut qrng);
                let want = reference.get(u, v);
                match eps {
                    Some(eps) => {
                        let ok = if want.is_inf() {
                            got.is_inf()
                        } else {
                            got.is_finite() && got >= want && got.value() <= (1.0 + eps) * want.value()
                        };
                        let ratio = if want.is_finite() && want.value() > 0.0 && got.is_finite() {
                            got.value() / want.value()
                        } else {
                            1.0
                        };
                        (ok, probes, ratio)
                    }
                    None => (got == want, probes, 1.0),
                }
            })
            .collect();
        rep.queries = outcomes.len();
        rep.compared = outcomes.len();
        rep.mismatches = outcomes.iter().filter(|o| !o.0).count();
        rep.probes_max = outcomes.iter().map(|o| o.1).max().unwrap_or(0);
        rep.probes_mean = if outcomes.is_empty() {
            0.0
        } else {
            outcomes.iter().map(|o| o.1).sum::<usize>() as f64 / outcomes.len() as f64
        };
        if eps.is_some() {
            rep.max_ratio = Some(outcomes.iter().map(|o| o.2).fold(1.0, f64::max));
        }
        if let (AnyOracle::Unweighted(o), Sample::All) = (oracle, sample) {
            let ecc = o.eccentricities();
            for (u, e) in ecc.iter().enumerate() {
                rep.compared += 1;
                if *e != reference.row(u).iter().copied().max().unwrap_or(Dist::ZERO) {
                    rep.mismatches += 1;
                }
            }
            let want = if g.is_strongly_connected() {
                Wiener::Finite((0..g.n()).flat_map(|u| reference.row(u).iter().map(|d| d.value() as u64)).sum())
            } else {
                Wiener::Infinite
            };
            rep.compared += 1;
            if o.wiener_index().ok() != Some(want) {
                rep.mismatches += 1;
            }
        }
    }));
    if result.is_err() {
        rep.error = Some("oracle panicked during verification".to_string());
        rep.verdict = false;
        return rep;
    }
    rep.verdict = rep.mismatches == 0 && rep.error.is_none();
    rep
}

/// Seeded teardown of `g` through the decremental oracle, checking `sample`
/// pairs against a fresh search after every deletion.
pub fn verify_decremental(g: &DiGraph, p: &BuildParams, sample: Sample) -> RunReport {
    let mut rep = base_report("decremental", g, p);
    let mut o = new_dec_oracle(g, p.r, p.seed);
    rep.boundary_union = o.division().boundary_union.len();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.shuffle(&mut rng);
    let mut alive = FixedBitSet::with_capacity(g.m());
    alive.insert_range(..);
    let mut probes = 0usize;
    for e in order {
        o.delete_edge(e).expect("fresh edge");
        alive.set(e, false);
        let pairs = sample_pairs(g.n(), sample, &mut rng);
        let mut cache: BTreeMap<VertexId, FixedBitSet> = BTreeMap::new();
        for (u, v) in pairs {
            let fresh = cache.entry(u).or_insert_with(|| reach_reference(g, &alive, u));
            let a = o.query_probes(u, v);
            probes += a.probes;
            rep.probes_max = rep.probes_max.max(a.probes);
            rep.compared += 1;
            if a.reachable != fresh.contains(v) {
                rep.mismatches += 1;
            }
        }
    }
    rep.queries = rep.compared;
    rep.probes_mean = if rep.compared == 0 { 0.0 } else { probes as f64 / rep.compared as f64 };
    rep.pieces = o
        .division()
        .pieces
        .iter()
        .zip(o.pattern_counts())
        .map(|(p, (k, c))| PieceSummary { boundary: k, vertices: p.n(), patterns: c })
        .collect();
    rep.verdict = rep.mismatches == 0;
    rep
}

/// One report per `r`, each answering `queries` seeded random pairs.
pub fn bench(
    kind: OracleKind,
    g: &DiGraph,
    rs: &[usize],
    base: &BuildParams,
    queries: usize,
    mode: QueryMode,
    timing: bool,
) -> Vec<RunReport> {
    rs.iter()
        .map(|&r| {
            let p = BuildParams { r, ..*base };
            let mut rep = base_report(kind.name(), g, &p);
            let start = Instant::now();
            let oracle = match build_any(kind, g, &p) {
                Ok(o) => o,
                Err(e) => {
                    rep.error = Some(e.to_string());
                    return rep;
                }
            };
            if timing {
                rep.build_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            rep.space = space_of(&oracle);
            rep.pieces = pieces_of(&oracle);
            rep.boundary_union = division_of(&oracle).boundary_union.len();
            if let AnyOracle::Approx(o) = &oracle {
                rep.eps = Some(o.eps);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            let mut total = 0;
            for _ in 0..queries {
                let (u, v) = (rng.gen_range(0..g.n()), rng.gen_range(0..g.n()));
                let (_, probes) = oracle.query(u, v, mode, &mut rng);
                total += probes;
                rep.probes_max = rep.probes_max.max(probes);
            }
            rep.queries = queries;
            rep.probes_mean = if queries == 0 { 0.0 } else { total as f64 / queries as f64 };
            rep.verdict = true;
            rep
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WorkloadKind {
    /// Every edge deleted once, `queries` query lines after each deletion.
    Teardown { queries: usize },
    /// Half of the edges deleted, `queries` query lines between deletions.
    Mixed { queries: usize },
}

pub fn workload_gen(g: &DiGraph, kind: WorkloadKind, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.shuffle(&mut rng);
    let (deletes, queries) = match kind {
        WorkloadKind::Teardown { queries } => (g.m(), queries),
        WorkloadKind::Mixed { queries } => (g.m() / 2, queries),
    };
    let mut out = String::new();
    let emit_queries = |out: &mut String, rng: &mut ChaCha8Rng| {
        if g.n() == 0 {
            return;
        }
        for _ in 0..queries {
            let (u, v) = (rng.gen_range(0..g.n()), rng.gen_range(0..g.n()));
            writeln!(out, "Q {u} {v}").expect("write to string");
        }
    };
    if matches!(kind, WorkloadKind::Mixed { .. }) {
        emit_queries(&mut out, &mut rng);
    }
    for &e in &order[..deletes] {
        let edge = g.edge(e);
        writeln!(out, "D {} {}", edge.tail, edge.head).expect("write to string");
        emit_queries(&mut out, &mut rng);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkloadOp {
    Delete(VertexId, VertexId),
    Query(VertexId, VertexId),
}

/// Parses `D u v` / `Q u v` lines; blank lines and `#` comments are skipped.
pub fn parse_workload(text: &str) -> Result<Vec<WorkloadOp>, String> {
    let mut ops = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || format!("line {}: {line:?}", i + 1);
        if parts.len() != 3 {
            return Err(bad());
        }
        let u: VertexId = parts[1].parse().map_err(|_| bad())?;
        let v: VertexId = parts[2].parse().map_err(|_| bad())?;
        ops.push(match parts[0] {
            "D" => WorkloadOp::Delete(u, v),
            "Q" => WorkloadOp::Query(u, v),
            _ => return Err(bad()),
        });
    }
    Ok(ops)
}

/// Runs a workload; returns one answer per query.
pub fn run_workload(
    o: &mut DecReachOracle,
    ops: &[WorkloadOp],
) -> Result<Vec<(VertexId, VertexId, bool)>, OracleError> {
    let n = o.division().n();
    let mut answers = Vec::new();
    for &op in ops {
        match op {
            WorkloadOp::Delete(u, v) => {
                o.delete_arc(u, v)?;
            }
            WorkloadOp::Query(u, v) => {
                if u >= n || v >= n {
                    return Err(crate::error::GraphError::VertexOutOfRange { vertex: u.max(v), n }.into());
                }
                answers.push((u, v, o.query(u, v)));
            }
        }
    }
    Ok(answers)
}
