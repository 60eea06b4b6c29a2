//! (1+ε)-approximate distance oracles.
//!
//! For a source `u` outside piece `P`, the boundary of `P` is bucketed by
//! geometrically growing radii `thr_j = unit·(1+ε)^j`. Bucket `j` stores the
//! nested set `X_j = {b ∈ ∂P : d(u,b) ≤ thr_j}`, and each distinct set keeps a
//! row `d_P(X_j, ·)`. The estimate `min_j thr_j + d_P(X_j, v)` never
//! undershoots and overshoots by at most a factor `1+ε`.
//!
//! With unbounded aspect ratio a bottleneck query brackets `d(u,v)` in
//! `[β, n·β]`, so only the buckets inside that window are scanned.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decremental::bottleneck::{build_bottleneck_oracle, BottleneckOracle};
use crate::error::OracleError;
use crate::graph::{DiGraph, Dist, VertexId};
use crate::rdiv::{build_r_division, Piece, RDivision};
use crate::strings::{StringId, StringStore};

/// Relative slack on every threshold, in machine epsilons.
pub const GUARD_ULPS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ApproxMode {
    /// All weights ≥ 1; `max_weight` bounds them if given.
    Bounded { max_weight: Option<f64> },
    /// Any positive weights; needs a bottleneck oracle at query time.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxPiece {
    /// `d_G` between local vertices, row-major.
    pub d_g: Vec<Dist>,
    /// `d_P(X, v)` per distinct boundary set `X`.
    pub rows: Vec<Vec<Dist>>,
    /// Boundary indices of each distinct set.
    pub sets: Vec<Vec<u32>>,
    /// Per global source outside the piece: `(j, row)` for `j = -1` and every
    /// `j` where the set grows, ascending in `j`.
    pub entries: Vec<Vec<(i32, u32)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxOracle {
    pub rd: RDivision,
    pub eps: f64,
    pub mode: ApproxMode,
    pub unit: f64,
    /// Largest bucket index.
    pub ell: i32,
    pub pieces: Vec<ApproxPiece>,
    pub bottleneck: Option<BottleneckOracle>,
}

/// Guarded threshold of bucket `j`; bucket `-1` is radius 0.
pub fn threshold(unit: f64, eps: f64, j: i32) -> f64 {
    if j < 0 {
        0.0
    } else {
        unit * (1.0 + eps).powi(j) * (1.0 + GUARD_ULPS * f64::EPSILON)
    }
}

/// Smallest bucket whose guarded threshold is at least `d`.
fn bucket_of(d: f64, unit: f64, eps: f64) -> i32 {
    if d == 0.0 {
        return -1;
    }
    let mut j = ((d / unit).ln() / (1.0 + eps).ln()).floor().max(0.0) as i32;
    while j > 0 && threshold(unit, eps, j - 1) >= d {
        j -= 1;
    }
    while threshold(unit, eps, j) < d {
        j += 1;
    }
    j
}

pub fn build_approx(g: &DiGraph, r: usize, eps: f64, mode: ApproxMode, seed: u64) -> Result<ApproxOracle, OracleError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(OracleError::EpsilonOutOfRange(eps));
    }
    let min_w = g.min_weight().unwrap_or(1.0);
    let max_w = g.max_weight().unwrap_or(1.0);
    let unit = match mode {
        ApproxMode::Bounded { max_weight } => {
            if min_w < 1.0 {
                return Err(OracleError::WeightBelowOne(min_w));
            }
            if let Some(w) = max_weight {
                if w < max_w {
                    return Err(OracleError::WeightBoundTooSmall { bound: w, max: max_w });
                }
            }
            1.0
        }
        ApproxMode::Unbounded => min_w * eps,
    };
    let rd = build_r_division(g, r, seed);
    let n = g.n();
    let nb = rd.boundary_union.len();
    let rev = g.reverse();
    let columns: Vec<Vec<Dist>> = rd.boundary_union.par_iter().map(|&b| rev.sssp(b)).collect();
    let mut to_boundary = vec![Dist::INF; n * nb];
    for (j, col) in columns.iter().enumerate() {
        for u in 0..n {
            to_boundary[u * nb + j] = col[u];
        }
    }

    let ell = match mode {
        ApproxMode::Bounded { max_weight: Some(w) } => {
            let limit = 2.0 * n as f64 * w;
            let mut j = 0;
            while (1.0 + eps).powi(j + 1) <= limit {
                j += 1;
            }
            j
        }
        _ => {
            let max_d = to_boundary.iter().filter(|d| d.is_finite()).map(|d| d.value()).fold(0.0, f64::max);
            bucket_of(max_d, unit, eps).max(0)
        }
    };

    let pieces = rd.pieces.par_iter().map(|p| build_piece(p, &rd, &to_boundary, nb, n, unit, eps)).collect();
    let bottleneck = matches!(mode, ApproxMode::Unbounded).then(|| build_bottleneck_oracle(g, r, seed));
    Ok(ApproxOracle { rd, eps, mode, unit, ell, pieces, bottleneck })
}

fn build_piece(
    piece: &Piece,
    rd: &RDivision,
    to_boundary: &[Dist],
    nb: usize,
    n: usize,
    unit: f64,
    eps: f64,
) -> ApproxPiece {
    let np = piece.n();
    let k = piece.k();
    let bpos: Vec<usize> = piece.boundary.iter().map(|&b| rd.boundary_pos(b).expect("boundary")).collect();
    let row = |u: VertexId| -> Vec<Dist> { bpos.iter().map(|&j| to_boundary[u * nb + j]).collect() };

    let mut d_g = Vec::with_capacity(np * np);
    for s in 0..np {
        let mut sources = vec![(s, Dist::ZERO)];
        for (i, d) in row(piece.global(s)).into_iter().enumerate() {
            if d.is_finite() {
                sources.push((piece.boundary_local[i], d));
            }
        }
        d_g.extend(piece.graph.dijkstra(&sources));
    }

    let mut store = StringStore::new(2);
    let empty = store.insert_explicit(&vec![0; k]).expect("binary symbols");
    let mut row_of: HashMap<StringId, u32> = HashMap::new();
    let mut rows = Vec::new();
    let mut sets = Vec::new();
    let mut entries = vec![Vec::new(); n];
    let mut materialize = |id: StringId, members: &[u32], rows: &mut Vec<Vec<Dist>>, sets: &mut Vec<Vec<u32>>| {
        *row_of.entry(id).or_insert_with(|| {
            let sources: Vec<(usize, Dist)> =
                members.iter().map(|&i| (piece.boundary_local[i as usize], Dist::ZERO)).collect();
            rows.push(piece.graph.dijkstra(&sources));
            let mut m = members.to_vec();
            m.sort_unstable();
            sets.push(m);
            rows.len() as u32 - 1
        })
    };
    for (u, slot) in entries.iter_mut().enumerate() {
        if piece.contains(u) {
            continue;
        }
        let ds = row(u);
        let mut order: Vec<(i32, usize)> = ds
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_finite())
            .map(|(i, d)| (bucket_of(d.value(), unit, eps), i))
            .collect();
        order.sort_unstable();
        let mut id = empty;
        let mut members: Vec<u32> = Vec::new();
        let mut at = 0;
        if order.first().is_none_or(|&(j, _)| j > -1) {
            slot.push((-1, materialize(id, &members, &mut rows, &mut sets)));
        }
        while at < order.len() {
            let j = order[at].0;
            while at < order.len() && order[at].0 == j {
                let i = order[at].1;
                id = store.insert_substitution(id, i, 1).expect("index within boundary");
                members.push(i as u32);
                at += 1;
            }
            slot.push((j, materialize(id, &members, &mut rows, &mut sets)));
        }
    }
    ApproxPiece { d_g, rows, sets, entries }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxAnswer {
    pub estimate: Dist,
    /// Buckets evaluated.
    pub terms: usize,
}

impl ApproxOracle {
    #[inline]
    pub fn n(&self) -> usize {
        self.rd.n()
    }

    fn direct(&self, u: VertexId, v: VertexId) -> Option<Dist> {
        if u == v {
            return Some(Dist::ZERO);
        }
        for &pid in &self.rd.vertex_pieces[u] {
            let piece = &self.rd.pieces[pid];
            if let Some(lv) = piece.local(v) {
                let lu = piece.local(u).expect("u in piece");
                return Some(self.pieces[pid].d_g[lu * piece.n() + lv]);
            }
        }
        None
    }

    fn term(&self, pid: usize, lv: usize, j: i32, row: u32) -> Dist {
        self.pieces[pid].rows[row as usize][lv] + threshold(self.unit, self.eps, j)
    }

    pub fn query(&self, u: VertexId, v: VertexId) -> Dist {
        self.query_terms(u, v).estimate
    }

    pub fn query_terms(&self, u: VertexId, v: VertexId) -> ApproxAnswer {
        if let Some(d) = self.direct(u, v) {
            return ApproxAnswer { estimate: d, terms: 0 };
        }
        let pid = self.rd.home_piece(v);
        let lv = self.rd.pieces[pid].local(v).expect("v in piece");
        let entries = &self.pieces[pid].entries[u];
        let window = match (&self.bottleneck, self.mode) {
            (Some(bo), ApproxMode::Unbounded) => {
                let x = bo.query(u, v);
                if x.is_inf() {
                    return ApproxAnswer { estimate: Dist::INF, terms: 0 };
                }
                if x.value() == 0.0 {
                    return ApproxAnswer { estimate: Dist::ZERO, terms: 0 };
                }
                self.window(entries, x.value())
            }
            _ => entries.as_slice(),
        };
        let mut best = Dist::INF;
        for &(j, row) in window {
            best = best.min(self.term(pid, lv, j, row));
        }
        if let Some(&(-1, row)) = entries.first() {
            if window.first().is_none_or(|&(j, _)| j != -1) {
                best = best.min(self.term(pid, lv, -1, row));
            }
        }
        ApproxAnswer { estimate: best, terms: window.len() }
    }

    /// Entries relevant when `d(u,v) ∈ [x, n·x]`: the last one at or below
    /// bucket `p` (largest with `thr_p ≤ ε·x`) through bucket `q` (first with
    /// `thr_q ≥ n·x`).
    fn window<'a>(&self, entries: &'a [(i32, u32)], x: f64) -> &'a [(i32, u32)] {
        let p = bucket_of(self.eps * x, self.unit, self.eps);
        let p = if threshold(self.unit, self.eps, p) > self.eps * x { p - 1 } else { p };
        let q = bucket_of(self.n() as f64 * x, self.unit, self.eps);
        let start = entries.partition_point(|&(j, _)| j <= p).saturating_sub(1);
        let end = entries.partition_point(|&(j, _)| j <= q);
        &entries[start..end.max(start)]
    }

    /// Evaluates every bucket `-1..=ell` without pruning or windowing.
    pub fn query_full_range(&self, u: VertexId, v: VertexId) -> Dist {
        if let Some(d) = self.direct(u, v) {
            return d;
        }
        let pid = self.rd.home_piece(v);
        let lv = self.rd.pieces[pid].local(v).expect("v in piece");
        let entries = &self.pieces[pid].entries[u];
        let mut best = Dist::INF;
        let mut at = 0;
        for j in -1..=self.ell {
            while at + 1 < entries.len() && entries[at + 1].0 <= j {
                at += 1;
            }
            if let Some(&(jj, row)) = entries.get(at) {
                if jj <= j {
                    best = best.min(self.term(pid, lv, j, row));
                }
            }
        }
        best
    }

    /// Distinct boundary sets per piece with the piece's boundary size.
    pub fn set_counts(&self) -> Vec<(usize, usize)> {
        self.rd.pieces.iter().zip(&self.pieces).map(|(p, ap)| (p.k(), ap.rows.len())).collect()
    }
}

/// Finite distances lying within the guard band of some threshold without
/// being exactly equal to the unguarded value.
pub fn guard_band_hits(distances: impl IntoIterator<Item = Dist>, unit: f64, eps: f64, ell: i32) -> usize {
    let band = 2.0 * GUARD_ULPS * f64::EPSILON;
    let thresholds: Vec<f64> = (0..=ell).map(|j| unit * (1.0 + eps).powi(j)).collect();
    distances
        .into_iter()
        .filter(|d| d.is_finite() && d.value() > 0.0)
        .filter(|d| {
            let x = d.value();
            thresholds.iter().any(|&t| x != t && ((x - t) / t).abs() <= band)
        })
        .count()
}
