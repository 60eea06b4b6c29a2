//! Exact distance oracle for positively weighted digraphs.
//!
//! For a source `s` outside the piece of `t`, the shortest path leaves through
//! the boundary vertex `v_i` minimizing `d(s, v_i) + d(v_i, t)`. Rearranged,
//! `v_i` beats `v_j` iff `d(s, v_i) - d(s, v_j) < d(v_j, t) - d(v_i, t)`: the
//! left side is read off a multiball vector of `s` with shifts `Δ_j`, the
//! right side depends on the piece only. Each target stores, per such vector,
//! the set of boundary vertices that beat `v_j`; a query then walks these sets
//! down to the minimum.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::graph::{DiGraph, Dist, VertexId};
use crate::minfind::{min_find, random_ranks, MinFindView, Strategy};
use crate::patterns::ShiftSet;
use crate::rdiv::{build_r_division, Piece, RDivision};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedOptions {
    /// Check every permutation against the probe bound for all sources and
    /// redraw it on violation.
    pub verify_permutations: bool,
}

/// Probe budget for the deterministic query on a boundary of size `k`.
pub fn probe_bound(k: usize) -> usize {
    (10.0 * (k.max(1) as f64).ln() + 5.0).floor() as usize
}

const MAX_RESEEDS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPiece {
    /// `d_G` between local vertices, row-major.
    pub d_g: Vec<Dist>,
    /// Finite shifts of `Δ_j` per boundary index, ascending; the last entry
    /// is the sentinel above every finite distance difference.
    pub deltas: Vec<Vec<f64>>,
    /// Number of distinct restricted vectors `Y` per boundary index.
    pub y_count: Vec<u32>,
    y_base: Vec<usize>,
    total_y: usize,
    words: usize,
    /// `X_t[j][y]` bitsets over the boundary.
    x_bits: Vec<u64>,
    /// `Y` id per boundary index, indexed by global source; empty inside.
    pub source_y: Vec<Vec<u32>>,
    /// Rank arrays of `τ(t)` per local target.
    pub tau: Vec<Vec<u32>>,
    pub reseeds: usize,
}

impl WeightedPiece {
    #[inline]
    fn x_set(&self, t: usize, j: usize, y: u32) -> &[u64] {
        let at = (t * self.total_y + self.y_base[j] + y as usize) * self.words;
        &self.x_bits[at..at + self.words]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedOracle {
    pub rd: RDivision,
    pub seed: u64,
    /// `d_G(u, b)` at `u * |∂R| + pos(b)`.
    pub to_boundary: Vec<Dist>,
    pub pieces: Vec<WeightedPiece>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryOutcome {
    pub dist: Dist,
    pub probes: usize,
}

pub fn build_weighted_oracle(
    g: &DiGraph,
    r: usize,
    seed: u64,
    options: WeightedOptions,
) -> Result<WeightedOracle, OracleError> {
    if !g.is_weighted() {
        return Err(OracleError::UnweightedInput);
    }
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
    let sentinel = g.edges().iter().map(|e| e.weight).sum::<f64>() + 1.0;
    let pieces = rd
        .pieces
        .par_iter()
        .map(|p| build_piece(p, &rd, &to_boundary, nb, n, sentinel, seed, options))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WeightedOracle { rd, seed, to_boundary, pieces })
}

fn tau_rng(seed: u64, piece: usize, t: usize, attempt: usize) -> ChaCha8Rng {
    let mix = seed
        ^ (piece as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (t as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ (attempt as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
    ChaCha8Rng::seed_from_u64(mix)
}

#[allow(clippy::too_many_arguments)]
fn build_piece(
    piece: &Piece,
    rd: &RDivision,
    to_boundary: &[Dist],
    nb: usize,
    n: usize,
    sentinel: f64,
    seed: u64,
    options: WeightedOptions,
) -> Result<WeightedPiece, OracleError> {
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
    let dg = |a: usize, b: usize| d_g[a * np + b];

    // Δ_j: every finite d(v_j, t) - d(v_i, t), plus the sentinel.
    let mut deltas = Vec::with_capacity(k);
    for j in 0..k {
        let vj = piece.boundary_local[j];
        let mut ds: Vec<f64> = Vec::new();
        for i in 0..k {
            let vi = piece.boundary_local[i];
            for t in 0..np {
                let (a, b) = (dg(vj, t), dg(vi, t));
                if a.is_finite() && b.is_finite() {
                    ds.push(a.value() - b.value());
                }
            }
        }
        ds.push(sentinel);
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        deltas.push(ds);
    }
    let shifts: Vec<ShiftSet> =
        deltas.iter().map(|d| ShiftSet::open(d.clone()).expect("sorted distinct shifts")).collect();

    // Y_{s,j}: restriction of the multiball vector of s around d(s, v_j).
    let mut tables: Vec<HashMap<Vec<u32>, u32>> = vec![HashMap::new(); k];
    let mut y_vectors: Vec<Vec<Vec<u32>>> = vec![Vec::new(); k];
    let mut source_y = vec![Vec::new(); n];
    if k > 0 {
        for (s, slot) in source_y.iter_mut().enumerate() {
            if piece.contains(s) {
                continue;
            }
            let ds = row(s);
            let mut ids = Vec::with_capacity(k);
            for j in 0..k {
                let y: Vec<u32> = ds.iter().map(|&d| shifts[j].index(d, ds[j]) as u32).collect();
                let next = tables[j].len() as u32;
                let id = *tables[j].entry(y.clone()).or_insert_with(|| {
                    y_vectors[j].push(y);
                    next
                });
                ids.push(id);
            }
            *slot = ids;
        }
    }
    let y_count: Vec<u32> = y_vectors.iter().map(|v| v.len() as u32).collect();
    let mut y_base = Vec::with_capacity(k);
    let mut total_y = 0;
    for &c in &y_count {
        y_base.push(total_y);
        total_y += c as usize;
    }
    let words = k.div_ceil(64).max(1);

    let mut x_bits = vec![0u64; np * total_y * words];
    for t in 0..np {
        for j in 0..k {
            let ell = shifts[j].ell() as u32;
            let vj = piece.boundary_local[j];
            let dj = dg(vj, t);
            for (y, yv) in y_vectors[j].iter().enumerate() {
                let at = (t * total_y + y_base[j] + y) * words;
                let base_inf = yv[j] == ell;
                for i in 0..k {
                    let di = dg(piece.boundary_local[i], t);
                    let member = if di.is_inf() {
                        false
                    } else if base_inf || dj.is_inf() {
                        yv[i] < ell
                    } else {
                        let c = dj.value() - di.value();
                        let m = deltas[j].partition_point(|&x| x < c) + 1;
                        (yv[i] as usize) <= m
                    };
                    if member && i != j {
                        x_bits[at + i / 64] |= 1 << (i % 64);
                    }
                }
            }
        }
    }

    let mut wp = WeightedPiece {
        d_g,
        deltas,
        y_count,
        y_base,
        total_y,
        words,
        x_bits,
        source_y,
        tau: Vec::with_capacity(np),
        reseeds: 0,
    };
    for t in 0..np {
        let mut rng = tau_rng(seed, piece.id, t, 0);
        wp.tau.push(random_ranks(k, &mut rng));
    }
    if options.verify_permutations && k > 0 {
        let bound = probe_bound(k);
        for t in 0..np {
            if piece.is_boundary_local(t) {
                continue;
            }
            let mut attempt = 0;
            while worst_probes(&wp, piece, to_boundary, &bpos, nb, t) > bound {
                attempt += 1;
                if attempt > MAX_RESEEDS {
                    return Err(OracleError::ProbeBoundExceeded {
                        probes: worst_probes(&wp, piece, to_boundary, &bpos, nb, t),
                        bound,
                        reseeds: attempt - 1,
                    });
                }
                let mut rng = tau_rng(seed, piece.id, t, attempt);
                wp.tau[t] = random_ranks(k, &mut rng);
                wp.reseeds += 1;
            }
        }
    }
    Ok(wp)
}

fn worst_probes(wp: &WeightedPiece, piece: &Piece, to_boundary: &[Dist], bpos: &[usize], nb: usize, t: usize) -> usize {
    (0..wp.source_y.len())
        .filter(|&s| !wp.source_y[s].is_empty())
        .map(|s| {
            let view = XView { piece: wp, boundary: piece, t, s, to_boundary, bpos, nb };
            min_find::<_, ChaCha8Rng>(&view, Strategy::Permutation(&wp.tau[t])).expect("consistent view").probes
        })
        .max()
        .unwrap_or(0)
}

/// Min-finding view over the boundary of one piece for a fixed `(s, t)`.
struct XView<'a> {
    piece: &'a WeightedPiece,
    boundary: &'a Piece,
    t: usize,
    s: VertexId,
    to_boundary: &'a [Dist],
    bpos: &'a [usize],
    nb: usize,
}

impl XView<'_> {
    fn via(&self, i: usize) -> Dist {
        let np = self.boundary.n();
        let d_si = self.to_boundary[self.s * self.nb + self.bpos[i]];
        d_si + self.piece.d_g[self.boundary.boundary_local[i] * np + self.t]
    }
}

impl MinFindView for XView<'_> {
    fn len(&self) -> usize {
        self.boundary.k()
    }

    fn query(&self, x: usize, out: &mut Vec<usize>) {
        out.clear();
        let y = self.piece.source_y[self.s][x];
        for (w, &word) in self.piece.x_set(self.t, x, y).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
    }
}

enum Mode<'a, R: Rng> {
    Random(&'a mut R),
    Deterministic,
}

impl WeightedOracle {
    #[inline]
    pub fn n(&self) -> usize {
        self.rd.n()
    }

    fn direct(&self, s: VertexId, t: VertexId) -> Option<Dist> {
        if s == t {
            return Some(Dist::ZERO);
        }
        for &pid in &self.rd.vertex_pieces[s] {
            let piece = &self.rd.pieces[pid];
            if let Some(lt) = piece.local(t) {
                let ls = piece.local(s).expect("s in piece");
                return Some(self.pieces[pid].d_g[ls * piece.n() + lt]);
            }
        }
        self.rd.boundary_pos(t).map(|pos| self.to_boundary[s * self.rd.boundary_union.len() + pos])
    }

    fn run<R: Rng>(&self, s: VertexId, t: VertexId, mode: Mode<'_, R>) -> QueryOutcome {
        if let Some(dist) = self.direct(s, t) {
            return QueryOutcome { dist, probes: 0 };
        }
        let pid = self.rd.home_piece(t);
        let piece = &self.rd.pieces[pid];
        if piece.k() == 0 {
            return QueryOutcome { dist: Dist::INF, probes: 0 };
        }
        let wp = &self.pieces[pid];
        let bpos: Vec<usize> = piece.boundary.iter().map(|&b| self.rd.boundary_pos(b).expect("boundary")).collect();
        let lt = piece.local(t).expect("t in piece");
        let view = XView {
            piece: wp,
            boundary: piece,
            t: lt,
            s,
            to_boundary: &self.to_boundary,
            bpos: &bpos,
            nb: self.rd.boundary_union.len(),
        };
        let found = match mode {
            Mode::Random(rng) => min_find(&view, Strategy::Random(rng)),
            Mode::Deterministic => min_find::<_, ChaCha8Rng>(&view, Strategy::Permutation(&wp.tau[lt])),
        }
        .expect("X tables are consistent");
        QueryOutcome { dist: view.via(found.min), probes: found.probes }
    }

    pub fn query_randomized(&self, s: VertexId, t: VertexId, rng: &mut impl Rng) -> Dist {
        self.query_randomized_probes(s, t, rng).dist
    }

    pub fn query_randomized_probes(&self, s: VertexId, t: VertexId, rng: &mut impl Rng) -> QueryOutcome {
        self.run(s, t, Mode::Random(rng))
    }

    pub fn query_deterministic(&self, s: VertexId, t: VertexId) -> Dist {
        self.query_deterministic_probes(s, t).dist
    }

    pub fn query_deterministic_probes(&self, s: VertexId, t: VertexId) -> QueryOutcome {
        self.run::<ChaCha8Rng>(s, t, Mode::Deterministic)
    }

    /// Boundary indices in `X_t[Y_{s,j}]` for `t` local to piece `pid`.
    pub fn x_members(&self, pid: usize, t_local: usize, j: usize, s: VertexId) -> Vec<usize> {
        let wp = &self.pieces[pid];
        let y = wp.source_y[s][j];
        let mut out = Vec::new();
        for i in 0..self.rd.pieces[pid].k() {
            if wp.x_set(t_local, j, y)[i / 64] >> (i % 64) & 1 == 1 {
                out.push(i);
            }
        }
        out
    }

    pub fn space(&self) -> WeightedSpace {
        let mut s = WeightedSpace { to_boundary: self.to_boundary.len(), ..Default::default() };
        for p in &self.pieces {
            s.intra_piece += p.d_g.len();
            s.shifts += p.deltas.iter().map(Vec::len).sum::<usize>();
            s.y_vectors += p.y_count.iter().map(|&c| c as usize).sum::<usize>();
            s.x_words += p.x_bits.len();
            s.source_refs += p.source_y.iter().map(Vec::len).sum::<usize>();
        }
        s
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedSpace {
    pub to_boundary: usize,
    pub intra_piece: usize,
    pub shifts: usize,
    pub y_vectors: usize,
    pub x_words: usize,
    pub source_refs: usize,
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
