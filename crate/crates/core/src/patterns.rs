//! Multiball vectors, ball-piece intersections and proxy patterns.
//!
//! A proxy pattern summarizes the distances from an outside source `u` to the
//! boundary of a piece, relative to one pivot boundary vertex and clamped to
//! a window. Together with the piece it determines a run of nested
//! ball-piece intersections, which is what lets the unweighted oracle share
//! work between sources.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::audit::envelope_slope;
use crate::error::OracleError;
use crate::graph::{DiGraph, Dist, VertexId};
use crate::rdiv::{Piece, RDivision};
use crate::strings::{StringId, StringStore};

/// Integer distance with `UINF` for unreachable.
pub const UINF: u32 = u32::MAX;

/// Shifts `δ_1 < ... < δ_{ℓ-1}`; `δ_0 = -inf` and `δ_ℓ = +inf` are implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftSet {
    deltas: Vec<f64>,
    strict: bool,
}

impl ShiftSet {
    /// Balls are closed: `d <= base + δ`.
    pub fn closed(deltas: Vec<f64>) -> Result<Self, OracleError> {
        Self::build(deltas, false)
    }

    /// Balls are open: `d < base + δ`.
    pub fn open(deltas: Vec<f64>) -> Result<Self, OracleError> {
        Self::build(deltas, true)
    }

    fn build(deltas: Vec<f64>, strict: bool) -> Result<Self, OracleError> {
        if deltas.iter().any(|d| !d.is_finite()) || deltas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OracleError::InvalidShifts);
        }
        Ok(ShiftSet { deltas, strict })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    #[inline]
    pub fn ell(&self) -> usize {
        self.deltas.len() + 1
    }

    /// 1-based index of the first ball around `base` containing distance `d`.
    /// Unreachable vertices always get `ℓ`.
    pub fn index(&self, d: Dist, base: Dist) -> usize {
        if d.is_inf() {
            return self.ell();
        }
        let (d, b) = (d.value(), base.value());
        let outside = |delta: &f64| if self.strict { d >= b + delta } else { d > b + delta };
        self.deltas.partition_point(outside) + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiballVector {
    pub center: VertexId,
    pub base: Dist,
    pub values: Vec<usize>,
}

pub fn multiball_vector(g: &DiGraph, v: VertexId, base: Dist, shifts: &ShiftSet) -> MultiballVector {
    multiball_from_dists(&g.sssp(v), v, base, shifts)
}

/// Multiball vector from an already computed distance row of `center`.
pub fn multiball_from_dists(dists: &[Dist], center: VertexId, base: Dist, shifts: &ShiftSet) -> MultiballVector {
    let values = dists.iter().map(|&d| shifts.index(d, base)).collect();
    MultiballVector { center, base, values }
}

pub fn restrict(mv: &MultiballVector, s: &[VertexId]) -> Vec<usize> {
    s.iter().map(|&v| mv.values[v]).collect()
}

/// `min_b (boundary_dists[b] + d_P(b, v))` for every local vertex `v`.
/// `boundary_dists` is indexed like `piece.boundary`.
pub fn piece_supersource_distances(piece: &Piece, boundary_dists: &[Dist]) -> Vec<Dist> {
    let sources: Vec<(usize, Dist)> =
        piece.boundary_local.iter().zip(boundary_dists).filter(|(_, d)| d.is_finite()).map(|(&l, &d)| (l, d)).collect();
    piece.graph.dijkstra(&sources)
}

/// Local vertices of the piece within distance `q` of the external source.
pub fn ball_piece_intersection(piece: &Piece, boundary_dists: &[Dist], q: Dist) -> FixedBitSet {
    let d = piece_supersource_distances(piece, boundary_dists);
    let mut out = FixedBitSet::with_capacity(piece.n());
    for (v, &dv) in d.iter().enumerate() {
        if dv.is_finite() && dv <= q {
            out.insert(v);
        }
    }
    out
}

/// Pivot positions (0-based) in an ascending distance list: the first finite
/// entry, then every entry at least `radius` beyond the last pivot.
/// Infinite entries are never pivots.
pub fn pivot_indices(sorted: &[Dist], radius: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for (i, &d) in sorted.iter().enumerate() {
        if d.is_inf() {
            break;
        }
        match out.last() {
            Some(&j) if sorted[j].value() > d.value() - radius => {}
            _ => out.push(i),
        }
    }
    out
}

/// Boundary indices sorted by distance, ties by index (the boundary is in
/// ascending vertex order, so this is the vertex id tie-break).
pub fn sort_boundary(dists: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dists.len()).collect();
    order.sort_by_key(|&i| (dists[i], i));
    order
}

/// Clamp window and upper cap for the patterns of one piece.
///
/// `radius` must exceed every finite distance inside the piece; `cap` is
/// `radius` for the distance oracle and `2 * radius` when the next pivot's
/// ball is needed too.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternParams {
    pub radius: i64,
    pub cap: i64,
}

impl PatternParams {
    pub fn new(radius: i64, wide: bool) -> Self {
        PatternParams { radius, cap: if wide { 2 * radius } else { radius } }
    }

    /// One more than the largest finite distance inside the piece.
    pub fn for_piece(piece: &Piece, wide: bool) -> Self {
        let mut max = 0u32;
        for s in 0..piece.n() {
            for d in piece.graph.sssp(s) {
                if d.is_finite() {
                    max = max.max(d.value() as u32);
                }
            }
        }
        Self::new(max as i64 + 1, wide)
    }

    #[inline]
    pub fn alphabet(&self) -> u32 {
        (self.cap + self.radius + 1) as u32
    }

    #[inline]
    pub fn encode(&self, value: i64) -> u32 {
        (value + self.radius) as u32
    }

    #[inline]
    pub fn decode(&self, symbol: u32) -> i64 {
        symbol as i64 - self.radius
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProxyPatterns {
    /// Boundary indices sorted by distance from the source.
    pub order: Vec<usize>,
    /// Number of finite entries; they form a prefix of `order`.
    pub finite: usize,
    /// Pivot positions into `order`.
    pub pivots: Vec<usize>,
    /// One pattern id per pivot.
    pub ids: Vec<StringId>,
    pub substitutions: usize,
}

impl ProxyPatterns {
    /// End (exclusive) of pivot `q`'s block in `order`.
    pub fn block_end(&self, q: usize) -> usize {
        self.pivots.get(q + 1).copied().unwrap_or(self.finite)
    }
}

fn pattern_value(
    dists: &[u32],
    order: &[usize],
    finite: usize,
    s: usize,
    next: usize,
    t: usize,
    p: PatternParams,
) -> i64 {
    if t >= finite {
        return p.cap;
    }
    let off = dists[order[t]] as i64 - dists[order[s]] as i64;
    if t < next {
        off.max(-p.radius)
    } else {
        off.min(p.cap)
    }
}

/// The explicit pattern of pivot `q`, in boundary order.
pub fn explicit_pattern(dists: &[u32], pivots_of: &ProxyPatterns, q: usize, p: PatternParams) -> Vec<i64> {
    let ProxyPatterns { order, finite, pivots, .. } = pivots_of;
    let next = pivots_of.block_end(q);
    let mut out = vec![0; order.len()];
    for t in 0..order.len() {
        out[order[t]] = pattern_value(dists, order, *finite, pivots[q], next, t, p);
    }
    out
}

/// Builds the ids of all patterns of one (piece, source) pair by substitution
/// from the all-`cap` sentinel. `dists` holds `d_G(u, b)` per boundary index.
pub fn proxy_patterns(store: &mut StringStore, dists: &[u32], p: PatternParams) -> ProxyPatterns {
    let k = dists.len();
    let order = sort_boundary(dists);
    let finite = order.iter().take_while(|&&i| dists[i] != UINF).count();
    let sorted: Vec<Dist> =
        order.iter().map(|&i| if dists[i] == UINF { Dist::INF } else { Dist::new(dists[i] as f64) }).collect();
    let pivots = pivot_indices(&sorted, p.radius as f64);

    let mut cur = vec![p.cap; k];
    let sentinel: Vec<u32> = cur.iter().map(|&v| p.encode(v)).collect();
    let mut id = store.insert_explicit(&sentinel).expect("sentinel within alphabet");
    let mut out = ProxyPatterns { order, finite, pivots, ids: Vec::new(), substitutions: 0 };
    for q in 0..out.pivots.len() {
        // Only blocks q-2 ..= q+1 can differ from the previous pattern.
        let lo = if q >= 2 { out.pivots[q - 2] } else { 0 };
        let hi = out.pivots.get(q + 2).copied().unwrap_or(finite);
        let next = out.block_end(q);
        for t in lo..hi {
            let value = pattern_value(dists, &out.order, finite, out.pivots[q], next, t, p);
            let b = out.order[t];
            if cur[b] != value {
                cur[b] = value;
                id = store.insert_substitution(id, b, p.encode(value)).expect("valid substitution");
                out.substitutions += 1;
            }
        }
        out.ids.push(id);
    }
    out
}

/// Nested balls determined by one pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternBalls {
    /// Distinct offsets in `[0, radius)` in increasing order; ball `c` is
    /// `B(u, d(u, pivot) + offsets[c]) ∩ V(P)`.
    pub offsets: Vec<i64>,
    pub ball_ids: Vec<StringId>,
    /// Per local vertex, the first ball containing it, or `u32::MAX`.
    pub first_ball: Vec<u32>,
    /// Non-boundary members of the ball at the next pivot (wide patterns only).
    pub next_interior: Option<FixedBitSet>,
}

impl PatternBalls {
    pub fn members(&self, c: usize) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.first_ball.len());
        for (v, &f) in self.first_ball.iter().enumerate() {
            if (f as usize) <= c && f != u32::MAX {
                set.insert(v);
            }
        }
        set
    }

    /// Index of the ball at `offset`.
    pub fn ball_at(&self, offset: i64) -> Option<usize> {
        self.offsets.binary_search(&offset).ok()
    }
}

/// Computes the balls of a pattern from its values and the piece alone.
///
/// Coordinates equal to `-radius` lie far enough before the pivot that
/// everything they reach inside the piece is in every ball. Coordinates
/// strictly between `-radius` and `cap` are exact offsets and seed one
/// supersource run. `empty_ball` is the all-zero string in `ball_store`.
pub fn balls_from_pattern(
    piece: &Piece,
    values: &[i64],
    p: PatternParams,
    ball_store: &mut StringStore,
    empty_ball: StringId,
) -> PatternBalls {
    let n = piece.n();
    let pre: Vec<usize> =
        values.iter().enumerate().filter(|(_, &v)| v == -p.radius).map(|(i, _)| piece.boundary_local[i]).collect();
    let pre_reach = piece.graph.reachable_from(pre);
    let exact: Vec<(usize, Dist)> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > -p.radius && v < p.cap)
        .map(|(i, &v)| (piece.boundary_local[i], Dist::new((v + p.radius) as f64)))
        .collect();
    let reach = piece.graph.dijkstra(&exact);
    let shifted = |v: usize| -> Option<i64> { reach[v].is_finite().then(|| reach[v].value() as i64 - p.radius) };

    let mut offsets: Vec<i64> = values.iter().copied().filter(|&v| (0..p.radius).contains(&v)).collect();
    offsets.sort_unstable();
    offsets.dedup();

    let mut first_ball = vec![u32::MAX; n];
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); offsets.len()];
    for v in 0..n {
        let c = if pre_reach.contains(v) {
            Some(0)
        } else {
            shifted(v).map(|x| offsets.partition_point(|&o| o < x)).filter(|&c| c < offsets.len())
        };
        if let Some(c) = c {
            first_ball[v] = c as u32;
            buckets[c].push(v);
        }
    }
    let mut id = empty_ball;
    let mut ball_ids = Vec::with_capacity(offsets.len());
    for bucket in &buckets {
        for &v in bucket {
            id = ball_store.insert_substitution(id, v, 1).expect("bit toggle");
        }
        ball_ids.push(id);
    }

    let next_interior = (p.cap > p.radius).then(|| {
        let next = values.iter().copied().filter(|&v| v >= p.radius && v < p.cap).min();
        let mut set = FixedBitSet::with_capacity(n);
        match next {
            Some(o) => {
                for v in 0..n {
                    if pre_reach.contains(v) || shifted(v).is_some_and(|x| x <= o) {
                        set.insert(v);
                    }
                }
            }
            None => {
                let earlier =
                    values.iter().enumerate().filter(|(_, &v)| v < p.radius).map(|(i, _)| piece.boundary_local[i]);
                set = piece.graph.reachable_from(earlier);
            }
        }
        for &b in &piece.boundary_local {
            set.set(b, false);
        }
        set
    });

    PatternBalls { offsets, ball_ids, first_ball, next_interior }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceCount {
    pub piece: usize,
    pub boundary: usize,
    pub ell: usize,
    pub distinct: usize,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternAudit {
    pub pieces: Vec<PieceCount>,
    /// Envelope log-log slope of `distinct` against `boundary * ell`.
    pub slope: Option<f64>,
}

/// Counts distinct restrictions of multiball vectors to each piece boundary,
/// over every sampled source and every base radius equal to a finite
/// distance from the source to that boundary.
pub fn count_patterns_audit(g: &DiGraph, rd: &RDivision, shifts: &ShiftSet, sources: &[VertexId]) -> PatternAudit {
    let mut seen: Vec<HashSet<Vec<usize>>> = vec![HashSet::new(); rd.pieces.len()];
    let mut samples = vec![0usize; rd.pieces.len()];
    for &s in sources {
        let dists = g.sssp(s);
        for piece in &rd.pieces {
            let mut radii: Vec<Dist> = piece.boundary.iter().map(|&b| dists[b]).filter(|d| d.is_finite()).collect();
            radii.sort();
            radii.dedup();
            for base in radii {
                let row: Vec<usize> = piece.boundary.iter().map(|&b| shifts.index(dists[b], base)).collect();
                seen[piece.id].insert(row);
                samples[piece.id] += 1;
            }
        }
    }
    let pieces: Vec<PieceCount> = rd
        .pieces
        .iter()
        .filter(|p| p.k() > 0)
        .map(|p| PieceCount {
            piece: p.id,
            boundary: p.k(),
            ell: shifts.ell(),
            distinct: seen[p.id].len(),
            samples: samples[p.id],
        })
        .collect();
    let points: Vec<(f64, f64)> = pieces.iter().map(|c| ((c.boundary * c.ell) as f64, c.distinct as f64)).collect();
    PatternAudit { slope: envelope_slope(&points, 3), pieces }
}

/// Merges audits (for instance over several shift sets) and refits the slope.
pub fn merge_audits(audits: &[PatternAudit]) -> PatternAudit {
    let pieces: Vec<PieceCount> = audits.iter().flat_map(|a| a.pieces.iter().cloned()).collect();
    let points: Vec<(f64, f64)> = pieces.iter().map(|c| ((c.boundary * c.ell) as f64, c.distinct as f64)).collect();
    PatternAudit { slope: envelope_slope(&points, 3), pieces }
}

/// Map from explicit value vectors to dense ids; used by the naive paths.
#[derive(Clone, Debug, Default)]
pub struct VectorTable<K: std::hash::Hash + Eq> {
    ids: HashMap<K, u32>,
}

impl<K: std::hash::Hash + Eq> VectorTable<K> {
    pub fn intern(&mut self, key: K) -> (u32, bool) {
        let next = self.ids.len() as u32;
        match self.ids.entry(key) {
            std::collections::hash_map::Entry::Occupied(e) => (*e.get(), false),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(next);
                (next, true)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}
