//! Exact distance oracle for unweighted digraphs, with eccentricities and the
//! Wiener index.
//!
//! Stored data: distances from every vertex to every boundary vertex, exact
//! distances between vertices sharing a piece, and per piece a table of
//! distinct ball-piece intersections `B(u, d(u, b)) ∩ V(P)` with their
//! distance rows. Balls are found through proxy patterns, so sources with the
//! same boundary pattern share all the work.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::graph::{DiGraph, Dist, VertexId};
use crate::patterns::{ball_piece_intersection, balls_from_pattern, proxy_patterns, PatternBalls, PatternParams, UINF};
use crate::rdiv::{build_r_division, Piece, RDivision};
use crate::strings::{StringId, StringStore};

#[inline]
pub(crate) fn to_dist(x: u32) -> Dist {
    if x == UINF {
        Dist::INF
    } else {
        Dist::new(x as f64)
    }
}

#[inline]
fn from_dist(d: Dist) -> u32 {
    if d.is_inf() {
        UINF
    } else {
        d.value() as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnweightedOptions {
    /// Use `2 * radius` pattern caps so the Wiener index can be assembled.
    pub wide: bool,
    /// Compute every ball directly instead of through patterns.
    pub naive_balls: bool,
}

impl Default for UnweightedOptions {
    fn default() -> Self {
        UnweightedOptions { wide: true, naive_balls: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub members: FixedBitSet,
    /// `d_P(ball, v)` per local vertex.
    pub dist: Vec<u32>,
    /// Number of non-boundary members.
    pub interior: u32,
    /// Largest `dist` over non-boundary vertices (`UINF` if one is unreachable).
    pub tail: u32,
}

/// Ball references of one outside source.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRefs {
    /// Boundary indices sorted by distance from the source.
    pub order: Vec<u32>,
    /// Length of the finite prefix of `order`.
    pub finite: u32,
    /// Ball index per finite position.
    pub balls: Vec<u32>,
    /// `(pivot position, pattern index)` per pattern block.
    pub blocks: Vec<(u32, u32)>,
}

/// Per-pattern sums used by the Wiener index, all determined by the pattern.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSums {
    /// Non-boundary vertices gained between the pivot ball and the next one.
    pub gain: u64,
    /// `Σ offset * |slab|` over the block's slabs.
    pub offset_weighted: u64,
    /// `Σ d_P(ball, v)` over the block's slabs.
    pub z: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceTables {
    pub params: PatternParams,
    /// `d_P` between local vertices, row-major.
    pub d_p: Vec<u32>,
    /// `d_G` between local vertices, row-major.
    pub d_g: Vec<u32>,
    pub balls: Vec<Ball>,
    /// Indexed by global source; empty for sources inside the piece.
    pub sources: Vec<SourceRefs>,
    pub patterns: Vec<PatternSums>,
    pub stats: PieceStats,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceStats {
    pub boundary: usize,
    pub vertices: usize,
    pub pivot_pairs: usize,
    pub distinct_patterns: usize,
    pub distinct_balls: usize,
    pub substitutions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnweightedOracle {
    pub rd: RDivision,
    pub options: UnweightedOptions,
    /// `d_G(u, b)` at `u * |∂R| + pos(b)`.
    pub to_boundary: Vec<u32>,
    pub pieces: Vec<PieceTables>,
    pub strongly_connected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wiener {
    Finite(u64),
    Infinite,
}

pub fn build_unweighted_oracle(
    g: &DiGraph,
    r: usize,
    seed: u64,
    options: UnweightedOptions,
) -> Result<UnweightedOracle, OracleError> {
    if g.is_weighted() {
        return Err(OracleError::WeightedInput);
    }
    let rd = build_r_division(g, r, seed);
    Ok(build_on_division(g, rd, options))
}

pub fn build_on_division(g: &DiGraph, rd: RDivision, options: UnweightedOptions) -> UnweightedOracle {
    let n = g.n();
    let nb = rd.boundary_union.len();
    let rev = g.reverse();
    let columns: Vec<Vec<Dist>> = rd.boundary_union.par_iter().map(|&b| rev.sssp(b)).collect();
    let mut to_boundary = vec![UINF; n * nb];
    for (j, col) in columns.iter().enumerate() {
        for u in 0..n {
            to_boundary[u * nb + j] = from_dist(col[u]);
        }
    }
    let pieces = rd.pieces.par_iter().map(|p| build_piece(p, &rd, &to_boundary, nb, n, options)).collect();
    UnweightedOracle { strongly_connected: g.is_strongly_connected(), rd, options, to_boundary, pieces }
}

fn multi_source_row(graph: &DiGraph, sources: &[(usize, Dist)]) -> Vec<u32> {
    graph.dijkstra(sources).into_iter().map(from_dist).collect()
}

fn make_ball(piece: &Piece, members: FixedBitSet) -> Ball {
    let sources: Vec<(usize, Dist)> = members.ones().map(|v| (v, Dist::ZERO)).collect();
    let dist = multi_source_row(&piece.graph, &sources);
    let mut interior = 0;
    let mut tail = 0;
    for v in 0..piece.n() {
        if piece.is_boundary_local(v) {
            continue;
        }
        if members.contains(v) {
            interior += 1;
        }
        tail = tail.max(dist[v]);
    }
    Ball { members, dist, interior, tail }
}

struct PieceBuilder<'a> {
    piece: &'a Piece,
    ball_store: StringStore,
    empty_ball: StringId,
    ball_index: HashMap<StringId, u32>,
    balls: Vec<Ball>,
}

impl PieceBuilder<'_> {
    fn intern_ball(&mut self, id: StringId, members: impl FnOnce() -> FixedBitSet) -> u32 {
        if let Some(&i) = self.ball_index.get(&id) {
            return i;
        }
        let i = self.balls.len() as u32;
        self.balls.push(make_ball(self.piece, members()));
        self.ball_index.insert(id, i);
        i
    }
}

struct PatternEntry {
    offsets: Vec<i64>,
    balls: Vec<u32>,
    sums: u32,
}

fn pattern_sums(piece: &Piece, pb: &PatternBalls, balls: &[u32], table: &[Ball]) -> PatternSums {
    let next = pb.next_interior.as_ref().expect("wide pattern");
    let mut sums = PatternSums {
        gain: next.count_ones(..) as u64 - table[balls[0] as usize].interior as u64,
        ..Default::default()
    };
    for c in 0..balls.len() {
        let ball = &table[balls[c] as usize];
        for v in 0..piece.n() {
            if piece.is_boundary_local(v) || ball.members.contains(v) {
                continue;
            }
            let inside_next = match balls.get(c + 1) {
                Some(&b) => table[b as usize].members.contains(v),
                None => next.contains(v),
            };
            if inside_next {
                sums.offset_weighted += pb.offsets[c] as u64;
                sums.z += ball.dist[v] as u64;
            }
        }
    }
    sums
}

fn build_piece(
    piece: &Piece,
    rd: &RDivision,
    to_boundary: &[u32],
    nb: usize,
    n: usize,
    options: UnweightedOptions,
) -> PieceTables {
    let np = piece.n();
    let k = piece.k();
    let params = PatternParams::for_piece(piece, options.wide);
    let mut d_p = Vec::with_capacity(np * np);
    for s in 0..np {
        d_p.extend(piece.graph.sssp(s).into_iter().map(from_dist));
    }
    let bpos: Vec<usize> = piece.boundary.iter().map(|&b| rd.boundary_pos(b).expect("boundary")).collect();
    let row_to_boundary = |u: VertexId| -> Vec<u32> { bpos.iter().map(|&j| to_boundary[u * nb + j]).collect() };

    let mut d_g = Vec::with_capacity(np * np);
    for s in 0..np {
        let u = piece.global(s);
        let mut sources = vec![(s, Dist::ZERO)];
        for (i, d) in row_to_boundary(u).into_iter().enumerate() {
            if d != UINF {
                sources.push((piece.boundary_local[i], Dist::new(d as f64)));
            }
        }
        d_g.extend(multi_source_row(&piece.graph, &sources));
    }

    let mut ball_store = StringStore::new(2);
    let empty_ball = ball_store.insert_explicit(&vec![0; np]).expect("binary alphabet");
    let mut b = PieceBuilder { piece, ball_store, empty_ball, ball_index: HashMap::new(), balls: Vec::new() };
    let mut pattern_store = StringStore::new(params.alphabet());
    let mut pattern_index: HashMap<StringId, PatternEntry> = HashMap::new();
    let mut pattern_sums_table: Vec<PatternSums> = Vec::new();
    let mut stats = PieceStats { boundary: k, vertices: np, ..Default::default() };
    let mut sources = vec![SourceRefs::default(); n];

    if k > 0 {
        for (u, refs) in sources.iter_mut().enumerate() {
            if piece.contains(u) {
                continue;
            }
            let dists = row_to_boundary(u);
            if options.naive_balls {
                *refs = naive_refs(&mut b, &dists);
                continue;
            }
            let pp = proxy_patterns(&mut pattern_store, &dists, params);
            stats.substitutions += pp.substitutions;
            stats.pivot_pairs += pp.pivots.len();
            let mut out = SourceRefs {
                order: pp.order.iter().map(|&i| i as u32).collect(),
                finite: pp.finite as u32,
                balls: Vec::with_capacity(pp.finite),
                blocks: Vec::with_capacity(pp.pivots.len()),
            };
            for (q, &pid) in pp.ids.iter().enumerate() {
                if let std::collections::hash_map::Entry::Vacant(e) = pattern_index.entry(pid) {
                    let symbols = pattern_store.string_of(pid).expect("issued id");
                    let values: Vec<i64> = symbols.iter().map(|&s| params.decode(s)).collect();
                    let pb = balls_from_pattern(piece, &values, params, &mut b.ball_store, b.empty_ball);
                    let balls: Vec<u32> =
                        (0..pb.offsets.len()).map(|c| b.intern_ball(pb.ball_ids[c], || pb.members(c))).collect();
                    let sums = if options.wide {
                        pattern_sums_table.push(pattern_sums(piece, &pb, &balls, &b.balls));
                        (pattern_sums_table.len() - 1) as u32
                    } else {
                        u32::MAX
                    };
                    e.insert(PatternEntry { offsets: pb.offsets, balls, sums });
                }
                let entry = &pattern_index[&pid];
                let s = pp.pivots[q];
                let base = dists[pp.order[s]] as i64;
                for t in s..pp.block_end(q) {
                    let off = dists[pp.order[t]] as i64 - base;
                    let c = entry.offsets.binary_search(&off).expect("offset present in pattern");
                    out.balls.push(entry.balls[c]);
                }
                out.blocks.push((s as u32, entry.sums));
            }
            *refs = out;
        }
    }
    stats.distinct_patterns = pattern_index.len();
    stats.distinct_balls = b.balls.len();
    let mut tables = PieceTables { params, d_p, d_g, balls: b.balls, sources, patterns: pattern_sums_table, stats };
    canonicalize_balls(&mut tables);
    tables
}

fn naive_refs(b: &mut PieceBuilder<'_>, dists: &[u32]) -> SourceRefs {
    let order = crate::patterns::sort_boundary(dists);
    let finite = order.iter().take_while(|&&i| dists[i] != UINF).count();
    let as_dist: Vec<Dist> = dists.iter().map(|&d| to_dist(d)).collect();
    let mut balls = Vec::with_capacity(finite);
    for &i in &order[..finite] {
        let members = ball_piece_intersection(b.piece, &as_dist, to_dist(dists[i]));
        let bits: Vec<u32> = (0..b.piece.n()).map(|v| members.contains(v) as u32).collect();
        let id = b.ball_store.insert_explicit(&bits).expect("binary alphabet");
        balls.push(b.intern_ball(id, || members));
    }
    SourceRefs { order: order.iter().map(|&i| i as u32).collect(), finite: finite as u32, balls, blocks: Vec::new() }
}

/// Sorts balls by membership so tables built along different paths compare
/// equal.
fn canonicalize_balls(t: &mut PieceTables) {
    let mut idx: Vec<usize> = (0..t.balls.len()).collect();
    idx.sort_by(|&a, &b| t.balls[a].members.as_slice().cmp(t.balls[b].members.as_slice()));
    let mut remap = vec![0u32; idx.len()];
    for (new, &old) in idx.iter().enumerate() {
        remap[old] = new as u32;
    }
    let mut old: Vec<Option<Ball>> = std::mem::take(&mut t.balls).into_iter().map(Some).collect();
    t.balls = idx.iter().map(|&i| old[i].take().expect("each ball moved once")).collect();
    for refs in &mut t.sources {
        for x in &mut refs.balls {
            *x = remap[*x as usize];
        }
    }
}

impl UnweightedOracle {
    #[inline]
    pub fn n(&self) -> usize {
        self.rd.n()
    }

    #[inline]
    fn nb(&self) -> usize {
        self.rd.boundary_union.len()
    }

    #[inline]
    fn boundary_dist(&self, u: VertexId, pos: usize) -> u32 {
        self.to_boundary[u * self.nb() + pos]
    }

    fn piece_boundary_dist(&self, u: VertexId, piece: &Piece, i: usize) -> u32 {
        self.boundary_dist(u, self.rd.boundary_pos(piece.boundary[i]).expect("boundary"))
    }

    fn co_piece_dist(&self, u: VertexId, v: VertexId) -> Option<u32> {
        for &pid in &self.rd.vertex_pieces[u] {
            let piece = &self.rd.pieces[pid];
            if let Some(lv) = piece.local(v) {
                let lu = piece.local(u).expect("u in its piece");
                return Some(self.pieces[pid].d_g[lu * piece.n() + lv]);
            }
        }
        None
    }

    pub fn query(&self, u: VertexId, v: VertexId) -> Dist {
        to_dist(self.query_u32(u, v))
    }

    fn query_u32(&self, u: VertexId, v: VertexId) -> u32 {
        if u == v {
            return 0;
        }
        if let Some(pos) = self.rd.boundary_pos(v) {
            return self.boundary_dist(u, pos);
        }
        if let Some(d) = self.co_piece_dist(u, v) {
            return d;
        }
        let pid = self.rd.home_piece(v);
        let piece = &self.rd.pieces[pid];
        let tables = &self.pieces[pid];
        let lv = piece.local(v).expect("v in its piece");
        let refs = &tables.sources[u];
        let f = refs.finite as usize;
        if f == 0 {
            return UINF;
        }
        let contains = |p: usize| tables.balls[refs.balls[p] as usize].members.contains(lv);
        // First position whose ball contains v; membership is monotone.
        let (mut lo, mut hi) = (0, f);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if contains(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo == 0 {
            return self.piece_boundary_dist(u, piece, refs.order[0] as usize);
        }
        let j = lo - 1;
        let base = self.piece_boundary_dist(u, piece, refs.order[j] as usize);
        let tail = tables.balls[refs.balls[j] as usize].dist[lv];
        if tail == UINF {
            UINF
        } else {
            base + tail
        }
    }

    /// Runs `f(u, v, d)` over every stored explicit pair: all boundary targets
    /// and all targets sharing a piece with `u`.
    fn for_explicit_pairs(&self, u: VertexId, mut f: impl FnMut(VertexId, u32)) {
        let n = self.n();
        let mut seen = FixedBitSet::with_capacity(n);
        for (pos, &b) in self.rd.boundary_union.iter().enumerate() {
            seen.insert(b);
            f(b, self.boundary_dist(u, pos));
        }
        for &pid in &self.rd.vertex_pieces[u] {
            let piece = &self.rd.pieces[pid];
            let lu = piece.local(u).expect("u in piece");
            for lv in 0..piece.n() {
                let v = piece.global(lv);
                if !seen.put(v) {
                    f(v, self.pieces[pid].d_g[lu * piece.n() + lv]);
                }
            }
        }
    }

    pub fn eccentricities(&self) -> Vec<Dist> {
        (0..self.n())
            .into_par_iter()
            .map(|u| {
                let mut e = 0u32;
                self.for_explicit_pairs(u, |_, d| e = e.max(d));
                for (pid, piece) in self.rd.pieces.iter().enumerate() {
                    if e == UINF {
                        break;
                    }
                    if piece.contains(u) || piece.k() == piece.n() {
                        continue;
                    }
                    let refs = &self.pieces[pid].sources[u];
                    let f = refs.finite as usize;
                    if f == 0 {
                        e = UINF;
                        continue;
                    }
                    let far = self.piece_boundary_dist(u, piece, refs.order[f - 1] as usize);
                    let tail = self.pieces[pid].balls[refs.balls[f - 1] as usize].tail;
                    e = e.max(if tail == UINF { UINF } else { far + tail });
                }
                to_dist(e)
            })
            .collect()
    }

    /// Sum of all pairwise distances, from the cached per-pattern sums.
    pub fn wiener_index(&self) -> Result<Wiener, OracleError> {
        if !self.options.wide || self.options.naive_balls {
            return Err(OracleError::MissingWienerData);
        }
        Ok(self.wiener_with(|pid, u| self.sigma_from_patterns(pid, u)))
    }

    /// Same sum, assembled slab by slab from the per-source ball references.
    pub fn wiener_index_from_balls(&self) -> Wiener {
        self.wiener_with(|pid, u| self.sigma_from_balls(pid, u))
    }

    fn wiener_with(&self, sigma: impl Fn(usize, VertexId) -> u64 + Sync) -> Wiener {
        if !self.strongly_connected {
            return Wiener::Infinite;
        }
        let total: u64 = (0..self.n())
            .into_par_iter()
            .map(|u| {
                let mut s = 0u64;
                self.for_explicit_pairs(u, |_, d| s += d as u64);
                for piece in &self.rd.pieces {
                    if !piece.contains(u) && piece.k() < piece.n() {
                        s += sigma(piece.id, u);
                    }
                }
                s
            })
            .sum();
        Wiener::Finite(total)
    }

    fn sigma_from_patterns(&self, pid: usize, u: VertexId) -> u64 {
        let piece = &self.rd.pieces[pid];
        let t = &self.pieces[pid];
        let refs = &t.sources[u];
        refs.blocks
            .iter()
            .map(|&(s, pat)| {
                let sums = t.patterns[pat as usize];
                let base = self.piece_boundary_dist(u, piece, refs.order[s as usize] as usize) as u64;
                base * sums.gain + sums.offset_weighted + sums.z
            })
            .sum()
    }

    fn sigma_from_balls(&self, pid: usize, u: VertexId) -> u64 {
        let piece = &self.rd.pieces[pid];
        let t = &self.pieces[pid];
        let refs = &t.sources[u];
        let f = refs.finite as usize;
        let mut sum = 0u64;
        for lv in 0..piece.n() {
            if piece.is_boundary_local(lv) {
                continue;
            }
            let first = (0..f).find(|&p| t.balls[refs.balls[p] as usize].members.contains(lv)).unwrap_or(f);
            let j = first.checked_sub(1).expect("interior vertex outside the first ball");
            let base = self.piece_boundary_dist(u, piece, refs.order[j] as usize) as u64;
            sum += base + t.balls[refs.balls[j] as usize].dist[lv] as u64;
        }
        sum
    }

    pub fn space(&self) -> SpaceBreakdown {
        let mut s = SpaceBreakdown { to_boundary: self.to_boundary.len(), ..Default::default() };
        for t in &self.pieces {
            s.intra_piece += t.d_p.len() + t.d_g.len();
            s.balls += t.balls.len();
            s.ball_bits += t.balls.iter().map(|b| b.members.len()).sum::<usize>();
            s.ball_rows += t.balls.iter().map(|b| b.dist.len()).sum::<usize>();
            s.source_refs += t.sources.iter().map(|r| r.balls.len() + r.order.len() + r.blocks.len()).sum::<usize>();
            s.patterns += t.patterns.len();
        }
        s
    }
}

/// Entry counts per table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceBreakdown {
    pub to_boundary: usize,
    pub intra_piece: usize,
    pub balls: usize,
    pub ball_bits: usize,
    pub ball_rows: usize,
    pub source_refs: usize,
    pub patterns: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apsp_reference, generate_cycle, generate_grid, generate_path, Orientation, WeightProfile};

    fn check_all(g: &DiGraph, r: usize) -> UnweightedOracle {
        let o = build_unweighted_oracle(g, r, 1, UnweightedOptions::default()).unwrap();
        let m = apsp_reference(g);
        for u in 0..g.n() {
            for v in 0..g.n() {
                assert_eq!(o.query(u, v), m.get(u, v), "pair ({u},{v})");
            }
        }
        o
    }

    #[test]
    fn grid_all_pairs() {
        let g = generate_grid(6, 6, 3, Orientation::Random, WeightProfile::Unit);
        check_all(&g, 9);
    }

    #[test]
    fn single_piece() {
        let g = generate_grid(3, 3, 0, Orientation::Bidirected, WeightProfile::Unit);
        let o = check_all(&g, g.m());
        assert_eq!(o.rd.pieces.len(), 1);
        assert!(o.pieces[0].balls.is_empty());
    }

    #[test]
    fn path_eccentricities() {
        let g = generate_path(5, 0, Orientation::Bidirected, WeightProfile::Unit);
        let o = check_all(&g, 2);
        let e: Vec<f64> = o.eccentricities().iter().map(|d| d.value()).collect();
        assert_eq!(e, vec![4.0, 3.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn small_wiener() {
        let tri = generate_cycle(3, 0, false, WeightProfile::Unit);
        let o = build_unweighted_oracle(&tri, 2, 0, UnweightedOptions::default()).unwrap();
        assert_eq!(o.wiener_index().unwrap(), Wiener::Finite(6));
        let c3 = generate_cycle(3, 0, true, WeightProfile::Unit);
        let o = build_unweighted_oracle(&c3, 1, 0, UnweightedOptions::default()).unwrap();
        assert_eq!(o.wiener_index().unwrap(), Wiener::Finite(9));
        let p = generate_path(4, 0, Orientation::Random, WeightProfile::Unit);
        let o = build_unweighted_oracle(&p, 1, 0, UnweightedOptions::default()).unwrap();
        assert_eq!(o.wiener_index().unwrap(), Wiener::Infinite);
        assert!(o.eccentricities().iter().any(|d| d.is_inf()));
    }

    #[test]
    fn narrow_patterns_have_no_wiener() {
        let g = generate_grid(4, 4, 0, Orientation::Bidirected, WeightProfile::Unit);
        let o = build_unweighted_oracle(&g, 8, 0, UnweightedOptions { wide: false, naive_balls: false }).unwrap();
        assert_eq!(o.wiener_index(), Err(OracleError::MissingWienerData));
    }

    #[test]
    fn rejects_weighted() {
        let g = generate_grid(2, 2, 0, Orientation::Bidirected, WeightProfile::Integer { lo: 1, hi: 3 });
        assert_eq!(
            build_unweighted_oracle(&g, 4, 0, UnweightedOptions::default()).unwrap_err(),
            OracleError::WeightedInput
        );
    }
}
