//! r-divisions: edge partitions into small pieces that share few vertices.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{DiGraph, Edge, EdgeId, VertexId};

/// One edge-induced subgraph of an r-division, with a local copy of its graph.
///
/// Local vertex `i` is `vertices[i]`; `vertices` is sorted so lookups are a
/// binary search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub id: usize,
    pub edge_ids: Vec<EdgeId>,
    pub vertices: Vec<VertexId>,
    /// Shared vertices, ascending by global id.
    pub boundary: Vec<VertexId>,
    /// Local indices of `boundary`, same order.
    pub boundary_local: Vec<usize>,
    /// Piece graph over local indices; edge ids are the global ones.
    pub graph: DiGraph,
    is_boundary_local: FixedBitSet,
}

impl Piece {
    #[inline]
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.boundary.len()
    }

    pub fn local(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    #[inline]
    pub fn global(&self, local: usize) -> VertexId {
        self.vertices[local]
    }

    #[inline]
    pub fn is_boundary_local(&self, local: usize) -> bool {
        self.is_boundary_local.contains(local)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.local(v).is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDivision {
    pub r: usize,
    pub pieces: Vec<Piece>,
    /// Piece ids containing each vertex, ascending.
    pub vertex_pieces: Vec<Vec<usize>>,
    /// Union of all piece boundaries, ascending.
    pub boundary_union: Vec<VertexId>,
    boundary_pos: Vec<Option<u32>>,
    edge_piece: Vec<usize>,
}

impl RDivision {
    /// Assembles a division from explicit edge groups. Vertices not covered
    /// by any group become singleton pieces. No validity checks are made;
    /// see [`validate_r_division`].
    pub fn from_edge_groups(g: &DiGraph, r: usize, groups: Vec<Vec<EdgeId>>) -> Self {
        let n = g.n();
        let mut vertex_sets: Vec<Vec<VertexId>> = Vec::with_capacity(groups.len());
        let mut covered = FixedBitSet::with_capacity(n);
        for group in &groups {
            let mut vs: Vec<VertexId> = group.iter().flat_map(|&e| [g.edge(e).tail, g.edge(e).head]).collect();
            vs.sort_unstable();
            vs.dedup();
            for &v in &vs {
                covered.insert(v);
            }
            vertex_sets.push(vs);
        }
        let mut groups = groups;
        for v in 0..n {
            if !covered.contains(v) {
                groups.push(Vec::new());
                vertex_sets.push(vec![v]);
            }
        }

        let mut vertex_pieces = vec![Vec::new(); n];
        for (pid, vs) in vertex_sets.iter().enumerate() {
            for &v in vs {
                vertex_pieces[v].push(pid);
            }
        }
        let mut edge_piece = vec![usize::MAX; g.m()];
        let mut pieces = Vec::with_capacity(groups.len());
        for (pid, (mut edge_ids, vertices)) in groups.into_iter().zip(vertex_sets).enumerate() {
            edge_ids.sort_unstable();
            for &e in &edge_ids {
                edge_piece[e] = pid;
            }
            let boundary: Vec<VertexId> = vertices.iter().copied().filter(|&v| vertex_pieces[v].len() >= 2).collect();
            let local_of = |v: VertexId| vertices.binary_search(&v).expect("vertex in piece");
            let boundary_local: Vec<usize> = boundary.iter().map(|&b| local_of(b)).collect();
            let mut is_boundary_local = FixedBitSet::with_capacity(vertices.len());
            for &l in &boundary_local {
                is_boundary_local.insert(l);
            }
            let local_edges: Vec<Edge> = edge_ids
                .iter()
                .map(|&e| {
                    let ge = g.edge(e);
                    Edge { tail: local_of(ge.tail), head: local_of(ge.head), ..*ge }
                })
                .collect();
            let graph =
                DiGraph::with_edges(vertices.len(), g.is_weighted(), local_edges).expect("subgraph of a valid graph");
            pieces.push(Piece { id: pid, edge_ids, vertices, boundary, boundary_local, graph, is_boundary_local });
        }
        let boundary_union: Vec<VertexId> = (0..n).filter(|&v| vertex_pieces[v].len() >= 2).collect();
        let mut boundary_pos = vec![None; n];
        for (i, &b) in boundary_union.iter().enumerate() {
            boundary_pos[b] = Some(i as u32);
        }
        RDivision { r, pieces, vertex_pieces, boundary_union, boundary_pos, edge_piece }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.vertex_pieces.len()
    }

    /// Position of `v` in `boundary_union`, if it is a boundary vertex.
    #[inline]
    pub fn boundary_pos(&self, v: VertexId) -> Option<usize> {
        self.boundary_pos[v].map(|p| p as usize)
    }

    #[inline]
    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary_pos[v].is_some()
    }

    #[inline]
    pub fn piece_of_edge(&self, e: EdgeId) -> usize {
        self.edge_piece[e]
    }

    /// Lowest-id piece containing `v`.
    #[inline]
    pub fn home_piece(&self, v: VertexId) -> usize {
        self.vertex_pieces[v][0]
    }

    /// Whether `u` and `v` share a piece.
    pub fn co_piece(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = (&self.vertex_pieces[u], &self.vertex_pieces[v]);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Equal => return true,
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
        false
    }
}

/// Splits a connected edge set into two non-empty parts.
pub trait Separator {
    fn split(&self, g: &DiGraph, edges: &[EdgeId], rng: &mut ChaCha8Rng) -> (Vec<EdgeId>, Vec<EdgeId>);
}

/// Cuts at a BFS level of the underlying undirected graph, started from a
/// pseudo-peripheral vertex. An edge belongs to the level of its nearer
/// endpoint, so the shared vertices are one level set.
#[derive(Clone, Copy, Debug, Default)]
pub struct BfsLevelSeparator;

impl Separator for BfsLevelSeparator {
    fn split(&self, g: &DiGraph, edges: &[EdgeId], rng: &mut ChaCha8Rng) -> (Vec<EdgeId>, Vec<EdgeId>) {
        let adj = LocalAdjacency::new(g, edges);
        let start = adj.verts[rng.gen_range(0..adj.verts.len())];
        let far = adj.farthest(start);
        let level = adj.levels(far);
        let mut sorted: Vec<(usize, EdgeId)> = edges
            .iter()
            .map(|&e| {
                let ed = g.edge(e);
                (level[&ed.tail].min(level[&ed.head]), e)
            })
            .collect();
        sorted.sort_unstable();
        let mid = sorted.len() / 2;
        let cut = (1..sorted.len())
            .filter(|&i| sorted[i].0 != sorted[i - 1].0)
            .min_by_key(|&i| i.abs_diff(mid))
            .filter(|&i| 4 * i >= sorted.len() && 4 * (sorted.len() - i) >= sorted.len())
            .unwrap_or(mid.max(1));
        let a = sorted[..cut].iter().map(|&(_, e)| e).collect();
        let b = sorted[cut..].iter().map(|&(_, e)| e).collect();
        (a, b)
    }
}

struct LocalAdjacency {
    verts: Vec<VertexId>,
    nbrs: std::collections::HashMap<VertexId, Vec<VertexId>>,
}

impl LocalAdjacency {
    fn new(g: &DiGraph, edges: &[EdgeId]) -> Self {
        let mut nbrs: std::collections::HashMap<VertexId, Vec<VertexId>> = Default::default();
        for &e in edges {
            let ed = g.edge(e);
            nbrs.entry(ed.tail).or_default().push(ed.head);
            nbrs.entry(ed.head).or_default().push(ed.tail);
        }
        for list in nbrs.values_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let mut verts: Vec<VertexId> = nbrs.keys().copied().collect();
        verts.sort_unstable();
        LocalAdjacency { verts, nbrs }
    }

    fn levels(&self, s: VertexId) -> std::collections::HashMap<VertexId, usize> {
        let mut level = std::collections::HashMap::with_capacity(self.verts.len());
        level.insert(s, 0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let next = level[&u] + 1;
            for &w in &self.nbrs[&u] {
                if let std::collections::hash_map::Entry::Vacant(e) = level.entry(w) {
                    e.insert(next);
                    queue.push_back(w);
                }
            }
        }
        level
    }

    fn farthest(&self, s: VertexId) -> VertexId {
        let level = self.levels(s);
        self.verts
            .iter()
            .copied()
            .filter(|v| level.contains_key(v))
            .max_by_key(|v| (level[v], std::cmp::Reverse(*v)))
            .unwrap_or(s)
    }

    /// Connected components as edge lists, in order of smallest vertex.
    fn components(&self, g: &DiGraph, edges: &[EdgeId]) -> Vec<Vec<EdgeId>> {
        let mut comp_of: std::collections::HashMap<VertexId, usize> = Default::default();
        let mut count = 0;
        for &v in &self.verts {
            if comp_of.contains_key(&v) {
                continue;
            }
            comp_of.insert(v, count);
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                for &w in &self.nbrs[&u] {
                    if let std::collections::hash_map::Entry::Vacant(e) = comp_of.entry(w) {
                        e.insert(count);
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        let mut out = vec![Vec::new(); count];
        for &e in edges {
            out[comp_of[&g.edge(e).tail]].push(e);
        }
        out
    }
}

/// Builds an r-division with the default separator.
pub fn build_r_division(g: &DiGraph, r: usize, seed: u64) -> RDivision {
    build_r_division_with(g, r, seed, &BfsLevelSeparator)
}

pub fn build_r_division_with(g: &DiGraph, r: usize, seed: u64, sep: &dyn Separator) -> RDivision {
    let r = r.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = Vec::new();
    let all: Vec<EdgeId> = (0..g.m()).collect();
    if !all.is_empty() {
        divide(g, all, r, sep, &mut rng, &mut groups);
    }
    RDivision::from_edge_groups(g, r, groups)
}

fn divide(
    g: &DiGraph,
    edges: Vec<EdgeId>,
    r: usize,
    sep: &dyn Separator,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<Vec<EdgeId>>,
) {
    if edges.len() <= r {
        out.push(edges);
        return;
    }
    let adj = LocalAdjacency::new(g, &edges);
    let comps = adj.components(g, &edges);
    if comps.len() > 1 {
        // Disjoint components share nothing, so small ones can be packed.
        let mut bin: Vec<EdgeId> = Vec::new();
        for comp in comps {
            if comp.len() > r {
                divide(g, comp, r, sep, rng, out);
            } else {
                if bin.len() + comp.len() > r {
                    out.push(std::mem::take(&mut bin));
                }
                bin.extend(comp);
            }
        }
        if !bin.is_empty() {
            out.push(bin);
        }
        return;
    }
    let (a, b) = sep.split(g, &edges, rng);
    divide(g, a, r, sep, rng, out);
    divide(g, b, r, sep, rng, out);
}

/// `n^(2/(3h-2))`, the piece size that balances the oracle's tables.
pub fn suggested_r(n: usize, h: u32) -> usize {
    let exp = 2.0 / (3.0 * h as f64 - 2.0);
    ((n.max(1) as f64).powf(exp).round() as usize).max(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RDivisionReport {
    pub piece_count: usize,
    pub max_edges: usize,
    pub max_boundary: usize,
    pub boundary_union: usize,
    pub cover_ok: bool,
}

/// Recomputes the edge partition and boundary definition from scratch.
pub fn validate_r_division(g: &DiGraph, rd: &RDivision) -> RDivisionReport {
    let mut ok = rd.vertex_pieces.len() == g.n();
    let mut seen = vec![0usize; g.m()];
    let mut membership = vec![0usize; g.n()];
    for p in &rd.pieces {
        let mut vs: Vec<VertexId> = Vec::new();
        for &e in &p.edge_ids {
            if e >= g.m() {
                ok = false;
                continue;
            }
            seen[e] += 1;
            vs.push(g.edge(e).tail);
            vs.push(g.edge(e).head);
        }
        vs.sort_unstable();
        vs.dedup();
        if p.edge_ids.is_empty() {
            ok &= p.vertices.len() == 1;
        } else {
            ok &= vs == p.vertices;
        }
        for &v in &p.vertices {
            if v < g.n() {
                membership[v] += 1;
            } else {
                ok = false;
            }
        }
    }
    ok &= seen.iter().all(|&c| c == 1);
    ok &= membership.iter().all(|&c| c >= 1);
    for p in &rd.pieces {
        let expect: Vec<VertexId> = p.vertices.iter().copied().filter(|&v| v < g.n() && membership[v] >= 2).collect();
        ok &= expect == p.boundary;
    }
    RDivisionReport {
        piece_count: rd.pieces.len(),
        max_edges: rd.pieces.iter().map(|p| p.edge_ids.len()).max().unwrap_or(0),
        max_boundary: rd.pieces.iter().map(|p| p.k()).max().unwrap_or(0),
        boundary_union: rd.boundary_union.len(),
        cover_ok: ok,
    }
}

/// Constants for the size audit: at most `c_p * n / r` pieces, at most
/// `c_e * r` edges per piece, at most `c_b * sqrt(r)` boundary per piece.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditConstants {
    pub c_p: f64,
    pub c_e: f64,
    pub c_b: f64,
}

impl Default for AuditConstants {
    fn default() -> Self {
        AuditConstants { c_p: 8.0, c_e: 1.0, c_b: 4.0 }
    }
}

impl AuditConstants {
    pub fn check(&self, report: &RDivisionReport, n: usize, r: usize) -> bool {
        let r = r as f64;
        report.cover_ok
            && report.piece_count as f64 <= self.c_p * (n as f64 / r).max(1.0)
            && report.max_edges as f64 <= self.c_e * r
            && report.max_boundary as f64 <= self.c_b * r.sqrt()
    }
}
