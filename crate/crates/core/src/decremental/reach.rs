//! Decremental all-pairs reachability over an r-division.
//!
//! Every piece keeps, for each of its vertices, a tree of what that vertex
//! reaches inside the piece. Every boundary vertex `b` of the division keeps
//! a tree in the reverse graph, i.e. the set of vertices that reach `b`. The
//! boundary vertices of `P` reached by `u` form a 0/1 string `R_{P,u}`; every
//! distinct string seen so far owns one more tree inside `P` rooted at the
//! boundary vertices it selects.

use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::OracleError;
use crate::graph::{DiGraph, EdgeId, VertexId};
use crate::rdiv::{build_r_division, RDivision};
use crate::strings::{StringId, StringStore};

use super::estree::{DecGraph, EsState};

pub(crate) const NEVER: u32 = u32::MAX;

struct PatternTree {
    pattern: StringId,
    created: u32,
    state: EsState,
}

struct PieceState {
    graph: DecGraph,
    intra: Vec<EsState>,
    store: StringStore,
    /// `R_{P,u}` per global vertex.
    reach: Vec<StringId>,
    /// Index into `trees` for `reach[u]`.
    tree_of: Vec<u32>,
    by_pattern: HashMap<StringId, u32>,
    trees: Vec<PatternTree>,
}

/// Timestamps kept for the bottleneck oracle.
#[derive(Default)]
pub(crate) struct Recorder {
    /// Per piece, `np * np` times at which `u` stopped reaching `v` inside.
    pub intra_death: Vec<Vec<u32>>,
    /// Per piece and pattern tree, the time each local vertex left it.
    pub tree_death: Vec<Vec<Vec<u32>>>,
    /// Per piece and global vertex, `(start, tree)` whenever `R_{P,u}` changed.
    pub versions: Vec<Vec<Vec<(u32, u32)>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReachAnswer {
    pub reachable: bool,
    pub probes: usize,
}

pub struct DecReachOracle {
    rd: RDivision,
    time: u32,
    rev: DecGraph,
    rev_trees: Vec<EsState>,
    pieces: Vec<PieceState>,
    arcs: HashMap<(VertexId, VertexId), Vec<EdgeId>>,
    recorder: Option<Recorder>,
}

pub fn new_dec_oracle(g: &DiGraph, r: usize, seed: u64) -> DecReachOracle {
    DecReachOracle::new(g, build_r_division(g, r, seed), false)
}

impl DecReachOracle {
    pub(crate) fn new(g: &DiGraph, rd: RDivision, record: bool) -> Self {
        let n = g.n();
        let rev = DecGraph::from_digraph(g).reversed();
        let rev_trees: Vec<EsState> = rd.boundary_union.iter().map(|&b| EsState::new(&rev, &[b], n as u32)).collect();
        let mut recorder = record.then(Recorder::default);
        let mut pieces = Vec::with_capacity(rd.pieces.len());
        for piece in &rd.pieces {
            let np = piece.n();
            let graph = DecGraph::from_digraph(&piece.graph);
            let intra: Vec<EsState> = (0..np).map(|u| EsState::new(&graph, &[u], np as u32)).collect();
            if let Some(rec) = recorder.as_mut() {
                let mut death = vec![NEVER; np * np];
                for (u, tree) in intra.iter().enumerate() {
                    for v in 0..np {
                        if !tree.reaches(v) {
                            death[u * np + v] = 0;
                        }
                    }
                }
                rec.intra_death.push(death);
                rec.tree_death.push(Vec::new());
                rec.versions.push(vec![Vec::new(); n]);
            }
            let mut ps = PieceState {
                graph,
                intra,
                store: StringStore::new(2),
                reach: Vec::with_capacity(n),
                tree_of: Vec::with_capacity(n),
                by_pattern: HashMap::new(),
                trees: Vec::new(),
            };
            for u in 0..n {
                let bits: Vec<u32> = piece
                    .boundary
                    .iter()
                    .map(|&b| rev_trees[rd.boundary_pos(b).expect("boundary")].reaches(u) as u32)
                    .collect();
                let id = ps.store.insert_explicit(&bits).expect("binary symbols");
                let slot = ensure_tree(&mut ps, &rd.pieces[piece.id].boundary_local, id, 0, piece.id, &mut recorder);
                ps.reach.push(id);
                ps.tree_of.push(slot);
                if let Some(rec) = recorder.as_mut() {
                    rec.versions[piece.id][u].push((0, slot));
                }
            }
            pieces.push(ps);
        }
        let mut arcs: HashMap<(VertexId, VertexId), Vec<EdgeId>> = HashMap::new();
        for e in g.edges() {
            arcs.entry((e.tail, e.head)).or_default().push(e.id);
        }
        DecReachOracle { rd, time: 0, rev, rev_trees, pieces, arcs, recorder }
    }

    pub fn division(&self) -> &RDivision {
        &self.rd
    }

    /// Number of deletions applied so far.
    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.rev.contains_edge(id)
    }

    /// Deletes one live copy of the arc `u -> v` (lowest id first).
    pub fn delete_arc(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId, OracleError> {
        let id = self
            .arcs
            .get(&(u, v))
            .and_then(|ids| ids.iter().copied().find(|&e| self.rev.contains_edge(e)))
            .ok_or(OracleError::AbsentEdge { tail: u, head: v })?;
        self.delete_edge(id)?;
        Ok(id)
    }

    pub fn delete_edge(&mut self, id: EdgeId) -> Result<(), OracleError> {
        if !self.rev.contains_edge(id) {
            return Err(OracleError::AbsentEdgeId(id));
        }
        self.time += 1;
        let now = self.time;
        let pid = self.rd.piece_of_edge(id);
        {
            let ps = &mut self.pieces[pid];
            let np = ps.intra.len();
            let (t, h) = ps.graph.delete(id)?;
            for (u, tree) in ps.intra.iter_mut().enumerate() {
                for v in tree.on_delete(&ps.graph, t, h) {
                    if let Some(rec) = self.recorder.as_mut() {
                        rec.intra_death[pid][u * np + v] = now;
                    }
                }
            }
            for (slot, tree) in ps.trees.iter_mut().enumerate() {
                for v in tree.state.on_delete(&ps.graph, t, h) {
                    if let Some(rec) = self.recorder.as_mut() {
                        rec.tree_death[pid][slot][v] = now;
                    }
                }
            }
        }

        let (t, h) = self.rev.delete(id)?;
        let mut changed: BTreeMap<(usize, VertexId), Vec<usize>> = BTreeMap::new();
        for (pos, tree) in self.rev_trees.iter_mut().enumerate() {
            let lost = tree.on_delete(&self.rev, t, h);
            if lost.is_empty() {
                continue;
            }
            let b = self.rd.boundary_union[pos];
            for &p in &self.rd.vertex_pieces[b] {
                let idx = self.rd.pieces[p].boundary.binary_search(&b).expect("boundary of piece");
                for &u in &lost {
                    changed.entry((p, u)).or_default().push(idx);
                }
            }
        }
        for ((p, u), idxs) in changed {
            let ps = &mut self.pieces[p];
            let mut id = ps.reach[u];
            for idx in idxs {
                id = ps.store.insert_substitution(id, idx, 0).expect("index within boundary");
            }
            let slot = ensure_tree(ps, &self.rd.pieces[p].boundary_local, id, now, p, &mut self.recorder);
            ps.reach[u] = id;
            ps.tree_of[u] = slot;
            if let Some(rec) = self.recorder.as_mut() {
                rec.versions[p][u].push((now, slot));
            }
        }
        Ok(())
    }

    pub fn query(&self, u: VertexId, v: VertexId) -> bool {
        self.query_probes(u, v).reachable
    }

    pub fn query_probes(&self, u: VertexId, v: VertexId) -> ReachAnswer {
        self.query_via_piece(u, v, self.rd.home_piece(v))
    }

    /// Answers through a specific piece containing `v`.
    pub fn query_via_piece(&self, u: VertexId, v: VertexId, pid: usize) -> ReachAnswer {
        if u == v {
            return ReachAnswer { reachable: true, probes: 0 };
        }
        let piece = &self.rd.pieces[pid];
        let ps = &self.pieces[pid];
        let lv = piece.local(v).expect("v in piece");
        let mut probes = 0;
        if let Some(lu) = piece.local(u) {
            probes += 1;
            if ps.intra[lu].reaches(lv) {
                return ReachAnswer { reachable: true, probes };
            }
        }
        probes += 1;
        let reachable = ps.trees[ps.tree_of[u] as usize].state.reaches(lv);
        ReachAnswer { reachable, probes }
    }

    /// `R_{P,u}` as boundary vertices.
    pub fn boundary_reach(&self, pid: usize, u: VertexId) -> Vec<VertexId> {
        let ps = &self.pieces[pid];
        let bits = ps.store.string_of(ps.reach[u]).expect("issued id");
        self.rd.pieces[pid].boundary.iter().zip(bits).filter(|(_, c)| *c == 1).map(|(&b, _)| b).collect()
    }

    /// Vertices of piece `pid` (global ids) in the pattern tree of `u`.
    pub fn pattern_reach(&self, pid: usize, u: VertexId) -> Vec<VertexId> {
        let ps = &self.pieces[pid];
        let piece = &self.rd.pieces[pid];
        ps.trees[ps.tree_of[u] as usize].state.reached().map(|l| piece.global(l)).collect()
    }

    /// Whether the live edges of piece `pid` include `id`.
    pub fn piece_contains_edge(&self, pid: usize, id: EdgeId) -> bool {
        self.pieces[pid].graph.contains_edge(id)
    }

    /// `(|∂P|, distinct patterns so far)` per piece.
    pub fn pattern_counts(&self) -> Vec<(usize, usize)> {
        self.rd.pieces.iter().zip(&self.pieces).map(|(p, ps)| (p.k(), ps.trees.len())).collect()
    }

    /// When each pattern tree was created.
    pub fn pattern_births(&self, pid: usize) -> Vec<(StringId, u32)> {
        self.pieces[pid].trees.iter().map(|t| (t.pattern, t.created)).collect()
    }

    pub(crate) fn take_recorder(&mut self) -> Option<Recorder> {
        self.recorder.take()
    }
}

fn ensure_tree(
    ps: &mut PieceState,
    boundary_local: &[usize],
    id: StringId,
    now: u32,
    pid: usize,
    recorder: &mut Option<Recorder>,
) -> u32 {
    if let Some(&slot) = ps.by_pattern.get(&id) {
        return slot;
    }
    let bits = ps.store.string_of(id).expect("issued id");
    let sources: Vec<usize> = boundary_local.iter().zip(&bits).filter(|(_, &c)| c == 1).map(|(&l, _)| l).collect();
    let np = ps.graph.n();
    let state = EsState::new(&ps.graph, &sources, np as u32);
    if let Some(rec) = recorder.as_mut() {
        rec.tree_death[pid].push((0..np).map(|v| if state.reaches(v) { NEVER } else { now }).collect());
    }
    let slot = ps.trees.len() as u32;
    ps.trees.push(PatternTree { pattern: id, created: now, state });
    ps.by_pattern.insert(id, slot);
    slot
}

/// Reachability of every vertex from `u` in the graph with only the edges
/// marked in `alive`.
pub fn reach_reference(g: &DiGraph, alive: &FixedBitSet, u: VertexId) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(g.n());
    seen.insert(u);
    let mut stack = vec![u];
    while let Some(x) = stack.pop() {
        for e in g.out_edges(x) {
            if alive.contains(e.id) && !seen.put(e.head) {
                stack.push(e.head);
            }
        }
    }
    seen
}
