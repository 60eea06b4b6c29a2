//! Even–Shiloach trees: BFS levels from a (super)source maintained under
//! edge deletions, up to a depth bound.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::OracleError;
use crate::graph::{DiGraph, EdgeId, VertexId};

pub const UNREACHED: u32 = u32::MAX;

/// Mutable edge set over a fixed vertex set, shared by every tree built on it.
#[derive(Clone, Debug)]
pub struct DecGraph {
    n: usize,
    tail: Vec<u32>,
    head: Vec<u32>,
    out: Vec<Vec<u32>>,
    inc: Vec<Vec<u32>>,
    alive: FixedBitSet,
    slot: HashMap<EdgeId, usize>,
}

impl DecGraph {
    /// Edges are addressed by their `Edge::id`.
    pub fn from_digraph(g: &DiGraph) -> Self {
        let n = g.n();
        let m = g.m();
        let mut d = DecGraph {
            n,
            tail: Vec::with_capacity(m),
            head: Vec::with_capacity(m),
            out: vec![Vec::new(); n],
            inc: vec![Vec::new(); n],
            alive: FixedBitSet::with_capacity(m),
            slot: HashMap::with_capacity(m),
        };
        for (i, e) in g.edges().iter().enumerate() {
            d.tail.push(e.tail as u32);
            d.head.push(e.head as u32);
            d.out[e.tail].push(i as u32);
            d.inc[e.head].push(i as u32);
            d.slot.insert(e.id, i);
        }
        d.alive.insert_range(..);
        d
    }

    /// Same edges and ids, every arc flipped.
    pub fn reversed(&self) -> Self {
        DecGraph {
            n: self.n,
            tail: self.head.clone(),
            head: self.tail.clone(),
            out: self.inc.clone(),
            inc: self.out.clone(),
            alive: self.alive.clone(),
            slot: self.slot.clone(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.slot.get(&id).is_some_and(|&i| self.alive.contains(i))
    }

    pub fn live_edges(&self) -> usize {
        self.alive.count_ones(..)
    }

    /// Removes edge `id`, returning its `(tail, head)`.
    pub fn delete(&mut self, id: EdgeId) -> Result<(VertexId, VertexId), OracleError> {
        match self.slot.get(&id) {
            Some(&i) if self.alive.contains(i) => {
                self.alive.set(i, false);
                Ok((self.tail[i] as usize, self.head[i] as usize))
            }
            _ => Err(OracleError::AbsentEdgeId(id)),
        }
    }

    fn live_in(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.inc[v].iter().filter(|&&e| self.alive.contains(e as usize)).map(|&e| self.tail[e as usize] as usize)
    }

    fn live_out(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[v].iter().filter(|&&e| self.alive.contains(e as usize)).map(|&e| self.head[e as usize] as usize)
    }
}

/// Levels of one tree; the graph is passed in on every update so many trees
/// can share it.
#[derive(Clone, Debug)]
pub struct EsState {
    depth: u32,
    level: Vec<u32>,
    source: FixedBitSet,
}

impl EsState {
    pub fn new(g: &DecGraph, sources: &[VertexId], depth: u32) -> Self {
        let mut level = vec![UNREACHED; g.n()];
        let mut source = FixedBitSet::with_capacity(g.n());
        let mut frontier = Vec::new();
        for &s in sources {
            if !source.put(s) {
                level[s] = 0;
                frontier.push(s);
            }
        }
        let mut d = 0;
        while !frontier.is_empty() && d < depth {
            d += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for v in g.live_out(u) {
                    if level[v] == UNREACHED {
                        level[v] = d;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        EsState { depth, level, source }
    }

    #[inline]
    pub fn level(&self, v: VertexId) -> Option<u32> {
        let l = self.level[v];
        (l != UNREACHED).then_some(l)
    }

    #[inline]
    pub fn reaches(&self, v: VertexId) -> bool {
        self.level[v] != UNREACHED
    }

    pub fn reached(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.level.len()).filter(|&v| self.reaches(v))
    }

    /// Repairs levels after the edge `tail -> head` was removed from `g`.
    /// Returns the vertices that just left the depth bound.
    pub fn on_delete(&mut self, g: &DecGraph, tail: VertexId, head: VertexId) -> Vec<VertexId> {
        let mut lost = Vec::new();
        if self.source.contains(head)
            || self.level[head] == UNREACHED
            || self.level[tail] == UNREACHED
            || self.level[tail] + 1 != self.level[head]
        {
            return lost;
        }
        let mut heap = BinaryHeap::new();
        let mut queued = FixedBitSet::with_capacity(g.n());
        heap.push(Reverse((self.level[head], head)));
        queued.insert(head);
        while let Some(Reverse((_, v))) = heap.pop() {
            queued.set(v, false);
            let old = self.level[v];
            if old == UNREACHED || self.source.contains(v) {
                continue;
            }
            let best =
                g.live_in(v).map(|x| self.level[x]).filter(|&l| l != UNREACHED).min().map_or(UNREACHED, |l| l + 1);
            if best <= old {
                continue;
            }
            let new = if best > self.depth { UNREACHED } else { best };
            self.level[v] = new;
            if new == UNREACHED {
                lost.push(v);
            }
            for z in g.live_out(v) {
                if self.level[z] != UNREACHED && !self.source.contains(z) && !queued.put(z) {
                    heap.push(Reverse((self.level[z], z)));
                }
            }
        }
        lost
    }
}

/// A standalone tree owning its graph.
#[derive(Clone, Debug)]
pub struct EsTree {
    graph: DecGraph,
    state: EsState,
}

impl EsTree {
    pub fn new(g: &DiGraph, sources: &[VertexId], depth: u32) -> Self {
        let graph = DecGraph::from_digraph(g);
        let state = EsState::new(&graph, sources, depth);
        EsTree { graph, state }
    }

    /// Tree with depth bound `n`, i.e. exact reachability.
    pub fn full(g: &DiGraph, sources: &[VertexId]) -> Self {
        Self::new(g, sources, g.n() as u32)
    }

    /// Deletes edge `id`; returns the vertices that became unreachable, each
    /// reported once over the tree's lifetime.
    pub fn delete(&mut self, id: EdgeId) -> Result<Vec<VertexId>, OracleError> {
        let (t, h) = self.graph.delete(id)?;
        Ok(self.state.on_delete(&self.graph, t, h))
    }

    pub fn level(&self, v: VertexId) -> Option<u32> {
        self.state.level(v)
    }

    pub fn reaches(&self, v: VertexId) -> bool {
        self.state.reaches(v)
    }

    pub fn graph(&self) -> &DecGraph {
        &self.graph
    }
}
