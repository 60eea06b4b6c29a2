//! Static bottleneck distances from a recorded decremental run.
//!
//! Edges are deleted heaviest first. If `s` stops reaching `t` at the
//! deletion of the `k`-th edge, then `β(s, t)` is that edge's weight.

use serde::{Deserialize, Serialize};

use crate::graph::{DiGraph, Dist, EdgeId, VertexId};
use crate::rdiv::{build_r_division, RDivision};

use super::reach::{DecReachOracle, NEVER};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottleneckPiece {
    /// `np * np` times at which `u` stopped reaching `v` inside the piece.
    pub intra_death: Vec<u32>,
    /// Per pattern tree, the time each local vertex left it.
    pub tree_death: Vec<Vec<u32>>,
    /// Per global source, `(start, tree)` pattern references.
    pub versions: Vec<Vec<(u32, u32)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottleneckOracle {
    pub rd: RDivision,
    /// Edges in deletion order.
    pub order: Vec<EdgeId>,
    /// `weights[k - 1]` is the weight of the `k`-th deleted edge.
    pub weights: Vec<f64>,
    pub pieces: Vec<BottleneckPiece>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BottleneckAnswer {
    pub dist: Dist,
    pub probes: usize,
}

/// Deletion order: decreasing weight, ties by decreasing edge id.
pub fn deletion_order(g: &DiGraph) -> Vec<EdgeId> {
    let mut order: Vec<EdgeId> = (0..g.m()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (g.edge(a), g.edge(b));
        eb.weight.total_cmp(&ea.weight).then(eb.id.cmp(&ea.id))
    });
    order.into_iter().map(|i| g.edge(i).id).collect()
}

pub fn build_bottleneck_oracle(g: &DiGraph, r: usize, seed: u64) -> BottleneckOracle {
    build_bottleneck_with_order(g, r, seed, deletion_order(g))
}

/// Builds from any order that is non-increasing in weight.
pub fn build_bottleneck_with_order(g: &DiGraph, r: usize, seed: u64, order: Vec<EdgeId>) -> BottleneckOracle {
    let rd = build_r_division(g, r, seed);
    let mut dec = DecReachOracle::new(g, rd.clone(), true);
    let mut weights = Vec::with_capacity(order.len());
    for &e in &order {
        weights.push(g.edge(e).weight);
        dec.delete_edge(e).expect("each edge deleted once");
    }
    let rec = dec.take_recorder().expect("recording enabled");
    let pieces = rec
        .intra_death
        .into_iter()
        .zip(rec.tree_death)
        .zip(rec.versions)
        .map(|((intra_death, tree_death), versions)| BottleneckPiece { intra_death, tree_death, versions })
        .collect();
    BottleneckOracle { rd, order, weights, pieces }
}

impl BottleneckOracle {
    #[inline]
    pub fn n(&self) -> usize {
        self.rd.n()
    }

    pub fn query(&self, s: VertexId, t: VertexId) -> Dist {
        self.query_probes(s, t).dist
    }

    pub fn query_probes(&self, s: VertexId, t: VertexId) -> BottleneckAnswer {
        self.query_via_piece(s, t, self.rd.home_piece(t))
    }

    pub fn query_via_piece(&self, s: VertexId, t: VertexId, pid: usize) -> BottleneckAnswer {
        if s == t {
            return BottleneckAnswer { dist: Dist::ZERO, probes: 0 };
        }
        let (death, probes) = self.death(s, t, pid);
        let dist = match death {
            0 | NEVER => Dist::INF,
            k => Dist::new(self.weights[k as usize - 1]),
        };
        BottleneckAnswer { dist, probes }
    }

    /// First deletion time at which `s` no longer reaches `t`; 0 if it never did.
    fn death(&self, s: VertexId, t: VertexId, pid: usize) -> (u32, usize) {
        let piece = &self.rd.pieces[pid];
        let bp = &self.pieces[pid];
        let np = piece.n();
        let lt = piece.local(t).expect("t in piece");
        let mut probes = 0;
        let mut best = 0;
        if let Some(ls) = piece.local(s) {
            probes += 1;
            best = bp.intra_death[ls * np + lt];
        }
        let versions = &bp.versions[s];
        let alive_at = |v: usize| bp.tree_death[versions[v].1 as usize][lt] > versions[v].0;
        // Reachability through the boundary only gets lost over time, so the
        // versions alive at their own start form a prefix.
        let (mut lo, mut hi) = (0, versions.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            probes += 1;
            if alive_at(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo > 0 {
            let v = lo - 1;
            probes += 1;
            let end = versions.get(v + 1).map_or(NEVER, |x| x.0);
            best = best.max(bp.tree_death[versions[v].1 as usize][lt].min(end));
        }
        (best, probes)
    }

    /// Probe budget per query.
    pub fn probe_bound(&self) -> usize {
        2 * (self.order.len().max(2) as f64).log2().ceil() as usize + 4
    }
}
