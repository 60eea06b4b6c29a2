//! Directed graphs with optional positive weights, the brute-force reference
//! oracles every structure in this crate is checked against, and seeded
//! generators for planar test inputs.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::ops::Add;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub type VertexId = usize;
pub type EdgeId = usize;

/// A non-negative distance or `+inf`.
///
/// Infinity is a real IEEE infinity, so `x + INF == INF` holds without any
/// sentinel arithmetic. NaN is never constructed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dist(f64);

impl Dist {
    pub const ZERO: Dist = Dist(0.0);
    pub const INF: Dist = Dist(f64::INFINITY);

    pub fn new(value: f64) -> Self {
        debug_assert!(!value.is_nan(), "distance is NaN");
        Dist(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    #[inline]
    pub fn is_inf(self) -> bool {
        !self.0.is_finite()
    }
}

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for Dist {
    type Output = Dist;
    #[inline]
    fn add(self, rhs: Dist) -> Dist {
        Dist(self.0 + rhs.0)
    }
}

impl Add<f64> for Dist {
    type Output = Dist;
    #[inline]
    fn add(self, rhs: f64) -> Dist {
        Dist(self.0 + rhs)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub weight: f64,
    pub id: EdgeId,
}

/// Immutable directed graph. Unweighted graphs carry weight 1 on every edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiGraph {
    n: usize,
    weighted: bool,
    edges: Vec<Edge>,
    /// Outgoing edge indices (into `edges`) per vertex.
    out: Vec<Vec<usize>>,
}

impl DiGraph {
    /// Builds a graph whose edge ids are the positions in `edges`.
    pub fn new(
        n: usize,
        weighted: bool,
        edges: impl IntoIterator<Item = (VertexId, VertexId, f64)>,
    ) -> Result<Self, GraphError> {
        let edges =
            edges.into_iter().enumerate().map(|(id, (tail, head, weight))| Edge { tail, head, weight, id }).collect();
        Self::with_edges(n, weighted, edges)
    }

    /// Unweighted graph from an arc list.
    pub fn unweighted(n: usize, arcs: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self, GraphError> {
        Self::new(n, false, arcs.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    /// Builds a graph keeping the caller's edge ids (used for subgraphs).
    pub fn with_edges(n: usize, weighted: bool, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut out = vec![Vec::new(); n];
        for (idx, e) in edges.iter().enumerate() {
            if e.tail >= n || e.head >= n {
                return Err(GraphError::VertexOutOfRange { vertex: e.tail.max(e.head), n });
            }
            if e.tail == e.head {
                return Err(GraphError::SelfLoop { vertex: e.tail });
            }
            if weighted {
                if !(e.weight > 0.0) || !e.weight.is_finite() {
                    return Err(GraphError::NonPositiveWeight { edge: e.id, weight: e.weight });
                }
            } else if e.weight != 1.0 {
                return Err(GraphError::NonPositiveWeight { edge: e.id, weight: e.weight });
            }
            out[e.tail].push(idx);
        }
        Ok(DiGraph { n, weighted, edges, out })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    /// Outgoing edges of `v`.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.out[v].iter().map(move |&i| &self.edges[i])
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).min_by(f64::total_cmp)
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).max_by(f64::total_cmp)
    }

    /// The graph with every edge flipped; weights and edge ids are kept.
    pub fn reverse(&self) -> DiGraph {
        let edges = self.edges.iter().map(|e| Edge { tail: e.head, head: e.tail, ..*e }).collect();
        DiGraph::with_edges(self.n, self.weighted, edges).expect("reverse of a valid graph")
    }

    /// Single-source distances: BFS when unweighted, Dijkstra otherwise.
    pub fn sssp(&self, s: VertexId) -> Vec<Dist> {
        if self.weighted {
            self.dijkstra(&[(s, Dist::ZERO)])
        } else {
            self.bfs(s)
        }
    }

    fn bfs(&self, s: VertexId) -> Vec<Dist> {
        let mut dist = vec![Dist::INF; self.n];
        let mut queue = VecDeque::new();
        dist[s] = Dist::ZERO;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1.0;
            for e in self.out_edges(u) {
                if dist[e.head].is_inf() {
                    dist[e.head] = next;
                    queue.push_back(e.head);
                }
            }
        }
        dist
    }

    /// Multi-source Dijkstra where each source starts at its own offset; this
    /// is the supersource construction with one edge of the given length per
    /// source.
    pub fn dijkstra(&self, sources: &[(VertexId, Dist)]) -> Vec<Dist> {
        let mut dist = vec![Dist::INF; self.n];
        let mut heap = BinaryHeap::new();
        for &(v, d) in sources {
            if d < dist[v] {
                dist[v] = d;
                heap.push(Reverse((d, v)));
            }
        }
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for e in self.out_edges(u) {
                let nd = d + e.weight;
                if nd < dist[e.head] {
                    dist[e.head] = nd;
                    heap.push(Reverse((nd, e.head)));
                }
            }
        }
        dist
    }

    /// Vertices reachable from any vertex in `sources`.
    pub fn reachable_from(&self, sources: impl IntoIterator<Item = VertexId>) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.n);
        let mut stack: Vec<VertexId> = Vec::new();
        for s in sources {
            if !seen.put(s) {
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for e in self.out_edges(u) {
                if !seen.put(e.head) {
                    stack.push(e.head);
                }
            }
        }
        seen
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        self.reachable_from([0]).count_ones(..) == self.n && self.reverse().reachable_from([0]).count_ones(..) == self.n
    }

    /// Serializes to the edge-list text format accepted by [`load_graph`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if self.weighted {
            s.push_str(&format!("{} {} w\n", self.n, self.m()));
            for e in &self.edges {
                s.push_str(&format!("{} {} {}\n", e.tail, e.head, e.weight));
            }
        } else {
            s.push_str(&format!("{} {}\n", self.n, self.m()));
            for e in &self.edges {
                s.push_str(&format!("{} {}\n", e.tail, e.head));
            }
        }
        s
    }
}

/// Parses the edge-list format: a header `n m` or `n m w`, then `m` lines
/// `tail head [weight]`. `#` starts a comment; blank lines are ignored.
pub fn load_graph(text: &str) -> Result<DiGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(GraphError::MissingHeader)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let weighted = match fields.len() {
        2 => false,
        3 if fields[2] == "w" => true,
        _ => return Err(GraphError::Malformed { line: hline, content: header.to_string() }),
    };
    let parse_usize =
        |line: usize, s: &str| s.parse::<usize>().map_err(|_| GraphError::Malformed { line, content: s.to_string() });
    let n = parse_usize(hline, fields[0])?;
    let m = parse_usize(hline, fields[1])?;

    let mut edges = Vec::with_capacity(m);
    for (line, content) in lines {
        let f: Vec<&str> = content.split_whitespace().collect();
        let expect = if weighted { 3 } else { 2 };
        if f.len() != expect {
            return Err(GraphError::Malformed { line, content: content.to_string() });
        }
        let tail = parse_usize(line, f[0])?;
        let head = parse_usize(line, f[1])?;
        if tail >= n || head >= n {
            return Err(GraphError::VertexOutOfRange { vertex: tail.max(head), n });
        }
        let weight = if weighted {
            let w: f64 = f[2].parse().map_err(|_| GraphError::Malformed { line, content: content.to_string() })?;
            if !(w > 0.0) || !w.is_finite() {
                return Err(GraphError::NonPositiveWeight { edge: edges.len(), weight: w });
            }
            w
        } else {
            1.0
        };
        edges.push((tail, head, weight));
    }
    if edges.len() != m {
        return Err(GraphError::EdgeCountMismatch { expected: m, found: edges.len() });
    }
    DiGraph::new(n, weighted, edges)
}

/// Dense `n x n` matrix of distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistMatrix {
    n: usize,
    data: Vec<Dist>,
}

impl DistMatrix {
    pub fn filled(n: usize, value: Dist) -> Self {
        DistMatrix { n, data: vec![value; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<Dist>>) -> Self {
        let n = rows.len();
        let data = rows.into_iter().flatten().collect::<Vec<_>>();
        assert_eq!(data.len(), n * n);
        DistMatrix { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: VertexId, v: VertexId) -> Dist {
        self.data[u * self.n + v]
    }

    #[inline]
    pub fn set(&mut self, u: VertexId, v: VertexId, d: Dist) {
        self.data[u * self.n + v] = d;
    }

    pub fn row(&self, u: VertexId) -> &[Dist] {
        &self.data[u * self.n..(u + 1) * self.n]
    }
}

/// All-pairs distances by one `sssp` per source.
pub fn apsp_reference(g: &DiGraph) -> DistMatrix {
    let rows = (0..g.n()).into_par_iter().map(|s| g.sssp(s)).collect();
    DistMatrix::from_rows(rows)
}

/// All-pairs bottleneck distances by a min-max Floyd-Warshall closure.
/// The diagonal is 0 (the empty path).
pub fn bottleneck_apsp_reference(g: &DiGraph) -> DistMatrix {
    let n = g.n();
    let mut b = DistMatrix::filled(n, Dist::INF);
    for e in g.edges() {
        let w = Dist::new(e.weight);
        if w < b.get(e.tail, e.head) {
            b.set(e.tail, e.head, w);
        }
    }
    for v in 0..n {
        b.set(v, v, Dist::ZERO);
    }
    for k in 0..n {
        let row_k: Vec<Dist> = b.row(k).to_vec();
        for i in 0..n {
            let bik = b.get(i, k);
            if bik.is_inf() {
                continue;
            }
            for j in 0..n {
                let via = bik.max(row_k[j]);
                if via < b.get(i, j) {
                    b.set(i, j, via);
                }
            }
        }
    }
    b
}

/// Transitive closure as a row-per-source bitset list.
pub fn reachability_reference(g: &DiGraph) -> Vec<FixedBitSet> {
    (0..g.n()).into_par_iter().map(|s| g.reachable_from([s])).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Every undirected edge appears in both directions.
    Bidirected,
    /// Every undirected edge gets one seeded direction.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightProfile {
    Unit,
    /// Uniform integers in `[lo, hi]`.
    Integer {
        lo: u32,
        hi: u32,
    },
    /// Uniform multiples of `2^-frac_bits` in `[lo, hi]`; exact in binary.
    Dyadic {
        lo: u32,
        hi: u32,
        frac_bits: u32,
    },
}

impl WeightProfile {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            WeightProfile::Unit => 1.0,
            WeightProfile::Integer { lo, hi } => rng.gen_range(lo..=hi) as f64,
            WeightProfile::Dyadic { lo, hi, frac_bits } => {
                let scale = 1u64 << frac_bits;
                let k = rng.gen_range(lo as u64 * scale..=hi as u64 * scale);
                k as f64 / scale as f64
            }
        }
    }

    fn weighted(&self) -> bool {
        !matches!(self, WeightProfile::Unit)
    }
}

fn orient_and_weigh(
    n: usize,
    undirected: Vec<(VertexId, VertexId)>,
    orientation: Orientation,
    weights: WeightProfile,
    rng: &mut ChaCha8Rng,
) -> DiGraph {
    let mut arcs = Vec::with_capacity(undirected.len() * 2);
    for (a, b) in undirected {
        match orientation {
            Orientation::Bidirected => {
                arcs.push((a, b, weights.sample(rng)));
                arcs.push((b, a, weights.sample(rng)));
            }
            Orientation::Random => {
                let (t, h) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                arcs.push((t, h, weights.sample(rng)));
            }
        }
    }
    DiGraph::new(n, weights.weighted(), arcs).expect("generated graph is valid")
}

/// `width x height` grid; vertex `(x, y)` has id `y * width + x`.
pub fn generate_grid(
    width: usize,
    height: usize,
    seed: u64,
    orientation: Orientation,
    weights: WeightProfile,
) -> DiGraph {
    assert!(width >= 1 && height >= 1, "grid dimensions must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut undirected = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let v = y * width + x;
            if x + 1 < width {
                undirected.push((v, v + 1));
            }
            if y + 1 < height {
                undirected.push((v, v + width));
            }
        }
    }
    orient_and_weigh(width * height, undirected, orientation, weights, &mut rng)
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn generate_path(n: usize, seed: u64, orientation: Orientation, weights: WeightProfile) -> DiGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let undirected = (1..n).map(|v| (v - 1, v)).collect();
    orient_and_weigh(n, undirected, orientation, weights, &mut rng)
}

/// Cycle `0 - 1 - ... - (n-1) - 0`, oriented forward when `directed`.
pub fn generate_cycle(n: usize, seed: u64, directed: bool, weights: WeightProfile) -> DiGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let undirected: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    if directed {
        let arcs: Vec<_> = undirected.into_iter().map(|(a, b)| (a, b, weights.sample(&mut rng))).collect();
        DiGraph::new(n, weights.weighted(), arcs).expect("generated graph is valid")
    } else {
        orient_and_weigh(n, undirected, Orientation::Bidirected, weights, &mut rng)
    }
}
