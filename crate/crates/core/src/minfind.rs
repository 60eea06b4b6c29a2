//! Min-finding with a predecessor oracle.
//!
//! A hidden permutation `σ` orders the indices `0..n`. Querying `x = σ_i`
//! returns the unordered set `{σ_1, ..., σ_{i-1}}`; the goal is `σ_1`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::OracleError;

pub trait MinFindView {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the predecessors of `x` into `out` (cleared first).
    fn query(&self, x: usize, out: &mut Vec<usize>);
}

pub enum Strategy<'a, R: Rng> {
    /// Uniform first guess, then a uniform member of the returned set.
    Random(&'a mut R),
    /// Always probe the candidate with the smallest rank, `rank[x]` being the
    /// position of `x` in a fixed permutation.
    Permutation(&'a [u32]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinFound {
    pub min: usize,
    /// Oracle queries made, including the final one returning the empty set.
    pub probes: usize,
}

pub fn min_find<V: MinFindView + ?Sized, R: Rng>(view: &V, strategy: Strategy<'_, R>) -> Result<MinFound, OracleError> {
    let n = view.len();
    assert!(n > 0, "min-finding over an empty index set");
    let mut set: Vec<usize> = Vec::new();
    let mut probes = 0;
    let mut prev = n;
    match strategy {
        Strategy::Random(rng) => {
            let mut x = rng.gen_range(0..n);
            loop {
                view.query(x, &mut set);
                probes += 1;
                if set.len() >= prev || set.contains(&x) {
                    return Err(OracleError::InconsistentView(x));
                }
                match set.choose(rng) {
                    None => return Ok(MinFound { min: x, probes }),
                    Some(&y) => {
                        prev = set.len();
                        x = y;
                    }
                }
            }
        }
        Strategy::Permutation(rank) => {
            let mut x = (0..n).min_by_key(|&i| rank[i]).expect("non-empty");
            loop {
                view.query(x, &mut set);
                probes += 1;
                if set.len() >= prev || set.contains(&x) {
                    return Err(OracleError::InconsistentView(x));
                }
                match set.iter().copied().min_by_key(|&i| rank[i]) {
                    None => return Ok(MinFound { min: x, probes }),
                    Some(y) => {
                        prev = set.len();
                        x = y;
                    }
                }
            }
        }
    }
}

/// Explicit hidden permutation; `order[0]` is the minimum.
#[derive(Clone, Debug)]
pub struct PermutationView {
    order: Vec<usize>,
    pos: Vec<usize>,
}

impl PermutationView {
    pub fn new(order: Vec<usize>) -> Self {
        let mut pos = vec![0; order.len()];
        for (i, &x) in order.iter().enumerate() {
            pos[x] = i;
        }
        PermutationView { order, pos }
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self::new(order)
    }

    pub fn min(&self) -> usize {
        self.order[0]
    }
}

impl MinFindView for PermutationView {
    fn len(&self) -> usize {
        self.order.len()
    }

    fn query(&self, x: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend_from_slice(&self.order[..self.pos[x]]);
    }
}

/// Ranks of a uniformly random permutation of `0..n`.
pub fn random_ranks(n: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut ranks: Vec<u32> = (0..n as u32).collect();
    ranks.shuffle(rng);
    ranks
}
