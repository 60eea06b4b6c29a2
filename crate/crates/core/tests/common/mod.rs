#![allow(dead_code)]

use mfdo_core::graph::{generate_cycle, generate_grid, generate_path, DiGraph, Orientation, WeightProfile};

pub struct Case {
    pub name: String,
    pub graph: DiGraph,
}

fn case(name: impl Into<String>, graph: DiGraph) -> Case {
    Case { name: name.into(), graph }
}

/// 30 unweighted graphs: grids 4x4 through 10x10 in both orientations,
/// a few non-square and reseeded grids, paths and cycles.
pub fn unweighted_corpus() -> Vec<Case> {
    use Orientation::*;
    let unit = WeightProfile::Unit;
    let mut out = Vec::new();
    for s in 4..=10 {
        out.push(case(format!("grid{s}x{s}-bi"), generate_grid(s, s, s as u64, Bidirected, unit)));
        out.push(case(format!("grid{s}x{s}-rand"), generate_grid(s, s, 100 + s as u64, Random, unit)));
    }
    out.push(case("grid3x7-bi", generate_grid(3, 7, 1, Bidirected, unit)));
    out.push(case("grid2x12-bi", generate_grid(2, 12, 2, Bidirected, unit)));
    out.push(case("grid5x8-rand", generate_grid(5, 8, 3, Random, unit)));
    out.push(case("grid9x6-rand", generate_grid(9, 6, 4, Random, unit)));
    for seed in [21, 22] {
        out.push(case(format!("grid6x6-rand-s{seed}"), generate_grid(6, 6, seed, Random, unit)));
    }
    out.push(case("grid8x8-rand-s23", generate_grid(8, 8, 23, Random, unit)));
    out.push(case("grid7x5-bi", generate_grid(7, 5, 24, Bidirected, unit)));
    for n in [10, 25, 40] {
        out.push(case(format!("path{n}-bi"), generate_path(n, n as u64, Bidirected, unit)));
    }
    out.push(case("path20-rand", generate_path(20, 5, Random, unit)));
    out.push(case("cycle12-dir", generate_cycle(12, 6, true, unit)));
    out.push(case("cycle30-dir", generate_cycle(30, 7, true, unit)));
    out.push(case("cycle16-bi", generate_cycle(16, 8, false, unit)));
    out.push(case("cycle33-bi", generate_cycle(33, 9, false, unit)));
    assert_eq!(out.len(), 30);
    out
}

/// 20 weighted grids, at most 400 vertices, integer and dyadic weights.
pub fn weighted_corpus() -> Vec<Case> {
    use Orientation::*;
    let mut out = Vec::new();
    let sizes = [(4, 4), (5, 5), (6, 6), (7, 7), (8, 8), (10, 10), (12, 12), (14, 14), (16, 16), (20, 20)];
    for (i, &(w, h)) in sizes.iter().enumerate() {
        let seed = 300 + i as u64;
        let (orient, tag) = if i % 2 == 0 { (Bidirected, "bi") } else { (Random, "rand") };
        out.push(case(
            format!("wgrid{w}x{h}-int-{tag}"),
            generate_grid(w, h, seed, orient, WeightProfile::Integer { lo: 1, hi: 20 }),
        ));
        let other = if i % 2 == 0 { Random } else { Bidirected };
        out.push(case(
            format!("wgrid{w}x{h}-dyadic"),
            generate_grid(w, h, seed + 50, other, WeightProfile::Dyadic { lo: 1, hi: 8, frac_bits: 3 }),
        ));
    }
    assert_eq!(out.len(), 20);
    out
}

/// 15 weighted graphs for the bottleneck oracle, with plenty of repeated
/// weights.
pub fn bottleneck_corpus() -> Vec<Case> {
    use Orientation::*;
    let mut out = Vec::new();
    for (i, s) in [4usize, 5, 6, 7, 8, 9, 10].into_iter().enumerate() {
        let seed = 500 + i as u64;
        out.push(case(
            format!("bgrid{s}x{s}-bi"),
            generate_grid(s, s, seed, Bidirected, WeightProfile::Integer { lo: 1, hi: 5 }),
        ));
        out.push(case(
            format!("bgrid{s}x{s}-rand"),
            generate_grid(s, s, seed + 7, Random, WeightProfile::Integer { lo: 1, hi: 100 }),
        ));
    }
    out.push(case("bcycle20-dir", generate_cycle(20, 77, true, WeightProfile::Integer { lo: 1, hi: 9 })));
    assert_eq!(out.len(), 15);
    out
}

pub fn all_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (0..n).map(move |v| (u, v)))
}
