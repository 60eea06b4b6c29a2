mod common;

use mfdo_core::error::OracleError;
use mfdo_core::graph::*;
use mfdo_core::io::{read_oracle, write_oracle, AnyOracle};
use mfdo_core::rdiv::{build_r_division, RDivision};
use mfdo_core::unweighted::*;
use proptest::prelude::*;

fn assert_exact(g: &DiGraph, o: &UnweightedOracle) {
    let d = apsp_reference(g);
    for (u, v) in common::all_pairs(g.n()) {
        assert_eq!(o.query(u, v), d.get(u, v), "({u},{v})");
    }
}

#[test]
fn frozen_grid_index() {
    let g = generate_grid(4, 4, 0, Orientation::Bidirected, WeightProfile::Unit);
    let o = build_unweighted_oracle(&g, 4, 0, UnweightedOptions::default()).unwrap();
    assert_eq!(o.wiener_index().unwrap(), Wiener::Finite(640));
    assert_eq!(o.wiener_index_from_balls(), Wiener::Finite(640));
    let ecc = o.eccentricities();
    assert_eq!(ecc[0], Dist::new(6.0));
    assert_eq!(ecc[5], Dist::new(4.0));
    assert_eq!(o.query(0, 15), Dist::new(6.0));
}

#[test]
fn directed_cycle_values() {
    let g = generate_cycle(9, 0, true, WeightProfile::Unit);
    let o = build_unweighted_oracle(&g, 3, 0, UnweightedOptions::default()).unwrap();
    assert_eq!(o.wiener_index().unwrap(), Wiener::Finite(9 * 36));
    assert!(o.eccentricities().iter().all(|&e| e == Dist::new(8.0)));
    assert_eq!(o.query(5, 4), Dist::new(8.0));
}

#[test]
fn not_strongly_connected_is_infinite() {
    let g = generate_path(6, 0, Orientation::Random, WeightProfile::Unit);
    let o = build_unweighted_oracle(&g, 3, 0, UnweightedOptions::default()).unwrap();
    assert_eq!(o.wiener_index().unwrap(), Wiener::Infinite);
    assert_eq!(o.wiener_index_from_balls(), Wiener::Infinite);
    assert!(o.eccentricities().iter().any(|e| e.is_inf()));
}

#[test]
fn narrow_variant_has_no_wiener() {
    let g = generate_grid(4, 4, 0, Orientation::Bidirected, WeightProfile::Unit);
    let o = build_unweighted_oracle(&g, 4, 0, UnweightedOptions { wide: false, naive_balls: false }).unwrap();
    assert_eq!(o.wiener_index(), Err(OracleError::MissingWienerData));
    assert_eq!(o.wiener_index_from_balls(), Wiener::Finite(640));
    assert_exact(&g, &o);
}

#[test]
fn rejects_weighted_input() {
    let g = generate_grid(3, 3, 0, Orientation::Bidirected, WeightProfile::Integer { lo: 1, hi: 2 });
    assert_eq!(build_unweighted_oracle(&g, 4, 0, UnweightedOptions::default()), Err(OracleError::WeightedInput));
}

#[test]
fn single_vertex_and_empty_graph() {
    for n in [0, 1, 3] {
        let g = DiGraph::unweighted(n, []).unwrap();
        let o = build_unweighted_oracle(&g, 4, 0, UnweightedOptions::default()).unwrap();
        assert_exact(&g, &o);
        let expect = if n <= 1 { Wiener::Finite(0) } else { Wiener::Infinite };
        assert_eq!(o.wiener_index().unwrap(), expect);
    }
}

#[test]
fn custom_division() {
    let g = generate_grid(3, 3, 0, Orientation::Bidirected, WeightProfile::Unit);
    let half = g.m() / 2;
    let rd = RDivision::from_edge_groups(&g, half, vec![(0..half).collect(), (half..g.m()).collect()]);
    let o = build_on_division(&g, rd, UnweightedOptions::default());
    assert_exact(&g, &o);
    assert_eq!(o.wiener_index().unwrap(), Wiener::Finite(2 * 72));
}

#[test]
fn file_round_trip() {
    let g = generate_grid(5, 5, 2, Orientation::Random, WeightProfile::Unit);
    let o = AnyOracle::Unweighted(build_unweighted_oracle(&g, 8, 1, UnweightedOptions::default()).unwrap());
    let mut buf = Vec::new();
    write_oracle(&mut buf, &o).unwrap();
    assert_eq!(read_oracle(buf.as_slice()).unwrap(), o);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_grids_are_exact(w in 1usize..8, h in 1usize..8, seed: u64, r in 2usize..24, bi: bool) {
        let orient = if bi { Orientation::Bidirected } else { Orientation::Random };
        let g = generate_grid(w, h, seed, orient, WeightProfile::Unit);
        let o = build_unweighted_oracle(&g, r, seed, UnweightedOptions::default()).unwrap();
        let d = apsp_reference(&g);
        for (u, v) in common::all_pairs(g.n()) {
            prop_assert_eq!(o.query(u, v), d.get(u, v));
        }
        let wiener = o.wiener_index().unwrap();
        prop_assert_eq!(o.wiener_index_from_balls(), wiener.clone());
        if g.is_strongly_connected() {
            let total: u64 = common::all_pairs(g.n()).map(|(u, v)| d.get(u, v).value() as u64).sum();
            prop_assert_eq!(wiener, Wiener::Finite(total));
        }
    }

    #[test]
    fn answers_do_not_depend_on_division(seed: u64, r1 in 2usize..30, r2 in 2usize..30) {
        let g = generate_grid(6, 5, seed, Orientation::Random, WeightProfile::Unit);
        let a = build_unweighted_oracle(&g, r1, seed, UnweightedOptions::default()).unwrap();
        let b = build_on_division(&g, build_r_division(&g, r2, seed ^ 1), UnweightedOptions::default());
        for (u, v) in common::all_pairs(g.n()) {
            prop_assert_eq!(a.query(u, v), b.query(u, v));
        }
        prop_assert_eq!(a.eccentricities(), b.eccentricities());
    }
}
