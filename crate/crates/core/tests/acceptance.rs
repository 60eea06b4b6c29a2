//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any FAIL.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{all_pairs, bottleneck_corpus, unweighted_corpus, weighted_corpus};
use mfdo_core::approx::{build_approx, ApproxMode};
use mfdo_core::audit::envelope_slope;
use mfdo_core::decremental::reach::reach_reference;
use mfdo_core::decremental::{build_bottleneck_oracle, new_dec_oracle};
use mfdo_core::graph::{apsp_reference, bottleneck_apsp_reference, generate_grid, Dist, Orientation, WeightProfile};
use mfdo_core::minfind::{min_find, PermutationView, Strategy};
use mfdo_core::patterns::{count_patterns_audit, merge_audits, ShiftSet};
use mfdo_core::rdiv::build_r_division;
use mfdo_core::strings::{StringId, StringStore};
use mfdo_core::unweighted::{build_unweighted_oracle, UnweightedOptions, Wiener};
use mfdo_core::weighted::{build_weighted_oracle, probe_bound, seeded_rng, WeightedOptions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SLOPE_LIMIT: f64 = 4.5;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    check(took <= limit, || format!("took {took:.1?}, limit {limit:?}"))
}

fn c1_unweighted_exact() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0usize;
    for c in unweighted_corpus() {
        let reference = apsp_reference(&c.graph);
        for r in [4, 9, 16] {
            let o = build_unweighted_oracle(&c.graph, r, 1, UnweightedOptions::default()).map_err(|e| e.to_string())?;
            for (u, v) in all_pairs(c.graph.n()) {
                let got = o.query(u, v);
                check(got == reference.get(u, v), || {
                    format!("{} r={r}: d({u},{v}) = {got}, expected {}", c.name, reference.get(u, v))
                })?;
                pairs += 1;
            }
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{pairs} pairs in {:.1?}", start.elapsed()))
}

fn c2_ecc_wiener() -> Outcome {
    let mut infinite = 0;
    let mut finite = 0;
    for c in unweighted_corpus() {
        let g = &c.graph;
        let reference = apsp_reference(g);
        let want_ecc: Vec<Dist> =
            (0..g.n()).map(|u| reference.row(u).iter().copied().max().unwrap_or(Dist::ZERO)).collect();
        let want_wiener = if g.is_strongly_connected() {
            finite += 1;
            Wiener::Finite(all_pairs(g.n()).map(|(u, v)| reference.get(u, v).value() as u64).sum())
        } else {
            infinite += 1;
            Wiener::Infinite
        };
        for r in [4, 9, 16] {
            let o = build_unweighted_oracle(g, r, 1, UnweightedOptions::default()).map_err(|e| e.to_string())?;
            check(o.eccentricities() == want_ecc, || format!("{} r={r}: eccentricities differ", c.name))?;
            let w = o.wiener_index().map_err(|e| e.to_string())?;
            check(w == want_wiener, || format!("{} r={r}: wiener {w:?}, expected {want_wiener:?}", c.name))?;
            check(o.wiener_index_from_balls() == want_wiener, || format!("{} r={r}: ball-sum wiener differs", c.name))?;
        }
    }
    Ok(format!("{finite} strongly connected, {infinite} reported infinite"))
}

fn c3_weighted_modes() -> Outcome {
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for (i, c) in weighted_corpus().into_iter().enumerate() {
        let g = &c.graph;
        let reference = apsp_reference(g);
        let r = if g.n() <= 100 { 12 } else { 36 };
        let o = build_weighted_oracle(g, r, 40 + i as u64, WeightedOptions::default()).map_err(|e| e.to_string())?;
        let mut rng = seeded_rng(i as u64);
        for (s, t) in all_pairs(g.n()) {
            let want = reference.get(s, t);
            let a = o.query_randomized_probes(s, t, &mut rng);
            check(a.dist == want, || format!("{}: randomized d({s},{t}) = {}, expected {want}", c.name, a.dist))?;
            let d = o.query_deterministic_probes(s, t);
            check(d.dist == want, || format!("{}: deterministic d({s},{t}) = {}, expected {want}", c.name, d.dist))?;
            let k = o.rd.pieces[o.rd.home_piece(t)].k();
            let bound = probe_bound(k);
            check(d.probes <= bound, || {
                format!("{}: ({s},{t}) used {} probes, bound {bound} for |∂P| = {k}", c.name, d.probes)
            })?;
            if k > 1 {
                worst = worst.max(d.probes as f64 / (k as f64).ln());
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs, worst deterministic probes/ln|∂P| = {worst:.2}"))
}

fn c4_minfind() -> Outcome {
    let start = Instant::now();
    let n = 512;
    let trials = 10_000;
    let ln = (n as f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut total = 0usize;
    let mut over = 0usize;
    for _ in 0..trials {
        let view = PermutationView::random(n, &mut rng);
        let found = min_find(&view, Strategy::Random(&mut rng)).map_err(|e| e.to_string())?;
        check(found.min == view.min(), || "wrong minimum".to_string())?;
        total += found.probes;
        if found.probes as f64 > 10.0 * ln {
            over += 1;
        }
    }
    let mean = total as f64 / trials as f64;
    check((0.8 * ln..=1.5 * ln).contains(&mean), || {
        format!("mean probes {mean:.3} outside [{:.3}, {:.3}]", 0.8 * ln, 1.5 * ln)
    })?;
    let ok_frac = 1.0 - over as f64 / trials as f64;
    check(ok_frac >= 0.999, || format!("only {ok_frac:.4} of trials within 10 ln n"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("mean {mean:.3} = {:.3} ln n, {over} trials above 10 ln n", mean / ln))
}

fn c5_decremental() -> Outcome {
    let start = Instant::now();
    let g = generate_grid(8, 8, 5, Orientation::Bidirected, WeightProfile::Unit);
    let n = g.n();
    let mut o = new_dec_oracle(&g, 16, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.shuffle(&mut rng);
    let checkpoints: Vec<usize> = (1..=10).map(|i| i * order.len() / 10).collect();
    let mut alive = FixedBitSet::with_capacity(g.m());
    alive.insert_range(..);
    let mut sampled = 0usize;
    let mut exhaustive = 0usize;
    for (step, &e) in order.iter().enumerate() {
        o.delete_edge(e).map_err(|err| err.to_string())?;
        alive.set(e, false);
        let mut cache: HashMap<usize, FixedBitSet> = HashMap::new();
        for _ in 0..200 {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let want = cache.entry(u).or_insert_with(|| reach_reference(&g, &alive, u)).contains(v);
            check(o.query(u, v) == want, || format!("after {} deletions: reach({u},{v}) should be {want}", step + 1))?;
            sampled += 1;
        }
        if checkpoints.contains(&(step + 1)) {
            for u in 0..n {
                let want = reach_reference(&g, &alive, u);
                for v in 0..n {
                    check(o.query(u, v) == want.contains(v), || {
                        format!("checkpoint {}: reach({u},{v}) should be {}", step + 1, want.contains(v))
                    })?;
                    exhaustive += 1;
                }
            }
        }
    }
    within(start, Duration::from_secs(180))?;
    Ok(format!("{} deletions, {sampled} sampled and {exhaustive} exhaustive checks", order.len()))
}

fn c6a_decremental_patterns() -> Outcome {
    let mut points = Vec::new();
    for (side, r) in [(8, 8), (8, 16), (10, 32), (12, 64), (14, 128)] {
        let g = generate_grid(side, side, 60 + r as u64, Orientation::Bidirected, WeightProfile::Unit);
        let mut o = new_dec_oracle(&g, r, 6);
        let mut order: Vec<usize> = (0..g.m()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(r as u64));
        for e in order {
            o.delete_edge(e).map_err(|err| err.to_string())?;
        }
        points.extend(o.pattern_counts().into_iter().filter(|&(k, _)| k > 0).map(|(k, c)| (k as f64, c as f64)));
    }
    let slope = envelope_slope(&points, 3).ok_or("fewer than 3 boundary sizes")?;
    check(slope <= SLOPE_LIMIT, || format!("slope {slope:.3} above {SLOPE_LIMIT}"))?;
    Ok(format!("slope {slope:.3} over {} pieces", points.len()))
}

fn c6b_multiball_patterns() -> Outcome {
    let shift_sets = [vec![0.0], vec![-1.0, 0.0, 1.0], vec![0.0, 2.0, 5.0], vec![-3.0, -1.0, 0.0, 1.0, 3.0]];
    let mut audits = Vec::new();
    for (side, r) in [(8, 12), (10, 24), (12, 48), (16, 96)] {
        let g = generate_grid(side, side, 70 + r as u64, Orientation::Random, WeightProfile::Unit);
        let rd = build_r_division(&g, r, 7);
        let sources: Vec<usize> = (0..g.n()).collect();
        for s in &shift_sets {
            let shifts = ShiftSet::closed(s.clone()).map_err(|e| e.to_string())?;
            audits.push(count_patterns_audit(&g, &rd, &shifts, &sources));
        }
    }
    let merged = merge_audits(&audits);
    let slope = merged.slope.ok_or("fewer than 3 sizes of |∂P|·ℓ")?;
    check(slope <= SLOPE_LIMIT, || format!("slope {slope:.3} above {SLOPE_LIMIT}"))?;
    Ok(format!("slope {slope:.3} over {} piece counts", merged.pieces.len()))
}

fn c7_bottleneck() -> Outcome {
    let mut worst = 0usize;
    let mut pairs = 0usize;
    for (i, c) in bottleneck_corpus().into_iter().enumerate() {
        let g = &c.graph;
        let reference = bottleneck_apsp_reference(g);
        let o = build_bottleneck_oracle(g, 16, 70 + i as u64);
        let bound = 2 * (g.m().max(2) as f64).log2().ceil() as usize + 4;
        for (s, t) in all_pairs(g.n()) {
            let a = o.query_probes(s, t);
            let want = reference.get(s, t);
            check(a.dist == want, || format!("{}: β({s},{t}) = {}, expected {want}", c.name, a.dist))?;
            check(a.probes <= bound, || format!("{}: ({s},{t}) used {} probes, bound {bound}", c.name, a.probes))?;
            worst = worst.max(a.probes);
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs, max probes {worst}"))
}

fn c8_approx() -> Outcome {
    let mut checked = 0usize;
    let mut max_ratio = 1.0f64;
    let mut graphs: Vec<_> = weighted_corpus().into_iter().filter(|c| c.graph.n() <= 144).collect();
    graphs.extend(unweighted_corpus().into_iter().step_by(3));
    for (i, c) in graphs.iter().enumerate() {
        let g = &c.graph;
        let reference = apsp_reference(g);
        for eps in [0.5, 0.1] {
            for mode in [ApproxMode::Bounded { max_weight: None }, ApproxMode::Unbounded] {
                let o = build_approx(g, 16, eps, mode, i as u64).map_err(|e| e.to_string())?;
                for (u, v) in all_pairs(g.n()) {
                    let (d, est) = (reference.get(u, v), o.query(u, v));
                    check(d.is_finite() == est.is_finite(), || {
                        format!("{} ε={eps} {mode:?}: finiteness of ({u},{v}) differs: {est} vs {d}", c.name)
                    })?;
                    if d.is_finite() {
                        check(d <= est && est.value() <= (1.0 + eps) * d.value(), || {
                            format!("{} ε={eps} {mode:?}: ({u},{v}) estimate {est}, distance {d}", c.name)
                        })?;
                        if d.value() > 0.0 {
                            max_ratio = max_ratio.max(est.value() / d.value());
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} estimates, max ratio {max_ratio:.4}"))
}

fn c9_strings() -> Outcome {
    let start = Instant::now();
    let alphabet = 4u32;
    let mut store = StringStore::new(alphabet);
    let mut naive: Vec<Vec<u32>> = Vec::new();
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0usize;
    let mut expect_id = |s: Vec<u32>, naive: &mut Vec<Vec<u32>>| -> u32 {
        let next = naive.len() as u32;
        *index.entry(s.clone()).or_insert_with(|| {
            naive.push(s);
            next
        })
    };
    let ops = 100_000;
    for _ in 0..ops {
        let op = if naive.is_empty() { 0 } else { rng.gen_range(0..5) };
        match op {
            0 => {
                let len = rng.gen_range(0..24);
                let s: Vec<u32> = (0..len).map(|_| rng.gen_range(0..alphabet)).collect();
                let got = store.insert_explicit(&s).map_err(|e| e.to_string())?;
                violations += (got != StringId(expect_id(s, &mut naive))) as usize;
            }
            1 => {
                let id = rng.gen_range(0..naive.len());
                let len = naive[id].len();
                if len == 0 {
                    violations += store.insert_substitution(StringId(id as u32), 0, 0).is_ok() as usize;
                    continue;
                }
                let k = rng.gen_range(0..len);
                let c = rng.gen_range(0..alphabet);
                let got = store.insert_substitution(StringId(id as u32), k, c).map_err(|e| e.to_string())?;
                let mut s = naive[id].clone();
                s[k] = c;
                violations += (got != StringId(expect_id(s, &mut naive))) as usize;
            }
            2 => {
                let id = rng.gen_range(0..naive.len());
                violations += (store.length(StringId(id as u32)) != Ok(naive[id].len())) as usize;
            }
            3 => {
                let id = rng.gen_range(0..naive.len());
                let len = naive[id].len();
                let k = rng.gen_range(0..len + 2);
                let got = store.symbol_at(StringId(id as u32), k).ok();
                violations += (got != naive[id].get(k).copied()) as usize;
            }
            _ => {
                let id = rng.gen_range(0..naive.len());
                violations += (store.string_of(StringId(id as u32)).as_ref() != Ok(&naive[id])) as usize;
            }
        }
    }
    violations += (store.len() != naive.len()) as usize;
    violations += store.string_of(StringId(naive.len() as u32)).is_ok() as usize;
    violations += store.insert_explicit(&[alphabet]).is_ok() as usize;
    check(violations == 0, || format!("{violations} violations"))?;
    within(start, Duration::from_secs(20))?;
    Ok(format!("{ops} operations, {} distinct strings, {:.1?}", naive.len(), start.elapsed()))
}

fn c10_naive_vs_patterns() -> Outcome {
    let mut tables = 0usize;
    for c in unweighted_corpus() {
        let g = &c.graph;
        for r in [4, 9, 16] {
            let fast = build_unweighted_oracle(g, r, 1, UnweightedOptions::default()).map_err(|e| e.to_string())?;
            let naive = build_unweighted_oracle(g, r, 1, UnweightedOptions { naive_balls: true, ..Default::default() })
                .map_err(|e| e.to_string())?;
            for (pid, (a, b)) in fast.pieces.iter().zip(&naive.pieces).enumerate() {
                check(a.balls == b.balls, || format!("{} r={r} piece {pid}: ball tables differ", c.name))?;
                for (u, (x, y)) in a.sources.iter().zip(&b.sources).enumerate() {
                    check(x.order == y.order && x.finite == y.finite && x.balls == y.balls, || {
                        format!("{} r={r} piece {pid}: references of source {u} differ", c.name)
                    })?;
                }
                tables += 1;
            }
            for (u, v) in all_pairs(g.n()) {
                let (x, y) = (fast.query(u, v), naive.query(u, v));
                check(x.value().to_bits() == y.value().to_bits(), || {
                    format!("{} r={r}: ({u},{v}) {x} vs {y}", c.name)
                })?;
            }
        }
    }
    Ok(format!("{tables} piece tables identical"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 unweighted exactness", c1_unweighted_exact),
        ("2 eccentricities and wiener index", c2_ecc_wiener),
        ("3 weighted query modes", c3_weighted_modes),
        ("4 min-finding monte carlo", c4_minfind),
        ("5 decremental teardown", c5_decremental),
        ("6a decremental pattern growth", c6a_decremental_patterns),
        ("6b multiball restriction growth", c6b_multiball_patterns),
        ("7 bottleneck oracle", c7_bottleneck),
        ("8 approximate sandwich", c8_approx),
        ("9 dynamic strings", c9_strings),
        ("10 naive balls vs patterns", c10_naive_vs_patterns),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail}) [{took:.1?}]"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({why}) [{took:.1?}]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
