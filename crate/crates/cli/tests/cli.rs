use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mfdo_core::graph::{apsp_reference, generate_grid, DiGraph, Orientation, WeightProfile};
use serde_json::Value;
use tempfile::TempDir;

fn mfdo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfdo")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write_graph(dir: &Path, name: &str, g: &DiGraph) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, g.to_text()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn unit_grid() -> DiGraph {
    generate_grid(6, 6, 3, Orientation::Random, WeightProfile::Unit)
}

fn weighted_grid() -> DiGraph {
    generate_grid(6, 6, 3, Orientation::Bidirected, WeightProfile::Integer { lo: 1, hi: 9 })
}

#[test]
fn build_query_verify() {
    let dir = TempDir::new().unwrap();
    let g = weighted_grid();
    let gp = write_graph(dir.path(), "g.txt", &g);
    let op = dir.path().join("o.bin");
    let out = mfdo(&["build", "--kind", "weighted", "--r", "9", s(&gp), "-o", s(&op)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["kind"], "weighted");
    assert_eq!(&fs::read(&op).unwrap()[..4], b"MFDO");

    let qp = dir.path().join("q.txt");
    fs::write(&qp, "0 35\n35 0\n# comment\n7 7\n").unwrap();
    let d = apsp_reference(&g);
    for mode in ["rand", "det"] {
        let out = mfdo(&["query", s(&op), s(&qp), "--query-mode", mode]);
        assert_eq!(code(&out), 0);
        let expect = format!("0 35 {}\n35 0 {}\n7 7 0\n", d.get(0, 35), d.get(35, 0));
        assert_eq!(stdout(&out), expect);
    }

    let out = mfdo(&["verify", "--kind", "weighted", "--r", "9", "--oracle", s(&op), s(&gp)]);
    assert_eq!(code(&out), 0);
    let rep = json(&out);
    assert_eq!(rep["verdict"], true);
    assert_eq!(rep["mismatches"], 0);
    assert_eq!(rep["compared"], 36 * 36);
}

#[test]
fn verify_every_kind() {
    let dir = TempDir::new().unwrap();
    let u = write_graph(dir.path(), "u.txt", &unit_grid());
    let w = write_graph(dir.path(), "w.txt", &weighted_grid());
    let runs: [(&str, &Path, &[&str]); 6] = [
        ("unweighted", &u, &[]),
        ("weighted", &w, &["--query-mode", "det"]),
        ("bottleneck", &w, &[]),
        ("approx", &w, &["--eps", "0.1"]),
        ("approx", &w, &["--unbounded", "--eps", "0.25"]),
        ("decremental", &u, &["--sample", "30"]),
    ];
    for (kind, g, extra) in runs {
        let mut args = vec!["verify", "--kind", kind, "--r", "9", s(g)];
        args.extend_from_slice(extra);
        let out = mfdo(&args);
        assert_eq!(code(&out), 0, "{kind} {extra:?}: {}", stdout(&out));
        let rep = json(&out);
        assert_eq!(rep["verdict"], true);
        assert!(rep.get("build_ms").is_none());
    }
}

#[test]
fn corrupt_oracle_fails_verification() {
    let dir = TempDir::new().unwrap();
    let gp = write_graph(dir.path(), "g.txt", &unit_grid());
    let op = dir.path().join("o.bin");
    assert_eq!(code(&mfdo(&["build", "--kind", "unweighted", s(&gp), "-o", s(&op)])), 0);
    let mut bytes = fs::read(&op).unwrap();
    bytes.truncate(bytes.len() / 2);
    fs::write(&op, &bytes).unwrap();
    let out = mfdo(&["verify", "--kind", "unweighted", "--oracle", s(&op), s(&gp)]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["verdict"], false);
    fs::write(&op, b"junk").unwrap();
    assert_eq!(code(&mfdo(&["verify", "--kind", "unweighted", "--oracle", s(&op), s(&gp)])), 1);
    assert_eq!(code(&mfdo(&["stats", s(&op)])), 2);
}

#[test]
fn usage_and_input_errors() {
    let dir = TempDir::new().unwrap();
    let u = write_graph(dir.path(), "u.txt", &unit_grid());
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "3 1\n0 7\n").unwrap();
    let missing = dir.path().join("missing.txt");
    let o = dir.path().join("o.bin");
    assert_eq!(code(&mfdo(&[])), 2);
    assert_eq!(code(&mfdo(&["frobnicate"])), 2);
    assert_eq!(code(&mfdo(&["build", s(&u), "-o", s(&o)])), 2);
    assert_eq!(code(&mfdo(&["build", "--kind", "unweighted", s(&bad), "-o", s(&o)])), 2);
    assert_eq!(code(&mfdo(&["rdiv", s(&missing)])), 2);
    assert_eq!(code(&mfdo(&["build", "--kind", "weighted", s(&u), "-o", s(&o)])), 2);
    assert_eq!(code(&mfdo(&["verify", "--kind", "weighted", s(&u)])), 2);
    assert_eq!(code(&mfdo(&["verify", "--kind", "unweighted", "--sample", "lots", s(&u)])), 2);
    assert_eq!(code(&mfdo(&["audit-patterns", "--shifts", "1,0", s(&u)])), 2);
}

#[test]
fn bench_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = generate_grid(12, 12, 1, Orientation::Bidirected, WeightProfile::Unit);
    let gp = write_graph(dir.path(), "g.txt", &g);
    let args = ["bench", "--kind", "unweighted", "--r", "4,16,64", "--queries", "200", s(&gp)];
    let a = mfdo(&args);
    let b = mfdo(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let reports = json(&a);
    let sizes: Vec<u64> =
        reports.as_array().unwrap().iter().map(|r| r["space"]["to_boundary"].as_u64().unwrap()).collect();
    assert_eq!(sizes.len(), 3);
    assert!(sizes.windows(2).all(|w| w[0] > w[1]), "{sizes:?}");
    let timed = mfdo(&["bench", "--kind", "unweighted", "--r", "16", "--queries", "5", "--timing", s(&gp)]);
    assert!(json(&timed)[0]["build_ms"].is_number());
}

#[test]
fn workloads() {
    let dir = TempDir::new().unwrap();
    let g = unit_grid();
    let gp = write_graph(dir.path(), "g.txt", &g);
    let wp = dir.path().join("w.txt");
    let a = mfdo(&["workload-gen", "--kind", "teardown", "--queries", "3", "--seed", "4", s(&gp)]);
    let b = mfdo(&["workload-gen", "--kind", "teardown", "--queries", "3", "--seed", "4", s(&gp), "-o", s(&wp)]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let text = stdout(&a);
    assert_eq!(fs::read_to_string(&wp).unwrap(), text);
    assert_eq!(text.lines().filter(|l| l.starts_with("D ")).count(), g.m());
    assert_eq!(text.lines().filter(|l| l.starts_with("Q ")).count(), 3 * g.m());

    let out = mfdo(&["decr", "--r", "9", s(&gp), "--workload", s(&wp)]);
    assert_eq!(code(&out), 0);
    let answers = stdout(&out);
    assert_eq!(answers.lines().count(), 3 * g.m());
    for line in answers.lines().skip(3 * (g.m() - 1)) {
        let f: Vec<&str> = line.split(' ').collect();
        assert_eq!(f[2] == "true", f[0] == f[1], "{line}");
    }

    let mixed = mfdo(&["workload-gen", "--kind", "mixed", "--queries", "2", s(&gp)]);
    let mixed = stdout(&mixed);
    assert_eq!(mixed.lines().filter(|l| l.starts_with("D ")).count(), g.m() / 2);

    fs::write(&wp, "D 0 0\n").unwrap();
    assert_eq!(code(&mfdo(&["decr", s(&gp), "--workload", s(&wp)])), 2);
    fs::write(&wp, "X 0 1\n").unwrap();
    assert_eq!(code(&mfdo(&["decr", s(&gp), "--workload", s(&wp)])), 2);
}

#[test]
fn rdiv_audit_and_stats() {
    let dir = TempDir::new().unwrap();
    let g = generate_grid(10, 10, 2, Orientation::Random, WeightProfile::Unit);
    let gp = write_graph(dir.path(), "g.txt", &g);
    let jp = dir.path().join("r.json");
    let out = mfdo(&["rdiv", "--r", "16", "--json", s(&jp), s(&gp)]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["cover_ok"], true);
    assert_eq!(v["audit_ok"], true);
    assert_eq!(v["n"], 100);
    assert_eq!(serde_json::from_str::<Value>(&fs::read_to_string(&jp).unwrap()).unwrap(), v);

    let out = mfdo(&["audit-patterns", "--r", "16", "--shifts", "-1,0,2", s(&gp)]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["ell"], 4);
    assert_eq!(v["pass"], true);
    let out = mfdo(&["audit-patterns", "--r", "16", "--max-slope", "0.01", s(&gp)]);
    assert_eq!(code(&out), 1);

    let op = dir.path().join("o.bin");
    assert_eq!(code(&mfdo(&["build", "--kind", "unweighted", "--r", "16", s(&gp), "-o", s(&op)])), 0);
    let out = mfdo(&["stats", s(&op)]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["kind"], "unweighted");
    assert_eq!(v["n"], 100);
    assert!(v["patterns"].as_u64().unwrap() > 0);
}
