use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emitforge::circuit::Circuit;
use emitforge::graph::GraphState;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_emitforge"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_graph(dir: &Path, name: &str, g: &GraphState) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, g.to_json()).unwrap();
    p
}

/// Data rows of a results file, without the schema line and header.
fn rows(path: &Path) -> Vec<csv::StringRecord> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# emitforge-results v1"));
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes()).records().map(|r| r.unwrap()).collect()
}

fn col(path: &Path, name: &str) -> usize {
    let text = fs::read_to_string(path).unwrap();
    text.lines().nth(1).unwrap().split(',').position(|c| c == name).unwrap()
}

#[test]
fn gen_graph_families() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["gen-graph", "lattice", "--width", "2", "--height", "2"]);
    assert_eq!(code(&o), 0);
    let g = GraphState::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    assert!(g.edges().iter().all(|&(u, v)| g.degree(u) == 2 && g.degree(v) == 2));

    let o = run(dir.path(), &["gen-graph", "tree", "--branching", "2", "--depth", "2", "--out", "t.json"]);
    assert_eq!(code(&o), 0);
    let t = GraphState::from_json(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!((t.len(), t.edge_count()), (7, 6));

    let args = ["gen-graph", "waxman", "--n", "20", "--alpha", "0.6", "--beta", "0.4", "--seed", "7"];
    let a = run(dir.path(), &args);
    let b = run(dir.path(), &args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let o = run(dir.path(), &["gen-graph", "lattice", "--width", "0", "--height", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compile_then_verify_c4() {
    let dir = tempfile::tempdir().unwrap();
    let g = GraphState::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    write_graph(dir.path(), "c4.json", &g);
    let o = run(dir.path(), &["compile", "c4.json", "--out", "c4.circ.json", "--usage", "u.csv", "--trace", "t.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("ne_min_total=1"), "{report}");
    let o = run(dir.path(), &["verify", "c4.json", "c4.circ.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let usage = fs::read_to_string(dir.path().join("u.csv")).unwrap();
    assert!(usage.starts_with("time,emitters_in_use\n"));
    assert!(dir.path().join("t.csv").exists());
}

#[test]
fn star_row_has_no_cnots() {
    let dir = tempfile::tempdir().unwrap();
    let edges: Vec<(usize, usize)> = (1..10).map(|v| (0, v)).collect();
    write_graph(dir.path(), "star.json", &GraphState::from_edges(10, &edges).unwrap());
    let o = run(dir.path(), &["compile", "star.json", "--out", "s.json", "--csv", "r.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = dir.path().join("r.csv");
    let rows = rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][col(&csv, "n_ee_cnot")], "0");
    assert_eq!(&rows[0][col(&csv, "graph_id")], "star");
    // appending keeps a single header
    run(dir.path(), &["compile", "star.json", "--out", "s.json", "--csv", "r.csv"]);
    assert_eq!(self::rows(&csv).len(), 2);
}

#[test]
fn usage_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["compile", "missing.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing.json"));
    assert_eq!(code(&run(dir.path(), &["compile"])), 2);
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 2);
    fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    assert_eq!(code(&run(dir.path(), &["compile", "bad.json"])), 2);
    write_graph(dir.path(), "p.json", &GraphState::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
    assert_eq!(code(&run(dir.path(), &["compile", "p.json", "--g-max", "0"])), 2);
    assert_eq!(code(&run(dir.path(), &["compile", "p.json", "--ne-factor", "-1"])), 2);
    assert_eq!(code(&run(dir.path(), &["compile", "p.json", "--hw", "no-such-profile"])), 2);
}

#[test]
fn verify_failures() {
    let dir = tempfile::tempdir().unwrap();
    let g = GraphState::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
    write_graph(dir.path(), "c5.json", &g);
    assert_eq!(code(&run(dir.path(), &["compile", "c5.json", "--out", "c.json"])), 0);
    let c = Circuit::from_json(&fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();

    // a deleted gate
    let mut broken = c.clone();
    let i = broken.ops.iter().rposition(|op| op.gate.kind() != emitforge::circuit::GateKind::EmitterInit).unwrap();
    broken.ops.remove(i);
    fs::write(dir.path().join("broken.json"), broken.to_json()).unwrap();
    let o = run(dir.path(), &["verify", "c5.json", "broken.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("emitforge: verify:"), "{}", stderr(&o));

    // same size, different graph
    let path = GraphState::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    write_graph(dir.path(), "p5.json", &path);
    let o = run(dir.path(), &["verify", "p5.json", "c.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("differs"), "{}", stderr(&o));

    // unparsable circuit is a usage error, not a failed verification
    fs::write(dir.path().join("junk.json"), "[]").unwrap();
    assert_eq!(code(&run(dir.path(), &["verify", "c5.json", "junk.json"])), 2);
}

#[test]
fn metrics_command() {
    let dir = tempfile::tempdir().unwrap();
    write_graph(dir.path(), "one.json", &GraphState::new(1));
    assert_eq!(code(&run(dir.path(), &["compile", "one.json", "--out", "c.json"])), 0);
    let o = run(dir.path(), &["metrics", "c.json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_ee_cnot"], 0);
    assert_eq!(v["peak_emitters"], 1);
    assert!(v["survival"].as_f64().unwrap() < 1.0);
}

#[test]
fn reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["gen-graph", "waxman", "--n", "14", "--seed", "3", "--out", "w.json"]);
    assert_eq!(code(&o), 0);
    for name in ["a", "b"] {
        let out = format!("{name}.json");
        let csv = format!("{name}.csv");
        let o = run(dir.path(), &["compile", "w.json", "--seed", "5", "--out", &out, "--csv", &csv]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    let strip = |f: &str| {
        let p = dir.path().join(f);
        let wall = col(&p, "wall_ms");
        rows(&p).iter().map(|r| r.iter().enumerate().filter(|(i, _)| *i != wall).map(|(_, c)| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()
    };
    assert_eq!(strip("a.csv"), strip("b.csv"));
    assert_eq!(code(&run(dir.path(), &["verify", "w.json", "a.json"])), 0);
}

#[test]
fn partitioner_timeout_still_writes_a_circuit() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["gen-graph", "waxman", "--n", "16", "--seed", "1", "--out", "w.json"]);
    let o = run(dir.path(), &["compile", "w.json", "--budget-secs", "0", "--out", "c.json", "--csv", "r.csv"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("emitforge: timeout:"));
    assert_eq!(code(&run(dir.path(), &["verify", "w.json", "c.json"])), 0);
    let csv = dir.path().join("r.csv");
    assert_eq!(&rows(&csv)[0][col(&csv, "status")], "timeout");
}

#[test]
fn sweep_row_accounting() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sweep", "--sizes", "10,20", "--reps", "3", "--ablation", "--out", "s.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = dir.path().join("s.csv");
    let rows = rows(&csv);
    let (method, cnot, id) = (col(&csv, "method"), col(&csv, "n_ee_cnot"), col(&csv, "graph_id"));
    let count = |m: &str| rows.iter().filter(|r| &r[method] == m).count();
    assert_eq!((count("pipeline"), count("baseline"), count("partition-l0")), (6, 6, 6));
    for p in rows.iter().filter(|r| &r[method] == "pipeline") {
        let b = rows.iter().find(|r| &r[method] == "baseline" && r[id] == p[id]).unwrap();
        let (x, y): (usize, usize) = (p[cnot].parse().unwrap(), b[cnot].parse().unwrap());
        assert!(x <= y, "{}: {x} > {y}", &p[id]);
    }
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.contains("vs internal baseline"));
    assert!(summary.contains("mean_k_no_lc"));
}
