//! End-to-end runs of the binary: exit codes, reports and file round-trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use planar_coreset::structures::PairFamily;
use planar_coreset::{CoresetResult, Instance, KCoresetResult};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_planar-coreset"));
    c.env_remove("PLANAR_CORESET_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn write(&self, name: &str, text: &str) -> String {
        std::fs::write(self.path(name), text).unwrap();
        self.arg(name)
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn soko_certifies_at_its_threshold_only() {
    let dir = Dir::new();
    let inst = dir.arg("soko.json");
    assert_eq!(code(&run(&["gen", "soko", "--k", "3", "--out", &inst])), 0);
    let ok = run(&["verify", "lowerbound", "--in", &inst, "--d", "5"]);
    assert_eq!(code(&ok), 0);
    let report = json(&ok);
    assert_eq!(report["valid"], true);
    assert_eq!(report["entries"], 8);
    let bad = run(&["verify", "lowerbound", "--in", &inst, "--d", "4"]);
    assert_eq!(code(&bad), 1);
    assert_eq!(json(&bad)["violation"]["kind"], "other-set-too-far");
    // The mirror sits at 7, so 6 still certifies.
    assert_eq!(code(&run(&["verify", "lowerbound", "--in", &inst, "--d", "6"])), 0);
    let bad = run(&["verify", "lowerbound", "--in", &inst, "--d", "7"]);
    assert_eq!(code(&bad), 1);
    assert_eq!(json(&bad)["violation"]["kind"], "own-set-too-close");
    assert_eq!(code(&run(&["verify", "lowerbound", "--in", &inst])), 0);
}

#[test]
fn other_families_verify_with_recorded_parameters() {
    let dir = Dir::new();
    for (name, args) in [("tree", vec!["treek", "--k", "4"]), ("planar", vec!["planarkd", "--k", "2", "--d", "2"])] {
        let inst = dir.arg(name);
        let mut gen = vec!["gen"];
        gen.extend(&args);
        gen.extend(["--out", &inst]);
        assert_eq!(code(&run(&gen)), 0, "{name}");
        assert_eq!(code(&run(&["verify", "lowerbound", "--in", &inst])), 0, "{name}");
    }
}

#[test]
fn lp_coreset_on_a_grid_verifies() {
    let dir = Dir::new();
    let inst = dir.arg("grid.json");
    let q = dir.arg("q.json");
    let gen = ["gen", "grid", "--width", "10", "--height", "10", "--weights", "uniform:1:10", "--seed", "5"];
    assert_eq!(code(&run(&[&gen[..], &["--out", &inst]].concat())), 0);
    let built = run(&["coreset", "lp", "--eps", "0.25", "--seed", "2", "--in", &inst, "--out", &q]);
    assert_eq!(code(&built), 0, "{}", String::from_utf8_lossy(&built.stderr));
    let ok = run(&["verify", "coreset", "--in", &inst, "--coreset", &q]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["valid"], true);

    let result: CoresetResult = serde_json::from_str(&read(&dir.path("q.json"))).unwrap();
    assert!(!result.buckets.is_empty());
    assert_eq!(serde_json::to_string_pretty(&result).unwrap() + "\n", read(&dir.path("q.json")));

    let mut emptied: Value = serde_json::from_str(&read(&dir.path("q.json"))).unwrap();
    emptied["Q"] = Value::Array(Vec::new());
    let empty = dir.write("empty.json", &emptied.to_string());
    let bad = run(&["verify", "coreset", "--in", &inst, "--coreset", &empty]);
    assert_eq!(code(&bad), 1);
    assert_eq!(json(&bad)["valid"], false);
}

#[test]
fn commands_are_deterministic() {
    let dir = Dir::new();
    let inst = dir.arg("g.json");
    run(&[
        "gen",
        "grid",
        "--width",
        "6",
        "--height",
        "5",
        "--weights",
        "integer:1:5",
        "--points",
        "12",
        "--seed",
        "9",
        "--out",
        &inst,
    ]);
    let again = run(&[
        "gen",
        "grid",
        "--width",
        "6",
        "--height",
        "5",
        "--weights",
        "integer:1:5",
        "--points",
        "12",
        "--seed",
        "9",
    ]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), read(&dir.path("g.json")));
    for method in ["greedy", "lp"] {
        let a = run(&["coreset", method, "--eps", "0.1", "--seed", "4", "--in", &inst]);
        let b = run(&["coreset", method, "--eps", "0.1", "--seed", "4", "--in", &inst]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{method}");
    }
}

#[test]
fn instances_round_trip() {
    let dir = Dir::new();
    let base = dir.arg("base.json");
    let sub = dir.arg("sub.json");
    run(&["gen", "grid", "--width", "4", "--height", "4", "--weights", "uniform:0.5:3", "--seed", "1", "--out", &base]);
    let out = run(&["gen", "subdiv", "--rounds", "6", "--seed", "2", "--in", &base, "--out", &sub]);
    assert_eq!(code(&out), 0);
    let text = read(&dir.path("sub.json"));
    let inst = Instance::from_json(&text).unwrap();
    assert_eq!(inst.graph.vertex_count(), 22);
    assert_eq!(inst.to_json().unwrap() + "\n", text);
}

#[test]
fn kcoreset_verifies_and_enforces_caps() {
    let dir = Dir::new();
    let inst = dir.arg("small.json");
    let q = dir.arg("k.json");
    run(&["gen", "grid", "--width", "4", "--height", "4", "--weights", "integer:1:4", "--seed", "3", "--out", &inst]);
    assert_eq!(code(&run(&["kcoreset", "--k", "2", "--eps", "0.25", "--seed", "1", "--in", &inst, "--out", &q])), 0);
    let result: KCoresetResult = serde_json::from_str(&read(&dir.path("k.json"))).unwrap();
    assert_eq!(result.k, 2);
    let ok = run(&["verify", "kcoreset", "--in", &inst, "--coreset", &q]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["tuples_checked"], 16 + 16 * 15 / 2);

    let big = dir.arg("big.json");
    run(&["gen", "grid", "--width", "7", "--height", "7", "--out", &big]);
    let capped = run(&["kcoreset", "--k", "2", "--eps", "0.25", "--in", &big]);
    assert_eq!(code(&capped), 3);
    assert!(String::from_utf8_lossy(&capped.stderr).contains("exceeds the cap"));
    assert_eq!(code(&run(&["kcoreset", "--k", "3", "--eps", "0.25", "--in", &inst])), 3);
}

#[test]
fn input_errors_have_distinct_codes() {
    let dir = Dir::new();
    let malformed = dir.write("bad.json", "{");
    let out = run(&["coreset", "greedy", "--eps", "0.2", "--in", &malformed]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));

    let split = dir.write("split.json", r#"{"n": 4, "edges": [[0, 1, 1], [2, 3, 1]]}"#);
    assert_eq!(code(&run(&["coreset", "greedy", "--eps", "0.2", "--in", &split])), 4);

    let grid = dir.write("g.json", r#"{"n": 2, "edges": [[0, 1, 1]]}"#);
    assert_eq!(code(&run(&["coreset", "lp", "--eps", "1.5", "--in", &grid])), 2);
    assert_eq!(code(&run(&["coreset", "lp", "--in", &grid])), 2);
    assert_eq!(code(&run(&["verify", "lowerbound", "--in", &grid])), 2);
    assert_eq!(code(&run(&["gen", "grid", "--width", "2", "--height", "2", "--weights", "gauss"])), 2);

    let threads = bin().args(["vc", "check", "--in", &grid]).env("PLANAR_CORESET_THREADS", "0").output().unwrap();
    assert_eq!(code(&threads), 2);
    let threads = bin().args(["vc", "check", "--in", &grid]).env("PLANAR_CORESET_THREADS", "2").output().unwrap();
    assert_eq!(code(&threads), 0);
}

#[test]
fn comatching_search_and_pair_validators() {
    let dir = Dir::new();
    let inst = dir.arg("g.json");
    let fam = dir.arg("fam.json");
    run(&["gen", "grid", "--width", "3", "--height", "3", "--weights", "integer:1:5", "--seed", "7", "--out", &inst]);
    assert_eq!(code(&run(&["comatching", "max", "--eps", "0.2", "--in", &inst, "--out", &fam])), 0);
    let family: PairFamily = serde_json::from_str(&read(&dir.path("fam.json"))).unwrap();
    assert!(family.len() >= 2);
    assert_eq!(code(&run(&["verify", "comatching", "--in", &inst, "--family", &fam])), 0);
    assert_eq!(code(&run(&["comatching", "max", "--eps", "0.2", "--cap", "1", "--in", &inst])), 3);

    // Two vertices one apart: (0, 1) alone is far at R = 0.5 and close at R = 2.
    let edge = dir.write("edge.json", r#"{"n": 2, "edges": [[0, 1, 1]]}"#);
    let far = dir.write("far.json", r#"{"kind": "ladder", "R": 0.5, "eps": 0.1, "items": [[0, 1]]}"#);
    let close = dir.write("close.json", r#"{"kind": "ladder", "R": 2.0, "eps": 0.1, "items": [[0, 1]]}"#);
    for check in ["comatching", "ladder", "semiladder"] {
        assert_eq!(code(&run(&["verify", check, "--in", &edge, "--family", &far])), 0, "{check}");
        let bad = run(&["verify", check, "--in", &edge, "--family", &close]);
        assert_eq!(code(&bad), 1, "{check}");
        assert_eq!(json(&bad)["violation"]["requirement"], "far");
    }
}

#[test]
fn ramsey_extraction_from_a_tree_family() {
    let dir = Dir::new();
    let inst = dir.arg("tree.json");
    run(&["gen", "treek", "--k", "2", "--out", &inst]);
    let text = read(&dir.path("tree.json"));
    let tree = Instance::from_json(&text).unwrap();
    // Own sets at distance 4, other sets within 2: a (2, eps)-comatching at R = 3.
    let family =
        serde_json::json!({"kind": "k-comatching", "k": 2, "R": 3.0, "eps": 0.3, "items": tree.entries.unwrap()});
    let fam = dir.write("fam.json", &family.to_string());
    assert_eq!(code(&run(&["verify", "kcomatching", "--in", &inst, "--family", &fam])), 0);
    let out = run(&["extract", "ramsey", "--in", &fam, "--graph", &inst]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let outcome = json(&out);
    assert_eq!(outcome["structure"]["eps"], 0.15);
    assert!(!outcome["index_set"].as_array().unwrap().is_empty());
}

#[test]
fn double_ladder_validator() {
    let dir = Dir::new();
    // p0 = 0, top0 = 1, bottom0 = 2; p1 = 3, top1 = 4, bottom1 = 5.
    let edges = r#"{"n": 6, "edges": [[0, 4, 1], [3, 2, 1], [0, 1, 9], [0, 2, 9], [3, 4, 9], [3, 5, 9], [0, 3, 9]]}"#;
    let inst = dir.write("g.json", edges);
    let fam = dir.write(
        "dl.json",
        r#"{"kind": "double-ladder", "R": 4.0, "eps": 0.5, "items": [{"p": 0, "top": 1, "bottom": 2}, {"p": 3, "top": 4, "bottom": 5}]}"#,
    );
    assert_eq!(code(&run(&["verify", "doubleladder", "--in", &inst, "--family", &fam])), 0);
    let swapped = dir.write(
        "sw.json",
        r#"{"kind": "double-ladder", "R": 4.0, "eps": 0.5, "items": [{"p": 3, "top": 4, "bottom": 5}, {"p": 0, "top": 1, "bottom": 2}]}"#,
    );
    assert_eq!(code(&run(&["verify", "doubleladder", "--in", &inst, "--family", &swapped])), 1);
}

#[test]
fn vc_check_reports_bound() {
    let dir = Dir::new();
    let inst = dir.arg("g.json");
    run(&["gen", "grid", "--width", "4", "--height", "3", "--weights", "uniform:1:4", "--seed", "2", "--out", &inst]);
    let out = run(&["vc", "check", "--in", &inst, "--d", "4"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["vc_dim_at_most"], true);
    assert_eq!(report["universe"], 12);
    // Singletons and the empty set are traced by balls, pairs are not always.
    assert_eq!(code(&run(&["vc", "check", "--in", &inst, "--d", "0"])), 1);
}

#[test]
fn csv_format_flattens_reports() {
    let dir = Dir::new();
    let inst = dir.arg("soko.json");
    run(&["gen", "soko", "--k", "3", "--out", &inst]);
    let out = run(&["verify", "lowerbound", "--in", &inst, "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let valid = headers.iter().position(|h| h == "valid").unwrap();
    assert_eq!(&rows[0][valid], "true");
}

#[test]
fn sweep_row_count_and_columns() {
    let dir = Dir::new();
    let csv_path = dir.arg("sweep.csv");
    let out = run(&[
        "sweep",
        "--eps-list",
        "0.1,0.25,0.5",
        "--sizes",
        "3,4",
        "--trials",
        "2",
        "--seed",
        "11",
        "--csv",
        &csv_path,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path("sweep.csv")).unwrap();
    let headers: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        headers,
        [
            "side",
            "n",
            "trial",
            "instance_seed",
            "method",
            "eps",
            "q_size",
            "buckets",
            "tau_star_sum",
            "dual_bound_sum",
            "lp_iterations",
            "valid",
            "wall_ms"
        ]
    );
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3 * 2 * 2 * 2);
    assert!(rows.iter().all(|r| &r[11] == "true"));

    let one =
        run(&["sweep", "--eps-list", "0.5", "--sizes", "3", "--trials", "3", "--methods", "lp", "--format", "json"]);
    let rows = json(&one);
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert!(rows.as_array().unwrap().iter().all(|r| r["method"] == "lp"));
}
