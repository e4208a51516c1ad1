use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use tempfile::TempDir;

fn tpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpath")).args(args).output().expect("spawn tpath")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fig1(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("fig1.json");
    assert_eq!(code(&tpath(&["gen", "fig1", "-o", s(&p)])), 0);
    p
}

const CYCLIC: &str = r#"{"version":1,"n":3,"arcs":[
    {"id":0,"tail":0,"head":1,"w":1},{"id":1,"tail":1,"head":0,"w":1},{"id":2,"tail":1,"head":2,"w":1}],
    "s":0,"t":2,"beta":"1/2","r":10,"critical":[2]}"#;

/// Critical arc 2 hangs off a vertex that cannot reach t.
const PRUNED_T: &str = r#"{"version":1,"n":4,"arcs":[
    {"id":0,"tail":0,"head":1,"w":1},{"id":1,"tail":1,"head":2,"w":1},{"id":2,"tail":1,"head":3,"w":1}],
    "s":0,"t":2,"beta":"1/2","r":10,"critical":[2]}"#;

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = tpath(&["validate", s(&fig1(&dir))]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["valid"], true);
    let out = tpath(&["validate", s(&write(&dir, "cyclic.json", CYCLIC))]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["valid"], false);
    assert_eq!(code(&tpath(&["validate", s(&write(&dir, "pruned.json", PRUNED_T))])), 3);
    assert_eq!(code(&tpath(&["validate", s(&write(&dir, "junk.json", "{"))])), 2);
    assert_eq!(code(&tpath(&["validate", "/nonexistent/x.json"])), 2);
}

#[test]
fn every_engine_solves_fig1_with_cost_two() {
    let dir = TempDir::new().unwrap();
    let f = fig1(&dir);
    for (algo, semantics) in [("exact", "lex"), ("vc", "lex"), ("tw", "robust")] {
        let out = tpath(&["solve", s(&f), "--algo", algo, "--stats"]);
        assert_eq!(code(&out), 0, "{algo}");
        let v = stdout_json(&out);
        assert_eq!(v["cost"], 2, "{algo}");
        assert_eq!(v["semantics"], semantics);
        assert!(v["stats"]["wall_ms"].is_u64());
        // The emitted plan is itself a valid plan file.
        let plan = write(&dir, &format!("{algo}.plan.json"), &String::from_utf8_lossy(&out.stdout));
        assert_eq!(code(&tpath(&["check-plan", s(&f), s(&plan), "--semantics", semantics])), 0);
    }
    let tw = stdout_json(&tpath(&["solve", s(&f), "--algo", "tw", "--stats"]));
    assert_eq!(tw["stats"]["width"], 3);
    assert_eq!(tw["stats"]["lset_size"], 13);
}

#[test]
fn solve_limits_and_infeasibility() {
    let dir = TempDir::new().unwrap();
    let f = fig1(&dir);
    let out = tpath(&["solve", s(&f), "--algo", "exact", "--budget", "1"]);
    assert_eq!(code(&out), 4);
    assert_eq!(stdout_json(&out)["feasible"], false);
    assert_eq!(code(&tpath(&["solve", s(&f), "--algo", "exact", "--budget", "2"])), 0);
    let out = tpath(&["solve", s(&f), "--algo", "tw", "--lset-cap", "3"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--algo vc"));
    // A reward so small that every first step is abandoned.
    let text = fs::read_to_string(&f).unwrap().replace("\"r\":36", "\"r\":1");
    let poor = write(&dir, "poor.json", &text);
    for algo in ["exact", "vc", "tw"] {
        let out = tpath(&["solve", s(&poor), "--algo", algo]);
        assert_eq!(code(&out), 1, "{algo}");
        assert_eq!(stdout_json(&out)["feasible"], false);
    }
}

#[test]
fn solve_rejects_bad_arguments() {
    let dir = TempDir::new().unwrap();
    let f = fig1(&dir);
    assert_eq!(code(&tpath(&["solve", s(&f), "--algo", "tw", "--semantics", "lex"])), 2);
    assert_eq!(code(&tpath(&["solve", s(&f), "--algo", "vc", "--budget", "2"])), 2);
    assert_eq!(code(&tpath(&["solve", s(&f), "--algo", "vc", "--cover-hint", "0"])), 2);
    let out = tpath(&["solve", s(&f), "--algo", "vc", "--cover-hint", "0,1,2,3,6,7"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["cost"], 2);
    assert_eq!(code(&tpath(&["solve", s(&write(&dir, "p.json", PRUNED_T)), "--algo", "exact"])), 3);
}

#[test]
fn check_plan_and_simulate() {
    let dir = TempDir::new().unwrap();
    let f = fig1(&dir);
    let good = write(&dir, "good.json", r#"{"deletions":[5],"additions":[10]}"#);
    let half = write(&dir, "half.json", r#"{"deletions":[5],"additions":[]}"#);
    let out = tpath(&["check-plan", s(&f), s(&good)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["cost"], 2);
    let out = tpath(&["check-plan", s(&f), s(&half)]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["missing"], serde_json::json!([4]));
    let out = tpath(&["simulate", s(&f), "--plan", s(&good)]);
    assert_eq!(stdout_json(&out)["result"]["reached"], serde_json::json!([0, 10, 4, 8]));
    let out = tpath(&["simulate", s(&f)]);
    assert_eq!(stdout_json(&out)["result"]["reached"], serde_json::json!([1, 5, 9]));
    let out = tpath(&["simulate", s(&f), "--all"]);
    assert_eq!(stdout_json(&out)["outcomes"].as_array().unwrap().len(), 1);
    let bad = write(&dir, "bad.json", r#"{"deletions":[10],"additions":[]}"#);
    assert_eq!(code(&tpath(&["check-plan", s(&f), s(&bad)])), 2);
}

#[test]
fn generators_are_deterministic_and_round_trip() {
    let args = ["gen", "random", "--seed", "11", "--n", "7", "--arcs", "12", "--tie-free"];
    let a = tpath(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, tpath(&args).stdout);
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "r.json", &String::from_utf8_lossy(&a.stdout));
    // Generated instances are already normalized, so normalize is the identity.
    assert_eq!(tpath(&["normalize", s(&p)]).stdout, a.stdout);
    let out = tpath(&["gen", "mks", "--sets", "1,2;3,5", "--target", "5", "--eps", "1/100"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["n"], 7);
    assert_eq!(code(&tpath(&["gen", "mks", "--sets", "1;1", "--target", "5", "--eps", "1/10"])), 2);
}

#[test]
fn normalize_reports_maps() {
    let dir = TempDir::new().unwrap();
    // Vertex 3 is not on any s-t path.
    let p = write(
        &dir,
        "extra.json",
        r#"{"version":1,"n":4,"arcs":[{"id":0,"tail":0,"head":3,"w":1},{"id":1,"tail":0,"head":2,"w":1},{"id":2,"tail":0,"head":1,"w":1},{"id":3,"tail":1,"head":2,"w":1}],
        "s":0,"t":2,"beta":"1/2","r":10,"critical":[3]}"#,
    );
    let v = stdout_json(&tpath(&["normalize", s(&p), "--with-maps"]));
    assert_eq!(v["instance"]["n"], 3);
    assert_eq!(v["vertex_map"], serde_json::json!([0, 1, 2]));
    assert_eq!(v["arc_map"], serde_json::json!([1, 2, 3]));
    let out = tpath(&["solve", s(&p), "--algo", "exact"]);
    assert_eq!(stdout_json(&out)["deletions"], serde_json::json!([1]));
}

#[test]
fn lset_and_decompose_outputs() {
    let dir = TempDir::new().unwrap();
    let f = fig1(&dir);
    let v = stdout_json(&tpath(&["lset", s(&f)]));
    assert_eq!(v["per_vertex"]["7"], serde_json::json!([0]));
    assert_eq!(v["bounds"]["linear_bound"], 41);
    assert_eq!(v["bounds"]["l_size"], 13);
    let v = stdout_json(&tpath(&["decompose", s(&f)]));
    assert_eq!(v["width"], 3);
    assert!(!v["nodes"].as_array().unwrap().is_empty());
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    csv::Reader::from_reader(out.stdout.as_slice())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn bench_row_accounting() {
    let dir = TempDir::new().unwrap();
    fig1(&dir);
    for seed in ["1", "2"] {
        let p = dir.path().join(format!("r{seed}.json"));
        let args = ["gen", "random", "--seed", seed, "--n", "6", "--arcs", "9", "--tie-free", "-o", s(&p)];
        assert_eq!(code(&tpath(&args)), 0);
    }
    let out = Command::new(env!("CARGO_BIN_EXE_tpath"))
        .args(["bench", s(dir.path()), "--algos", "vc,tw"])
        .env("TPATH_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.starts_with("instance,algo,semantics,feasible,cost,wallMs,width,lsetSize,states"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 6, "{text}");
    assert!(rows.iter().all(|r| r[1] != "DISCREPANCY"));
    let fig1_tw = rows.iter().find(|r| r[0] == "fig1.json" && r[1] == "tw").unwrap();
    assert_eq!(fig1_tw[4], "2");
    assert_eq!(fig1_tw[6], "3");
}

#[test]
fn bench_honors_timeout() {
    let dir = TempDir::new().unwrap();
    // With r = 1 every plan fails, so the exhaustive search walks all 2^36 of them.
    let p = dir.path().join("slow.json");
    let args = ["gen", "random", "--seed", "5", "--n", "12", "--arcs", "30", "--addable", "6", "--r", "1", "-o", s(&p)];
    assert_eq!(code(&tpath(&args)), 0);
    let start = Instant::now();
    let out = tpath(&["bench", s(dir.path()), "--algos", "exact", "--timeout-ms", "300"]);
    let elapsed = start.elapsed().as_millis();
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "timeout");
    assert!(rows[0][5].parse::<u128>().unwrap() < 600, "{rows:?}");
    assert!(elapsed < 2_000, "{elapsed} ms");
}
