use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk")).args(args).output().expect("binary runs")
}

fn qwalk_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk")).args(args).env(key, value).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn depth_of_johnson_5_2() {
    let v = json(&qwalk(&["depth", "--family", "johnson", "--params", "5,2"]));
    assert_eq!(v["d"], 2);
    assert_eq!(v["levels"][1]["lambda"].as_array().unwrap().len(), 6);
    assert_eq!(v["levels"][2]["lambda"], serde_json::json!([0]));
}

#[test]
fn search_on_rook() {
    let v = json(&qwalk(&["run", "search", "--family", "rook", "--params", "3,3", "--marked", "4"]));
    assert!(v["fidelity"].as_f64().unwrap() >= 1.0 - 1e-8);
    assert_eq!(v["found"], 4);
    assert_eq!(v["success"], true);
}

#[test]
fn non_integer_spectrum_exits_1() {
    let out = qwalk(&["spectrum", "--family", "cycle5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("non-integer eigenvalue"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["spectrum"],
        vec!["spectrum", "--family", "petersen"],
        vec!["spectrum", "--family", "johnson", "--params", "5"],
        vec!["spectrum", "--family", "johnson", "--params", "5,2", "--edges", "x.txt"],
        vec!["run", "--family", "johnson", "--params", "5,2"],
        vec!["run", "sample", "--family", "johnson", "--params", "5,2"],
        vec!["frobnicate"],
    ] {
        let out = qwalk(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("split.txt");
    std::fs::write(&edges, "0 1\n2 3\n").unwrap();
    let out = qwalk(&["graph", "--edges", path_str(&edges)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("disconnected"), "{}", stderr(&out));

    let out = qwalk(&["run", "search", "--family", "complete-bipartite", "--params", "2,3", "--marked", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("vertex-transitive"));

    let out = qwalk(&["run", "sample", "--family", "johnson", "--params", "5,2", "--source", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn graph_edge_list_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k3c4.txt");
    let out = qwalk(&["graph", "--family", "complete-square", "--params", "3", "--edge-list", "--out", path_str(&path)]);
    assert!(out.status.success());
    let a = json(&qwalk(&["graph", "--edges", path_str(&path)]));
    let b = json(&qwalk(&["graph", "--family", "complete-square", "--params", "3"]));
    assert_eq!(a["edges"], b["edges"]);
    assert_eq!(a["n"], 12);
    assert_eq!(a["family"], Value::Null);
}

#[test]
fn spectrum_with_eigenvectors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("vecs.csv");
    let v = json(&qwalk(&["spectrum", "--family", "kneser", "--params", "5,2", "--eigenvectors", path_str(&csv)]));
    assert_eq!(v["zero_index"], 0);
    let groups: Vec<(i64, u64)> = v["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| (g["value"].as_i64().unwrap(), g["multiplicity"].as_u64().unwrap()))
        .collect();
    assert_eq!(groups, [(0, 1), (2, 5), (5, 4)]);
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 11);
}

fn reported_fidelity(err: &str) -> f64 {
    err.lines()
        .find_map(|l| l.strip_prefix("fidelity "))
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|x| x.parse().ok())
        .expect("fidelity line on stderr")
}

#[test]
fn emitted_schedules_replay_to_reported_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 4] = [
        (&["--family", "johnson", "--params", "5,2", "--task", "search", "--marked", "7"], "7"),
        (&["--family", "hamming", "--params", "2,3", "--task", "sample", "--marked", "2"], "2"),
        (&["--family", "cycle", "--params", "6", "--task", "promise-search", "--marked", "1"], "1"),
        (&["--family", "complete-bipartite", "--params", "4,7", "--task", "bipartite", "--branch", "2", "--marked", "9"], "9"),
    ];
    for (i, (args, m)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("s{i}.json"));
        let mut full = vec!["schedule"];
        full.extend_from_slice(args);
        full.extend_from_slice(&["--out", path_str(&path)]);
        let out = qwalk(&full);
        assert!(out.status.success(), "{}", stderr(&out));
        let synth = reported_fidelity(&stderr(&out));

        let graph_args = &args[..4];
        let mut run = vec!["run"];
        run.extend_from_slice(graph_args);
        run.extend_from_slice(&["--schedule", path_str(&path), "--marked", m]);
        let report = json(&qwalk(&run));
        let replayed = report["fidelity"].as_f64().unwrap();
        assert!((replayed - synth).abs() <= 1e-10, "{args:?}: {synth} vs {replayed}");
        assert!(replayed >= 1.0 - 1e-8, "{args:?}: {replayed}");
        assert_eq!(report["task"], "replay");
    }
}

#[test]
fn schedule_json_schema() {
    let v = json(&qwalk(&["schedule", "--family", "hamming", "--params", "2,2", "--task", "sample", "--marked", "0"]));
    assert_eq!(v["direction"], "forward");
    assert_eq!(v["oracle_count"], 4);
    assert_eq!(v["stage_boundaries"].as_array().unwrap().len(), 3);
    let ops = v["ops"].as_array().unwrap();
    for op in ops {
        let kind = op["op"].as_str().unwrap();
        assert!(["walk", "oracle", "anc_h", "anc_z", "cwalk"].contains(&kind));
    }
    let reversed = json(&qwalk(&["schedule", "--family", "hamming", "--params", "2,2", "--task", "search"]));
    assert_eq!(reversed["direction"], "reversed");
    assert_eq!(reversed["total_time"], v["total_time"]);
}

#[test]
fn tasks_run_end_to_end() {
    let v = json(&qwalk(&["run", "transfer", "--family", "rook", "--params", "3,3", "--source", "0", "--target", "8"]));
    assert!(v["fidelity"].as_f64().unwrap() >= 1.0 - 1e-8);
    assert_eq!(v["target"], 8);
    let v = json(&qwalk(&["run", "sample", "--family", "hamming", "--params", "3,2", "--source", "5"]));
    assert!(v["fidelity"].as_f64().unwrap() >= 1.0 - 1e-8);
    let v = json(&qwalk(&["run", "bipartite-search", "--family", "complete-bipartite", "--params", "1,4", "--marked", "3"]));
    assert_eq!(v["branch"], 2);
    assert_eq!(v["found"], 3);
    let v = json(&qwalk(&["run", "promise-search", "--family", "cycle", "--params", "4", "--marked", "2"]));
    assert_eq!(v["found"], 2);
}

#[test]
fn csv_reports() {
    let out = qwalk(&["run", "sample", "--family", "johnson", "--params", "5,2", "--source", "0", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "graph,task,m,fidelity,p,T,d,bound_ratio");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("\"johnson(5,2)\",sample,0,"));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.json"));
    let args = |out: &Path, format: &'static str| {
        vec!["verify", "--family", "kneser", "--params", "5,2", "--pairs", "12", "--format", format, "--out", out.to_str().unwrap()]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>()
    };
    let run = |out: &Path, format: &'static str, workers: &str| {
        let a = args(out, format);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let o = qwalk_env(&refs, "QWALK_WORKERS", workers);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let csv1 = run(&a, "csv", "1");
    let csv3 = run(&a, "csv", "3");
    assert_eq!(csv1, csv3);
    assert_eq!(String::from_utf8(csv1).unwrap().lines().count(), 1 + 10 + 12 + 10);
    let j1 = run(&b, "json", "2");
    let j2 = run(&b, "json", "2");
    assert_eq!(j1, j2);
    let v: Value = serde_json::from_slice(&j1).unwrap();
    assert_eq!(v["search_route"], "vertex_transitive");
    assert!(v["min_fidelity"].as_f64().unwrap() >= 1.0 - 1e-8);
}

#[test]
fn verify_path_reports_promise_route() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("p3.txt");
    std::fs::write(&edges, "# path\n0 1\n1 2\n").unwrap();
    let out = qwalk(&["verify", "--edges", path_str(&edges)]);
    let v = json(&out);
    assert_eq!(v["search_route"], "promise");
    assert!(stderr(&out).contains("not known to be vertex-transitive"));
    assert_eq!(v["all_succeeded"], true);
}

#[test]
fn verify_cap() {
    let out = qwalk(&["verify", "--family", "hamming", "--params", "2,3", "--cap", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cap"));
}
