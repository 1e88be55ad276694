use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn gfdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfdc")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn micro_run_labels() {
    let tiny = fixture("tiny3.csv");
    let out = gfdc(&["run", "--input", path_str(&tiny), "--clusters", "2", "--quiet"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stderr.is_empty());
    let doc = stdout_json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["labels"], serde_json::json!([1, 2, 2]));
    assert_eq!(doc["k"], 2);
    assert!(doc.get("timings_ms").is_none());
    assert!(doc.get("scores").is_none());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let agg = fixture("aggregation.csv");
    let args = ["run", "--input", path_str(&agg), "--clusters", "7", "--tau", "0.9", "--dump-stages", "--quiet"];
    let a = gfdc(&args);
    let b = gfdc(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_errors_exit_2() {
    let tiny = fixture("tiny3.csv");
    let t = path_str(&tiny);
    for args in [
        vec!["run", "--input", t, "--clusters", "0"],
        vec!["run", "--input", t, "--clusters", "2", "--tau", "1.5"],
        vec!["run", "--input", t, "--clusters", "2", "--k", "0"],
        vec!["run", "--input", t, "--clusters", "2", "--k", "3"],
        vec!["run", "--input", t, "--clusters", "2", "--plot", "/nonexistent/x.svg"],
    ] {
        let out = gfdc(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.lines().count(), 1, "{err}");
    }
}

#[test]
fn too_many_clusters_exit_3() {
    let tiny = fixture("tiny3.csv");
    let out = gfdc(&["run", "--input", path_str(&tiny), "--clusters", "3"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot form 3 clusters"));
}

#[test]
fn unreadable_or_empty_input_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2\n3,x\n").unwrap();
    let missing = dir.path().join("missing.csv");
    for p in [&empty, &bad, &missing] {
        assert_eq!(code(&gfdc(&["run", "--input", path_str(p), "--clusters", "2"])), 1, "{}", p.display());
        assert_eq!(code(&gfdc(&["sparse-degree", "--input", path_str(p)])), 1);
    }
}

#[test]
fn sparse_degree_micro() {
    let tiny = fixture("tiny3.csv");
    let out = gfdc(&["sparse-degree", "--input", path_str(&tiny)]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "index,r_star,knn_dist,sd\n0,1,3,4\n1,1,2,3\n2,2,3,5\n");
}

#[test]
fn sparse_degree_jain_rows() {
    let jain = fixture("jain.csv");
    let out = gfdc(&["sparse-degree", "--input", path_str(&jain)]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 374);
}

#[test]
fn eval_identical_and_mismatched() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "1\n1\n2\n2\n-1\n").unwrap();
    fs::write(&b, "5\n5\n3\n3\n").unwrap();
    let out = gfdc(&["eval", path_str(&a), path_str(&a)]);
    assert_eq!(code(&out), 0);
    let s = stdout_json(&out);
    for key in ["purity", "ari", "ami", "fmi"] {
        assert_eq!(s[key], 1.0, "{key}");
    }
    assert_eq!(code(&gfdc(&["eval", path_str(&a), path_str(&b)])), 1);
}

#[test]
fn result_json_feeds_eval() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let labels = dir.path().join("labels.txt");
    let svg = dir.path().join("plot.svg");
    let truth = dir.path().join("truth.txt");
    let agg = fixture("aggregation.csv");
    let out = gfdc(&[
        "run",
        "--input",
        path_str(&agg),
        "--clusters",
        "7",
        "--output",
        path_str(&json),
        "--labels-out",
        path_str(&labels),
        "--plot",
        path_str(&svg),
        "--timings",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("total"));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let doc: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(doc["timings_ms"]["total"].as_f64().unwrap() >= 0.0);
    let truth_labels: String = fs::read_to_string(&agg)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| format!("{}\n", l.rsplit(',').next().unwrap()))
        .collect();
    fs::write(&truth, truth_labels).unwrap();

    let from_json = stdout_json(&gfdc(&["eval", path_str(&json), path_str(&truth)]));
    let from_file = stdout_json(&gfdc(&["eval", path_str(&labels), path_str(&truth)]));
    assert_eq!(from_json, from_file);
    assert_eq!(from_json, doc["scores"]);
}

#[test]
fn stage_dump_is_embedded() {
    let jain = fixture("jain.csv");
    let out = gfdc(&["run", "--input", path_str(&jain), "--clusters", "2", "--dump-stages", "--quiet"]);
    let doc = stdout_json(&out);
    let dump = &doc["dump"];
    assert_eq!(dump["initial_clusters"].as_array().unwrap().len(), 2);
    assert_eq!(dump["granules"].as_array().unwrap().len(), doc["stages"]["granules"].as_u64().unwrap() as usize);
}
