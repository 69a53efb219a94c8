use std::fs;
use std::path::Path;

use msb::cli::main_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["msb"];
    full.extend_from_slice(args);
    let code = main_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn pipeline_on_a_small_synthetic_graph() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let graph = p(d, "g.txt");
    let (code, out, err) = run(&["synth", "--seed", "1", "--nodes", "80", "--out-degree", "6", "--out", &graph]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("\"positive\""));

    assert_eq!(run(&["split", &graph, "--seed", "1", "--noise", "0.1", "--out", &p(d, "split.json")]).0, 0);
    assert_eq!(run(&["community", &graph, "--out", &p(d, "part.json")]).0, 0);
    let (code, out, _) = run(&["census", &graph, "--partition", &p(d, "part.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("balanced_fraction"));
    assert_eq!(run(&["nullmodel", &graph, "--samples", "3", "--out", &p(d, "null.json")]).0, 0);
    let (code, out, err) = run(&["label", "--split", &p(d, "split.json"), "--out", &p(d, "labels.csv")]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("accuracy"));

    let (code, _, err) = run(&[
        "train", "--split", &p(d, "split.json"), "--method", "l2rw", "--out", &p(d, "ck.json"),
        "--trace", &p(d, "trace.csv"), "--weights", &p(d, "w.csv"), "--epochs", "50", "--dim", "8", "--lr", "0.01",
    ]);
    assert_eq!(code, 0, "{err}");
    let trace = fs::read_to_string(d.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3);
    assert_eq!(fs::read_to_string(d.join("w.csv")).unwrap().lines().count(), 51);

    let (code, out, _) = run(&["evaluate", "--checkpoint", &p(d, "ck.json"), "--split", &p(d, "split.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("macro_f1"));
    fs::write(d.join("pairs.txt"), "0 1\n2 3\n").unwrap();
    let (code, out, _) = run(&["score", "--checkpoint", &p(d, "ck.json"), "--edges", &p(d, "pairs.txt")]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["census"]).0, 1);
    assert_eq!(run(&["train", "--split", "x", "--out", "y", "--method", "nope"]).0, 1);
    assert_eq!(run(&["census", &p(d, "missing.txt")]).0, 2);
    fs::write(d.join("bad.csv"), "a,b\n").unwrap();
    let (code, _, err) = run(&["ingest", &p(d, "bad.csv"), "--out", &p(d, "o.txt")]);
    assert_eq!(code, 2);
    assert!(err.contains("line 1"));
    fs::write(d.join("bad.toml"), "dataset = \"synthetic\"\nmethods = [\"oracle\"]\n").unwrap();
    assert_eq!(run(&["experiment", &p(d, "bad.toml"), "--run-dir", &p(d, "runs")]).0, 1);
    assert!(!d.join("runs").exists());
}

#[test]
fn ingest_writes_canonical_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("raw.csv"), "10,20,4,0\n20,30,-1,0\n30,30,2,0\n10,30,0,0\n").unwrap();
    let (code, _, err) = run(&["ingest", &p(d, "raw.csv"), "--out", &p(d, "g.txt")]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(fs::read_to_string(d.join("g.txt")).unwrap(), "# nodes: 3\n0 1 1\n1 2 -1\n");
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("g.txt.json")).unwrap()).unwrap();
    assert_eq!(side["id_map"], serde_json::json!(["10", "20", "30"]));
    assert_eq!(side["ingest"]["self_loops_dropped"], 1);
    assert_eq!(side["ingest"]["zero_ratings_dropped"], 1);
}
