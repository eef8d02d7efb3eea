use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlbounds")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn too_few_parties_is_usage_error() {
    assert_eq!(run(&["verify", "doubling", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--n", "3", "--skip", "bogus"]).status.code(), Some(2));
}

#[test]
fn verify_two_parties() {
    let o = run(&["verify", "doubling", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["counts"]["sets"], 16);
    assert!(v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn large_family_needs_force() {
    let o = run(&["verify", "doubling", "--n", "6"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("MiB") && err.contains("--force"), "{err}");
}

#[test]
fn corrupted_family_names_failing_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.json");
    let emitted = run(&["family", "--n", "2", "--emit", path.to_str().unwrap()]);
    assert_eq!(emitted.status.code(), Some(0));
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // move one event of the first set into the second set
    let moved = doc["sets"][0]["events"].as_array_mut().unwrap().pop().unwrap();
    doc["sets"][1]["events"].as_array_mut().unwrap().push(moved);
    std::fs::write(&path, doc.to_string()).unwrap();

    let o = run(&["verify", "doubling", "--family", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"]["set_sizes"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("set_sizes"));
}

#[test]
fn skip_removes_rows() {
    let o = run(&["bounds", "--n", "2", "--skip", "quantum", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.lines().any(|l| l.starts_with("quantum")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("hybrid,3,eq,3")), "{text}");
}

#[test]
fn bounds_json_three_parties() {
    let o = run(&["bounds", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["all_match"], true);
    assert_eq!(v["hybrid"], 6);
}

#[test]
fn graph_and_theta() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let o = run(&["graph", "build", "--n", "2", "--emit", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(g["alpha"], 3);
    assert_eq!(g["edges"].as_array().unwrap().len(), 12);

    let t = run(&["graph", "theta", "--input", path.to_str().unwrap()]);
    assert_eq!(t.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&t.stdout).unwrap();
    assert!((v["theta"].as_f64().unwrap() - (2.0 + 2f64.sqrt())).abs() < 1e-6, "{v}");

    let dot = run(&["graph", "build", "--n", "2", "--format", "dot"]);
    assert!(stdout(&dot).starts_with("graph"));
}

#[test]
fn scenario_csv_lists_terms() {
    let o = run(&["scenario", "--n", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 8);
}

#[test]
fn unsupported_format_is_usage_error() {
    assert_eq!(run(&["verify", "doubling", "--n", "2", "--format", "dot"]).status.code(), Some(2));
}
