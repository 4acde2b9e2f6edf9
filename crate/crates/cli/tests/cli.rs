use std::process::{Command, Output};

use serde_json::Value;

fn ul(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ul")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn tree_json_ball() {
    let o = ul(&["tree", "--p", "3", "--radius", "2", "--center-type", "3", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 113);
    assert_eq!(v["edges"].as_array().unwrap().len(), 112);
    assert!(String::from_utf8_lossy(&o.stderr).contains("vertices 113"));
}

#[test]
fn tree_to_file_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball.dot");
    let o = ul(&["tree", "--p", "3", "--radius", "1", "--format", "dot", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "vertices 5 edges 4 type1 1 type3 4");
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("graph tree {"));
    assert_eq!(dot.matches(" -- ").count(), 4);

    let o = ul(&["tree", "--p", "3", "--radius", "0", "--format", "dot"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("label=").count(), 1);
}

#[test]
fn exit_codes() {
    let o = ul(&["tree", "--p", "2", "--radius", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p must be odd"));
    assert_eq!(ul(&["tree", "--p", "9", "--radius", "1"]).status.code(), Some(1));
    assert_eq!(ul(&["tree", "--p", "3", "--center-type", "2"]).status.code(), Some(1));
    assert_eq!(ul(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ul(&["tree", "--p", "3", "--radius", "12"]).status.code(), Some(2));
    assert_eq!(ul(&["--max-enum", "100", "fermat", "--p", "3", "--m", "2"]).status.code(), Some(2));
    assert_eq!(ul(&["strata", "--p", "3", "--l", "5"]).status.code(), Some(1));
    assert_eq!(ul(&["verify", "--p", "3", "--skip", "no.such.check"]).status.code(), Some(1));
    assert_eq!(ul(&["--help"]).status.code(), Some(0));
}

#[test]
fn strata_tables() {
    let o = ul(&["strata", "--p", "3", "--l", "3", "--m", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "p,l,m,depth,count\n3,3,1,0,28\n");
    let o = ul(&["strata", "--p", "3", "--l", "3", "--m", "2"]);
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    assert_eq!(rows[0], "3,3,2,0,28");
    let o = ul(&["strata", "--p", "3", "--l", "1", "--m", "1"]);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn fermat_counts() {
    assert_eq!(stdout(&ul(&["fermat", "--p", "3", "--m", "1"])).trim(), "28");
    assert_eq!(stdout(&ul(&["fermat", "--p", "5"])).trim(), "126");
}

#[test]
fn verify_is_deterministic() {
    let a = ul(&["verify", "--p", "3", "--seed", "42"]);
    let b = ul(&["verify", "--p", "3", "--seed", "42"]);
    assert!(a.status.success(), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.lines().all(|l| l.starts_with("PASS ") || l.starts_with("SKIP ")));
    assert!(out.lines().count() >= 13);
}

#[test]
fn verify_with_skip_and_json() {
    let o = ul(&["verify", "--p", "5", "--skip", "localring.membership", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let checks = v[0]["checks"].as_array().unwrap();
    let skipped: Vec<&str> =
        checks.iter().filter(|c| c["status"] == "SKIP").map(|c| c["name"].as_str().unwrap()).collect();
    assert!(skipped.contains(&"localring.membership"));
    assert!(checks.iter().all(|c| c["status"] != "FAIL"));
}

#[test]
fn localring_reports() {
    let o = ul(&["localring", "--p", "3", "--check", "tangent"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["R_M"], 2);
    assert_eq!(v["jacobian_rank"], 4);
    for check in ["vandermonde", "eta", "component"] {
        let o = ul(&["localring", "--p", "5", "--check", check]);
        assert!(o.status.success(), "{check}");
    }

    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("witness.txt");
    let o = ul(&["localring", "--p", "3", "--check", "membership", "--degree-bound", "8", "--witness", w.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["status"], "member");
    let file = std::fs::read_to_string(&w).unwrap();
    assert_eq!(file.lines().count(), v["witness"].as_array().unwrap().len());

    // below degree p+1 neither ideal can contain the product
    let o = ul(&["localring", "--p", "3", "--check", "membership", "--degree-bound", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["status"], "unknown");
}
