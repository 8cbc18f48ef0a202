//! The `tnmoments` binary end to end: outputs and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tnmoments")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tnmoments-bin-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn weingarten_table_and_refusal() {
    let o = run(&["weingarten", "--k", "1", "--q", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["entries"][0]["numerator"], "1");
    assert_eq!(v["result"]["entries"][0]["denominator"], "4");
    assert_eq!(v["tool"], "tnmoments");

    let o = run(&["weingarten", "--k", "2", "--q", "4", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.contains(",1,15,") && text.contains(",-1,60,"), "{text}");

    let o = run(&["weingarten", "--k", "7", "--q", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degree 7"));
}

#[test]
fn moment_values() {
    let o = run(&["moment", "--kind", "mps-d2", "--k", "2", "--d", "2", "--D", "2", "--s", "1", "--op-a", "pauli-z", "--op-b", "pauli-z"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["exact"]["numerator"], "1");
    assert_eq!(v["result"]["exact"]["denominator"], "375");
    assert_eq!(v["config"]["D"], 2);

    let o = run(&["moment", "--kind", "peps-d2", "--k", "1", "--d", "2", "--D", "4", "--geometry", "1,0,9,0,1", "--op-a", "identity", "--op-b", "identity", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("peps-d2,1,2,4,1,identity,identity,1,"));

    let o = run(&["moment", "--kind", "mps-d2", "--k", "1", "--d", "2", "--D", "2", "--geometry", "2,9,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let point = |k: usize, threshold: f64| {
        serde_json::json!({
            "kind": "mps-d2", "k": k, "d": 2, "D": 2, "s": 1,
            "op_a": "pauli-x", "op_b": "pauli-x", "samples": 500, "seed": 3, "threshold": threshold
        })
    };
    let path = scratch("campaign.json");
    std::fs::write(&path, serde_json::to_string(&vec![point(1, 4.0), point(2, 4.0)]).unwrap()).unwrap();
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["result"]["pass"], true);
    assert_eq!(lines[1]["config"]["seed"], 3);

    let o = run(&["verify", path.to_str().unwrap(), "--threshold", "0.001"]);
    assert_eq!(o.status.code(), Some(1));

    std::fs::write(&path, "[]").unwrap();
    assert_eq!(run(&["verify", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(run(&["verify", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sampled_gates_pass_gatecheck_and_cnot_fails() {
    let gate = scratch("gate.json");
    let o = run(&["sample", "--kind", "dual", "--seed", "5", "--out", gate.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(run(&["gatecheck", gate.to_str().unwrap(), "--d", "2"]).status.code(), Some(0));

    let swap = "[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[1,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]]";
    std::fs::write(&gate, swap).unwrap();
    assert_eq!(run(&["gatecheck", gate.to_str().unwrap(), "--d", "2"]).status.code(), Some(0));

    let cnot = "[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]],[[0,0],[0,0],[1,0],[0,0]]]";
    std::fs::write(&gate, cnot).unwrap();
    let o = run(&["gatecheck", gate.to_str().unwrap(), "--d", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["result"]["residuals"]["spatial_left"].as_f64().unwrap() > 0.5);

    assert_eq!(run(&["gatecheck", gate.to_str().unwrap(), "--d", "3"]).status.code(), Some(2));
    std::fs::write(&gate, "[[1,2]]").unwrap();
    assert_eq!(run(&["gatecheck", gate.to_str().unwrap(), "--d", "2"]).status.code(), Some(2));
}

#[test]
fn haar_samples_are_reproducible() {
    let a = stdout(&run(&["sample", "--q", "3", "--count", "2", "--seed", "9"]));
    let b = stdout(&run(&["sample", "--q", "3", "--count", "2", "--seed", "9"]));
    assert_eq!(a, b);
    let v: Vec<Vec<Vec<[f64; 2]>>> = serde_json::from_str(&a).unwrap();
    assert_eq!((v.len(), v[0].len()), (2, 3));
}
