use std::path::Path;
use std::process::Command;

fn cfcolor(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cfcolor"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn gen_run_bench_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, err) = cfcolor(
        &["gen", "--kind", "unit_square", "--n", "60", "--delete-ratio", "0.3", "--seed", "2", "--out", "w.jsonl"],
        d,
    );
    assert_eq!(code, 0, "{err}");
    let (code, err) = cfcolor(
        &["run", "--structure", "square", "--workload", "w.jsonl", "--verify", "oracle-every-step", "--report", "out/r.json"],
        d,
    );
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("out/r.json")).unwrap()).unwrap();
    for key in ["config", "steps", "summary"] {
        assert!(report.get(key).is_some(), "{key}");
    }
    assert!(report["summary"]["violations"].as_array().unwrap().is_empty());
    assert!(d.join("out/r.csv").exists());

    let (code, err) = cfcolor(
        &["bench", "--structure", "anchored", "--sizes", "32,64", "--seeds", "0,1", "--report", "b.json"],
        d,
    );
    assert_eq!(code, 0, "{err}");
    let b: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("b.json")).unwrap()).unwrap();
    assert_eq!(b["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn gen_to_stdout_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_cfcolor"))
            .args(["gen", "--kind", "point_1d", "--n", "20", "--seed", "5"])
            .current_dir(dir.path())
            .output()
            .unwrap()
            .stdout
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 20);
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(cfcolor(&["frobnicate"], d).0, 3);
    assert_eq!(cfcolor(&["run", "--structure", "square", "--workload", "missing.jsonl", "--report", "r.json"], d).0, 3);
    assert_eq!(
        cfcolor(&["gen", "--kind", "universe_rect", "--universe", "16", "--extent", "17", "--n", "3"], d).0,
        3
    );

    std::fs::write(d.join("bad.jsonl"), "{\"op\":\"delete\",\"id\":4}\n").unwrap();
    let (code, err) = cfcolor(&["run", "--structure", "anchored", "--workload", "bad.jsonl", "--report", "r.json"], d);
    assert_eq!(code, 3);
    assert!(err.contains("line 1"), "{err}");

    cfcolor(&["gen", "--kind", "point_1d", "--n", "5", "--delete-ratio", "1", "--out", "p.jsonl"], d);
    assert_eq!(cfcolor(&["run", "--structure", "square", "--workload", "p.jsonl", "--report", "r.json"], d).0, 3);
    assert_eq!(cfcolor(&["run", "--structure", "semi-interval", "--workload", "p.jsonl", "--report", "r.json"], d).0, 3);
}

#[test]
fn empty_workload_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("e.jsonl"), "").unwrap();
    let (code, err) = cfcolor(&["run", "--structure", "full-rect", "--workload", "e.jsonl", "--report", "r.json"], d);
    assert_eq!(code, 0, "{err}");
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert!(r["steps"].as_array().unwrap().is_empty());
}
