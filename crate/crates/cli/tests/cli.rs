use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colphase")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("colphase-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn verify_halving_on_triangle() {
    let o = run(&["oracle", "verify-halving", "--graph", data("c3.txt").to_str().unwrap(), "--q", "2", "--k", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("Z_B=44 Z_col=44 OK"));
}

#[test]
fn counts_colourings() {
    let fano = run(&["oracle", "count-colourings", "--hypergraph", data("fano.txt").to_str().unwrap(), "--q", "2"]);
    assert_eq!(stdout(&fano).lines().next(), Some("0"));
    let k4 = run(&["oracle", "count-colourings", "--hypergraph", data("single_edge_K4.txt").to_str().unwrap(), "--q", "3"]);
    assert_eq!(stdout(&k4).lines().next(), Some("78"));
}

#[test]
fn first_moment_threshold() {
    let o = run(&["firstmoment", "threshold", "--q", "2", "--K", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("Δ ≥ 10"));
    assert!(out.contains("bound(Δ=9)") && out.contains("bound(Δ=10)"));
}

#[test]
fn disequality_gadget_from_fano() {
    let dir = scratch("diseq");
    let o = run(&[
        "gadget", "disequality", "--seed", data("fano.txt").to_str().unwrap(), "--q", "2",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("deg(u)=1 C0=5"));
    let transcript = std::fs::read_to_string(dir.join("verification.txt")).unwrap();
    assert!(transcript.contains("0 5\n5 0\n"));

    let gadget = dir.join("gadget.txt");
    let ok = run(&["gadget", "verify", "--gadget", gadget.to_str().unwrap()]);
    assert!(ok.status.success());

    // a wrong stored C0 is a verification failure
    let text = std::fs::read_to_string(&gadget).unwrap().replace("disequality 5", "disequality 6");
    let tampered = dir.join("tampered.txt");
    std::fs::write(&tampered, text).unwrap();
    let bad = run(&["gadget", "verify", "--gadget", tampered.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(5));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn exit_codes_and_error_json() {
    let missing = run(&["oracle", "count-colourings", "--hypergraph", "no-such-file.txt", "--q", "2"]);
    assert_eq!(missing.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["error"], "invalid_input");

    let budget = run(&[
        "oracle", "count-colourings", "--hypergraph", data("fano.txt").to_str().unwrap(), "--q", "2", "--budget", "10",
    ]);
    assert_eq!(budget.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&budget.stderr).unwrap();
    assert_eq!(err["exit_code"], 3);

    assert_eq!(run(&["phase", "fixpoints"]).status.code(), Some(2));
}

#[test]
fn manifests_are_reproducible() {
    let args = |dir: &Path| {
        vec![
            "phase".to_string(), "fixpoints".into(), "--q".into(), "4".into(), "--k".into(), "2".into(),
            "--d".into(), "80".into(), "--out-dir".into(), dir.to_str().unwrap().into(),
        ]
    };
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let dir = scratch(&format!("manifest-{name}"));
        let a = args(&dir);
        let o = run(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success());
        let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["schema_version"], 1);
        assert_eq!(m["precision_bits"], 256);
        outputs.push(m["outputs"].clone());
        let _ = std::fs::remove_dir_all(&dir);
    }
    assert!(outputs[0]["fixpoints.json"]["sha256"].is_string());
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn symmetric_fixpoint_is_below_d() {
    let o = run(&["phase", "fixpoints", "--q", "4", "--k", "2", "--d", "80", "--family", "q00-sym", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("below_d=true"));
}

#[test]
fn intersection_for_q6_k3() {
    let o = run(&["curves", "intersect", "--q", "6", "--k", "3", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("x>y>y_E=true"));
}
