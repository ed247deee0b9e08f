use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evobserve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn pairs(v: &Value) -> Vec<(String, String)> {
    serde_json::from_value(v.clone()).unwrap()
}

#[test]
fn langton_steps_give_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.jsonl");
    assert!(run(&[
        "simulate",
        "--substrate",
        "langton",
        "--steps",
        "0",
        "--out",
        s(&out)
    ])
    .status
    .success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1);
    assert!(run(&[
        "simulate",
        "--substrate",
        "langton",
        "--steps",
        "5",
        "--out",
        s(&out)
    ])
    .status
    .success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 6);
}

#[test]
fn bad_parameters_exit_2() {
    assert_eq!(
        run(&["simulate", "--substrate", "langton", "--width", "8"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate", "--substrate", "nowhere"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let empty = file(dir.path(), "empty.jsonl", "");
    assert_eq!(run(&["observe", s(&empty)]).status.code(), Some(2));
    assert_eq!(run(&["verdict", s(&empty)]).status.code(), Some(2));
    let garbage = file(dir.path(), "garbage.jsonl", "{\n");
    assert_eq!(run(&["observe", s(&garbage)]).status.code(), Some(2));
    let cfg = file(dir.path(), "bad.toml", "[thresholds]\nepsilon = 2.0\n");
    let trace = dir.path().join("t.jsonl");
    run(&[
        "simulate",
        "--substrate",
        "langton",
        "--steps",
        "0",
        "--out",
        s(&trace),
    ]);
    assert_eq!(
        run(&["observe", s(&trace), "--config", s(&cfg)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["observe", s(&trace), "--window", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn string_world_dump_equals_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = file(dir.path(), "token.toml", "recognizer = \"token\"\n");
    for seed in ["1", "7", "42"] {
        let trace = dir.path().join(format!("sw{seed}.jsonl"));
        assert!(run(&[
            "simulate",
            "--substrate",
            "string-world",
            "--seed",
            seed,
            "--out",
            s(&trace)
        ])
        .status
        .success());
        let truth: Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("sw{seed}.jsonl.truth.json")))
                .unwrap(),
        )
        .unwrap();
        let out = run(&[
            "observe",
            s(&trace),
            "--config",
            s(&cfg),
            "--dump-relations",
        ]);
        assert!(out.status.success());
        let dump: Value = serde_json::from_slice(&out.stdout).unwrap();
        for key in ["recognition", "causal", "ancestorOf", "parentDeltaMin"] {
            assert_eq!(
                pairs(&dump["relations"][key]),
                pairs(&truth[key]),
                "seed {seed}: {key}"
            );
        }
    }
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for p in [&a, &b] {
        run(&[
            "simulate",
            "--substrate",
            "string-world",
            "--seed",
            "9",
            "--out",
            s(p),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn exhaustive_recognizer_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let trace = file(
        dir.path(),
        "two.jsonl",
        "{\"t\":0,\"atoms\":[{\"id\":\"x\",\"attrs\":{}}]}\n{\"t\":1,\"atoms\":[{\"id\":\"x\",\"attrs\":{}},{\"id\":\"y\",\"attrs\":{}}]}\n",
    );
    let cfg = file(dir.path(), "ex.toml", "recognizer = \"exhaustive\"\n");
    let out = run(&["observe", s(&trace), "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non_ignorance"));
    assert_eq!(
        run(&["verdict", s(&trace), "--config", s(&cfg)])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn verdicts_are_data() {
    let dir = tempfile::tempdir().unwrap();
    let script = file(
        dir.path(),
        "static.json",
        r#"{"genes":1,"states":4,"events":[{"op":"spawn","t":0,"tag":"a","genes":[3]}]}"#,
    );
    let trace = dir.path().join("static.jsonl");
    assert!(run(&[
        "simulate",
        "--substrate",
        "string-world",
        "--script",
        s(&script),
        "--out",
        s(&trace)
    ])
    .status
    .success());
    let cfg = file(
        dir.path(),
        "token.toml",
        "recognizer = \"token\"\ngenes = 1\n",
    );
    let json_out = dir.path().join("report.json");
    let out = run(&[
        "verdict",
        s(&trace),
        "--config",
        s(&cfg),
        "--out",
        s(&json_out),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("reproduction           FAIL"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(report["verdicts"][0]["axiom"], "reproduction");
    assert_eq!(report["verdicts"][0]["passed"], false);
}

#[test]
fn bench_with_empty_families_prints_nothing() {
    let out = run(&["bench", "--sides", "--lengths"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
}
