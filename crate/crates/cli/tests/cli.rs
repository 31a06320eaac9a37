//! End-to-end checks of the binary: JSON outputs, CSV emission and the exit
//! code contract.

use std::process::{Command, Output};

fn skiks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skiks"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn validate_canonical_params() {
    let out = skiks(&["validate"]);
    let v = stdout_json(&out);
    assert_eq!(v["valid"], true);
    assert_eq!(v["params"]["h"], 3.0);
}

#[test]
fn validate_rejects_bad_tuple_with_config_exit() {
    let dir = std::env::temp_dir().join("skiks-cli-test-params");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"h": 3.0, "cur": 0.0, "l": 4.0, "s": 2.0, "s_resid": 5.0, "exc": 2.0, "inh": -2.0}"#,
    )
    .unwrap();
    let out = skiks(&["validate", "--params", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid-params"));
}

#[test]
fn query1_answers_and_writes_a_trace() {
    let dir = std::env::temp_dir().join("skiks-cli-test-trace");
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("q1.csv");
    let out = skiks(&[
        "query1", "--goal", "4", "--trials", "50", "--horizon", "12",
        "--trace", trace.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["letter"], "delta");
    assert_eq!(v["letter_index"], 4);
    assert!(v["decision"]["terrible"].as_f64().unwrap() >= 0.95);

    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("round,n0,"));
    assert!(csv.lines().count() > 30, "one row per simulated round");
}

#[test]
fn query1_goal_out_of_range_is_a_domain_error() {
    let out = skiks(&["query1", "--goal", "99", "--trials", "1", "--horizon", "8"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("goal-out-of-range"));
}

#[test]
fn query2_counts_from_the_named_letter() {
    let out = skiks(&[
        "query2", "--letter", "alpha", "--goal", "3", "--trials", "50", "--horizon", "12",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["letter"], "delta");

    let out = skiks(&["query2", "--letter", "omega", "--goal", "1", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(3), "no successor after the last letter");
}

#[test]
fn parse_judges_sentences() {
    let out = skiks(&[
        "parse", "--sentence", "boy kicks ball", "--trials", "100", "--horizon", "12",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["parse"]["template"], "svo");
    assert_eq!(v["parse"]["bindings"]["subject"], "boy");
    assert_eq!(v["parse"]["bindings"]["verb"], "kicks");
    assert_eq!(v["parse"]["bindings"]["object"], "ball");
    assert!(v["judgment"]["pleasant"].as_f64().unwrap() >= 0.95);
    assert_eq!(v["story"], "story:svo:boy kicks ball");
}

#[test]
fn unsettled_sentences_use_the_grammar_exit_code() {
    let out = skiks(&["parse", "--sentence", "boy", "--no-judge"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("incomplete"));

    let out = skiks(&["parse", "--sentence", "banana banana", "--no-judge"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-candidates"));

    let out = skiks(&["parse", "--sentence", "boy ghost", "--no-judge"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown-word"));
}

#[test]
fn sweep_emits_one_row_per_goal_and_the_affine_model() {
    let out = skiks(&["sweep", "--trials", "1", "--horizon", "12"]);
    assert!(out.status.success());
    let csv = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "goal,letter,detection_round,latency_rounds");
    assert_eq!(lines.len(), 25, "header plus 24 goals");
    assert!(lines[4].starts_with("4,delta,"));

    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("d = 9"), "measured slope reported: {stderr}");
}

#[test]
fn run_and_cascade_consume_raw_specs() {
    let dir = std::env::temp_dir().join("skiks-cli-test-raw");
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("net.json");
    std::fs::write(
        &spec,
        r#"{
            "neurons": [
                {"kind": "deterministic-threshold", "threshold": 1.0, "tags": ["concept"]},
                {"kind": "deterministic-threshold", "threshold": 2.0, "tags": ["decision"]}
            ],
            "edges": [
                {"src": 0, "dst": 1, "weight": 3.0},
                {"src": 1, "dst": 1, "weight": 3.0}
            ],
            "signals": [{"neurons": [0], "weight": 2.0, "start_round": 1, "duration": 2}],
            "concepts": {"x": [0], "yes": [1]}
        }"#,
    )
    .unwrap();

    let out = skiks(&["run", "--spec", spec.to_str().unwrap(), "--rounds", "6"]);
    assert!(out.status.success());
    let csv = String::from_utf8_lossy(&out.stdout);
    assert_eq!(csv.lines().count(), 8, "header plus 7 states");

    let out = skiks(&[
        "cascade", "--spec", spec.to_str().unwrap(), "--start", "x",
        "--trials", "10", "--horizon", "8",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["distribution"]["yes"], 1.0);
    assert_eq!(v["stabilized"], true);

    let out = skiks(&["cascade", "--spec", spec.to_str().unwrap(), "--start", "nope"]);
    assert_eq!(out.status.code(), Some(3));

    let out = skiks(&["run", "--spec", "/definitely/missing.json"]);
    assert_eq!(out.status.code(), Some(2));
}
