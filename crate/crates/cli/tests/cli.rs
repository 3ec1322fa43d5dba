use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn exteq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exteq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_wall_time(mut v: Value) -> Value {
    if let Some(d) = v.get_mut("diagnostics").and_then(Value::as_object_mut) {
        d.remove("wall_time_seconds");
    }
    v
}

#[test]
fn verify_accepts_gw_star() {
    let out = exteq(&["verify", &path("gw.json"), &path("gw_star.json"), "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("worst_violation"));
    assert!(text.contains("accepted"));
}

#[test]
fn verify_rejects_uniform_and_names_inequality() {
    let out = exteq(&["verify", &path("gw.json"), &path("uniform.json")]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("EU(Defender) >= EU(Defender plays Down)"), "{text}");

    let out = exteq(&["--json", "verify", &path("gw.json"), &path("uniform.json")]);
    assert_eq!(out.status.code(), Some(3));
    let v = json_stdout(&out);
    let report = &v["reports"][0];
    assert_eq!(report["accepted"], Value::Bool(false));
    assert_eq!(report["worst"]["kind"], "action");
    assert_eq!(report["worst"]["player"], 0);
    assert_eq!(report["worst"]["action"], 1);
    assert_eq!(report["worst_violation"].as_f64().unwrap(), -0.125);
}

#[test]
fn solve_reproduces_gw() {
    let out = exteq(&["--json", "solve", &path("gw.json"), "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let s = std::f64::consts::SQRT_2;
    let expected = [1.0 - 1.0 / s, 2.0 - s, 1.0 / s, s - 1.0];
    let profiles = v["profiles"].as_array().unwrap();
    assert!(!profiles.is_empty());
    let p = &profiles[0];
    let got = [
        p["strategies"][0][0].as_f64().unwrap(),
        p["strategies"][1][0].as_f64().unwrap(),
        p["priors"][0][0].as_f64().unwrap(),
        p["priors"][1][0].as_f64().unwrap(),
    ];
    for (g, e) in got.iter().zip(expected) {
        assert!((g - e).abs() < 1e-6, "{got:?}");
    }
    assert_eq!(v["command"], "solve");
    assert_eq!(v["game_digest"].as_str().unwrap().len(), 64);
    assert!(v["diagnostics"]["wall_time_seconds"].is_number());
}

#[test]
fn solve_is_deterministic_and_out_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("result.json");
    let args = ["--json", "solve", &path("single_player_irregular.json"), "--seed", "3", "--restarts", "8"];
    let a = exteq(&args);
    let mut with_out = args.to_vec();
    let out_str = out_path.display().to_string();
    with_out.extend(["--out", &out_str]);
    let b = exteq(&with_out);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(without_wall_time(json_stdout(&a)), without_wall_time(json_stdout(&b)));

    let saved = exteq::io::load_result(&out_path).unwrap();
    let printed: exteq::io::RunResult = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(saved, printed);
}

#[test]
fn regret_prints_tables() {
    let out = exteq(&[
        "--json",
        "regret",
        &path("single_player_irregular.json"),
        &path("single_player_irregular_star.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["players"][0]["regret"], serde_json::json!([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]));
    assert_eq!(v["players"][0]["er"].as_f64().unwrap(), 0.5);

    let out = exteq(&["regret", &path("gw.json"), &path("gw_star.json")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.585786"), "{text}");
}

#[test]
fn scan_finds_irregular_equilibrium() {
    let out = exteq(&["--json", "scan", &path("single_player_irregular.json"), "--resolution", "10", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let profiles = v["profiles"].as_array().unwrap();
    assert_eq!(profiles.len(), 1);
    assert_eq!(profiles[0]["priors"][0], serde_json::json!([0.5, 0.0, 0.5]));

    let out = exteq(&["scan", &path("gw.json"), "--resolution", "1000", "--budget", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nff_reports_priors() {
    let out = exteq(&[
        "--json",
        "nff",
        &path("single_player_irregular.json"),
        &path("single_player_irregular_star.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["diagnostics"]["pure_prior_players"], serde_json::json!([]));

    let out = exteq(&["nff", &path("gw.json"), &path("uniform.json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gw_bayes_table() {
    let out = exteq(&["--json", "gw-bayes"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["bayes"].as_array().unwrap().len(), 11);
    assert_eq!(v["no_common_prior"]["holds"], Value::Bool(true));
    let text = String::from_utf8(exteq(&["gw-bayes"]).stdout).unwrap();
    assert!(text.contains("as-if common priors"));
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(exteq(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(exteq(&["verify", "/nonexistent/game.json", "x.json"]).status.code(), Some(2));
    assert_eq!(exteq(&["solve", &path("gw.json"), "--damping", "7"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"players": 2, "actions": [2, 2], "states": 2,
            "utilities": [[[[1, 1], ["x", 0]], [[0, 1], [1, 1]]], [[[0, 0], [1, 1]], [[1, 0], [0, 0]]]]}"#,
    )
    .unwrap();
    let out = exteq(&["verify", bad.to_str().unwrap(), &path("uniform.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("utilities[0][0][1][0]"), "{err}");

    let profile = dir.path().join("p.json");
    std::fs::write(&profile, r#"{"strategies": [[0.5, 0.5]], "priors": [[0.5, 0.5]]}"#).unwrap();
    assert_eq!(exteq(&["verify", &path("gw.json"), profile.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn search_failure_exits_4() {
    let out = exteq(&[
        "solve",
        &path("gw.json"),
        "--restarts",
        "1",
        "--max-iterations",
        "1",
        "--no-fallback",
    ]);
    assert_eq!(out.status.code(), Some(4));
}
