use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn lazynd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lazynd"))
        .args(args)
        .env_remove("LAZYND_DEPTH_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&lazynd(&all))).unwrap()
}

#[test]
fn perms_counts() {
    assert_eq!(stdout(&lazynd(&["perms", "--algo", "merge", "--n", "3", "--count-only"])).trim(), "6");
    assert_eq!(stdout(&lazynd(&["perms", "--algo", "quick-filter", "--n", "4", "--count-only"])).trim(), "4225");
    let head = lazynd(&["perms", "--algo", "insertion", "--n", "5", "--head-only", "--count-only"]);
    assert_eq!(stdout(&head).trim(), "16");
}

#[test]
fn perms_listing_and_stats() {
    let out = stdout(&lazynd(&["perms", "--algo", "quick-filter", "--n", "2", "--stats"]));
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(&lines[..4], ["[2,1]", "[2,1,2]", "[1]", "[1,2]"]);
    assert!(lines[4].starts_with("choice_expansions="));
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let out = lazynd(&["perms", "--algo", "bogo", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_envelope_is_stable() {
    let v = json(&["perms", "--algo", "insertion", "--n", "3"]);
    for key in ["command", "config", "result", "stats", "elapsed_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["choice_expansions", "leaves", "failures"] {
        assert!(v["stats"][key].is_u64(), "missing stats.{key}");
    }
    assert_eq!(v["command"], "perms");
    assert_eq!(v["result"]["count"], 6);
    assert_eq!(v["stats"]["leaves"], 6);
}

#[test]
fn dist_studies() {
    let p = |args: &[&str]| json(args)["result"]["probability"].as_f64().unwrap();
    assert!((p(&["dist", "allsix", "--n", "3"]) - 1.0 / 216.0).abs() < 1e-15);
    assert!((p(&["dist", "grass", "--query", "cond-rain-given-wet"]) - 0.357687675632).abs() < 1e-9);
    assert!((p(&["dist", "santa", "--variant", "naive", "--players", "3"]) - 2.0 / 3.0).abs() < 1e-12);
    assert!((p(&["dist", "santa", "--variant", "repeat", "--limit", "20"]) - 0.2500009536026171).abs() < 1e-9);
    assert_eq!(p(&["dist", "palindrome", "--n", "5"]), 0.25);
    assert_eq!(p(&["dist", "bb", "--n", "10"]), 0.859375);
    assert_eq!(p(&["dist", "fiveorsix", "--n", "2"]), 1.0 / 9.0);
}

#[test]
fn text_probability_has_twelve_digits() {
    let out = stdout(&lazynd(&["dist", "allsix", "--n", "3"]));
    assert_eq!(out.lines().next(), Some("0.00462962962963"));
}

#[test]
fn depth_cap_errors_exit_nonzero() {
    let out = lazynd(&["dist", "allsix", "--n", "50", "--depth-cap", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget of 20"));
    let env = Command::new(env!("CARGO_BIN_EXE_lazynd"))
        .args(["dist", "allsix", "--n", "50"])
        .env("LAZYND_DEPTH_CAP", "20")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(1));
}

#[test]
fn tree_presets() {
    let filter = stdout(&lazynd(&["tree", "filter-coin", "--n", "2"]));
    assert_eq!(
        filter,
        "?1 42 <= 1\n+- L: ?2 42 <= 2\n|  +- L: [1,2]\n|  `- R: [1]\n`- R: ?3 42 <= 2\n   +- L: [2]\n   `- R: []\n"
    );
    assert_eq!(json(&["tree", "insertion-sort-3"])["result"]["leaves"], 6);
    assert_eq!(json(&["tree", "selection-pickmin-3"])["result"]["leaves"], 6);
}

#[test]
fn tree_json_round_trips() {
    let text = stdout(&lazynd(&["tree", "insertion-sort-3"]));
    let saved = stdout(&lazynd(&["tree", "insertion-sort-3", "--format", "json"]));
    let mut child = Command::new(env!("CARGO_BIN_EXE_lazynd"))
        .args(["tree", "--from-json", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(saved.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(stdout(&out), text);
}

#[test]
fn laws_pass_and_report() {
    let v = json(&["laws", "all", "--seed", "1", "--budget", "50"]);
    assert_eq!(v["result"]["passed"], true);
    let sharing = stdout(&lazynd(&["laws", "sharing"]));
    assert!(sharing.contains("PASS sharing examples"));
    let monad = lazynd(&["laws", "monad", "--budget", "20"]);
    assert!(monad.status.success());
}
