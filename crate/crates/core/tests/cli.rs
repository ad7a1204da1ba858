use std::path::PathBuf;
use std::process::{Command, Output};

use pavcheck::report::{replay, TraceFile};

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn pav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pav")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_exit_codes() {
    let v1 = config("v1.cfg");
    let o = pav(&[
        "verify",
        "--config",
        &v1,
        "--query",
        "E<> MixTeller(0).passed_audit",
        "--corrupt-mixer",
        "0",
        "--search",
        "dfs",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("SATISFIED\n"));

    let o = pav(&["verify", "--config", &v1, "--query", "A[] not Voter(0).punished"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("NOT SATISFIED\n"));
}

#[test]
fn errors_exit_two() {
    let v1 = config("v1.cfg");
    let cases: [&[&str]; 6] = [
        &["verify", "--config", &v1, "--query", "E<> ("],
        &["verify", "--config", &v1, "--query", "E<> Nobody(0).idle"],
        &["verify", "--config", "/no/such/file.cfg", "--query", "E<> Sys.results"],
        &[
            "verify",
            "--config",
            &v1,
            "--query",
            "E<> Sys.results",
            "--corrupt-mixer",
            "7",
        ],
        &[
            "verify",
            "--config",
            &v1,
            "--query",
            "E<> Sys.results",
            "--search",
            "sideways",
        ],
        &[
            "rf",
            "--config",
            &v1,
            "--voter",
            "0",
            "--candidate",
            "1",
            "--variant",
            "medium",
        ],
    ];
    for args in cases {
        let o = pav(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn counterexample_trace_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.json");
    let o = pav(&[
        "verify",
        "--config",
        &config("v2.cfg"),
        "--query",
        "A[] not Voter(0).punished",
        "--search",
        "dfs",
        "--trace",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = std::fs::read_to_string(&out).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["config", "query", "verdict", "steps", "loop_start"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    for key in ["action", "participants", "bindings", "state"] {
        assert!(json["steps"][1].get(key).is_some(), "{key}");
    }
    assert_eq!(json["verdict"], "NOT SATISFIED");
    let file = TraceFile::from_json(&text).unwrap();
    assert_eq!(file.steps.last().unwrap().state["Voter(0)"], "punished");
    let r = replay(&file).unwrap();
    assert_eq!(r.config.v_total, 2);
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |n: usize| {
        let path = dir.path().join(format!("r{n}.json"));
        let o = pav(&[
            "verify",
            "--config",
            &config("v1.cfg"),
            "--query",
            "E<> Sys.results",
            "--search",
            "rdfs",
            "--seed",
            "42",
            "--deterministic",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = run(0);
    assert_eq!(a, run(1));
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains("wall_time_ms"));
    assert!(text.contains("\"seed\": 42"));
    assert!(text.contains("\"search\": \"rdfs\""));
}

#[test]
fn simulate_zero_steps_prints_the_initial_state() {
    let o = pav(&["simulate", "--config", &config("v1.cfg"), "--steps", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("initial\n"));
    assert!(!text.contains("step "));
    assert!(text.contains("  Voter(0) = idle\n"));
    assert!(text.contains("  Coercer(0) = loop\n"));
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate",
        "--config",
        &config("v2.cfg"),
        "--steps",
        "40",
        "--seed",
        "9",
    ];
    let (a, b) = (pav(&args), pav(&args));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("step 40: "));
}

#[test]
fn explore_writes_stats() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.json");
    let o = pav(&[
        "explore",
        "--config",
        &config("rf_v1.cfg"),
        "--stats-json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(json["states"], 1290);
    assert_eq!(json["truncated"], false);
}

#[test]
fn rf_variants() {
    let cfg = config("rf_v1.cfg");
    let rf = |variant: &str, extra: &[&str]| {
        let mut args = vec![
            "rf",
            "--config",
            &cfg,
            "--voter",
            "0",
            "--candidate",
            "1",
            "--variant",
            variant,
        ];
        args.extend_from_slice(extra);
        pav(&args).status.code()
    };
    assert_eq!(rf("weak", &[]), Some(0));
    assert_eq!(rf("strong", &[]), Some(1));
    // The published tally gives the single vote away.
    assert_eq!(rf("weak", &["--observe", "Coercer", "--observe", "vote_sum"]), Some(1));
}
