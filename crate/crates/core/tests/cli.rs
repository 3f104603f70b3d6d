use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EPISODE_COLUMNS: &str = "seed,delta_dapp,strategy,intent_based,direction,pdr,throughput_bps,latency_ms,jitter_ms,\
prb_usage_pct,decision_time_us,candidate_set_mean,iss_mean,f0_mean,f1_mean,f2_mean";

fn ibran(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibran")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn table2() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/table2.toml").display().to_string()
}

fn dataset(dir: &Path) -> String {
    let d = dir.join("data");
    ok(ibran(&["gen-dataset", "--out", d.to_str().unwrap(), "--count", "20", "--seed", "2"]));
    format!("dataset_dir={}", d.display())
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn run_writes_the_three_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let out = tmp.path().join("out");
    ok(ibran(&[
        "run", "--config", &table2(), "--set", &data, "--set", "episode_s=0.2", "--seed", "3",
        "--delta-dapp", "1,4", "--episodes", "2", "--intent-based", "--strategy", "pf",
        "--out", out.to_str().unwrap(),
    ]));
    let rows = lines(&out.join("episodes.csv"));
    assert_eq!(rows[0], EPISODE_COLUMNS);
    assert_eq!(rows.len(), 1 + 2 * 2 * 2);
    assert!(rows[1..].iter().all(|r| r.contains(",pf,true,")));

    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["embedding_provider"], "surrogate-hist72");
    assert_eq!(summary["groups"].as_array().unwrap().len(), 4);

    let msgs = lines(&out.join("messages.csv"));
    assert_eq!(msgs[0], "seed,delta_dapp,strategy,intent_based,tti,service_model,msg_type,direction,payload_fields");
    assert!(msgs.iter().any(|m| m.contains("E3 INDICATION")));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let run = |name: &str| {
        let out = tmp.path().join(name);
        ok(ibran(&[
            "run", "--set", &data, "--set", "episode_s=0.3", "--set", "measure_decision_time=false",
            "--delta-dapp", "2", "--episodes", "2", "--out", out.to_str().unwrap(),
        ]));
        ["episodes.csv", "summary.json", "messages.csv"].map(|f| std::fs::read(out.join(f)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn sweep_covers_every_strategy_and_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let out = tmp.path().join("out");
    ok(ibran(&["run", "--set", &data, "--set", "episode_s=0.1", "--sweep", "--out", out.to_str().unwrap()]));
    let rows = lines(&out.join("episodes.csv"));
    assert_eq!(rows.len(), 1 + 5 * 2 * 2);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["deltas"].as_array().unwrap().len(), 5 * 2);
}

#[test]
fn invalid_input_fails_with_a_named_field() {
    let out = ibran(&["run", "--set", "delta_dapp=0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta_dapp"));

    let out = ibran(&["run", "--set", "no_such_key=1"]);
    assert!(!out.status.success());

    let out = ibran(&["run", "--set", "dataset_dir=/nonexistent/ibran"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/ibran"));
}

#[test]
fn embedding_command_is_used_and_recorded() {
    if Command::new("python3").arg("--version").output().is_err() {
        eprintln!("python3 not found; skipping");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(tmp.path());
    let out = tmp.path().join("out");
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mock_sidecar.py");
    let cmd = format!("python3 '{}'", script.display());
    ok(ibran(&["run", "--set", &data, "--set", "episode_s=0.2", "--embedding-cmd", &cmd, "--out", out.to_str().unwrap()]));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["embedding_provider"], "sidecar:mock-model");
}
