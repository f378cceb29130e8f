//! End-to-end runs of the command-line tool.

use std::process::Command;

fn geothresh(args: &[&str]) -> (i32, serde_json::Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_geothresh")).args(args).output().unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap_or(-1), json)
}

#[test]
fn config_file_runs_and_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.json");
    let cfg = dir.path().join("curve.toml");
    std::fs::write(
        &cfg,
        format!(
            "kind = \"threshold\"\nspace = \"torus:1\"\nn = 2\nproperty = \"edge\"\nradii = [0.1, 0.2, 0.3]\ntrials = 4000\nseed = 3\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let (code, json) = geothresh(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["estimates"].as_array().unwrap().len(), 3);
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(saved["config_hash"], json["config_hash"]);
}

#[test]
fn records_do_not_depend_on_worker_count() {
    let args = ["amplify", "--n", "12", "--r", "0.05", "--t", "1", "--trials", "400", "--seed", "5"];
    let strip = |mut v: serde_json::Value| {
        v["wall_clock_seconds"] = 0.into();
        v.to_string()
    };
    let (c1, one) = geothresh(&[&args[..], &["--workers", "1"]].concat());
    let (c4, four) = geothresh(&[&args[..], &["--workers", "4"]].concat());
    assert_eq!((c1, c4), (0, 0));
    assert_eq!(strip(one), strip(four));
}

#[test]
fn curve_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let (code, _) = geothresh(&[
        "threshold", "--space", "torus:1", "--n", "2", "--property", "edge", "--radii", "0.1,0.3", "--trials", "100",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("label,radius,value"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(geothresh(&["threshold", "--space", "klein:2"]).0, 2);
    assert_eq!(geothresh(&["amplify", "--space", "sphere:2", "--r", "0.1"]).0, 2);
    assert_eq!(geothresh(&[]).0, 2);
    assert_eq!(geothresh(&["certify-generators", "--a", "1,1;0,1", "--b", "1,2;1,3"]).0, 1);
    assert_eq!(geothresh(&["sandwich", "--negative-control", "--trials", "200"]).0, 1);
    let (code, json) = geothresh(&["certify-generators"]);
    assert_eq!(code, 0);
    assert_eq!(json["derived"]["generators"]["certificate"]["words_checked"], 1_062_880);
}

#[test]
fn spectral_subcommands() {
    let (code, json) = geothresh(&["spectral", "orbit", "--depth", "4", "--starts", "10"]);
    assert_eq!(code, 0, "{json}");
    let (code, json) = geothresh(&["spectral", "contraction", "--d", "3", "--trials", "50"]);
    assert_eq!(code, 0, "{json}");
    let (code, json) = geothresh(&["spectral", "discrete", "--modulus", "5"]);
    assert_eq!(code, 0);
    assert_eq!(json["derived"]["report"]["mean_zero_norm"].as_f64().unwrap(), 1.0);
    let (code, _) = geothresh(&["maxcorr", "--m", "3", "--mc-samples", "20000"]);
    assert_eq!(code, 0);
}
