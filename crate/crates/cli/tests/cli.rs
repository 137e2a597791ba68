use std::path::Path;
use std::process::{Command, Output};

use pseudospec_cli::{RunConfig, RunManifest};
use serde_json::Value;

fn pseudospec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudospec"))
        .args(args)
        .current_dir(dir)
        .env_remove("PSEUDOSPEC_BUDGET")
        .output()
        .expect("binary runs")
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn string_example_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pseudospec(
        &[
            "flat-spectrum",
            "--set",
            "g=2",
            "--set",
            "box_radius=3",
            "--set",
            "lambda_min=-50",
            "--set",
            "lambda_max=1",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = read(tmp.path().join("run/result.csv"));
    let values: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    let pi2 = std::f64::consts::PI.powi(2);
    let expected = [-4.0 * pi2, -pi2, 0.0];
    assert_eq!(values.len(), 3);
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() <= 1e-12 * e.abs().max(1.0));
    }
    assert!(csv.starts_with("eigenvalue,multiplicity,witness_1\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn stable_spectrum_json() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pseudospec(
        &["ads3-stable", "--set", "c=1", "--set", "l_max=12", "--out", "s"],
        tmp.path(),
    );
    assert!(o.status.success());
    let json: Value = serde_json::from_str(&read(tmp.path().join("s/result.json"))).unwrap();
    assert_eq!(json["l_min"], 10);
    assert_eq!(json["eigenvalues"], serde_json::json!([80, 99, 120]));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, extra) in [
        ("stability-scan", vec!["--set", "samples=10"]),
        (
            "stability-experiment",
            vec!["--set", "samples=4", "--set", "word_radius=4"],
        ),
    ] {
        let mut outs = Vec::new();
        for run in ["a", "b"] {
            let dir = format!("{cmd}-{run}");
            let mut args = vec![cmd, "--seed", "17", "--out", &dir];
            args.extend(&extra);
            let o = pseudospec(&args, tmp.path());
            assert!(o.status.success(), "{}", stderr(&o));
            outs.push((
                read(tmp.path().join(&dir).join("result.csv")),
                read(tmp.path().join(&dir).join("result.json")),
            ));
        }
        assert_eq!(outs[0], outs[1], "{cmd}");
    }
}

#[test]
fn manifest_round_trips_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pseudospec(
        &[
            "preset",
            "no-stable-flat",
            "--seed",
            "5",
            "--set",
            "samples=12",
            "--out",
            "first",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: RunManifest = serde_json::from_str(&read(tmp.path().join("first/manifest.json"))).unwrap();
    assert_eq!(manifest.config.seed, 5);
    assert_eq!(manifest.config.parameters["samples"], 12);
    assert!(manifest.tolerances.contains_key("match_tol"));
    assert_eq!(manifest.version, env!("CARGO_PKG_VERSION"));

    let text = serde_json::to_string(&manifest.config).unwrap();
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, manifest.config);

    let o = pseudospec(
        &["stability-scan", "--config", "first/manifest.json", "--out", "second"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let again: RunManifest = serde_json::from_str(&read(tmp.path().join("second/manifest.json"))).unwrap();
    assert_eq!(again.config.parameters, manifest.config.parameters);
    assert_eq!(again.config.seed, manifest.config.seed);
    assert_eq!(
        read(tmp.path().join("first/result.csv")),
        read(tmp.path().join("second/result.csv"))
    );
}

#[test]
fn flat_config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"c": 0.5, "l_max": 90, "seed": 3}"#).unwrap();
    let o = pseudospec(
        &["ads3-stable", "--config", "cfg.json", "--set", "l_max=81", "--out", "o"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let json: Value = serde_json::from_str(&read(tmp.path().join("o/result.json"))).unwrap();
    assert_eq!(json["l_min"], 80);
    assert_eq!(json["eigenvalues"][0], 6240);
    assert_eq!(json["l_max"], 81);
    let manifest: RunManifest = serde_json::from_str(&read(tmp.path().join("o/manifest.json"))).unwrap();
    assert_eq!(manifest.config.seed, 3);
}

#[test]
fn input_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pseudospec(
        &["flat-spectrum", "--set", "lambda_min=5", "--set", "lambda_max=1"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda_min"));

    let o = pseudospec(&["flat-spectrum", "--set", "colour=1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));

    let o = pseudospec(&["preset", "nope"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("oppenheim-irrational"));

    let o = pseudospec(&["frobnicate"], tmp.path());
    assert_eq!(o.status.code(), Some(2));

    let o = pseudospec(&["ads3-stable", "--set", "l_max=9"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("l_max"));

    let o = pseudospec(&["cartan", "--set", "left=[[2,0],[0,2]]"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pseudospec"))
        .args(["flat-spectrum", "--set", "box_radius=50"])
        .current_dir(tmp.path())
        .env("PSEUDOSPEC_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = pseudospec(&["orbit-count", "--set", "word_radius=40"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn internal_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("blocker"), "not a directory").unwrap();
    let o = pseudospec(&["ads3-stable", "--out", "blocker/run"], tmp.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn presets_listing() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pseudospec(&["presets"], tmp.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "string-1d",
        "null-directions",
        "oppenheim-irrational",
        "ads3-standard",
        "calabi-markus",
    ] {
        assert!(text.contains(name));
    }
}
