use std::path::Path;
use std::process::{Command, Output};

fn mmdude(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmdude"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

const CONFIG: &str = r#"{
    "id": "small",
    "alphabet": 2,
    "source": {"kind": "markov", "transition": [[0.9, 0.1], [0.2, 0.8]]},
    "channel": {"bsc": 0.1},
    "uncertainty": {"bsc_interval": {"lo": 0.05, "hi": 0.2, "eta": 0.05}},
    "n": 5000,
    "k": 1,
    "seed": 5
}"#;

#[test]
fn example1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = mmdude(dir.path(), &["example1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .skip(1)
        .filter(|l| l.contains(','))
        .all(|l| l.ends_with("PASS")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"alphabet": 2}"#).unwrap();
    assert_eq!(
        mmdude(dir.path(), &["--config", "bad.json", "simulate"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mmdude(dir.path(), &["simulate"]).status.code(), Some(2));
    assert_eq!(mmdude(dir.path(), &["--bogus"]).status.code(), Some(2));
}

#[test]
fn manifest_replays_the_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), CONFIG).unwrap();
    assert!(mmdude(dir.path(), &["--config", "config.json", "simulate"])
        .status
        .success());
    let first = std::fs::read(dir.path().join("out/noisy.txt")).unwrap();
    let replay = mmdude(
        dir.path(),
        &[
            "--config",
            "out/manifest.json",
            "--out",
            "again",
            "simulate",
        ],
    );
    assert!(replay.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("again/noisy.txt")).unwrap(),
        first
    );
    assert_eq!(
        std::fs::read(dir.path().join("again/manifest.json")).unwrap(),
        std::fs::read(dir.path().join("out/manifest.json")).unwrap()
    );
}

#[test]
fn markov_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), CONFIG).unwrap();
    let run = |args: &[&str]| {
        let mut full = vec!["--config", "config.json"];
        full.extend_from_slice(args);
        let out = mmdude(dir.path(), &full);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    };
    run(&["simulate"]);
    run(&["denoise", "out/noisy.txt"]);
    let csv = run(&[
        "evaluate",
        "--clean",
        "out/clean.txt",
        "--noisy",
        "out/noisy.txt",
        "--denoiser",
        "out/denoiser.json",
        "--denoiser",
        "@identity",
    ]);
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2);
    let regret: f64 = rows[0][8].parse().unwrap();
    assert!(regret >= -1e-8);
    let feas = run(&["feasibility", "out/noisy.txt"]);
    assert!(feas.contains("BSC(0.1)"));
    let bounds = run(&[
        "bounds",
        "--n",
        "1000,10000,100000,1000000",
        "--k",
        "0",
        "--delta",
        "0.1",
    ]);
    for col in 3..6 {
        let v: Vec<f64> = bounds
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
            .collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]), "column {col}: {v:?}");
    }
}

#[test]
fn gamma_sweep_has_its_minimum_near_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = mmdude(dir.path(), &["sweep", "--axis", "gamma"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let (gamma, max) = text
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (
                c[0].parse::<f64>().unwrap(),
                c[c.len() - 1].parse::<f64>().unwrap(),
            )
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((gamma - 0.51).abs() < 0.015, "{gamma}");
    assert!((max - 0.1428).abs() < 0.005);
}
