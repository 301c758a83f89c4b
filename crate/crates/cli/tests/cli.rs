use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use laguerre_core::io::load_frames;
use laguerre_core::FrameRole;

const SMALL: [&str; 8] = [
    "--set",
    "scenario.frames=48",
    "--set",
    "scenario.width=64",
    "--set",
    "scenario.height=64",
    "--set",
    "scenario.final_position=[32,32]",
];

fn laguerre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laguerre"))
        .args(args)
        .output()
        .unwrap()
}

fn laguerre_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laguerre"))
        .args(args)
        .env(key, value)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_small(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    args.extend(extra);
    laguerre(&args)
}

fn hashes(dir: &Path) -> toml::Table {
    let text = fs::read_to_string(dir.join("manifest.toml")).unwrap();
    let doc: toml::Table = text.parse().unwrap();
    doc["manifest"]["sha256"].as_table().unwrap().clone()
}

#[test]
fn design_prints_table_coefficients() {
    let o = laguerre(&["design", "--sigma", "-0.25", "--q", "4", "--causal", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    let b = [0.0920, -0.0913, 0.0102, 0.0];
    let a = [1.0, -2.3364, 1.8196, -0.4724];
    assert_eq!(rows.len(), 4);
    for (i, (gb, ga)) in rows.iter().enumerate() {
        assert!((gb - b[i]).abs() < 5e-5 && (ga - a[i]).abs() < 5e-5, "row {i}");
    }
}

#[test]
fn noncausal_response_has_zero_phase() {
    let dir = tempfile::tempdir().unwrap();
    let o = laguerre(&[
        "response",
        "--sigma",
        "-0.5",
        "--noncausal",
        "--points",
        "101",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("response.csv")).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let phase: f64 = rec[3].parse().unwrap();
        assert!(phase.abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 101);
    assert!(dir.path().join("impulse.csv").exists());
}

#[test]
fn exit_codes_distinguish_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();

    assert_eq!(laguerre(&["design", "--sigma", "0.5"]).status.code(), Some(2));
    assert_eq!(laguerre(&["design", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        laguerre(&["run", "--out", out, "--set", "pipeline.stage2.colour=1"])
            .status
            .code(),
        Some(2)
    );

    let bad_config = dir.path().join("bad.toml");
    fs::write(&bad_config, "[scenario]\nframes = 0\n").unwrap();
    assert_eq!(
        laguerre(&["run", "--out", out, "--config", bad_config.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let missing = dir.path().join("missing.lgfr");
    assert_eq!(
        laguerre(&["run", "--out", out, "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );

    let corrupt = dir.path().join("corrupt.lgfr");
    fs::write(&corrupt, b"NOPE").unwrap();
    assert_eq!(
        laguerre(&["run", "--out", out, "--input", corrupt.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );

    // one 2x2 frame holding a NaN
    let mut bytes = b"LGFR".to_vec();
    for v in [1u32, 2, 2, 1] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for v in [0.0f32, f32::NAN, 1.0, 2.0] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let nan = dir.path().join("nan.lgfr");
    fs::write(&nan, bytes).unwrap();
    assert_eq!(
        laguerre(&["run", "--out", out, "--input", nan.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn runs_are_reproducible_across_threads_and_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let mut args = vec!["run", "--out", a.to_str().unwrap(), "--seed", "5"];
    args.extend(SMALL);
    assert!(laguerre_env(&args, "RAYON_NUM_THREADS", "1").status.success());
    args[2] = b.to_str().unwrap();
    assert!(laguerre_env(&args, "RAYON_NUM_THREADS", "4").status.success());
    assert_eq!(hashes(&a), hashes(&b));

    let manifest = a.join("manifest.toml");
    let o = laguerre(&[
        "run",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(hashes(&a), hashes(&c));

    let d = dir.path().join("d");
    assert!(run_small(&d, &["--seed", "6"]).status.success());
    assert_ne!(hashes(&a)["input.lgfr"], hashes(&d)["input.lgfr"]);
}

#[test]
fn simulated_input_replays_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let (sim, direct, replay) = (
        dir.path().join("sim"),
        dir.path().join("direct"),
        dir.path().join("replay"),
    );
    let mut args = vec!["simulate", "--out", sim.to_str().unwrap(), "--seed", "1"];
    args.extend(SMALL);
    assert!(laguerre(&args).status.success());
    for f in ["input.lgfr", "truth.csv", "clutter.csv", "manifest.toml"] {
        assert!(sim.join(f).exists(), "{f}");
    }
    assert!(run_small(&direct, &["--seed", "1"]).status.success());
    let input = sim.join("input.lgfr");
    assert!(run_small(&replay, &["--seed", "1", "--input", input.to_str().unwrap()])
        .status
        .success());
    // the file holds f32 samples, so the replay sees a rounded copy of the scene
    let load = |d: &Path| load_frames(&d.join("power.lgfr"), FrameRole::Power).unwrap();
    let (a, b) = (load(&direct), load(&replay));
    assert_eq!(a.len(), b.len());
    for (fa, fb) in a.iter().zip(&b) {
        let peak = fa.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = fa
            .data
            .iter()
            .zip(&fb.data)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(worst <= 1e-5 * peak.max(1.0), "frame {}: {worst}", fa.index);
    }
}

#[test]
fn bypass_skips_background_and_pgm_quartet_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bypass");
    let o = run_small(&out, &["--bypass-stage1", "--omega", "full", "--pgm", "40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("background.lgfr").exists());
    let pgms: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "pgm"))
        .collect();
    assert!(!pgms.is_empty());
    let cfg: toml::Table = fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(cfg["pipeline"]["bypass_stage1"].as_bool(), Some(true));
    assert_eq!(cfg["pipeline"]["stage2"]["omega"].as_str(), Some("full"));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let mut args = vec![
        "sweep",
        "--out",
        out.to_str().unwrap(),
        "--sweep",
        "qz=0,2,4",
        "--seeds",
        "2",
    ];
    args.extend(SMALL);
    let o = laguerre(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    assert_eq!(reader.records().count(), 3);
    assert!(out.join("manifest.toml").exists());
}
