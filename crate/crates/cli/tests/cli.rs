//! End-to-end tests of the `cobeam` binary: subcommands, file outputs,
//! exit codes, and byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cobeam"))
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = bin().args(args).current_dir(dir).output().expect("spawn cobeam");
    assert!(
        out.status.success(),
        "cobeam {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn desk_config_json(method: Option<&str>, cyst: bool) -> serde_json::Value {
    let mut phantom = serde_json::json!({
        "seed": 7,
        "scatterers": [ { "r_mm": 50.0, "theta_deg": 0.0, "amp": 1.0 } ]
    });
    if cyst {
        phantom["cyst"] = serde_json::json!({
            "center_mm": [0.0, 50.0],
            "radius_mm": 2.0,
            "density_per_mm2": 1.0,
            "seed": 11
        });
    }
    let mut config = serde_json::json!({
        "imaging": {
            "speed_of_sound_mps": 1540.0,
            "center_frequency_hz": 3.5e6,
            "sampling_frequency_hz": 1.0e8,
            "pitch_m": 220e-6,
            "element_half_count": 9,
            "scan_angles_deg": { "start_deg": -3.0, "stop_deg": 3.0, "count": 13 },
            "depth_range_mm": [42.0, 58.0],
            "dynamic_range_db": 60.0
        },
        "design": { "a": 3, "b": 3 },
        "phantom": phantom,
        "transmit_focus": { "r_mm": 50.0, "theta_deg": 0.0 }
    });
    if let Some(m) = method {
        config["method"] = serde_json::json!(m);
    }
    config
}

fn write_config(dir: &Path, value: &serde_json::Value) -> PathBuf {
    let path = dir.join("run.json");
    std::fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

#[test]
fn design_optimizer_reproduces_reference_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(
        &["design", "64", "scoba", "--optimize", "elements", "--out", "scoba.json"],
        dir.path(),
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("29 of 127"), "stdout: {stdout}");
    assert!(stdout.contains("23%"), "stdout: {stdout}");
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("scoba.json")).unwrap()).unwrap();
    assert_eq!(doc["a"], 8);
    assert_eq!(doc["b"], 8);
    assert_eq!(doc["element_count"], 29);

    let out = run_ok(
        &["design", "64", "scobar", "--optimize", "elements", "--out", "scobar.json"],
        dir.path(),
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("43 of 127"));

    let out = run_ok(&["design", "9", "scoba", "--a", "3", "--b", "3"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("9 of 17"), "stdout: {stdout}");
    assert!(dir.path().join("scoba_n9_a3_b3.json").exists());
}

#[test]
fn design_prime_n_is_explained() {
    let dir = tempfile::tempdir().unwrap();
    // element optimization on a prime N: degenerate but valid
    let out = run_ok(&["design", "7", "scoba", "--optimize", "elements"], dir.path());
    assert!(String::from_utf8_lossy(&out.stdout).contains("prime"));
    // aperture optimization cannot produce a sparse array at all
    let out = bin()
        .args(["design", "7", "scoba", "--optimize", "aperture"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime"));
}

#[test]
fn malformed_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, b"{ not json").unwrap();
    let out = bin()
        .args(["simulate", "--config", path.to_str().unwrap(), "--out", "x.cbk"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // valid JSON, invalid physics (fs below 4 f0)
    let mut cfg = desk_config_json(Some("das"), false);
    cfg["imaging"]["sampling_frequency_hz"] = serde_json::json!(1.0e7);
    let path = write_config(dir.path(), &cfg);
    let out = bin()
        .args(["simulate", "--config", path.to_str().unwrap(), "--out", "x.cbk"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_data_file_exits_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &desk_config_json(Some("das"), false));
    let out = bin()
        .args([
            "beamform",
            "--config",
            path.to_str().unwrap(),
            "--data",
            "nonexistent.cbk",
            "--out-dir",
            "out",
        ])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn full_pipeline_emits_images_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &desk_config_json(None, true));
    run_ok(
        &["simulate", "--config", config.to_str().unwrap(), "--out", "data.cbk"],
        dir.path(),
    );
    run_ok(
        &[
            "beamform",
            "--config",
            config.to_str().unwrap(),
            "--data",
            "data.cbk",
            "--out-dir",
            "out",
            "--all-methods",
        ],
        dir.path(),
    );
    for method in ["das", "coba", "scoba", "scobar"] {
        for ext in ["pgm", "f32", "json"] {
            let path = dir.path().join("out").join(format!("{method}.{ext}"));
            assert!(path.exists(), "missing {}", path.display());
        }
        assert!(dir.path().join("out").join(format!("{method}_lines.f32")).exists());
    }
    let metrics: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/metrics.json")).unwrap())
            .unwrap();
    for method in ["das", "coba", "scoba", "scobar"] {
        assert!(
            metrics[method]["contrast_ratio_db"].is_number(),
            "metrics: {metrics:#}"
        );
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/manifest.json")).unwrap())
            .unwrap();
    assert!(manifest["config_sha256"].is_string());
    assert!(manifest["outputs"].as_array().unwrap().len() >= 17);

    // metrics subcommand on one of the written images
    let out = run_ok(
        &[
            "metrics",
            "--image",
            "out/das",
            "--cyst-lateral-mm", "0",
            "--cyst-depth-mm", "50",
            "--cyst-radius-mm", "1",
            "--bck-lateral-mm", "3",
            "--bck-depth-mm", "50",
        ],
        dir.path(),
    );
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("metrics JSON on stdout");
    assert!(report["contrast_ratio_db"].is_number());
}

#[test]
fn identical_config_and_seed_reproduce_outputs_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &desk_config_json(None, true));
    for round in ["one", "two"] {
        let data = format!("{round}/data.cbk");
        run_ok(
            &["simulate", "--config", config.to_str().unwrap(), "--out", &data],
            dir.path(),
        );
        run_ok(
            &[
                "beamform",
                "--config",
                config.to_str().unwrap(),
                "--data",
                &data,
                "--out-dir",
                &format!("{round}/out"),
                "--all-methods",
            ],
            dir.path(),
        );
    }
    let mut compared = 0;
    for rel in [
        "data.cbk",
        "out/das_lines.f32",
        "out/coba_lines.f32",
        "out/scoba_lines.f32",
        "out/scobar_lines.f32",
        "out/das.f32",
        "out/coba.f32",
        "out/scoba.f32",
        "out/scobar.f32",
        "out/das.pgm",
        "out/coba.pgm",
        "out/scoba.pgm",
        "out/scobar.pgm",
    ] {
        let a = std::fs::read(dir.path().join("one").join(rel)).unwrap();
        let b = std::fs::read(dir.path().join("two").join(rel)).unwrap();
        assert_eq!(a, b, "{rel} differs between identical runs");
        compared += 1;
    }
    assert_eq!(compared, 13);
}

#[test]
fn beampattern_csv_and_das_match_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = desk_config_json(None, false);
    cfg["apodization"] = serde_json::json!("das_match");
    let config = write_config(dir.path(), &cfg);
    run_ok(
        &[
            "beampattern",
            "--config",
            config.to_str().unwrap(),
            "--methods",
            "das,scoba",
            "--grid",
            "1024",
            "--out-dir",
            "bp",
        ],
        dir.path(),
    );
    let parse = |name: &str| -> Vec<(f64, f64)> {
        let text = std::fs::read_to_string(dir.path().join("bp").join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("sin_theta,magnitude_db,real,imag"));
        lines
            .map(|l| {
                let cols: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
                (cols[2], cols[3])
            })
            .collect()
    };
    let das = parse("das_pattern.csv");
    let scoba = parse("scoba_pattern.csv");
    assert_eq!(das.len(), 1024);
    // das-match weighting reproduces the full-array DAS pattern through the
    // whole CLI path
    for ((ar, ai), (br, bi)) in das.iter().zip(&scoba) {
        assert!((ar - br).abs() <= 1e-9 && (ai - bi).abs() <= 1e-9);
    }
    let metrics: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.path().join("bp/pattern_metrics.json")).unwrap(),
    )
    .unwrap();
    assert!(metrics["das"]["first_zero_sin_theta"].is_number());
    assert!(metrics["das"]["psl_db"].is_number());
}
