//! End-to-end tests of the `rmode-sim` binary: exit codes, output files,
//! determinism, and the verification gate.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rmode_sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmode-sim"))
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

/// A scenario small enough to run in well under a second: 0.05 s at
/// 819.2 kHz, default Geomundo-style geometry, outputs to `out/` next to
/// the scenario file.
fn scenario_doc() -> serde_json::Value {
    serde_json::json!({
        "name": "cli-test",
        "transmitter": {
            "carrier_freq_hz": 287000.0,
            "data_rate_bps": 100.0,
            "amp_msk": 1.0
        },
        "skywave": {
            "ionosphere_height_m": 90000.0,
            "ground_distance_m": 210000.0,
            "attenuation_alpha": 0.3
        },
        "bits_seed": 42,
        "sample_rate_hz": 819200.0,
        "duration_s": 0.05,
        "outputs": { "dir": "out", "format": "raw" },
        "plot_window": { "start_s": 0.03, "end_s": 0.05 }
    })
}

fn write_doc(dir: &Path, name: &str, doc: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path
}

fn read_report(out_dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for name in ["geomundo.json", "geomundo_night.json"] {
        let out = rmode_sim()
            .arg("validate")
            .arg(shipped(name))
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0, "{name}: {}", stderr_of(&out));
        assert!(stdout_of(&out).contains("ok"));
    }
}

#[test]
fn validate_rejects_out_of_band_carrier() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = scenario_doc();
    doc["transmitter"]["carrier_freq_hz"] = serde_json::json!(400000.0);
    let path = write_doc(dir.path(), "bad.json", &doc);
    let out = rmode_sim().arg("validate").arg(&path).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr_of(&out).contains("carrier_freq_hz"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn run_rejects_invalid_scenario_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = scenario_doc();
    doc["duration_s"] = serde_json::json!(0.0);
    let path = write_doc(dir.path(), "bad.json", &doc);
    let out = rmode_sim().arg("run").arg(&path).output().unwrap();
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("duration_s"));
}

#[test]
fn malformed_json_is_config_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ this is not json").unwrap();
    let out = rmode_sim().arg("validate").arg(&path).output().unwrap();
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_of(&out));
}

#[test]
fn missing_scenario_file_is_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absent.json");
    let out = rmode_sim().arg("validate").arg(&path).output().unwrap();
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr_of(&out));
}

#[test]
fn run_executes_pipeline_and_report_rereads_it() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = scenario_doc();
    doc["noise"] = serde_json::json!({ "snr_db": 20.0, "seed": 7 });
    let path = write_doc(dir.path(), "scenario.json", &doc);
    let out = rmode_sim().arg("run").arg(&path).output().unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("PASSED"));

    let out_dir = dir.path().join("out");
    for name in [
        "groundwave.f32",
        "skywave.f32",
        "received.f32",
        "traces.csv",
        "metadata.json",
        "report.json",
    ] {
        assert!(out_dir.join(name).is_file(), "missing {name}");
    }

    let report = read_report(&out_dir);
    assert_eq!(report["verification_passed"], serde_json::json!(true));
    let t_d = report["skywave_delay_s"].as_f64().unwrap();
    assert!((t_d * 1e6 - 222.108).abs() < 1e-3, "t_d = {t_d}");
    let snr = report["snr_measured_db"].as_f64().unwrap();
    assert!((snr - 20.0).abs() < 0.5, "snr = {snr}");

    let reread = rmode_sim().arg("report").arg(&out_dir).output().unwrap();
    assert_eq!(exit_code(&reread), 0);
    assert!(stdout_of(&reread).contains("PASSED"));
}

#[test]
fn identical_runs_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = scenario_doc();
    doc["noise"] = serde_json::json!({ "snr_db": 20.0, "seed": 7 });
    let path = write_doc(dir.path(), "scenario.json", &doc);
    for sub in ["a", "b"] {
        let out = rmode_sim()
            .arg("run")
            .arg(&path)
            .arg("--out-dir")
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    }
    for name in [
        "groundwave.f32",
        "skywave.f32",
        "received.f32",
        "traces.csv",
        "metadata.json",
        "report.json",
    ] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn transparent_channel_reproduces_groundwave_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = scenario_doc();
    doc["skywave"]["attenuation_alpha"] = serde_json::json!(0.0);
    let path = write_doc(dir.path(), "scenario.json", &doc);
    let out = rmode_sim().arg("run").arg(&path).output().unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let out_dir = dir.path().join("out");
    let ground = std::fs::read(out_dir.join("groundwave.f32")).unwrap();
    let received = std::fs::read(out_dir.join("received.f32")).unwrap();
    assert_eq!(ground, received);
}

#[test]
fn seed_override_changes_the_bit_stream_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(dir.path(), "scenario.json", &scenario_doc());
    for (sub, seed) in [("a", None), ("b", Some(7u64)), ("c", Some(7u64))] {
        let mut cmd = rmode_sim();
        cmd.arg("run")
            .arg(&path)
            .arg("--out-dir")
            .arg(dir.path().join(sub));
        if let Some(seed) = seed {
            cmd.arg("--seed-override").arg(seed.to_string());
        }
        let out = cmd.output().unwrap();
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    }
    let read = |sub: &str| std::fs::read(dir.path().join(sub).join("groundwave.f32")).unwrap();
    assert_ne!(read("a"), read("b"), "override did not change the bits");
    assert_eq!(read("b"), read("c"), "override is not deterministic");
}

#[test]
fn wav_format_writes_readable_containers() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(dir.path(), "scenario.json", &scenario_doc());
    let out = rmode_sim()
        .arg("run")
        .arg(&path)
        .arg("--format")
        .arg("wav")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let out_dir = dir.path().join("out");
    assert!(!out_dir.join("received.f32").exists());
    let mut reader = hound::WavReader::open(out_dir.join("received.wav")).unwrap();
    assert_eq!(reader.spec().sample_rate, 819_200);
    assert_eq!(reader.spec().sample_format, hound::SampleFormat::Float);
    let samples: Vec<f32> = reader.samples::<f32>().map(|s| s.unwrap()).collect();
    assert_eq!(samples.len(), 40_960);
    assert!(samples.iter().all(|s| s.is_finite()));
}

#[test]
fn unwritable_output_directory_is_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_doc(dir.path(), "scenario.json", &scenario_doc());
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let out = rmode_sim()
        .arg("run")
        .arg(&path)
        .arg("--out-dir")
        .arg(blocker.join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr_of(&out));
}

#[test]
fn report_on_missing_run_directory_is_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = rmode_sim()
        .arg("report")
        .arg(dir.path().join("never-ran"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr_of(&out));
}

#[test]
fn near_nyquist_scenario_breaches_verification() {
    // At 576.1 kHz the carrier sits at 0.997 of Nyquist, inside the
    // fractional-delay interpolator's transition band: the simulated
    // skywave genuinely deviates from the closed-form tone distortion,
    // and the run must say so with exit code 4.
    let dir = tempfile::tempdir().unwrap();
    let mut doc = scenario_doc();
    doc["sample_rate_hz"] = serde_json::json!(576100.0);
    let path = write_doc(dir.path(), "scenario.json", &doc);
    let out = rmode_sim().arg("run").arg(&path).output().unwrap();
    assert_eq!(exit_code(&out), 4, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("FAILED"));

    let out_dir = dir.path().join("out");
    let report = read_report(&out_dir);
    assert_eq!(report["verification_passed"], serde_json::json!(false));

    let reread = rmode_sim().arg("report").arg(&out_dir).output().unwrap();
    assert_eq!(exit_code(&reread), 4);
}

#[test]
fn shipped_geomundo_scenario_verifies_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = rmode_sim()
        .arg("run")
        .arg(shipped("geomundo.json"))
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let report = read_report(&dir.path().join("out"));
    assert_eq!(report["verification_passed"], serde_json::json!(true));
    let t_d = report["skywave_delay_s"].as_f64().unwrap();
    assert!((t_d * 1e6 - 222.108).abs() < 1e-3, "t_d = {t_d}");
    for check in report["cw_checks"].as_array().unwrap() {
        assert_eq!(check["within_tolerance"], serde_json::json!(true));
    }
    let snr = report["snr_measured_db"].as_f64().unwrap();
    assert!((snr - 20.0).abs() < 0.5, "snr = {snr}");
}

#[test]
fn shipped_night_scenario_resolves_coordinates_and_alpha_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = rmode_sim()
        .arg("run")
        .arg(shipped("geomundo_night.json"))
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let report = read_report(&dir.path().join("out"));
    assert_eq!(report["verification_passed"], serde_json::json!(true));
    // Station and receiver are ~210 km apart, a night row in the table:
    // the resolved attenuation must be the 150-300 km night entry.
    assert_eq!(report["attenuation_alpha"], serde_json::json!(0.55));
}
