//! End-to-end scenario execution: bit generation, MSK and CW synthesis,
//! skywave channel, additive noise, file outputs, and the verification
//! report comparing measured ranging-tone distortion against the
//! closed-form prediction.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    analytic_envelope, estimate_snr, estimate_two_tones, ANALYTIC_EDGE_EXCLUSION,
};
use crate::channel::{
    apply_skywave, eta_beta_closed_form, skywave_delay, add_awgn, DELAY_EDGE_EXCLUSION,
    DELAY_KERNEL_BETA, DELAY_KERNEL_TAPS,
};
use crate::error::{Error, Result};
use crate::output::{write_json_pretty, write_raw_f32, write_traces_csv, write_wav_f32};
use crate::scenario::{ResolvedScenario, ScenarioConfig};
use crate::signal::SignalBuffer;
use crate::tx::{compose_transmit, generate_bits, generate_cw, msk_modulate, CwTone};

/// Relative tolerance on the amplitude ratio of each ranging tone.
pub const ETA_TOLERANCE_REL: f64 = 1e-3;
/// Absolute tolerance on the phase offset of each ranging tone, in rad.
pub const BETA_TOLERANCE_RAD: f64 = 1e-3;
/// Below this predicted amplitude ratio the tone sits near a destructive
/// null and a relative tolerance degenerates; the amplitude check switches
/// to an absolute tolerance of `ETA_TOLERANCE_REL`.
pub const ETA_NULL_THRESHOLD: f64 = 0.05;
/// Maximum relative deviation of the MSK envelope from its nominal
/// amplitude over the valid (edge-excluded) region.
pub const ENVELOPE_TOLERANCE_REL: f64 = 1e-3;

/// File base name for the undistorted transmit waveform.
pub const GROUNDWAVE_STEM: &str = "groundwave";
/// File base name for the delayed, attenuated skywave component.
pub const SKYWAVE_STEM: &str = "skywave";
/// File base name for the received waveform (groundwave + skywave, plus
/// noise when enabled).
pub const RECEIVED_STEM: &str = "received";
/// File name of the CSV trace export.
pub const TRACES_FILE: &str = "traces.csv";
/// File name of the verification report.
pub const REPORT_FILE: &str = "report.json";
/// File name of the run metadata document.
pub const METADATA_FILE: &str = "metadata.json";

/// Measured vs. predicted distortion for one ranging tone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToneCheck {
    pub freq_hz: f64,
    pub eta_closed_form: f64,
    pub beta_closed_form_rad: f64,
    pub eta_measured: f64,
    pub beta_measured_rad: f64,
    /// Relative error, or absolute error when the predicted ratio is
    /// below `ETA_NULL_THRESHOLD` (see `eta_error_is_absolute`).
    pub eta_error: f64,
    pub eta_error_is_absolute: bool,
    pub beta_error_rad: f64,
    pub within_tolerance: bool,
}

/// Envelope statistics of the MSK component over its valid region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// max |envelope - nominal| / nominal over the valid region.
    pub max_rel_deviation: f64,
}

/// Verification report written to `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub scenario_name: Option<String>,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub num_samples: usize,
    pub skywave_delay_s: f64,
    pub attenuation_alpha: f64,
    pub cw_checks: Vec<ToneCheck>,
    pub msk_envelope: EnvelopeStats,
    pub envelope_within_tolerance: bool,
    pub snr_configured_db: Option<f64>,
    pub snr_measured_db: Option<f64>,
    pub verification_passed: bool,
}

/// Provenance document written to `metadata.json`: everything needed to
/// interpret the sample files without re-running the tool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub scenario_name: Option<String>,
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub duration_s: f64,
    pub num_samples: usize,
    /// Encoding of the `.f32` sample files.
    pub raw_sample_format: String,
    /// Sample files written, relative to the output directory.
    pub sample_files: Vec<String>,
    pub carrier_freq_hz: f64,
    pub data_rate_bps: f64,
    pub cw_freqs_hz: (f64, f64),
    pub bits_seed: u64,
    pub noise_seed: u64,
    pub snr_db: Option<f64>,
    pub ionosphere_height_m: f64,
    pub ground_distance_m: f64,
    pub attenuation_alpha: f64,
    pub skywave_delay_s: f64,
    pub delay_kernel_taps: usize,
    pub delay_kernel_kaiser_beta: f64,
    pub delay_edge_exclusion_samples: usize,
    pub analytic_edge_exclusion_samples: usize,
    pub plot_window_s: (f64, f64),
}

/// Loads nothing, writes nothing: wraps `phase` into (-pi, pi].
fn wrap_pi(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Resolves and runs a scenario; `base_dir` anchors relative paths from
/// the config (alpha tables, output directory).
pub fn run_scenario(cfg: &ScenarioConfig, base_dir: &Path) -> Result<RunReport> {
    run_resolved(&cfg.resolve(base_dir)?)
}

/// Runs a resolved scenario end to end and writes all output files.
///
/// The received sample file contains the noisy waveform when noise is
/// enabled; the CSV received column is always the pre-noise sum, so each
/// row satisfies groundwave + skywave = received exactly. All distortion
/// measurements are made on pre-noise waveforms.
pub fn run_resolved(rs: &ResolvedScenario) -> Result<RunReport> {
    let out_dir = rs.out_dir.as_ref().ok_or_else(|| {
        Error::Config(
            "no output directory: set outputs.dir in the scenario or pass --out-dir".into(),
        )
    })?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let fs = rs.sample_rate_hz;
    let tx = &rs.transmitter;
    let n_bits = (rs.duration_s * tx.data_rate_bps).ceil() as usize;
    let bits = generate_bits(rs.bits_seed, n_bits);
    let msk = msk_modulate(&bits, tx, fs, rs.duration_s)?;
    let msk_envelope = envelope_stats(&msk, tx.amp_msk)?;

    let cw1 = generate_cw(tx, CwTone::BelowCarrier, fs, rs.duration_s)?;
    let cw2 = generate_cw(tx, CwTone::AboveCarrier, fs, rs.duration_s)?;
    let ground = compose_transmit(&msk, &cw1, &cw2)?;
    drop((msk, cw1, cw2));

    let t_d = skywave_delay(&rs.skywave);
    let (clean, skywave) = apply_skywave(&ground, &rs.skywave)?;
    let noise_enabled = rs.noise.snr_db.is_finite();
    let received = add_awgn(&clean, &rs.noise)?;

    // Measurement window: skip the leading region the delayed component
    // cannot fully populate, plus kernel half-widths at both ends.
    let delay_samples = (t_d * fs).ceil() as usize;
    let lo = delay_samples + DELAY_EDGE_EXCLUSION + 1;
    let hi = ground.len().saturating_sub(DELAY_EDGE_EXCLUSION);
    if lo >= hi {
        return Err(Error::Config(format!(
            "duration {} s leaves no valid samples after the skywave delay \
             ({delay_samples} samples) and edge exclusions",
            rs.duration_s
        )));
    }
    let (f1, f2) = (
        CwTone::BelowCarrier.freq_hz(tx.carrier_freq_hz),
        CwTone::AboveCarrier.freq_hz(tx.carrier_freq_hz),
    );
    let cw_checks = check_tones(f1, f2, &ground, &clean, lo..hi, rs.skywave.attenuation_alpha, t_d)?;

    let snr_measured_db = if noise_enabled {
        Some(estimate_snr(&clean, &received)?)
    } else {
        None
    };

    let mut sample_files = Vec::new();
    for (stem, buf) in [
        (GROUNDWAVE_STEM, &ground),
        (SKYWAVE_STEM, &skywave),
        (RECEIVED_STEM, &received),
    ] {
        if rs.format.writes_raw() {
            let name = format!("{stem}.f32");
            write_raw_f32(&out_dir.join(&name), buf)?;
            sample_files.push(name);
        }
        if rs.format.writes_wav() {
            let name = format!("{stem}.wav");
            write_wav_f32(&out_dir.join(&name), buf)?;
            sample_files.push(name);
        }
    }

    let (w0, w1) = rs.plot_window;
    let i0 = (w0 * fs).round() as usize;
    let i1 = ((w1 * fs).round() as usize).min(ground.len());
    if i0 >= i1 {
        return Err(Error::Config(format!(
            "plot window ({w0} s, {w1} s) spans no samples at {fs} Hz"
        )));
    }
    write_traces_csv(&out_dir.join(TRACES_FILE), &ground, &skywave, &clean, i0..i1)?;

    let envelope_within_tolerance = msk_envelope.max_rel_deviation <= ENVELOPE_TOLERANCE_REL;
    let verification_passed =
        envelope_within_tolerance && cw_checks.iter().all(|c| c.within_tolerance);
    let report = RunReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_name: rs.name.clone(),
        sample_rate_hz: fs,
        duration_s: rs.duration_s,
        num_samples: ground.len(),
        skywave_delay_s: t_d,
        attenuation_alpha: rs.skywave.attenuation_alpha,
        cw_checks,
        msk_envelope,
        envelope_within_tolerance,
        snr_configured_db: if noise_enabled { Some(rs.noise.snr_db) } else { None },
        snr_measured_db,
        verification_passed,
    };

    let metadata = RunMetadata {
        tool_version: report.tool_version.clone(),
        scenario_name: rs.name.clone(),
        sample_rate_hz: fs,
        start_time_s: ground.start_time(),
        duration_s: rs.duration_s,
        num_samples: ground.len(),
        raw_sample_format: "float32 little-endian, mono, no header".into(),
        sample_files,
        carrier_freq_hz: tx.carrier_freq_hz,
        data_rate_bps: tx.data_rate_bps,
        cw_freqs_hz: (f1, f2),
        bits_seed: rs.bits_seed,
        noise_seed: rs.noise.seed,
        snr_db: report.snr_configured_db,
        ionosphere_height_m: rs.skywave.ionosphere_height_m,
        ground_distance_m: rs.skywave.ground_distance_m,
        attenuation_alpha: rs.skywave.attenuation_alpha,
        skywave_delay_s: t_d,
        delay_kernel_taps: DELAY_KERNEL_TAPS,
        delay_kernel_kaiser_beta: DELAY_KERNEL_BETA,
        delay_edge_exclusion_samples: DELAY_EDGE_EXCLUSION,
        analytic_edge_exclusion_samples: ANALYTIC_EDGE_EXCLUSION,
        plot_window_s: rs.plot_window,
    };
    write_json_pretty(&out_dir.join(METADATA_FILE), &metadata)?;
    write_json_pretty(&out_dir.join(REPORT_FILE), &report)?;
    Ok(report)
}

/// Jointly fits both ranging tones on the groundwave and the pre-noise
/// received waveform over the same window, then compares each tone's
/// amplitude ratio and phase offset against the closed-form prediction.
/// The joint fit keeps the two tones — only 500 Hz apart — from leaking
/// into each other's estimate on short windows.
fn check_tones(
    freq_a_hz: f64,
    freq_b_hz: f64,
    ground: &SignalBuffer,
    clean: &SignalBuffer,
    window: std::ops::Range<usize>,
    alpha: f64,
    t_d: f64,
) -> Result<Vec<ToneCheck>> {
    let (ga, gb) = estimate_two_tones(ground, freq_a_hz, freq_b_hz, window.clone())?;
    let (ra, rb) = estimate_two_tones(clean, freq_a_hz, freq_b_hz, window)?;
    Ok(vec![
        compare_tone(freq_a_hz, &ga, &ra, alpha, t_d),
        compare_tone(freq_b_hz, &gb, &rb, alpha, t_d),
    ])
}

fn compare_tone(
    freq_hz: f64,
    ground: &crate::analysis::ToneEstimate,
    received: &crate::analysis::ToneEstimate,
    alpha: f64,
    t_d: f64,
) -> ToneCheck {
    let eta_measured = received.amplitude / ground.amplitude;
    let beta_measured_rad = wrap_pi(received.phase_rad - ground.phase_rad);
    let (eta, beta) = eta_beta_closed_form(alpha, TAU * freq_hz, t_d);
    let eta_error_is_absolute = eta < ETA_NULL_THRESHOLD;
    let eta_error = if eta_error_is_absolute {
        (eta_measured - eta).abs()
    } else {
        (eta_measured - eta).abs() / eta
    };
    let beta_error_rad = wrap_pi(beta_measured_rad - beta).abs();
    ToneCheck {
        freq_hz,
        eta_closed_form: eta,
        beta_closed_form_rad: beta,
        eta_measured,
        beta_measured_rad,
        eta_error,
        eta_error_is_absolute,
        beta_error_rad,
        within_tolerance: eta_error <= ETA_TOLERANCE_REL && beta_error_rad <= BETA_TOLERANCE_RAD,
    }
}

/// Envelope statistics of one component over its edge-excluded region.
fn envelope_stats(x: &SignalBuffer, nominal_amp: f64) -> Result<EnvelopeStats> {
    let env = analytic_envelope(x)?;
    let n = env.len();
    if n < 2 * ANALYTIC_EDGE_EXCLUSION + 1 {
        return Err(Error::TooShort {
            what: "envelope statistics",
            required: 2 * ANALYTIC_EDGE_EXCLUSION + 1,
            got: n,
        });
    }
    let valid = &env.samples()[ANALYTIC_EDGE_EXCLUSION..n - ANALYTIC_EDGE_EXCLUSION];
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in valid {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    let max_rel_deviation = ((max - nominal_amp).abs()).max((min - nominal_amp).abs()) / nominal_amp;
    Ok(EnvelopeStats {
        min,
        max,
        mean: sum / valid.len() as f64,
        max_rel_deviation,
    })
}
