//! Command-line runner for the ranging-signal simulator.
//!
//! Subcommands: `run` executes a scenario end to end and writes sample
//! files, CSV traces, metadata, and a verification report; `validate`
//! checks a scenario file against every constraint; `report` reprints the
//! verification report of a completed run directory.
//!
//! Exit codes: 0 success, 2 configuration invalid, 3 I/O failure,
//! 4 verification-report tolerance breach.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rmode_core::run::{run_resolved, RunReport, REPORT_FILE};
use rmode_core::scenario::{OutputFormat, ScenarioConfig};
use rmode_core::{validate_scenario, Error};

#[derive(Parser)]
#[command(
    name = "rmode-sim",
    version,
    about = "Deterministic simulator for an MF beacon ranging signal: \
             an MSK data waveform plus two CW ranging tones, propagated \
             through a single-hop skywave channel with additive noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario end to end and write all outputs.
    Run {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Regenerate the run with this seed: the bit stream uses the
        /// seed itself, the noise generator uses seed + 1.
        #[arg(long, value_name = "SEED")]
        seed_override: Option<u64>,
        /// Write outputs here instead of the scenario's outputs.dir
        /// (resolved against the current directory).
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
        /// Sample-file format: raw, wav, or both.
        #[arg(long, value_name = "FMT")]
        format: Option<OutputFormat>,
    },
    /// Check a scenario file against every constraint.
    Validate {
        /// Scenario JSON file.
        scenario: PathBuf,
    },
    /// Print the verification report of a completed run directory.
    Report {
        /// Directory a previous `run` wrote its outputs to.
        run_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            scenario,
            seed_override,
            out_dir,
            format,
        } => cmd_run(&scenario, seed_override, out_dir, format),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Report { run_dir } => cmd_report(&run_dir),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            report_error(&err);
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Maps error classes onto the documented exit codes: 3 for I/O
/// failures, 2 for everything wrong with the configuration itself.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn report_error(err: &Error) {
    if let Error::Validation(violations) = err {
        eprintln!("error: scenario violates {} constraint(s):", violations.len());
        for v in violations {
            eprintln!("  {v}");
        }
    } else {
        eprintln!("error: {err}");
    }
}

fn cmd_run(
    scenario: &Path,
    seed_override: Option<u64>,
    out_dir: Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<u8, Error> {
    let cfg = ScenarioConfig::load(scenario)?;
    let base = scenario.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut resolved = cfg.resolve(&base)?;
    if let Some(seed) = seed_override {
        resolved.bits_seed = seed;
        resolved.noise.seed = seed.wrapping_add(1);
    }
    if let Some(dir) = out_dir {
        resolved.out_dir = Some(dir);
    }
    if let Some(fmt) = format {
        resolved.format = fmt;
    }
    let report = run_resolved(&resolved)?;
    print_report(&report);
    if let Some(dir) = &resolved.out_dir {
        println!("outputs written to {}", dir.display());
    }
    Ok(if report.verification_passed { 0 } else { 4 })
}

fn cmd_validate(scenario: &Path) -> Result<u8, Error> {
    let cfg = ScenarioConfig::load(scenario)?;
    let violations = validate_scenario(&cfg);
    if violations.is_empty() {
        println!("ok: {} satisfies every constraint", scenario.display());
        Ok(0)
    } else {
        eprintln!(
            "{} violates {} constraint(s):",
            scenario.display(),
            violations.len()
        );
        for v in &violations {
            eprintln!("  {v}");
        }
        Ok(2)
    }
}

fn cmd_report(run_dir: &Path) -> Result<u8, Error> {
    let path = run_dir.join(REPORT_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let report: RunReport = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        source: e,
    })?;
    print_report(&report);
    Ok(if report.verification_passed { 0 } else { 4 })
}

fn print_report(report: &RunReport) {
    if let Some(name) = &report.scenario_name {
        println!("scenario: {name}");
    }
    println!(
        "{} samples at {} Hz ({} s)",
        report.num_samples, report.sample_rate_hz, report.duration_s
    );
    println!(
        "skywave delay: {:.3} us, attenuation alpha: {}",
        report.skywave_delay_s * 1e6,
        report.attenuation_alpha
    );
    for c in &report.cw_checks {
        println!(
            "tone {} Hz: amplitude ratio {:.6} (predicted {:.6}), \
             phase offset {:.6} rad (predicted {:.6}) -> {}",
            c.freq_hz,
            c.eta_measured,
            c.eta_closed_form,
            c.beta_measured_rad,
            c.beta_closed_form_rad,
            if c.within_tolerance { "ok" } else { "OUT OF TOLERANCE" }
        );
    }
    let e = &report.msk_envelope;
    println!(
        "MSK envelope: min {:.6}, max {:.6}, max relative deviation {:.2e} -> {}",
        e.min,
        e.max,
        e.max_rel_deviation,
        if report.envelope_within_tolerance {
            "ok"
        } else {
            "OUT OF TOLERANCE"
        }
    );
    match (report.snr_configured_db, report.snr_measured_db) {
        (Some(cfg), Some(meas)) => println!("SNR: configured {cfg} dB, measured {meas:.3} dB"),
        _ => println!("SNR: noise disabled"),
    }
    println!(
        "verification: {}",
        if report.verification_passed {
            "PASSED"
        } else {
            "FAILED"
        }
    );
}
