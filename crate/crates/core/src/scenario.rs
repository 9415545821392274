//! Scenario files: JSON schema, structural validation, and resolution of
//! a parsed scenario into the runtime parameters the pipeline consumes.
//!
//! Validation and resolution are split on purpose: [`validate_scenario`]
//! is pure and reports *all* violations at once (violations are data, not
//! exceptions), while [`ScenarioConfig::resolve`] performs the lookups
//! that may touch the filesystem (attenuation tables) and folds optional
//! fields into their documented defaults.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{
    great_circle_distance, AlphaTable, NoiseParams, SkywaveParams, TimeOfDay,
};
use crate::error::{Error, Result, Violation};
use crate::tx::TransmitterConfig;

/// Lower edge of the MF beacon band, Hz.
pub const MF_BAND_MIN_HZ: f64 = 285_000.0;

/// Upper edge of the MF beacon band, Hz.
pub const MF_BAND_MAX_HZ: f64 = 325_000.0;

/// Data rates the beacon standard defines, bps.
pub const STANDARD_DATA_RATES_BPS: [f64; 2] = [100.0, 200.0];

/// Default CSV plot window: 20 ms starting at 0.5 s, past all
/// edge-exclusion regions on any realistic scenario.
pub const DEFAULT_PLOT_WINDOW: (f64, f64) = (0.5, 0.52);

/// Transmitter section of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitterSpec {
    /// Carrier frequency `f_c`, Hz.
    pub carrier_freq_hz: f64,
    /// Data rate `1/T`, bps.
    pub data_rate_bps: f64,
    /// MSK amplitude.
    pub amp_msk: f64,
    /// Lower CW tone amplitude; defaults to `amp_msk/√2` (a 50/25/25
    /// power split across MSK and the two tones).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_cw1: Option<f64>,
    /// Upper CW tone amplitude; same default as `amp_cw1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_cw2: Option<f64>,
    /// Lower CW tone initial phase, radians (default 0).
    #[serde(default)]
    pub phase_cw1_rad: f64,
    /// Upper CW tone initial phase, radians (default 0).
    #[serde(default)]
    pub phase_cw2_rad: f64,
    /// Initial modulator phase selector, ±1 (default +1).
    #[serde(default = "default_inphase_bit")]
    pub initial_inphase_bit: i8,
    /// Nominal transmit power, watts; metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_tx_power_w: Option<f64>,
    /// Lifts the MF band and standard-rate restrictions for experiments.
    #[serde(default)]
    pub allow_nonstandard: bool,
}

fn default_inphase_bit() -> i8 {
    1
}

/// A latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatLon {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

/// Skywave section: geometry plus attenuation, each expressible directly
/// or via a lookup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkywaveSpec {
    /// Ionospheric reflection height, meters.
    pub ionosphere_height_m: f64,
    /// Ground distance, meters. Mutually exclusive with coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_distance_m: Option<f64>,
    /// Transmitting station position; paired with `receiver`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub station: Option<LatLon>,
    /// Receiver position; paired with `station`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receiver: Option<LatLon>,
    /// Skywave attenuation α in [0, 1]. Mutually exclusive with
    /// `alpha_table`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attenuation_alpha: Option<f64>,
    /// Attenuation lookup table path, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_table: Option<PathBuf>,
    /// Day/night selector for the table lookup.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_of_day: Option<TimeOfDay>,
}

/// Noise section; omit it (or set `snr_db` to null) to disable noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// SNR of the noiseless composite over the noise, dB; null disables.
    #[serde(default)]
    pub snr_db: Option<f64>,
    /// Noise generator seed (default 0).
    #[serde(default)]
    pub seed: u64,
}

/// Sample-file container selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// 32-bit little-endian IEEE-754 floats, no header.
    #[default]
    Raw,
    /// WAV container with IEEE-float samples.
    Wav,
    /// Both of the above.
    Both,
}

impl OutputFormat {
    /// Whether raw files are written.
    pub fn writes_raw(self) -> bool {
        matches!(self, OutputFormat::Raw | OutputFormat::Both)
    }
    /// Whether WAV files are written.
    pub fn writes_wav(self) -> bool {
        matches!(self, OutputFormat::Wav | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(OutputFormat::Raw),
            "wav" => Ok(OutputFormat::Wav),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("format must be raw, wav, or both, got '{other}'")),
        }
    }
}

/// Output section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory the run writes into; created if missing. Relative paths
    /// are taken relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Sample-file format (default raw).
    #[serde(default)]
    pub format: OutputFormat,
}

/// CSV trace window, seconds from buffer start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotWindowSpec {
    pub start_s: f64,
    pub end_s: f64,
}

/// A parsed scenario file. Field names mirror the JSON schema; unknown
/// keys are rejected to catch typos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Optional human-readable scenario name, echoed into outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub transmitter: TransmitterSpec,
    pub skywave: SkywaveSpec,
    /// Absent means noise disabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    /// Seed for the payload bit generator.
    pub bits_seed: u64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputSpec>,
    /// CSV trace window; defaults to 20 ms at 0.5 s, clamped into the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_window: Option<PlotWindowSpec>,
}

/// A scenario with every choice folded in: lookups performed, defaults
/// applied, ready for the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScenario {
    pub name: Option<String>,
    pub transmitter: TransmitterConfig,
    pub skywave: SkywaveParams,
    pub noise: NoiseParams,
    pub bits_seed: u64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// CSV window as (start_s, end_s).
    pub plot_window: (f64, f64),
}

impl ScenarioConfig {
    /// Reads and parses a scenario file (strict JSON, unknown keys
    /// rejected). Structural validation is separate; see
    /// [`validate_scenario`] and [`ScenarioConfig::resolve`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Validates, resolves geometry/attenuation lookups, and applies
    /// defaults. `base_dir` anchors relative paths (attenuation table,
    /// output directory) — pass the scenario file's directory.
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedScenario> {
        let violations = validate_scenario(self);
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }

        let t = &self.transmitter;
        let default_cw = t.amp_msk / std::f64::consts::SQRT_2;
        let transmitter = TransmitterConfig {
            carrier_freq_hz: t.carrier_freq_hz,
            data_rate_bps: t.data_rate_bps,
            amp_msk: t.amp_msk,
            amp_cw1: t.amp_cw1.unwrap_or(default_cw),
            amp_cw2: t.amp_cw2.unwrap_or(default_cw),
            phase_cw1_rad: t.phase_cw1_rad,
            phase_cw2_rad: t.phase_cw2_rad,
            initial_inphase_bit: t.initial_inphase_bit,
            nominal_tx_power_w: t.nominal_tx_power_w,
        };

        let sky = &self.skywave;
        let distance = match (sky.ground_distance_m, sky.station, sky.receiver) {
            (Some(d), _, _) => d,
            (None, Some(s), Some(r)) => {
                great_circle_distance(s.lat_deg, s.lon_deg, r.lat_deg, r.lon_deg)?
            }
            _ => unreachable!("validation enforces the geometry alternatives"),
        };
        let alpha = match (&sky.attenuation_alpha, &sky.alpha_table) {
            (Some(a), _) => *a,
            (None, Some(table)) => {
                let path = resolve_path(base_dir, table);
                let time = sky
                    .time_of_day
                    .expect("validation enforces time_of_day with alpha_table");
                AlphaTable::load(&path)?.lookup(distance, time)?
            }
            _ => unreachable!("validation enforces the attenuation alternatives"),
        };
        let skywave = SkywaveParams::new(sky.ionosphere_height_m, distance, alpha)?;

        let noise = match &self.noise {
            Some(n) => NoiseParams {
                snr_db: n.snr_db.unwrap_or(f64::INFINITY),
                seed: n.seed,
            },
            None => NoiseParams {
                snr_db: f64::INFINITY,
                seed: 0,
            },
        };

        let (out_dir, format) = match &self.outputs {
            Some(o) => (
                o.dir.as_ref().map(|d| resolve_path(base_dir, d)),
                o.format,
            ),
            None => (None, OutputFormat::Raw),
        };

        let plot_window = match self.plot_window {
            Some(w) => (w.start_s, w.end_s),
            None => {
                let (mut start, mut end) = DEFAULT_PLOT_WINDOW;
                if self.duration_s < end {
                    end = self.duration_s;
                    start = (end - (DEFAULT_PLOT_WINDOW.1 - DEFAULT_PLOT_WINDOW.0)).max(0.0);
                }
                (start, end)
            }
        };

        Ok(ResolvedScenario {
            name: self.name.clone(),
            transmitter,
            skywave,
            noise,
            bits_seed: self.bits_seed,
            sample_rate_hz: self.sample_rate_hz,
            duration_s: self.duration_s,
            out_dir,
            format,
            plot_window,
        })
    }
}

fn resolve_path(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

fn violation(field: &str, value: impl Display, constraint: impl Into<String>) -> Violation {
    Violation {
        field: field.into(),
        value: value.to_string(),
        constraint: constraint.into(),
    }
}

fn fmt_opt<T: Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "absent".into(),
    }
}

/// Checks every documented scenario constraint and returns the complete
/// list of violations (empty iff the scenario is structurally valid).
/// Purely structural: filesystem lookups (attenuation table contents)
/// happen at resolution time instead.
pub fn validate_scenario(cfg: &ScenarioConfig) -> Vec<Violation> {
    let mut v = Vec::new();
    let t = &cfg.transmitter;

    if !t.carrier_freq_hz.is_finite() || t.carrier_freq_hz <= 0.0 {
        v.push(violation(
            "transmitter.carrier_freq_hz",
            t.carrier_freq_hz,
            "must be positive and finite",
        ));
    } else if !t.allow_nonstandard
        && !(MF_BAND_MIN_HZ..=MF_BAND_MAX_HZ).contains(&t.carrier_freq_hz)
    {
        v.push(violation(
            "transmitter.carrier_freq_hz",
            t.carrier_freq_hz,
            "must lie in the MF beacon band [285000, 325000] Hz \
             (set transmitter.allow_nonstandard to override)",
        ));
    }

    if !t.data_rate_bps.is_finite() || t.data_rate_bps <= 0.0 {
        v.push(violation(
            "transmitter.data_rate_bps",
            t.data_rate_bps,
            "must be positive and finite",
        ));
    } else if !t.allow_nonstandard && !STANDARD_DATA_RATES_BPS.contains(&t.data_rate_bps) {
        v.push(violation(
            "transmitter.data_rate_bps",
            t.data_rate_bps,
            "must be 100 or 200 bps (set transmitter.allow_nonstandard to override)",
        ));
    }

    for (name, amp) in [
        ("transmitter.amp_msk", Some(t.amp_msk)),
        ("transmitter.amp_cw1", t.amp_cw1),
        ("transmitter.amp_cw2", t.amp_cw2),
    ] {
        if let Some(a) = amp {
            if !a.is_finite() || a < 0.0 {
                v.push(violation(name, a, "must be ≥ 0 and finite"));
            }
        }
    }
    for (name, phase) in [
        ("transmitter.phase_cw1_rad", t.phase_cw1_rad),
        ("transmitter.phase_cw2_rad", t.phase_cw2_rad),
    ] {
        if !phase.is_finite() {
            v.push(violation(name, phase, "must be finite"));
        }
    }
    if t.initial_inphase_bit != 1 && t.initial_inphase_bit != -1 {
        v.push(violation(
            "transmitter.initial_inphase_bit",
            t.initial_inphase_bit,
            "must be +1 or -1",
        ));
    }
    if let Some(p) = t.nominal_tx_power_w {
        if !p.is_finite() || p <= 0.0 {
            v.push(violation(
                "transmitter.nominal_tx_power_w",
                p,
                "must be positive and finite when given",
            ));
        }
    }

    if !cfg.sample_rate_hz.is_finite() || cfg.sample_rate_hz <= 0.0 {
        v.push(violation(
            "sample_rate_hz",
            cfg.sample_rate_hz,
            "must be positive and finite",
        ));
    } else if t.carrier_freq_hz.is_finite() && t.data_rate_bps.is_finite() {
        let min = 2.0 * (t.carrier_freq_hz + 10.0 * t.data_rate_bps);
        if cfg.sample_rate_hz <= min {
            v.push(violation(
                "sample_rate_hz",
                cfg.sample_rate_hz,
                format!("must exceed 2·(carrier_freq_hz + 10·data_rate_bps) = {min} Hz"),
            ));
        }
    }

    if !cfg.duration_s.is_finite() || cfg.duration_s <= 0.0 {
        v.push(violation(
            "duration_s",
            cfg.duration_s,
            "must be positive and finite",
        ));
    }

    let sky = &cfg.skywave;
    if !sky.ionosphere_height_m.is_finite() || sky.ionosphere_height_m <= 0.0 {
        v.push(violation(
            "skywave.ionosphere_height_m",
            sky.ionosphere_height_m,
            "must be positive and finite",
        ));
    }
    let has_coords = sky.station.is_some() || sky.receiver.is_some();
    match (sky.ground_distance_m, has_coords) {
        (Some(_), true) => v.push(violation(
            "skywave.ground_distance_m",
            fmt_opt(&sky.ground_distance_m),
            "specify either ground_distance_m or station/receiver coordinates, not both",
        )),
        (None, false) => v.push(violation(
            "skywave.ground_distance_m",
            "absent",
            "specify ground_distance_m or station/receiver coordinates",
        )),
        _ => {}
    }
    if sky.station.is_some() != sky.receiver.is_some() {
        v.push(violation(
            "skywave.station",
            format!(
                "station {}, receiver {}",
                if sky.station.is_some() { "given" } else { "absent" },
                if sky.receiver.is_some() { "given" } else { "absent" },
            ),
            "station and receiver coordinates must be given together",
        ));
    }
    if let Some(d) = sky.ground_distance_m {
        if !d.is_finite() || d < 0.0 {
            v.push(violation(
                "skywave.ground_distance_m",
                d,
                "must be ≥ 0 and finite",
            ));
        }
    }
    for (name, point) in [
        ("skywave.station", &sky.station),
        ("skywave.receiver", &sky.receiver),
    ] {
        if let Some(p) = point {
            if !p.lat_deg.is_finite() || p.lat_deg.abs() > 90.0 {
                v.push(violation(
                    &format!("{name}.lat_deg"),
                    p.lat_deg,
                    "must lie in [-90, 90] degrees",
                ));
            }
            if !p.lon_deg.is_finite() || p.lon_deg.abs() > 180.0 {
                v.push(violation(
                    &format!("{name}.lon_deg"),
                    p.lon_deg,
                    "must lie in [-180, 180] degrees",
                ));
            }
        }
    }

    match (&sky.attenuation_alpha, &sky.alpha_table) {
        (Some(_), Some(_)) => v.push(violation(
            "skywave.attenuation_alpha",
            fmt_opt(&sky.attenuation_alpha),
            "specify either attenuation_alpha or alpha_table, not both",
        )),
        (None, None) => v.push(violation(
            "skywave.attenuation_alpha",
            "absent",
            "specify attenuation_alpha or alpha_table",
        )),
        _ => {}
    }
    if let Some(a) = sky.attenuation_alpha {
        if !(0.0..=1.0).contains(&a) {
            v.push(violation(
                "skywave.attenuation_alpha",
                a,
                "must lie in [0, 1]",
            ));
        }
    }
    if sky.alpha_table.is_some() && sky.time_of_day.is_none() {
        v.push(violation(
            "skywave.time_of_day",
            "absent",
            "required when alpha_table is used",
        ));
    }
    if sky.alpha_table.is_none() && sky.time_of_day.is_some() {
        v.push(violation(
            "skywave.time_of_day",
            sky.time_of_day.map(|t| t.to_string()).unwrap_or_default(),
            "only applies when alpha_table is used",
        ));
    }

    if let Some(noise) = &cfg.noise {
        if let Some(snr) = noise.snr_db {
            if !snr.is_finite() {
                v.push(violation(
                    "noise.snr_db",
                    snr,
                    "must be finite (omit or null to disable noise)",
                ));
            }
        }
    }

    if let Some(w) = cfg.plot_window {
        let ok = w.start_s.is_finite()
            && w.end_s.is_finite()
            && w.start_s >= 0.0
            && w.start_s < w.end_s
            && (!cfg.duration_s.is_finite() || w.end_s <= cfg.duration_s);
        if !ok {
            v.push(violation(
                "plot_window",
                format!("[{}, {}]", w.start_s, w.end_s),
                "must satisfy 0 ≤ start_s < end_s ≤ duration_s",
            ));
        }
    }

    v
}
