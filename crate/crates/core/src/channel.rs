//! Single-hop skywave propagation: geometric delay, fractional-sample
//! delay filtering, delayed-and-attenuated superposition, the closed-form
//! single-tone distortion coefficients, AWGN injection, and
//! transmitter–receiver geometry helpers.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::signal::{add_signals, scale_signal, SignalBuffer};
use crate::window::kaiser;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Mean earth radius used for great-circle distances, m.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Tap count of the fractional-delay interpolation kernel.
pub const DELAY_KERNEL_TAPS: usize = 129;

/// Kaiser shape parameter of the fractional-delay kernel.
pub const DELAY_KERNEL_BETA: f64 = 8.6;

/// Samples at each buffer end contaminated by the delay kernel's support;
/// excluded from all tolerance checks.
pub const DELAY_EDGE_EXCLUSION: usize = (DELAY_KERNEL_TAPS - 1) / 2;

/// Geometry and strength of the single-hop skywave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkywaveParams {
    /// Ionospheric reflection height `h`, meters; > 0.
    pub ionosphere_height_m: f64,
    /// Transmitter–receiver ground distance `d`, meters; ≥ 0.
    pub ground_distance_m: f64,
    /// Skywave amplitude relative to the groundwave, in [0, 1].
    pub attenuation_alpha: f64,
}

impl SkywaveParams {
    /// Validates the field invariants.
    pub fn new(ionosphere_height_m: f64, ground_distance_m: f64, attenuation_alpha: f64) -> Result<Self> {
        if ionosphere_height_m <= 0.0 || !ionosphere_height_m.is_finite() {
            return Err(Error::Config(format!(
                "ionosphere_height_m must be positive and finite, got {ionosphere_height_m}"
            )));
        }
        if ground_distance_m < 0.0 || !ground_distance_m.is_finite() {
            return Err(Error::Config(format!(
                "ground_distance_m must be non-negative and finite, got {ground_distance_m}"
            )));
        }
        if !(0.0..=1.0).contains(&attenuation_alpha) {
            return Err(Error::Config(format!(
                "attenuation_alpha must lie in [0, 1], got {attenuation_alpha}"
            )));
        }
        Ok(Self {
            ionosphere_height_m,
            ground_distance_m,
            attenuation_alpha,
        })
    }
}

/// Additive white Gaussian noise configuration.
///
/// `snr_db` is the power of the noiseless composite relative to the noise,
/// over the full sampling band. `f64::INFINITY` is the documented sentinel
/// for "noise disabled"; any other non-finite value is rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Signal-to-noise ratio in dB, or `f64::INFINITY` to disable noise.
    pub snr_db: f64,
    /// Seed for the pinned noise generator; the realization regenerates
    /// byte-exactly from it.
    pub seed: u64,
}

/// Differential groundwave–skywave travel time
/// `t_d = (√(4h² + d²) − d) / c` for the single-hop flat geometry.
///
/// Strictly increasing in `h`, strictly decreasing in `d`.
pub fn skywave_delay(p: &SkywaveParams) -> f64 {
    let h = p.ionosphere_height_m;
    let d = p.ground_distance_m;
    ((4.0 * h * h + d * d).sqrt() - d) / SPEED_OF_LIGHT_M_S
}

/// Haversine distance between two points on a sphere of radius
/// [`EARTH_RADIUS_M`], inputs in degrees.
pub fn great_circle_distance(
    lat1_deg: f64,
    lon1_deg: f64,
    lat2_deg: f64,
    lon2_deg: f64,
) -> Result<f64> {
    for (name, v, lim) in [
        ("lat1", lat1_deg, 90.0),
        ("lat2", lat2_deg, 90.0),
        ("lon1", lon1_deg, 180.0),
        ("lon2", lon2_deg, 180.0),
    ] {
        if !v.is_finite() || v.abs() > lim {
            return Err(Error::Domain(format!(
                "{name} = {v} outside [-{lim}, {lim}] degrees"
            )));
        }
    }
    let (p1, p2) = (lat1_deg.to_radians(), lat2_deg.to_radians());
    let dp = (lat2_deg - lat1_deg).to_radians();
    let dl = (lon2_deg - lon1_deg).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    Ok(2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin())
}

/// Normalized sinc, `sin(πt)/(πt)`.
fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let p = std::f64::consts::PI * t;
    p.sin() / p
}

/// Builds the interpolation kernel for a fractional shift `frac ∈ (0, 1)`:
/// a windowed sinc whose Kaiser window is centered on the *shifted* peak
/// (making the kernel exactly symmetric about it, hence exactly linear
/// phase), normalized to unit DC gain.
fn delay_kernel(frac: f64) -> Vec<f64> {
    let m = DELAY_EDGE_EXCLUSION as f64;
    let mut h: Vec<f64> = (0..DELAY_KERNEL_TAPS)
        .map(|i| {
            let t = i as f64 - m - frac;
            sinc(t) * kaiser(t / m, DELAY_KERNEL_BETA)
        })
        .collect();
    let sum: f64 = h.iter().sum();
    for v in &mut h {
        *v /= sum;
    }
    h
}

/// Delays `x` by `tau` seconds: an integer-sample shift plus windowed-sinc
/// FIR interpolation for the fractional remainder (see the kernel
/// constants above). Samples whose history precedes the buffer are zero;
/// output keeps the input's start time, so the content is shifted within
/// the same time axis. The first and last [`DELAY_EDGE_EXCLUSION`] samples
/// of the populated region are edge-unreliable.
///
/// Exact integer-sample delays (`frac == 0`, including `tau == 0`) bypass
/// the interpolator entirely and are bit-exact shifts.
pub fn fractional_delay(x: &SignalBuffer, tau: f64) -> Result<SignalBuffer> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::Domain(format!(
            "delay must be non-negative and finite, got {tau} s"
        )));
    }
    if x.len() < DELAY_KERNEL_TAPS {
        return Err(Error::TooShort {
            what: "fractional delay",
            required: DELAY_KERNEL_TAPS,
            got: x.len(),
        });
    }
    let total = tau * x.sample_rate();
    let nint = total.floor();
    let frac = total - nint;
    let nint = nint as usize;
    let s = x.samples();
    let n = s.len();
    let mut y = vec![0.0f64; n];

    if frac == 0.0 {
        if nint < n {
            y[nint..].copy_from_slice(&s[..n - nint]);
        }
        return Ok(SignalBuffer::from_parts_unchecked(
            y,
            x.sample_rate(),
            x.start_time(),
        ));
    }

    // y[k] = Σ_p h[p] · x[k + m − nint − p]; reversing the kernel turns the
    // inner sum into a forward dot product over a contiguous slice.
    let m = DELAY_EDGE_EXCLUSION;
    let kernel = delay_kernel(frac);
    let rev: Vec<f64> = kernel.iter().rev().copied().collect();

    let lo = (nint + m).min(n);
    let hi = (n + nint).saturating_sub(m).min(n);
    for (k, out) in y.iter_mut().enumerate().take(hi).skip(lo) {
        let base = k - nint - m;
        *out = rev
            .iter()
            .zip(&s[base..base + DELAY_KERNEL_TAPS])
            .map(|(h, v)| h * v)
            .sum();
    }
    // Boundary samples: same sum with zero history/future.
    let mut edge = |k: usize| {
        let mut acc = 0.0;
        for (p, h) in kernel.iter().enumerate() {
            let idx = k as i64 + m as i64 - nint as i64 - p as i64;
            if idx >= 0 && (idx as usize) < n {
                acc += h * s[idx as usize];
            }
        }
        y[k] = acc;
    };
    for k in 0..lo {
        edge(k);
    }
    for k in hi..n {
        edge(k);
    }
    Ok(SignalBuffer::from_parts_unchecked(
        y,
        x.sample_rate(),
        x.start_time(),
    ))
}

/// Propagates `ground` through the single-hop skywave channel:
/// `skywave = α · delay(ground, t_d)` and `received = ground + skywave`.
/// Both components are returned so all three traces can be exported.
pub fn apply_skywave(
    ground: &SignalBuffer,
    p: &SkywaveParams,
) -> Result<(SignalBuffer, SignalBuffer)> {
    SkywaveParams::new(
        p.ionosphere_height_m,
        p.ground_distance_m,
        p.attenuation_alpha,
    )?;
    let delayed = fractional_delay(ground, skywave_delay(p))?;
    let skywave = scale_signal(&delayed, p.attenuation_alpha)?;
    let received = add_signals(ground, &skywave)?;
    Ok((received, skywave))
}

/// Amplitude scaling η and phase shift β of a single tone at `omega_rad_s`
/// under groundwave + skywave superposition, from the phasor sum
/// `η·e^{jβ} = 1 + α·e^{−jω t_d}`.
///
/// β is the phase of the received tone relative to the groundwave
/// (positive = advance), in (−π, π]. This form is self-consistent with
/// the waveform-level simulation: delaying a sinusoid by `t_d` rotates its
/// phasor by `−ω t_d`, and the attenuated copy adds to the direct path.
pub fn eta_beta_closed_form(alpha: f64, omega_rad_s: f64, t_d: f64) -> (f64, f64) {
    let theta = omega_rad_s * t_d;
    let re = 1.0 + alpha * theta.cos();
    let im = -alpha * theta.sin();
    (re.hypot(im), im.atan2(re))
}

/// Alternate closed form that models the delayed echo as subtracting from
/// the direct path: `η = √(1 + α² − 2α·cos(ω t_d))` with a single-argument
/// arctangent for β. Exposed for side-by-side comparison with
/// [`eta_beta_closed_form`]; the two amplitude expressions coincide
/// wherever `cos(ω t_d) = 0` and differ elsewhere. Undefined (NaN) when
/// `α·cos(ω t_d) = 1`.
pub fn eta_beta_subtractive_form(alpha: f64, omega_rad_s: f64, t_d: f64) -> (f64, f64) {
    let theta = omega_rad_s * t_d;
    let eta = (1.0 + alpha * alpha - 2.0 * alpha * theta.cos()).sqrt();
    let beta = (alpha * theta.sin() / (1.0 - alpha * theta.cos())).atan();
    (eta, beta)
}

/// Adds white Gaussian noise at the configured SNR relative to the mean
/// square of `x`. Variates come from the pinned splitmix64 stream through
/// the Box–Muller transform, both outputs consumed in order (cosine branch
/// first), so realizations are byte-exact across platforms.
pub fn add_awgn(x: &SignalBuffer, noise: &NoiseParams) -> Result<SignalBuffer> {
    if x.is_empty() {
        return Err(Error::Domain("cannot add noise to an empty buffer".into()));
    }
    if noise.snr_db == f64::INFINITY {
        return Ok(x.clone());
    }
    if !noise.snr_db.is_finite() {
        return Err(Error::NonFinite { what: "snr_db" });
    }
    let p_x = x.mean_square();
    if p_x == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let sigma = (p_x / 10.0f64.powf(noise.snr_db / 10.0)).sqrt();

    let mut rng = SplitMix64::new(noise.seed);
    let mut out = x.samples().to_vec();
    let mut i = 0;
    while i < out.len() {
        let (z0, z1) = rng.next_gaussian_pair();
        out[i] += sigma * z0;
        i += 1;
        if i < out.len() {
            out[i] += sigma * z1;
            i += 1;
        }
    }
    Ok(SignalBuffer::from_parts_unchecked(
        out,
        x.sample_rate(),
        x.start_time(),
    ))
}

/// Day/night selector for attenuation lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeOfDay {
    Day,
    Night,
}

impl std::fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TimeOfDay::Day => "day",
            TimeOfDay::Night => "night",
        })
    }
}

impl std::str::FromStr for TimeOfDay {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "day" => Ok(TimeOfDay::Day),
            "night" => Ok(TimeOfDay::Night),
            other => Err(format!("time of day must be 'day' or 'night', got '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct AlphaRow {
    km_min: f64,
    km_max: f64,
    time: TimeOfDay,
    alpha: f64,
}

/// Skywave attenuation lookup table, loaded from a plain-text file of
/// comma-separated rows `distance_km_min, distance_km_max, day|night,
/// alpha` with `#` comments. Distance buckets are half-open:
/// `[km_min, km_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    rows: Vec<AlphaRow>,
    path: PathBuf,
}

impl AlphaTable {
    /// Reads and parses a table file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, why: String| Error::AlphaTable {
            path: path.to_path_buf(),
            reason: format!("line {line}: {why}"),
        };
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(bad(line, format!("expected 4 fields, got {}", fields.len())));
            }
            let km_min: f64 = fields[0]
                .parse()
                .map_err(|_| bad(line, format!("bad distance_km_min '{}'", fields[0])))?;
            let km_max: f64 = fields[1]
                .parse()
                .map_err(|_| bad(line, format!("bad distance_km_max '{}'", fields[1])))?;
            let time: TimeOfDay = fields[2].parse().map_err(|e| bad(line, e))?;
            let alpha: f64 = fields[3]
                .parse()
                .map_err(|_| bad(line, format!("bad alpha '{}'", fields[3])))?;
            if !km_min.is_finite() || !km_max.is_finite() || km_min < 0.0 || km_max <= km_min {
                return Err(bad(
                    line,
                    format!("need 0 ≤ distance_km_min < distance_km_max, got {km_min}, {km_max}"),
                ));
            }
            if !(0.0..=1.0).contains(&alpha) {
                return Err(bad(line, format!("alpha {alpha} outside [0, 1]")));
            }
            rows.push(AlphaRow {
                km_min,
                km_max,
                time,
                alpha,
            });
        }
        if rows.is_empty() {
            return Err(Error::AlphaTable {
                path: path.to_path_buf(),
                reason: "table contains no rows".into(),
            });
        }
        Ok(Self {
            rows,
            path: path.to_path_buf(),
        })
    }

    /// Looks up α for a ground distance (meters) and time of day. The first
    /// row whose `[km_min, km_max)` bucket contains the distance wins.
    pub fn lookup(&self, distance_m: f64, time: TimeOfDay) -> Result<f64> {
        let km = distance_m / 1000.0;
        self.rows
            .iter()
            .find(|r| r.time == time && km >= r.km_min && km < r.km_max)
            .map(|r| r.alpha)
            .ok_or_else(|| Error::AlphaTable {
                path: self.path.clone(),
                reason: format!("no {time} row covers {km} km"),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::estimate_tone;

    fn tone(amp: f64, freq: f64, phase: f64, fs: f64, n: usize) -> SignalBuffer {
        let samples = (0..n)
            .map(|i| amp * (std::f64::consts::TAU * freq * (i as f64 / fs) + phase).sin())
            .collect();
        SignalBuffer::new(samples, fs, 0.0).unwrap()
    }

    #[test]
    fn delay_anchor_value() {
        let p = SkywaveParams::new(90_000.0, 210_000.0, 0.3).unwrap();
        let t_d = skywave_delay(&p);
        // ≈ 222.10 µs; the acceptance suite pins this to 1e-12 s against an
        // extended-precision evaluation.
        assert!((t_d * 1e6 - 222.10).abs() < 0.01, "t_d = {t_d}");
    }

    #[test]
    fn delay_at_zero_distance_is_two_hops_of_height() {
        let p = SkywaveParams::new(90_000.0, 0.0, 0.0).unwrap();
        assert_eq!(skywave_delay(&p), 180_000.0 / SPEED_OF_LIGHT_M_S);
    }

    #[test]
    fn delay_monotonicity_spot_checks() {
        let at = |h, d| skywave_delay(&SkywaveParams::new(h, d, 0.5).unwrap());
        assert!(at(90_000.0, 100_000.0) > at(90_000.0, 200_000.0));
        assert!(at(120_000.0, 210_000.0) > at(90_000.0, 210_000.0));
    }

    #[test]
    fn skywave_params_validation() {
        assert!(SkywaveParams::new(0.0, 1.0, 0.5).is_err());
        assert!(SkywaveParams::new(90_000.0, -1.0, 0.5).is_err());
        assert!(SkywaveParams::new(90_000.0, 1.0, 1.5).is_err());
        assert!(SkywaveParams::new(90_000.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn great_circle_examples() {
        assert_eq!(great_circle_distance(37.0, 126.0, 37.0, 126.0).unwrap(), 0.0);
        let half = great_circle_distance(0.0, 0.0, 0.0, 180.0).unwrap();
        let expect = std::f64::consts::PI * EARTH_RADIUS_M;
        assert!((half - expect).abs() / expect < 1e-12);
        let one_deg = great_circle_distance(0.0, 0.0, 0.0, 1.0).unwrap();
        let arc = std::f64::consts::TAU * EARTH_RADIUS_M / 360.0;
        assert!((one_deg - arc).abs() < 1e-6, "{one_deg} vs {arc}");
    }

    #[test]
    fn great_circle_rejects_bad_coordinates() {
        assert!(great_circle_distance(91.0, 0.0, 0.0, 0.0).is_err());
        assert!(great_circle_distance(0.0, 181.0, 0.0, 0.0).is_err());
        assert!(great_circle_distance(0.0, 0.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn zero_delay_is_identity() {
        let x = tone(1.0, 287_000.0, 0.3, 2_048_000.0, 4096);
        let y = fractional_delay(&x, 0.0).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn integer_delay_is_an_exact_shift() {
        let fs = 2_048_000.0;
        let x = tone(1.0, 287_000.0, 0.0, fs, 4096);
        let k = 7;
        let y = fractional_delay(&x, k as f64 / fs).unwrap();
        for n in 0..k {
            assert_eq!(y.samples()[n], 0.0);
        }
        for n in k..x.len() {
            assert_eq!(y.samples()[n].to_bits(), x.samples()[n - k].to_bits());
        }
    }

    #[test]
    fn fractional_delay_shifts_tone_phase() {
        let fs = 2_048_000.0;
        let f = 287_000.0;
        let tau = 222.10e-6;
        let x = tone(1.0, f, 0.0, fs, 204_800);
        let y = fractional_delay(&x, tau).unwrap();
        let shift = (tau * fs) as usize + DELAY_EDGE_EXCLUSION;
        let w = shift + 1..x.len() - DELAY_EDGE_EXCLUSION;
        let p0 = estimate_tone(&x, f, w.clone()).unwrap().phase_rad;
        let p1 = estimate_tone(&y, f, w).unwrap().phase_rad;
        let expect = -std::f64::consts::TAU * f * tau;
        let diff = (p1 - p0 - expect).rem_euclid(std::f64::consts::TAU);
        let err = diff.min(std::f64::consts::TAU - diff);
        assert!(err < 1e-3, "phase error {err} rad");
    }

    #[test]
    fn delay_rejects_short_buffers_and_negative_delay() {
        let x = tone(1.0, 100_000.0, 0.0, 819_200.0, 100);
        assert!(matches!(
            fractional_delay(&x, 1e-6),
            Err(Error::TooShort { .. })
        ));
        let x2 = tone(1.0, 100_000.0, 0.0, 819_200.0, 4096);
        assert!(matches!(
            fractional_delay(&x2, -1e-9),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn transparent_channel_at_zero_alpha() {
        let x = tone(1.0, 287_000.0, 0.1, 2_048_000.0, 8192);
        let p = SkywaveParams::new(90_000.0, 210_000.0, 0.0).unwrap();
        let (received, skywave) = apply_skywave(&x, &p).unwrap();
        assert!(skywave.samples().iter().all(|v| *v == 0.0));
        for (a, b) in received.samples().iter().zip(x.samples()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn received_is_exactly_ground_plus_skywave() {
        let x = tone(0.8, 287_000.0, 0.0, 2_048_000.0, 8192);
        let p = SkywaveParams::new(90_000.0, 210_000.0, 0.3).unwrap();
        let (received, skywave) = apply_skywave(&x, &p).unwrap();
        let rebuilt = add_signals(&x, &skywave).unwrap();
        for (a, b) in received.samples().iter().zip(rebuilt.samples()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn channel_is_linear_under_power_of_two_scaling() {
        let x = tone(0.7, 287_000.0, 0.4, 2_048_000.0, 8192);
        let p = SkywaveParams::new(90_000.0, 210_000.0, 0.3).unwrap();
        let (r1, _) = apply_skywave(&scale_signal(&x, 2.0).unwrap(), &p).unwrap();
        let (r0, _) = apply_skywave(&x, &p).unwrap();
        let r0_scaled = scale_signal(&r0, 2.0).unwrap();
        for (a, b) in r1.samples().iter().zip(r0_scaled.samples()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    /// Quarter-cycle geometry: pick d so that ω·t_d = π/2 at 287 kHz, then
    /// check the measured tone distortion against the phasor closed form,
    /// (η, β) = (√1.09, −atan 0.3).
    #[test]
    fn quarter_cycle_tone_distortion() {
        let fs = 2_048_000.0;
        let f = 287_000.0;
        let tau = 1.0 / (4.0 * f);
        let h = 1000.0;
        let c_tau = SPEED_OF_LIGHT_M_S * tau;
        let d = (4.0 * h * h - c_tau * c_tau) / (2.0 * c_tau);
        let p = SkywaveParams::new(h, d, 0.3).unwrap();
        let t_d = skywave_delay(&p);
        assert!(
            (std::f64::consts::TAU * f * t_d - std::f64::consts::FRAC_PI_2).abs() < 1e-9
        );

        let x = tone(1.0, f, 0.2, fs, 204_800);
        let (received, _) = apply_skywave(&x, &p).unwrap();
        let shift = (t_d * fs) as usize + DELAY_EDGE_EXCLUSION;
        let w = shift + 1..x.len() - DELAY_EDGE_EXCLUSION;
        let g = estimate_tone(&x, f, w.clone()).unwrap();
        let r = estimate_tone(&received, f, w).unwrap();

        let eta = r.amplitude / g.amplitude;
        let mut beta = r.phase_rad - g.phase_rad;
        while beta > std::f64::consts::PI {
            beta -= std::f64::consts::TAU;
        }
        while beta <= -std::f64::consts::PI {
            beta += std::f64::consts::TAU;
        }

        let eta_expect = 1.09f64.sqrt();
        let beta_expect = -0.3f64.atan();
        assert!(
            ((eta - eta_expect) / eta_expect).abs() < 1e-3,
            "eta {eta} vs {eta_expect}"
        );
        assert!((beta - beta_expect).abs() < 1e-3, "beta {beta} vs {beta_expect}");
    }

    #[test]
    fn closed_form_examples() {
        let (eta, beta) = eta_beta_closed_form(0.0, 1.0, 1.0);
        assert_eq!((eta, beta), (1.0, 0.0));

        let theta_pi = eta_beta_closed_form(0.5, std::f64::consts::PI, 1.0);
        assert_eq!(theta_pi.0, 0.5);
        assert!(theta_pi.1.abs() < 1e-12);

        let quarter = eta_beta_closed_form(0.3, std::f64::consts::FRAC_PI_2, 1.0);
        assert!((quarter.0 - 1.09f64.sqrt()).abs() < 1e-12);
        assert!((quarter.1 + 0.3f64.atan()).abs() < 1e-12);
    }

    /// Where cos(ω t_d) = 0 the two closed forms give the same amplitude
    /// and mirrored phase; elsewhere they differ by construction.
    #[test]
    fn subtractive_form_comparison() {
        let quarter_phasor = eta_beta_closed_form(0.3, std::f64::consts::FRAC_PI_2, 1.0);
        let quarter_sub = eta_beta_subtractive_form(0.3, std::f64::consts::FRAC_PI_2, 1.0);
        assert!((quarter_phasor.0 - quarter_sub.0).abs() < 1e-12);
        assert!((quarter_phasor.1 + quarter_sub.1).abs() < 1e-12);

        let zero_phasor = eta_beta_closed_form(0.5, 0.0, 1.0);
        let zero_sub = eta_beta_subtractive_form(0.5, 0.0, 1.0);
        assert_eq!(zero_phasor.0, 1.5);
        assert_eq!(zero_sub.0, 0.5);
    }

    #[test]
    fn noise_disabled_is_passthrough() {
        let x = tone(1.0, 287_000.0, 0.0, 2_048_000.0, 4096);
        let y = add_awgn(
            &x,
            &NoiseParams {
                snr_db: f64::INFINITY,
                seed: 1,
            },
        )
        .unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let x = tone(1.0, 287_000.0, 0.0, 2_048_000.0, 4096);
        let np = NoiseParams {
            snr_db: 10.0,
            seed: 77,
        };
        let a = add_awgn(&x, &np).unwrap();
        let b = add_awgn(&x, &np).unwrap();
        for (u, v) in a.samples().iter().zip(b.samples()) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
        let c = add_awgn(
            &x,
            &NoiseParams {
                snr_db: 10.0,
                seed: 78,
            },
        )
        .unwrap();
        assert!(a.samples() != c.samples());
    }

    #[test]
    fn noise_on_zero_signal_is_degenerate() {
        let x = SignalBuffer::new(vec![0.0; 1024], 819_200.0, 0.0).unwrap();
        assert!(matches!(
            add_awgn(
                &x,
                &NoiseParams {
                    snr_db: 20.0,
                    seed: 1
                }
            ),
            Err(Error::DegenerateSignal)
        ));
    }

    #[test]
    fn alpha_table_parse_and_lookup() {
        let text = "\
# distance_km_min, distance_km_max, day|night, alpha
0,    150,  day,   0.12
0,    150,  night, 0.35
150,  400,  day,   0.08   # long path
150,  400,  night, 0.30
";
        let t = AlphaTable::parse(text, Path::new("inline")).unwrap();
        assert_eq!(t.lookup(100_000.0, TimeOfDay::Day).unwrap(), 0.12);
        assert_eq!(t.lookup(100_000.0, TimeOfDay::Night).unwrap(), 0.35);
        assert_eq!(t.lookup(210_000.0, TimeOfDay::Night).unwrap(), 0.30);
        // Buckets are half-open: 150 km falls in the second row.
        assert_eq!(t.lookup(150_000.0, TimeOfDay::Day).unwrap(), 0.08);
        assert!(t.lookup(500_000.0, TimeOfDay::Day).is_err());
    }

    #[test]
    fn alpha_table_rejects_malformed_rows() {
        for text in [
            "0, 150, day",                 // missing field
            "0, 150, dusk, 0.2",           // bad time of day
            "150, 0, day, 0.2",            // inverted bucket
            "0, 150, day, 1.7",            // alpha out of range
            "# only comments\n",           // no rows
        ] {
            assert!(
                matches!(
                    AlphaTable::parse(text, Path::new("inline")),
                    Err(Error::AlphaTable { .. })
                ),
                "accepted malformed table: {text:?}"
            );
        }
    }

    #[test]
    fn alpha_table_load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("alpha.csv");
        std::fs::write(&path, "0, 500, night, 0.25\n").unwrap();
        let t = AlphaTable::load(&path).unwrap();
        assert_eq!(t.lookup(210_000.0, TimeOfDay::Night).unwrap(), 0.25);
        assert!(matches!(
            AlphaTable::load(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }
}
