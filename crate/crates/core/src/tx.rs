//! Transmit-side synthesis: pseudorandom payload bits, the MSK data
//! waveform, the two CW ranging tones, and their composite.
//!
//! MSK is synthesized by per-sample phase accumulation: each bit selects an
//! instantaneous frequency of `f_c - 1/(4T)` (bit 0) or `f_c + 1/(4T)`
//! (bit 1), and the phase accumulator carries across bit boundaries, so
//! phase continuity is structural rather than corrected after the fact.
//! The accumulator works in cycles (not radians) with a fresh anchor at
//! every bit boundary, which keeps the absolute phase error orders of
//! magnitude below the waveform tolerances even on multi-second buffers.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::signal::{add_signals, SignalBuffer};

/// Frequency offset of each CW ranging tone from the carrier, in Hz.
pub const CW_OFFSET_HZ: f64 = 250.0;

/// Static description of the transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterConfig {
    /// Carrier frequency `f_c` in Hz.
    pub carrier_freq_hz: f64,
    /// Data rate `1/T` in bits per second.
    pub data_rate_bps: f64,
    /// MSK waveform amplitude.
    pub amp_msk: f64,
    /// Amplitude of the CW tone below the carrier.
    pub amp_cw1: f64,
    /// Amplitude of the CW tone above the carrier.
    pub amp_cw2: f64,
    /// Initial phase of the lower CW tone, radians.
    pub phase_cw1_rad: f64,
    /// Initial phase of the upper CW tone, radians.
    pub phase_cw2_rad: f64,
    /// Sign fixing the modulator's initial carrier phase: `+1` starts the
    /// accumulated phase at 0, `-1` at a half cycle.
    pub initial_inphase_bit: i8,
    /// Nominal transmit power in watts. Recorded in run metadata only;
    /// waveform amplitudes are dimensionless.
    pub nominal_tx_power_w: Option<f64>,
}

impl TransmitterConfig {
    /// The two keying frequencies `(f_0, f_1) = f_c ∓ 1/(4T)`.
    ///
    /// Their separation is `1/(2T)`: half the data rate.
    pub fn msk_frequencies(&self) -> (f64, f64) {
        let dev = self.data_rate_bps / 4.0;
        (self.carrier_freq_hz - dev, self.carrier_freq_hz + dev)
    }

    /// Checks the synthesis sample-rate requirement
    /// `sample_rate > 2·(f_c + 10·data_rate)`, which keeps the modulation
    /// sidelobes comfortably below Nyquist.
    pub fn check_sample_rate(&self, sample_rate: f64) -> Result<()> {
        let min = 2.0 * (self.carrier_freq_hz + 10.0 * self.data_rate_bps);
        if sample_rate.is_nan() || sample_rate <= min {
            return Err(Error::Config(format!(
                "sample_rate {sample_rate} Hz too low for carrier {} Hz at {} bps; \
                 must exceed {min} Hz",
                self.carrier_freq_hz, self.data_rate_bps
            )));
        }
        Ok(())
    }
}

/// A payload bit sequence together with its in-phase/quadrature split.
///
/// Streams produced by [`generate_bits`] regenerate byte-exactly from their
/// seed. Streams built directly from explicit bits (test patterns) carry
/// seed 0 and make no regeneration promise.
#[derive(Debug, Clone, PartialEq)]
pub struct BitStream {
    /// Payload bits, each 0 or 1.
    pub bits: Vec<u8>,
    /// Seed the stream was generated from.
    pub seed: u64,
    /// In-phase symbols: even-indexed payload bits mapped to ±1.
    pub i_bits: Vec<i8>,
    /// Quadrature symbols: odd-indexed payload bits mapped to ±1,
    /// padded with +1 when the payload length is odd.
    pub q_bits: Vec<i8>,
}

impl BitStream {
    /// Builds a stream from explicit bits, validating that each is 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(bad) = bits.iter().position(|b| *b > 1) {
            return Err(Error::Domain(format!(
                "bit {bad} is {}, expected 0 or 1",
                bits[bad]
            )));
        }
        let (i_bits, q_bits) = split_iq(&bits);
        Ok(Self {
            bits,
            seed: 0,
            i_bits,
            q_bits,
        })
    }
}

/// Even-indexed bits to I, odd-indexed to Q, each mapped `b -> 1 - 2b`;
/// Q padded with +1 for odd-length payloads.
fn split_iq(bits: &[u8]) -> (Vec<i8>, Vec<i8>) {
    let half = bits.len().div_ceil(2);
    let mut i_bits = Vec::with_capacity(half);
    let mut q_bits = Vec::with_capacity(half);
    for pair in bits.chunks(2) {
        i_bits.push(1 - 2 * pair[0] as i8);
        q_bits.push(if pair.len() == 2 {
            1 - 2 * pair[1] as i8
        } else {
            1
        });
    }
    (i_bits, q_bits)
}

/// Generates `n` payload bits from the splitmix64 stream, one bit per
/// 64-bit output, taking the most significant bit. Identical across
/// platforms and runs.
pub fn generate_bits(seed: u64, n: usize) -> BitStream {
    let mut rng = SplitMix64::new(seed);
    let bits: Vec<u8> = (0..n).map(|_| rng.next_bit()).collect();
    let (i_bits, q_bits) = split_iq(&bits);
    BitStream {
        bits,
        seed,
        i_bits,
        q_bits,
    }
}

/// Returns a copy of the stream with the I/Q split (re)populated.
///
/// The split is the data-structure contract used by the offset-keying
/// view of the modulation; synthesis itself is driven by the per-bit
/// frequency rule.
pub fn map_bits_to_iq(bits: &BitStream) -> Result<BitStream> {
    if bits.bits.is_empty() {
        return Err(Error::Domain(
            "cannot map an empty bit stream to I/Q symbols".into(),
        ));
    }
    let (i_bits, q_bits) = split_iq(&bits.bits);
    Ok(BitStream {
        bits: bits.bits.clone(),
        seed: bits.seed,
        i_bits,
        q_bits,
    })
}

/// Sample index of the start of bit `k`.
///
/// Computed in exact integer arithmetic whenever the sample rate divides
/// evenly by the data rate (the common configuration), falling back to a
/// ceiling in double precision otherwise.
fn bit_boundary(k: usize, sample_rate: f64, data_rate: f64) -> usize {
    if sample_rate.fract() == 0.0 && data_rate.fract() == 0.0 {
        let (fs, rate) = (sample_rate as u64, data_rate as u64);
        if rate > 0 && fs % rate == 0 {
            return k * (fs / rate) as usize;
        }
    }
    (k as f64 * (sample_rate / data_rate)).ceil() as usize
}

/// Synthesizes the MSK passband waveform for `duration_s` seconds.
///
/// Within each bit interval the instantaneous frequency is exactly
/// `f_0 = f_c - 1/(4T)` (bit 0) or `f_1 = f_c + 1/(4T)` (bit 1); the
/// accumulated phase is continuous across every boundary and the amplitude
/// is constant at `amp_msk`. The initial phase is 0 for
/// `initial_inphase_bit = +1` and a half cycle for `-1`.
pub fn msk_modulate(
    bits: &BitStream,
    cfg: &TransmitterConfig,
    sample_rate: f64,
    duration_s: f64,
) -> Result<SignalBuffer> {
    cfg.check_sample_rate(sample_rate)?;
    if duration_s <= 0.0 || !duration_s.is_finite() {
        return Err(Error::Config(format!(
            "duration_s must be positive and finite, got {duration_s}"
        )));
    }
    let n = (duration_s * sample_rate).round() as usize;
    let needed = (duration_s * cfg.data_rate_bps).ceil() as usize;
    if bits.bits.len() < needed {
        return Err(Error::BitUnderrun {
            needed,
            have: bits.bits.len(),
        });
    }

    let (f0, f1) = cfg.msk_frequencies();
    // Phase increments in cycles per sample; working in cycles keeps the
    // wrap operation exact and the accumulated rounding error far below
    // the cross-form comparison tolerances.
    let inc0 = f0 / sample_rate;
    let inc1 = f1 / sample_rate;
    let mut anchor = if cfg.initial_inphase_bit >= 0 { 0.0 } else { 0.5 };

    let mut samples = vec![0.0f64; n];
    for (k, bit) in bits.bits.iter().take(needed).enumerate() {
        let lo = bit_boundary(k, sample_rate, cfg.data_rate_bps).min(n);
        let hi = bit_boundary(k + 1, sample_rate, cfg.data_rate_bps);
        let inc = if *bit == 0 { inc0 } else { inc1 };
        for (off, slot) in samples[lo..hi.min(n)].iter_mut().enumerate() {
            let phase = anchor + off as f64 * inc;
            *slot = cfg.amp_msk * (std::f64::consts::TAU * phase.fract()).cos();
        }
        // Re-anchor at the next boundary; fract() keeps the anchor small so
        // per-bit phase arithmetic never loses low-order bits to magnitude.
        anchor = (anchor + (hi - lo) as f64 * inc).fract();
    }
    Ok(SignalBuffer::from_parts_unchecked(samples, sample_rate, 0.0))
}

/// Which of the two CW ranging tones to synthesize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwTone {
    /// 250 Hz below the carrier (tone 1).
    BelowCarrier,
    /// 250 Hz above the carrier (tone 2).
    AboveCarrier,
}

impl CwTone {
    /// Tone frequency for the given carrier.
    pub fn freq_hz(self, carrier_freq_hz: f64) -> f64 {
        match self {
            CwTone::BelowCarrier => carrier_freq_hz - CW_OFFSET_HZ,
            CwTone::AboveCarrier => carrier_freq_hz + CW_OFFSET_HZ,
        }
    }
}

/// Synthesizes one CW ranging tone: a pure sinusoid at `f_c ± 250 Hz` with
/// the configured amplitude and initial phase.
pub fn generate_cw(
    cfg: &TransmitterConfig,
    which: CwTone,
    sample_rate: f64,
    duration_s: f64,
) -> Result<SignalBuffer> {
    cfg.check_sample_rate(sample_rate)?;
    let (amp, phase) = match which {
        CwTone::BelowCarrier => (cfg.amp_cw1, cfg.phase_cw1_rad),
        CwTone::AboveCarrier => (cfg.amp_cw2, cfg.phase_cw2_rad),
    };
    let freq = which.freq_hz(cfg.carrier_freq_hz);
    let n = (duration_s * sample_rate).round() as usize;
    let w = std::f64::consts::TAU * freq;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            amp * (w * t + phase).sin()
        })
        .collect();
    Ok(SignalBuffer::from_parts_unchecked(samples, sample_rate, 0.0))
}

/// Elementwise sum of the MSK waveform and the two CW tones.
pub fn compose_transmit(
    msk: &SignalBuffer,
    cw1: &SignalBuffer,
    cw2: &SignalBuffer,
) -> Result<SignalBuffer> {
    add_signals(&add_signals(msk, cw1)?, cw2)
}
