//! Sample-domain primitives: the typed signal buffer and the elementwise
//! arithmetic every other module builds on.
//!
//! Samples are kept as 64-bit floats end to end; file export narrows to
//! 32-bit only at the output boundary. Buffers carry an explicit start time
//! so delayed segments align by arithmetic rather than by convention.

use crate::error::{Error, Result};

/// A uniformly sampled real-valued waveform.
///
/// Invariants enforced at construction: `sample_rate > 0`, every sample
/// finite. Two buffers can be summed only when their sample rate, start
/// time, and length match exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<f64>,
    sample_rate: f64,
    start_time: f64,
}

impl SignalBuffer {
    /// Builds a buffer, checking the type invariants.
    pub fn new(samples: Vec<f64>, sample_rate: f64, start_time: f64) -> Result<Self> {
        if sample_rate <= 0.0 || !sample_rate.is_finite() {
            return Err(Error::Domain(format!(
                "sample_rate must be finite and positive, got {sample_rate}"
            )));
        }
        if !start_time.is_finite() {
            return Err(Error::NonFinite {
                what: "start_time",
            });
        }
        if let Some(bad) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Domain(format!(
                "sample {bad} is not finite: {}",
                samples[bad]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            start_time,
        })
    }

    /// Internal constructor for operations whose outputs are finite by
    /// construction; skips the O(n) finiteness scan.
    pub(crate) fn from_parts_unchecked(samples: Vec<f64>, sample_rate: f64, start_time: f64) -> Self {
        debug_assert!(sample_rate > 0.0);
        Self {
            samples,
            sample_rate,
            start_time,
        }
    }

    /// The raw samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Samples per second.
    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Time of sample 0, in seconds.
    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// True when the buffer holds no samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `n`: `start_time + n / sample_rate`.
    ///
    /// Every synthesis and measurement routine in the crate derives sample
    /// times through this one expression, so phases computed by different
    /// modules quantize time identically.
    pub fn time_of(&self, n: usize) -> f64 {
        self.start_time + n as f64 / self.sample_rate
    }

    /// Mean of the squared samples (average power).
    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }
}

pub(crate) fn check_aligned(a: &SignalBuffer, b: &SignalBuffer) -> Result<()> {
    // Exact comparison is deliberate: alignment is a structural property,
    // not a numerical one.
    if a.sample_rate != b.sample_rate {
        return Err(Error::Alignment {
            field: "sample_rate",
            left: a.sample_rate.to_string(),
            right: b.sample_rate.to_string(),
        });
    }
    if a.start_time != b.start_time {
        return Err(Error::Alignment {
            field: "start_time",
            left: a.start_time.to_string(),
            right: b.start_time.to_string(),
        });
    }
    if a.len() != b.len() {
        return Err(Error::Alignment {
            field: "length",
            left: a.len().to_string(),
            right: b.len().to_string(),
        });
    }
    Ok(())
}

/// Elementwise sum of two aligned buffers.
///
/// Errors with the name of the mismatched field when sample rate, start
/// time, or length differ. Inputs are not mutated.
pub fn add_signals(a: &SignalBuffer, b: &SignalBuffer) -> Result<SignalBuffer> {
    check_aligned(a, b)?;
    let samples = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| x + y)
        .collect();
    Ok(SignalBuffer::from_parts_unchecked(
        samples,
        a.sample_rate,
        a.start_time,
    ))
}

/// Every sample multiplied by the finite factor `k`.
pub fn scale_signal(a: &SignalBuffer, k: f64) -> Result<SignalBuffer> {
    if !k.is_finite() {
        return Err(Error::NonFinite { what: "scale factor" });
    }
    let samples = a.samples.iter().map(|x| x * k).collect();
    Ok(SignalBuffer::from_parts_unchecked(
        samples,
        a.sample_rate,
        a.start_time,
    ))
}
