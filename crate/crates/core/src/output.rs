//! File writers: raw float32 sample files, WAV (IEEE float) containers,
//! CSV trace exports, and pretty-printed JSON documents.
//!
//! Every writer is a deterministic function of its inputs — no
//! timestamps, locale-dependent formatting, or map-iteration order — so
//! identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::ops::Range;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::{check_aligned, SignalBuffer};

/// Writes samples as 32-bit little-endian IEEE-754 floats, no header.
pub fn write_raw_f32(path: &Path, x: &SignalBuffer) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in x.samples() {
        w.write_all(&(*s as f32).to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes samples as a mono IEEE-float WAV file for inspection in audio
/// tools. The container's sample-rate field is an integer, so the rate is
/// rounded; the raw format carries the exact value in the metadata.
pub fn write_wav_f32(path: &Path, x: &SignalBuffer) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: x.sample_rate().round() as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let as_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Domain(format!("WAV write to {} failed: {other}", path.display())),
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(as_err)?;
    for s in x.samples() {
        writer.write_sample(*s as f32).map_err(as_err)?;
    }
    writer.finalize().map_err(as_err)
}

/// Writes the three-trace CSV (`time_s,groundwave,skywave,received`) over
/// a sample-index window. Values use the shortest representation that
/// round-trips exactly, so the received column reparses to exactly
/// `groundwave + skywave` for every row.
pub fn write_traces_csv(
    path: &Path,
    ground: &SignalBuffer,
    skywave: &SignalBuffer,
    received: &SignalBuffer,
    window: Range<usize>,
) -> Result<()> {
    check_aligned(ground, skywave)?;
    check_aligned(ground, received)?;
    if window.start >= window.end || window.end > ground.len() {
        return Err(Error::Domain(format!(
            "CSV window {}..{} invalid for {} samples",
            window.start,
            window.end,
            ground.len()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "time_s,groundwave,skywave,received").map_err(io)?;
    for i in window {
        writeln!(
            w,
            "{},{},{},{}",
            ground.time_of(i),
            ground.samples()[i],
            skywave.samples()[i],
            received.samples()[i]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Serializes a value as pretty-printed JSON with a trailing newline.
pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Domain(format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
