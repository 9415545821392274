//! Error types shared by every module in the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or measuring signals.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two buffers could not be combined because a structural field differs.
    #[error("buffer alignment mismatch on {field}: {left} vs {right}")]
    Alignment {
        field: &'static str,
        left: String,
        right: String,
    },

    /// A scalar argument was NaN or infinite where a finite value is required.
    #[error("non-finite value for {what}")]
    NonFinite { what: &'static str },

    /// A configuration value violates a documented constraint.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A buffer is too short for the requested operation.
    #[error("{what}: need at least {required} samples, got {got}")]
    TooShort {
        what: &'static str,
        required: usize,
        got: usize,
    },

    /// The bit stream ran out before the requested duration was synthesized.
    #[error("bit underrun: modulation needs {needed} bits, stream has {have}")]
    BitUnderrun { needed: usize, have: usize },

    /// Noise was requested at a finite SNR relative to an all-zero signal.
    #[error("cannot set a finite SNR against a zero-power signal")]
    DegenerateSignal,

    /// An estimation window does not contain enough signal to fit.
    #[error("estimation window too short: need {required} samples ({periods} periods), got {got}")]
    WindowTooShort {
        required: usize,
        periods: u32,
        got: usize,
    },

    /// The attenuation lookup table could not be parsed or matched.
    #[error("alpha table {path}: {reason}")]
    AlphaTable { path: PathBuf, reason: String },

    /// A scenario file failed structural validation.
    #[error("scenario validation failed:\n{}", format_violations(.0))]
    Validation(Vec<Violation>),

    /// Filesystem failure, annotated with the path involved.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Scenario JSON could not be deserialized.
    #[error("scenario parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// One violated scenario constraint; violations are data, not exceptions,
/// so a validator can report all of them at once.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Dotted path of the offending field, e.g. `transmitter.carrier_freq_hz`.
    pub field: String,
    /// The value that was supplied.
    pub value: String,
    /// Human-readable statement of the constraint that failed.
    pub constraint: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} = {} violates: {}",
            self.field, self.value, self.constraint
        )
    }
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    /// Convenience constructor for [`Error::Io`].
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
