//! Deterministic simulator for a medium-frequency beacon ranging signal:
//! an MSK data waveform plus two CW ranging tones, propagated through a
//! single-hop skywave channel with additive white Gaussian noise, and the
//! measurement oracles used to verify every stage.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod output;
pub mod rng;
pub mod run;
pub mod scenario;
pub mod signal;
pub mod tx;
mod window;

pub use error::{Error, Result, Violation};
pub use run::{run_resolved, run_scenario, RunReport};
pub use scenario::{validate_scenario, ResolvedScenario, ScenarioConfig};
pub use signal::{add_signals, scale_signal, SignalBuffer};
