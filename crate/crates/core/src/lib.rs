//! Wideband energy-detection spectrum sensing with an optional one-bit
//! quantized front end.
//!
//! The crate has four layers:
//!
//! * [`config`] and [`model`]: scenario parameters and shared domain types.
//! * [`analytic`]: closed-form false-alarm/detection probabilities, threshold
//!   inversion, the Normal approximation and the one-bit leakage variances.
//! * [`signal`]: window generation and the receive pipeline (quantizer,
//!   RSSI-scaled unitary transform, averaged energy statistic, detector).
//! * [`montecarlo`]: reproducible parallel trials and ROC comparison.

pub mod analytic;
pub mod config;
pub mod dump;
pub mod fft;
pub mod model;
pub mod montecarlo;
pub mod rng;
pub mod signal;

pub use analytic::{AnalyticError, AnalyticModel};
pub use config::{ConfigError, Quantizer, RssiMode, SensingConfig, SensingConfigBuilder, SignalModel};
pub use model::{
    HypothesisVariances, ModelError, Occupancy, Provenance, RocCurve, RocPoint, SpectrumWindow,
    VarianceModel, WindowCapture,
};
pub use montecarlo::{CfarBasis, ComparisonReport, EmpiricalRates, McError, SimulationResult, TrialPlan};
pub use rng::SimRng;
pub use signal::{SignalEngine, SignalError};
