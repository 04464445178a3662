//! Frequency and RoCoF estimation for three-phase voltage records based on
//! the quasi-steady-state (QSS) frequency of the voltage space vector.
//!
//! The pipeline runs Clarke transform → geometric frequency → period
//! detection → QSS frequency, and gates every RoCoF estimate on the
//! circulation derivative Γ′: wherever the trajectory fails to close over
//! one period the frequency is treated as undefined rather than averaged
//! in. A conventional rolling-average estimator and an SRF-PLL are
//! provided as baselines, and a two-stage RoCoF relay consumes either.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod filters;
pub mod frame;
pub mod gate;
pub mod geometric;
pub mod pll;
pub mod qss;
pub mod relay;
pub mod rocof;
pub mod signal;

pub use analysis::{analyze, compare_schemes, Analysis, AnalysisConfig, FrequencyChain, SchemeComparison};
pub use error::{Error, Result};
pub use frame::{clarke, SpaceVectorTrace};
pub use gate::{circulation_derivative, first_recovery, GateTrace};
pub use geometric::{omega_v, FrequencyTrace, FrequencyUnit};
pub use qss::{detect_period, omega_qss, PeriodTrace};
pub use relay::{simulate_relay, RelayConfig, RelayMode, TripEvent};
pub use rocof::{rocof_conventional, rocof_formal, rocof_qss_gated, RocofTrace};
pub use signal::{generate, read_csv, write_csv, SampledWaveform, SignalSpec};
