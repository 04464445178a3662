//! Two-stage semi-adaptive RoCoF-based under-frequency load shedding.
//!
//! Each stage arms when the defined RoCoF estimate reaches its threshold in
//! the under-frequency direction (`rocof <= -d_omega`), records the
//! detection time, and trips once it has stayed armed for its delay.
//! Undefined estimates freeze the armed timer; a defined estimate back
//! above the threshold disarms the stage. Each stage trips at most once.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::gate::DEFAULT_EPSILON;
use crate::geometric::FrequencyUnit;
use crate::rocof::RocofTrace;

/// Slack on the delay comparison so accumulated sample steps that sum to
/// the delay up to rounding still trip on that sample.
const DELAY_SLACK_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelayMode {
    /// Rolling mean of the instantaneous-frequency derivative.
    Conventional,
    /// Gated rolling mean of the QSS-frequency derivative.
    Qss,
}

impl fmt::Display for RelayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelayMode::Conventional => "conventional",
            RelayMode::Qss => "qss",
        })
    }
}

/// Relay settings. Thresholds are positive magnitudes in pu/s on the
/// nominal frequency; delays in s; shed fractions in pu of local load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayConfig {
    pub d_omega_1: f64,
    pub d_omega_2: f64,
    pub delta_t_delta_1: f64,
    pub delta_t_delta_2: f64,
    pub delta_ls_1: f64,
    pub delta_ls_2: f64,
    pub window_s: f64,
    pub mode: RelayMode,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl RelayConfig {
    /// Conventional scheme: 500 ms window.
    pub fn conventional() -> Self {
        Self {
            d_omega_1: 0.012,
            d_omega_2: 0.024,
            delta_t_delta_1: 0.2,
            delta_t_delta_2: 0.2,
            delta_ls_1: 0.2,
            delta_ls_2: 0.2,
            window_s: 0.5,
            mode: RelayMode::Conventional,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// QSS scheme: 250 ms gated window, ε = 0.05.
    pub fn qss() -> Self {
        Self {
            window_s: 0.25,
            mode: RelayMode::Qss,
            ..Self::conventional()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("d_omega_1", self.d_omega_1)?;
        ensure_positive("d_omega_2", self.d_omega_2)?;
        if self.d_omega_1 >= self.d_omega_2 {
            return Err(Error::param("d_omega_2", "must exceed d_omega_1"));
        }
        for (name, delay) in [("delta_t_delta_1", self.delta_t_delta_1), ("delta_t_delta_2", self.delta_t_delta_2)] {
            ensure_finite(name, delay)?;
            if delay < 0.0 {
                return Err(Error::param(name, "must be >= 0"));
            }
        }
        for (name, shed) in [("delta_ls_1", self.delta_ls_1), ("delta_ls_2", self.delta_ls_2)] {
            ensure_positive(name, shed)?;
            if shed > 1.0 {
                return Err(Error::param(name, "must be <= 1"));
            }
        }
        ensure_positive("window_s", self.window_s)?;
        ensure_positive("epsilon", self.epsilon)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("relay config serialises")
    }

    fn stage(&self, stage: usize) -> (f64, f64, f64) {
        match stage {
            0 => (self.d_omega_1, self.delta_t_delta_1, self.delta_ls_1),
            _ => (self.d_omega_2, self.delta_t_delta_2, self.delta_ls_2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripEvent {
    pub stage: u8,
    /// When the stage armed for the run that ended in the trip.
    pub t_detect_s: f64,
    pub t_trip_s: f64,
    pub shed_pu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum StageState {
    Idle,
    Armed { t_detect: f64, elapsed: f64 },
    Tripped,
}

/// Sequential relay state machine.
#[derive(Debug, Clone)]
pub struct Relay {
    config: RelayConfig,
    stages: [StageState; 2],
    last_t: Option<f64>,
    last_defined: bool,
}

impl Relay {
    pub fn new(config: RelayConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            stages: [StageState::Idle; 2],
            last_t: None,
            last_defined: false,
        })
    }

    pub fn config(&self) -> &RelayConfig {
        &self.config
    }

    /// True while stage `stage` (1 or 2) is armed.
    pub fn is_armed(&self, stage: u8) -> bool {
        matches!(self.stages[usize::from(stage - 1)], StageState::Armed { .. })
    }

    /// Feeds one RoCoF sample in pu/s. `rocof` is ignored when `defined`
    /// is false. Returns the trips issued on this sample.
    pub fn step(&mut self, rocof: f64, defined: bool, t_s: f64) -> Result<Vec<TripEvent>> {
        if let Some(prev) = self.last_t {
            if t_s <= prev {
                return Err(Error::NonMonotoneTime {
                    previous: prev,
                    current: t_s,
                });
            }
        }
        let step = match self.last_t {
            Some(prev) if self.last_defined && defined => t_s - prev,
            _ => 0.0,
        };
        self.last_t = Some(t_s);
        self.last_defined = defined;
        if !defined {
            return Ok(Vec::new());
        }

        let mut trips = Vec::new();
        for (idx, state) in self.stages.iter_mut().enumerate() {
            let (threshold, delay, shed) = self.config.stage(idx);
            let exceeded = rocof <= -threshold;
            *state = match (*state, exceeded) {
                (StageState::Tripped, _) => StageState::Tripped,
                (_, false) => StageState::Idle,
                (StageState::Idle, true) => StageState::Armed {
                    t_detect: t_s,
                    elapsed: 0.0,
                },
                (StageState::Armed { t_detect, elapsed }, true) => StageState::Armed {
                    t_detect,
                    elapsed: elapsed + step,
                },
            };
            if let StageState::Armed { t_detect, elapsed } = *state {
                if elapsed >= delay - DELAY_SLACK_S {
                    trips.push(TripEvent {
                        stage: idx as u8 + 1,
                        t_detect_s: t_detect,
                        t_trip_s: t_s,
                        shed_pu: shed,
                    });
                    *state = StageState::Tripped;
                }
            }
        }
        Ok(trips)
    }
}

/// Runs a relay over a RoCoF trace expressed in pu/s.
pub fn simulate_relay(rocof: &RocofTrace, config: &RelayConfig) -> Result<Vec<TripEvent>> {
    if rocof.unit != FrequencyUnit::Pu {
        return Err(Error::WrongUnit {
            expected: "pu/s",
            got: rocof.unit.name(),
        });
    }
    let mut relay = Relay::new(config.clone())?;
    let mut events = Vec::new();
    for i in 0..rocof.len() {
        events.extend(relay.step(rocof.values[i], rocof.defined[i], rocof.time(i))?);
    }
    Ok(events)
}

/// Writes `stage,t_detect_s,t_trip_s,shed_pu` rows.
pub fn write_trip_csv<W: Write + ?Sized>(events: &[TripEvent], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "stage,t_detect_s,t_trip_s,shed_pu")?;
    for e in events {
        writeln!(out, "{},{},{},{}", e.stage, e.t_detect_s, e.t_trip_s, e.shed_pu)?;
    }
    Ok(())
}
