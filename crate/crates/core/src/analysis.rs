//! End-to-end estimation pipeline: Clarke frame, geometric and PLL
//! frequencies, period detection, the circulation gate, and both RoCoF
//! estimators, plus the scheme comparison that drives the two relays.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::filters::butterworth1;
use crate::frame::{clarke, SpaceVectorTrace};
use crate::gate::{circulation_derivative, GateTrace, DEFAULT_EPSILON};
use crate::geometric::{geometric_frequency, FrequencyTrace, FrequencyUnit};
use crate::pll::{pll, PllGains};
use crate::qss::{detect_period, omega_qss, PeriodTrace, DEFAULT_LOOKBACK_S};
use crate::relay::{simulate_relay, RelayConfig, RelayMode, TripEvent};
use crate::rocof::{rocof_conventional, rocof_formal, rocof_qss_gated, RocofTrace};
use crate::signal::SampledWaveform;

/// Critical RoCoF band used in the summary, Hz/s.
pub const CRITICAL_BAND_HZ_PER_S: f64 = 1.0;

/// ω_QSS at a sample depends on voltage samples this far past the span
/// that Γ′ inspects (derivative stencil plus interpolation), so closed
/// stretches are widened by this many samples before they gate the
/// RoCoF estimators.
pub const DEFAULT_GUARD_SAMPLES: usize = 3;

/// Instantaneous frequency fed to the conventional estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstantaneousSource {
    /// Low-passed geometric rotation rate.
    #[default]
    Geometric,
    /// SRF-PLL output.
    Pll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub base_frequency_hz: f64,
    /// Circulation threshold, pu².
    pub epsilon: f64,
    /// Conventional rolling window, s.
    pub window_s: f64,
    /// Gated (QSS) rolling window, s.
    pub qss_window_s: f64,
    pub butterworth_cutoff_hz: f64,
    pub washout_tau_s: f64,
    pub pll: PllGains,
    pub lookback_s: f64,
    pub instantaneous: InstantaneousSource,
    pub guard_samples: usize,
    /// Event onset used to report Δt_Γ′.
    pub event_start_s: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            base_frequency_hz: 50.0,
            epsilon: DEFAULT_EPSILON,
            window_s: 0.5,
            qss_window_s: 0.25,
            butterworth_cutoff_hz: 50.0,
            washout_tau_s: 0.01,
            pll: PllGains::default(),
            lookback_s: DEFAULT_LOOKBACK_S,
            instantaneous: InstantaneousSource::Geometric,
            guard_samples: DEFAULT_GUARD_SAMPLES,
            event_start_s: None,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("base_frequency_hz", self.base_frequency_hz)?;
        ensure_positive("epsilon", self.epsilon)?;
        ensure_positive("window_s", self.window_s)?;
        ensure_positive("qss_window_s", self.qss_window_s)?;
        ensure_positive("butterworth_cutoff_hz", self.butterworth_cutoff_hz)?;
        ensure_positive("washout_tau_s", self.washout_tau_s)?;
        ensure_positive("pll.kp", self.pll.kp)?;
        ensure_positive("pll.ki", self.pll.ki)?;
        ensure_positive("lookback_s", self.lookback_s)?;
        let min_window = 2.0 / self.base_frequency_hz;
        for (name, w) in [("window_s", self.window_s), ("qss_window_s", self.qss_window_s)] {
            if w < min_window {
                return Err(Error::param(name, format!("must be at least two nominal periods ({min_window} s)")));
            }
        }
        Ok(())
    }
}

/// Intermediate traces shared by every estimator configuration.
#[derive(Debug, Clone)]
pub struct FrequencyChain {
    pub config: AnalysisConfig,
    pub sample_rate_hz: f64,
    pub t0_s: f64,
    pub space: SpaceVectorTrace,
    /// Geometric rotation rate, Hz.
    pub omega_v: FrequencyTrace,
    /// Radial rate, 1/s.
    pub rho_v: FrequencyTrace,
    /// Low-passed rotation rate, Hz.
    pub omega_v_filtered: FrequencyTrace,
    /// PLL frequency, Hz.
    pub omega_pll: FrequencyTrace,
    pub periods: PeriodTrace,
    /// QSS frequency, Hz.
    pub omega_qss: FrequencyTrace,
    /// Γ′, pu²; NaN where no period was detected.
    pub gamma_prime: Vec<f64>,
}

impl FrequencyChain {
    pub fn new(waveform: &SampledWaveform, config: &AnalysisConfig) -> Result<Self> {
        config.validate()?;
        let fs = waveform.sample_rate_hz();
        let base = config.base_frequency_hz;
        let space = clarke(waveform);
        let geometric = geometric_frequency(&space)?;
        let periods = detect_period(&geometric.omega, config.lookback_s)?;
        let qss = omega_qss(&geometric.omega, &periods)?;
        let gamma_prime = circulation_derivative(&space, &periods)?;
        let omega_v = geometric.omega.to_unit(FrequencyUnit::Hz, base);
        let omega_v_filtered = butterworth1(&omega_v, config.butterworth_cutoff_hz)?;
        let omega_pll = pll(&space, config.pll, base)?.to_unit(FrequencyUnit::Hz, base);
        Ok(Self {
            config: config.clone(),
            sample_rate_hz: fs,
            t0_s: waveform.t0_s(),
            space,
            omega_v,
            rho_v: geometric.rho,
            omega_v_filtered,
            omega_pll,
            periods,
            omega_qss: qss.to_unit(FrequencyUnit::Hz, base),
            gamma_prime,
        })
    }

    pub fn len(&self) -> usize {
        self.gamma_prime.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma_prime.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0_s + i as f64 / self.sample_rate_hz
    }

    /// Gate at threshold `epsilon`, with Δt_Γ′ filled in when the config
    /// names an event start.
    pub fn gate(&self, epsilon: f64) -> Result<GateTrace> {
        let gate = GateTrace::new(self.sample_rate_hz, self.t0_s, self.gamma_prime.clone(), epsilon)?;
        Ok(match self.config.event_start_s {
            Some(t) => gate.with_first_recovery(t),
            None => gate,
        })
    }

    /// Instantaneous frequency feeding the conventional estimator, Hz.
    pub fn instantaneous(&self) -> &FrequencyTrace {
        match self.config.instantaneous {
            InstantaneousSource::Geometric => &self.omega_v_filtered,
            InstantaneousSource::Pll => &self.omega_pll,
        }
    }

    /// Conventional rolling RoCoF, Hz/s.
    pub fn conventional_rocof(&self, window_s: f64) -> Result<RocofTrace> {
        let mut r = rocof_conventional(self.instantaneous(), window_s, self.config.washout_tau_s)?;
        r.t0_s = self.t0_s;
        Ok(r)
    }

    /// Gated QSS estimators at threshold `epsilon`: the guarded gate, the
    /// gated derivative and its gated rolling mean (Hz/s).
    pub fn qss_rocof(&self, epsilon: f64, window_s: f64) -> Result<QssEstimate> {
        let gate = self.gate(epsilon)?;
        let guarded = gate.guarded(self.config.guard_samples);
        let formal = rocof_formal(&self.omega_qss, &guarded, self.config.washout_tau_s)?;
        let mut gated = rocof_qss_gated(&formal, &guarded, window_s)?;
        gated.t0_s = self.t0_s;
        Ok(QssEstimate {
            gate,
            guarded,
            formal,
            gated,
        })
    }

    /// RoCoF in pu/s as the relay in `config` would see it.
    pub fn relay_input(&self, config: &RelayConfig) -> Result<RocofTrace> {
        let hz = match config.mode {
            RelayMode::Conventional => self.conventional_rocof(config.window_s)?,
            RelayMode::Qss => self.qss_rocof(config.epsilon, config.window_s)?.gated,
        };
        Ok(hz.to_unit(FrequencyUnit::Pu, self.config.base_frequency_hz))
    }
}

#[derive(Debug, Clone)]
pub struct QssEstimate {
    /// Gate as evaluated on Γ′.
    pub gate: GateTrace,
    /// Gate actually applied to the estimators.
    pub guarded: GateTrace,
    /// Gated washout derivative of ω_QSS, Hz/s.
    pub formal: FrequencyTrace,
    /// Gated rolling mean, Hz/s.
    pub gated: RocofTrace,
}

/// Output of [`analyze`].
#[derive(Debug, Clone)]
pub struct Analysis {
    pub chain: FrequencyChain,
    pub qss: QssEstimate,
    pub conventional: RocofTrace,
}

pub fn analyze(waveform: &SampledWaveform, config: &AnalysisConfig) -> Result<Analysis> {
    let chain = FrequencyChain::new(waveform, config)?;
    let qss = chain.qss_rocof(config.epsilon, config.qss_window_s)?;
    let conventional = chain.conventional_rocof(config.window_s)?;
    Ok(Analysis {
        chain,
        qss,
        conventional,
    })
}

/// Extrema of one RoCoF series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocofStats {
    pub defined_samples: usize,
    pub min_hz_per_s: Option<f64>,
    pub max_hz_per_s: Option<f64>,
    pub max_abs_hz_per_s: Option<f64>,
    /// Defined samples outside the critical band.
    pub band_exceedances: usize,
    pub exceeds_band: bool,
}

impl RocofStats {
    pub fn of(trace: &RocofTrace) -> Self {
        let defined: Vec<f64> = (0..trace.len()).filter_map(|i| trace.get(i)).collect();
        let band_exceedances = defined.iter().filter(|v| v.abs() > CRITICAL_BAND_HZ_PER_S).count();
        Self {
            defined_samples: defined.len(),
            min_hz_per_s: defined.iter().copied().reduce(f64::min),
            max_hz_per_s: defined.iter().copied().reduce(f64::max),
            max_abs_hz_per_s: trace.max_abs(),
            band_exceedances,
            exceeds_band: band_exceedances > 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub samples: usize,
    pub sample_rate_hz: f64,
    pub epsilon: f64,
    pub conventional_window_s: f64,
    pub qss_window_s: f64,
    pub gate_closed_samples: usize,
    pub max_abs_gamma_prime: Option<f64>,
    pub first_recovery_s: Option<f64>,
    pub conventional: RocofStats,
    pub qss_gated: RocofStats,
}

impl Analysis {
    pub fn summary(&self) -> Summary {
        let gate = &self.qss.gate;
        Summary {
            samples: self.chain.len(),
            sample_rate_hz: self.chain.sample_rate_hz,
            epsilon: gate.epsilon,
            conventional_window_s: self.conventional.window_s,
            qss_window_s: self.qss.gated.window_s,
            gate_closed_samples: gate.tout.iter().filter(|&&open| !open).count(),
            max_abs_gamma_prime: max_abs(&self.chain.gamma_prime),
            first_recovery_s: gate.first_recovery_s,
            conventional: RocofStats::of(&self.conventional),
            qss_gated: RocofStats::of(&self.qss.gated),
        }
    }

    /// One row per sample, all series on the waveform's time base. Invalid
    /// or undefined values are left empty.
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        let c = &self.chain;
        writeln!(
            out,
            "t_s,omega_v_hz,omega_v_filtered_hz,omega_pll_hz,rho_v,period_s,omega_qss_hz,gamma_prime,tout,tout_guarded,\
             rocof_formal_hz_s,rocof_conventional_hz_s,rocof_qss_hz_s,rocof_qss_held_hz_s,effective_window_s,low_support"
        )?;
        for i in 0..c.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.time(i),
                cell(c.omega_v.get(i)),
                cell(c.omega_v_filtered.get(i)),
                cell(c.omega_pll.get(i)),
                cell(c.rho_v.get(i)),
                cell(c.periods.get(i)),
                cell(c.omega_qss.get(i)),
                cell(Some(c.gamma_prime[i]).filter(|g| g.is_finite())),
                u8::from(self.qss.gate.tout[i]),
                u8::from(self.qss.guarded.tout[i]),
                cell(self.qss.formal.get(i)),
                cell(self.conventional.get(i)),
                cell(self.qss.gated.get(i)),
                cell(Some(self.qss.gated.held[i]).filter(|v| v.is_finite())),
                self.qss.gated.effective_window_s[i],
                u8::from(self.qss.gated.low_support[i]),
            )?;
        }
        Ok(())
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub(crate) fn max_abs(values: &[f64]) -> Option<f64> {
    values.iter().filter(|v| v.is_finite()).map(|v| v.abs()).reduce(f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeReport {
    pub mode: RelayMode,
    pub window_s: f64,
    pub trips: Vec<TripEvent>,
    pub shed_total_pu: f64,
}

impl SchemeReport {
    pub fn trip(&self, stage: u8) -> Option<&TripEvent> {
        self.trips.iter().find(|e| e.stage == stage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeComparison {
    pub conventional: SchemeReport,
    pub qss: SchemeReport,
}

impl SchemeComparison {
    /// `t_detect(conventional) − t_detect(qss)` for `stage`; positive when
    /// the QSS scheme detects first. `None` unless both schemes tripped.
    pub fn detection_delta_s(&self, stage: u8) -> Option<f64> {
        Some(self.conventional.trip(stage)?.t_detect_s - self.qss.trip(stage)?.t_detect_s)
    }

    pub fn trip_delta_s(&self, stage: u8) -> Option<f64> {
        Some(self.conventional.trip(stage)?.t_trip_s - self.qss.trip(stage)?.t_trip_s)
    }

    pub fn write_summary<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "scheme,stage,t_detect_s,t_trip_s,shed_pu")?;
        for report in [&self.conventional, &self.qss] {
            for stage in [1u8, 2] {
                match report.trip(stage) {
                    Some(e) => writeln!(out, "{},{},{},{},{}", report.mode, stage, e.t_detect_s, e.t_trip_s, e.shed_pu)?,
                    None => writeln!(out, "{},{},,,0", report.mode, stage)?,
                }
            }
        }
        writeln!(out)?;
        writeln!(out, "stage,detect_delta_s,trip_delta_s")?;
        for stage in [1u8, 2] {
            writeln!(
                out,
                "{},{},{}",
                stage,
                cell(self.detection_delta_s(stage)),
                cell(self.trip_delta_s(stage))
            )?;
        }
        writeln!(out)?;
        writeln!(
            out,
            "shed_total_pu,conventional={},qss={}",
            self.conventional.shed_total_pu, self.qss.shed_total_pu
        )
    }
}

/// Runs the pipeline once and both relays over it. Each config's mode
/// selects the estimator; its window and ε override the analysis defaults.
pub fn compare_schemes(
    waveform: &SampledWaveform,
    analysis: &AnalysisConfig,
    conv_cfg: &RelayConfig,
    qss_cfg: &RelayConfig,
) -> Result<SchemeComparison> {
    conv_cfg.validate()?;
    qss_cfg.validate()?;
    let chain = FrequencyChain::new(waveform, analysis)?;
    let run = |cfg: &RelayConfig| -> Result<SchemeReport> {
        let trips = simulate_relay(&chain.relay_input(cfg)?, cfg)?;
        Ok(SchemeReport {
            mode: cfg.mode,
            window_s: cfg.window_s,
            shed_total_pu: trips.iter().map(|e| e.shed_pu).sum(),
            trips,
        })
    };
    Ok(SchemeComparison {
        conventional: run(conv_cfg)?,
        qss: run(qss_cfg)?,
    })
}
