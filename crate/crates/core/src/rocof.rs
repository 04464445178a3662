//! RoCoF estimators: the gated derivative of the QSS frequency, the
//! conventional rolling average, and the gated rolling average in which
//! samples with a closed gate neither contribute to the sum nor to the
//! effective window length.

use std::collections::VecDeque;

use crate::error::{ensure_positive, Error, Result};
use crate::filters::Washout;
use crate::gate::GateTrace;
use crate::geometric::{FrequencyTrace, FrequencyUnit};

/// Defined averages supported by less than this fraction of the nominal
/// window are flagged as low-support.
pub const LOW_SUPPORT_FRACTION: f64 = 0.1;

/// Rolling RoCoF estimate. Values and held values are in the unit of the
/// source frequency per second; undefined samples hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RocofTrace {
    pub sample_rate_hz: f64,
    /// Time of the first sample, s.
    pub t0_s: f64,
    pub window_s: f64,
    pub unit: FrequencyUnit,
    pub values: Vec<f64>,
    /// Length of the window that actually contributed (Δt̃_w), s.
    pub effective_window_s: Vec<f64>,
    pub defined: Vec<bool>,
    /// Last defined value, carried through undefined stretches.
    pub held: Vec<f64>,
    pub low_support: Vec<bool>,
}

impl RocofTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.defined[i].then(|| self.values[i])
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0_s + i as f64 / self.sample_rate_hz
    }

    /// Largest defined magnitude.
    pub fn max_abs(&self) -> Option<f64> {
        (0..self.len()).filter_map(|i| self.get(i)).map(f64::abs).reduce(f64::max)
    }

    /// Converts a Hz/s (or rad/s²) trace into pu/s on `base_frequency_hz`.
    pub fn to_unit(&self, unit: FrequencyUnit, base_frequency_hz: f64) -> Self {
        let probe = FrequencyTrace::new(self.sample_rate_hz, vec![1.0], self.unit).to_unit(unit, base_frequency_hz);
        let k = probe.values[0];
        Self {
            unit,
            values: self.values.iter().map(|v| v * k).collect(),
            held: self.held.iter().map(|v| v * k).collect(),
            ..self.clone()
        }
    }
}

/// Streaming trapezoidal window average over samples that pass a gate.
///
/// The window spans `intervals` sample intervals (so `intervals + 1`
/// samples). Gated-out samples never touch the running sums.
#[derive(Debug, Clone)]
pub struct GatedAverager {
    intervals: usize,
    dt: f64,
    window: VecDeque<Option<f64>>,
    sum: f64,
    count: usize,
    pushes: usize,
}

impl GatedAverager {
    pub fn new(window_s: f64, sample_rate_hz: f64) -> Result<Self> {
        ensure_positive("window_s", window_s)?;
        ensure_positive("sample_rate_hz", sample_rate_hz)?;
        let intervals = (window_s * sample_rate_hz).round() as usize;
        if intervals == 0 {
            return Err(Error::param("window_s", "shorter than one sample interval"));
        }
        Ok(Self {
            intervals,
            dt: 1.0 / sample_rate_hz,
            window: VecDeque::with_capacity(intervals + 1),
            sum: 0.0,
            count: 0,
            pushes: 0,
        })
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// True once the window holds `intervals + 1` samples.
    pub fn is_full(&self) -> bool {
        self.window.len() == self.intervals + 1
    }

    /// Number of samples in the window that passed the gate.
    pub fn passed(&self) -> usize {
        self.count
    }

    /// Adds a sample (`None` when gated out) and returns
    /// `(average, effective_window_s)`; the average is `None` when no
    /// gated-in time remains.
    pub fn push(&mut self, x: Option<f64>) -> (Option<f64>, f64) {
        if self.is_full() {
            if let Some(old) = self.window.pop_front().flatten() {
                self.sum -= old;
                self.count -= 1;
            }
        }
        if let Some(v) = x {
            self.sum += v;
            self.count += 1;
        }
        self.window.push_back(x);
        self.pushes += 1;
        if self.pushes.is_multiple_of(self.intervals) {
            self.resync();
        }

        if self.window.len() < 2 {
            return (None, 0.0);
        }
        let ends = [self.window.front(), self.window.back()];
        let (mut end_sum, mut end_count) = (0.0, 0.0);
        for v in ends.into_iter().flatten().flatten() {
            end_sum += v;
            end_count += 1.0;
        }
        let weight = self.count as f64 - 0.5 * end_count;
        let effective = weight * self.dt;
        if weight > 0.0 {
            ((Some((self.sum - 0.5 * end_sum) / weight)), effective)
        } else {
            (None, 0.0)
        }
    }

    fn resync(&mut self) {
        self.sum = self.window.iter().flatten().sum();
        self.count = self.window.iter().flatten().count();
    }
}

/// Differentiates the QSS frequency with a washout filter of time constant
/// `washout_tau_s`; output in the input unit per second.
///
/// Only samples with an open gate and a valid QSS frequency reach the
/// filter. The filter restarts from the current value each time the gate
/// reopens, so frequency excursions inside a closed stretch never leak
/// into the derivative. Closed samples are undefined.
pub fn rocof_formal(omega_qss: &FrequencyTrace, gate: &GateTrace, washout_tau_s: f64) -> Result<FrequencyTrace> {
    check_aligned(omega_qss.len(), gate.len())?;
    let mut washout = Washout::new(washout_tau_s, omega_qss.sample_rate_hz)?;
    let mut was_open = false;
    let out = (0..omega_qss.len()).map(|i| {
        let x = omega_qss.get(i).filter(|_| gate.tout[i]);
        if x.is_some() && !was_open {
            washout.reset();
        }
        was_open = x.is_some();
        x.map(|x| washout.update(x))
    });
    Ok(FrequencyTrace::from_options(omega_qss.sample_rate_hz, out.collect::<Vec<_>>(), omega_qss.unit))
}

/// Plain rolling mean of a rate trace over the trailing window. Defined
/// only once the window is full and every sample in it is valid.
pub fn rolling_average(rate: &FrequencyTrace, window_s: f64) -> Result<RocofTrace> {
    let mut avg = GatedAverager::new(window_s, rate.sample_rate_hz)?;
    let nominal = avg.intervals() as f64 / rate.sample_rate_hz;
    let samples = (0..rate.len()).map(|i| {
        let (mean, _) = avg.push(rate.get(i));
        let complete = avg.is_full() && avg.passed() == avg.intervals() + 1;
        match mean.filter(|_| complete) {
            Some(m) => (Some(m), nominal),
            None => (None, 0.0),
        }
    });
    Ok(assemble(rate.sample_rate_hz, nominal, rate.unit, samples.collect()))
}

/// Conventional RoCoF: washout derivative of the (already low-passed)
/// instantaneous frequency, then a rolling mean over `window_s`.
pub fn rocof_conventional(omega_inst: &FrequencyTrace, window_s: f64, washout_tau_s: f64) -> Result<RocofTrace> {
    let open = GateTrace::constant(omega_inst.sample_rate_hz, omega_inst.len(), true);
    let derivative = rocof_formal(omega_inst, &open, washout_tau_s)?;
    rolling_average(&derivative, window_s)
}

/// Gated average RoCoF: trapezoidal integral of the rate over gated-in
/// samples of the trailing window divided by the gated-in time Δt̃_w.
/// Samples with an undefined rate count as gated out.
pub fn rocof_qss_gated(rate: &FrequencyTrace, gate: &GateTrace, window_s: f64) -> Result<RocofTrace> {
    check_aligned(rate.len(), gate.len())?;
    let mut avg = GatedAverager::new(window_s, rate.sample_rate_hz)?;
    let nominal = avg.intervals() as f64 / rate.sample_rate_hz;
    let samples = (0..rate.len())
        .map(|i| avg.push(rate.get(i).filter(|_| gate.tout[i])))
        .collect();
    Ok(assemble(rate.sample_rate_hz, nominal, rate.unit, samples))
}

fn assemble(sample_rate_hz: f64, window_s: f64, unit: FrequencyUnit, samples: Vec<(Option<f64>, f64)>) -> RocofTrace {
    let n = samples.len();
    let mut trace = RocofTrace {
        sample_rate_hz,
        t0_s: 0.0,
        window_s,
        unit,
        values: Vec::with_capacity(n),
        effective_window_s: Vec::with_capacity(n),
        defined: Vec::with_capacity(n),
        held: Vec::with_capacity(n),
        low_support: Vec::with_capacity(n),
    };
    let mut last = f64::NAN;
    for (value, effective) in samples {
        if let Some(v) = value {
            last = v;
        }
        trace.values.push(value.unwrap_or(f64::NAN));
        trace.effective_window_s.push(effective);
        trace.defined.push(value.is_some());
        trace.held.push(last);
        trace
            .low_support
            .push(value.is_some() && effective < LOW_SUPPORT_FRACTION * window_s);
    }
    trace
}

fn check_aligned(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::Misaligned { left, right })
    }
}
