//! First-order IIR sections, discretised with the bilinear transform.

use std::f64::consts::PI;

use crate::error::{ensure_positive, Error, Result};
use crate::geometric::FrequencyTrace;

/// First-order Butterworth low-pass, `ωc / (s + ωc)`, prewarped so the
/// discrete response is exactly −3 dB at the cutoff.
#[derive(Debug, Clone)]
pub struct Butterworth1 {
    b: f64,
    a: f64,
    state: Option<(f64, f64)>,
}

impl Butterworth1 {
    pub fn new(cutoff_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        ensure_positive("sample_rate_hz", sample_rate_hz)?;
        ensure_positive("cutoff_hz", cutoff_hz)?;
        if cutoff_hz >= sample_rate_hz / 2.0 {
            return Err(Error::param(
                "cutoff_hz",
                format!("{cutoff_hz} Hz is not below Nyquist ({} Hz)", sample_rate_hz / 2.0),
            ));
        }
        let k = (PI * cutoff_hz / sample_rate_hz).tan();
        Ok(Self {
            b: k / (1.0 + k),
            a: (k - 1.0) / (k + 1.0),
            state: None,
        })
    }

    /// Filters one sample. The first call initialises the state to `x`.
    pub fn update(&mut self, x: f64) -> f64 {
        let (x1, y1) = self.state.unwrap_or((x, x));
        let y = self.b * (x + x1) - self.a * y1;
        self.state = Some((x, y));
        y
    }

    pub fn reset(&mut self) {
        self.state = None;
    }
}

/// Batch low-pass of a frequency trace. Invalid input samples produce
/// invalid output and leave the filter state untouched.
pub fn butterworth1(trace: &FrequencyTrace, cutoff_hz: f64) -> Result<FrequencyTrace> {
    let mut f = Butterworth1::new(cutoff_hz, trace.sample_rate_hz)?;
    let out = (0..trace.len()).map(|i| trace.get(i).map(|x| f.update(x)));
    Ok(FrequencyTrace::from_options(trace.sample_rate_hz, out, trace.unit))
}

/// Washout (band-limited differentiator) `s / (1 + τ s)`.
///
/// A ramp of slope `a` settles to exactly `a`; a constant input gives 0.
#[derive(Debug, Clone)]
pub struct Washout {
    gain: f64,
    pole: f64,
    state: Option<(f64, f64)>,
}

impl Washout {
    pub fn new(tau_s: f64, sample_rate_hz: f64) -> Result<Self> {
        ensure_positive("washout_tau_s", tau_s)?;
        ensure_positive("sample_rate_hz", sample_rate_hz)?;
        let dt = 1.0 / sample_rate_hz;
        let den = dt + 2.0 * tau_s;
        Ok(Self {
            gain: 2.0 / den,
            pole: (dt - 2.0 * tau_s) / den,
            state: None,
        })
    }

    /// Differentiates one sample. The first call after construction or
    /// [`reset`](Self::reset) outputs 0 and latches `x` as the reference.
    pub fn update(&mut self, x: f64) -> f64 {
        let (x1, y1) = self.state.unwrap_or((x, 0.0));
        let y = self.gain * (x - x1) - self.pole * y1;
        self.state = Some((x, y));
        y
    }

    pub fn reset(&mut self) {
        self.state = None;
    }
}
