//! Circulation derivative Γ′ and the tout gate.
//!
//! Γ′ is the loop integral of `(|v|²)'` over one detected period. The
//! integrand is a total derivative, so the loop integral telescopes to
//! `|v(t)|² − |v(t − T)|²`; that closed form is evaluated directly, with
//! `|v|²` at the sub-sample period boundary interpolated linearly. On a
//! closed trajectory Γ′ vanishes; a non-zero value means the voltage did
//! not return to where it was one period ago and the frequency there has
//! no periodic meaning.

use crate::error::{ensure_positive, Error, Result};
use crate::frame::SpaceVectorTrace;
use crate::qss::PeriodTrace;

/// Default circulation threshold for pu-normalised voltages, pu².
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Γ′ per sample, pu². Samples without a valid period hold NaN.
pub fn circulation_derivative(trace: &SpaceVectorTrace, periods: &PeriodTrace) -> Result<Vec<f64>> {
    if trace.len() != periods.len() {
        return Err(Error::Misaligned {
            left: trace.len(),
            right: periods.len(),
        });
    }
    let mag2 = trace.mag2();
    Ok((0..trace.len())
        .map(|i| match periods.start_position(i) {
            Some(pos) => {
                let k = pos.floor().max(0.0) as usize;
                let s = pos - k as f64;
                let back = if k + 1 < mag2.len() {
                    mag2[k] + (mag2[k + 1] - mag2[k]) * s
                } else {
                    mag2[k]
                };
                mag2[i] - back
            }
            None => f64::NAN,
        })
        .collect())
}

/// The tout function: true iff `|Γ′| ≤ ε`. NaN (invalid Γ′) maps to false.
#[inline]
pub fn tout(gamma_prime: f64, epsilon: f64) -> bool {
    gamma_prime.abs() <= epsilon
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateTrace {
    pub sample_rate_hz: f64,
    pub t0_s: f64,
    pub gamma_prime: Vec<f64>,
    pub tout: Vec<bool>,
    pub epsilon: f64,
    /// Δt_Γ′ for the event the gate was evaluated against, when known.
    pub first_recovery_s: Option<f64>,
}

impl GateTrace {
    /// Applies the threshold to a Γ′ series.
    pub fn new(sample_rate_hz: f64, t0_s: f64, gamma_prime: Vec<f64>, epsilon: f64) -> Result<Self> {
        ensure_positive("epsilon", epsilon)?;
        let tout = gamma_prime.iter().map(|&g| tout(g, epsilon)).collect();
        Ok(Self {
            sample_rate_hz,
            t0_s,
            gamma_prime,
            tout,
            epsilon,
            first_recovery_s: None,
        })
    }

    /// Gate of constant value, mostly for tests and the conventional path.
    pub fn constant(sample_rate_hz: f64, len: usize, open: bool) -> Self {
        Self {
            sample_rate_hz,
            t0_s: 0.0,
            gamma_prime: vec![if open { 0.0 } else { f64::NAN }; len],
            tout: vec![open; len],
            epsilon: DEFAULT_EPSILON,
            first_recovery_s: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tout.is_empty()
    }

    /// Same threshold, new ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.sample_rate_hz, self.t0_s, self.gamma_prime.clone(), epsilon)
    }

    /// Closes the gate on every sample within `margin` samples of a closed
    /// sample. Γ′ and ε are kept as they were.
    pub fn guarded(&self, margin: usize) -> Self {
        let n = self.len();
        let mut tout = self.tout.clone();
        for (i, _) in self.tout.iter().enumerate().filter(|(_, &open)| !open) {
            let lo = i.saturating_sub(margin);
            let hi = (i + margin + 1).min(n);
            tout[lo..hi].iter_mut().for_each(|t| *t = false);
        }
        Self { tout, ..self.clone() }
    }

    /// Records Δt_Γ′ for an event starting at `event_start_s`.
    pub fn with_first_recovery(mut self, event_start_s: f64) -> Self {
        self.first_recovery_s = first_recovery(&self, event_start_s);
        self
    }

    fn index_at(&self, t_s: f64) -> usize {
        let x = ((t_s - self.t0_s) * self.sample_rate_hz - 1e-9).ceil();
        if x <= 0.0 {
            0
        } else {
            x as usize
        }
    }
}

/// Length of the first closed-gate run at or after `event_start_s`.
///
/// If the gate is already closed at the event start the run is measured
/// from the event start. A run that lasts to the end of the record is
/// measured to the end of the record. `None` when the gate never closes.
pub fn first_recovery(gate: &GateTrace, event_start_s: f64) -> Option<f64> {
    let start = gate.index_at(event_start_s);
    let first = start + gate.tout.get(start..)?.iter().position(|&open| !open)?;
    let len = gate.tout[first..].iter().position(|&open| open).unwrap_or(gate.len() - first);
    Some(len as f64 / gate.sample_rate_hz)
}
