//! Period detection by total-curvature closure and the quasi-steady-state
//! frequency.
//!
//! The trajectory closes once the rotation rate integrates to a full turn.
//! For each sample the period is the shortest backward span whose integral
//! of ω_υ reaches 2π; the QSS frequency is the mean of ω_υ over that span,
//! which is exactly `2π / T`.
//!
//! ω_υ is treated as piecewise linear between samples: whole intervals are
//! accumulated with the trapezoidal rule and the partial interval at the
//! far end of the span is solved exactly (a quadratic in the sub-sample
//! offset), so the closure holds to rounding.

use std::f64::consts::PI;

use crate::error::{ensure_positive, Error, Result};
use crate::geometric::{FrequencyTrace, FrequencyUnit};

pub const TWO_PI: f64 = 2.0 * PI;

/// Slack on the 2π comparison so rounding in the running sum cannot push a
/// closure one sample late.
const CLOSURE_SLACK: f64 = 1e-12;

/// Default lookback horizon: five cycles at 50 Hz.
pub const DEFAULT_LOOKBACK_S: f64 = 0.1;

/// Detected period per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodTrace {
    pub sample_rate_hz: f64,
    /// Period in seconds; NaN where invalid.
    pub period_s: Vec<f64>,
    pub valid: Vec<bool>,
}

impl PeriodTrace {
    pub fn len(&self) -> usize {
        self.period_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.period_s.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.valid[i].then(|| self.period_s[i])
    }

    /// Fractional sample position of `t_i − T(t_i)`.
    pub fn start_position(&self, i: usize) -> Option<f64> {
        self.get(i).map(|t| i as f64 - t * self.sample_rate_hz)
    }
}

/// Backward integral of the piecewise-linear interpolant of `omega` from
/// fractional sample position `from` to sample `to`.
pub fn backward_integral(omega: &[f64], dt: f64, from: f64, to: usize) -> f64 {
    let k = from.floor() as usize;
    let s = from - k as f64;
    let mut total = 0.0;
    if k < to {
        // Partial interval [k + s, k + 1].
        let (a, b) = (omega[k], omega[k + 1]);
        let at_s = a + (b - a) * s;
        total += 0.5 * (at_s + b) * (1.0 - s) * dt;
        for m in k + 1..to {
            total += 0.5 * (omega[m] + omega[m + 1]) * dt;
        }
    }
    total
}

/// Finds the closure period at every sample.
///
/// `omega` must be in rad/s. A sample gets no period when fewer than 2π
/// radians accumulate within `lookback_s`, or when an invalid ω sample lies
/// inside the span.
pub fn detect_period(omega: &FrequencyTrace, lookback_s: f64) -> Result<PeriodTrace> {
    if omega.unit != FrequencyUnit::RadPerS {
        return Err(Error::WrongUnit {
            expected: "rad/s",
            got: omega.unit.name(),
        });
    }
    ensure_positive("lookback_s", lookback_s)?;
    let n = omega.len();
    let dt = omega.dt();
    let w: Vec<f64> = (0..n).map(|i| omega.get(i).unwrap_or(0.0)).collect();

    // cum[i]: integral from sample 0 to sample i; bad[i]: invalid samples before i.
    let mut cum = vec![0.0; n];
    let mut bad = vec![0usize; n + 1];
    for i in 0..n {
        bad[i + 1] = bad[i] + usize::from(!omega.valid[i]);
        if i > 0 {
            cum[i] = cum[i - 1] + 0.5 * (w[i - 1] + w[i]) * dt;
        }
    }

    let mut period_s = vec![f64::NAN; n];
    let mut valid = vec![false; n];
    // `k` is the last sample with cum[j] - cum[k] >= 2π; it only moves forward.
    let mut k = 0usize;
    for j in 1..n {
        if cum[j] - cum[0] < TWO_PI - CLOSURE_SLACK {
            continue;
        }
        while k + 1 < j && cum[j] - cum[k + 1] >= TWO_PI - CLOSURE_SLACK {
            k += 1;
        }
        let remaining = TWO_PI - (cum[j] - cum[k + 1]);
        let r = partial_fraction(w[k], w[k + 1], remaining / dt);
        let t = ((j - k - 1) as f64 + r) * dt;
        if t <= lookback_s && bad[j + 1] == bad[k] {
            period_s[j] = t;
            valid[j] = true;
        }
    }
    Ok(PeriodTrace {
        sample_rate_hz: omega.sample_rate_hz,
        period_s,
        valid,
    })
}

/// Fraction `r ∈ [0, 1]` of the interval `[k, k+1]`, measured back from
/// `k+1`, over which the linear ω from `a` to `b` accumulates `target`
/// (in units of one sample interval).
fn partial_fraction(a: f64, b: f64, target: f64) -> f64 {
    // Area from k+1-r to k+1 is b r − (b − a) r² / 2.
    let d = b - a;
    let disc = (b * b - 2.0 * d * target).max(0.0);
    let denom = b + disc.sqrt();
    if denom <= 0.0 {
        return 1.0;
    }
    (2.0 * target / denom).clamp(0.0, 1.0)
}

/// QSS frequency `2π / T` in rad/s, invalid wherever the period is.
pub fn omega_qss(omega: &FrequencyTrace, periods: &PeriodTrace) -> Result<FrequencyTrace> {
    if omega.len() != periods.len() {
        return Err(Error::Misaligned {
            left: omega.len(),
            right: periods.len(),
        });
    }
    let values = (0..periods.len()).map(|i| periods.get(i).map(|t| TWO_PI / t));
    Ok(FrequencyTrace::from_options(omega.sample_rate_hz, values, FrequencyUnit::RadPerS))
}
