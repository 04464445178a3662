//! Threshold studies: the ε sweep over an event record and the ε
//! recommendation from a stationary record.

use serde::Serialize;

use crate::analysis::{max_abs, FrequencyChain};
use crate::error::{ensure_positive, Error, Result};
use crate::gate::{first_recovery, GateTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    /// Δt_Γ′, s; zero when the gate never closes after the event start.
    pub delta_t_s: f64,
    /// The closed run lasts to the end of the record.
    pub saturated: bool,
}

/// `points` log-spaced values from `min` to `max` inclusive.
pub fn log_space(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    ensure_positive("epsilon_min", min)?;
    ensure_positive("epsilon_max", max)?;
    if max < min {
        return Err(Error::param("epsilon_max", "must not be below epsilon_min"));
    }
    match points {
        0 => Err(Error::param("points", "range is empty")),
        1 => Ok(vec![min]),
        _ => {
            let (a, b) = (min.ln(), max.ln());
            Ok((0..points)
                .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
                .collect())
        }
    }
}

/// Δt_Γ′ for each ε, measured from `event_start_s`.
pub fn sweep_epsilon(chain: &FrequencyChain, epsilons: &[f64], event_start_s: f64) -> Result<Vec<SweepPoint>> {
    if epsilons.is_empty() {
        return Err(Error::param("epsilon", "range is empty"));
    }
    let base = GateTrace::new(chain.sample_rate_hz, chain.t0_s, chain.gamma_prime.clone(), epsilons[0])?;
    epsilons
        .iter()
        .map(|&eps| {
            let gate = base.with_epsilon(eps)?;
            let recovery = first_recovery(&gate, event_start_s);
            Ok(SweepPoint {
                epsilon: eps,
                delta_t_s: recovery.unwrap_or(0.0),
                saturated: recovery.is_some() && !gate.tout[chain.len() - 1],
            })
        })
        .collect()
}

/// Widest run of consecutive sweep points (by ε) sharing one non-zero,
/// unsaturated Δt_Γ′ within `tolerance_s`. Returns the ε span as
/// `(lo, hi)`.
pub fn plateau(points: &[SweepPoint], tolerance_s: f64) -> Option<(f64, f64)> {
    let interior = |p: &SweepPoint| !p.saturated && p.delta_t_s > 0.0;
    let mut best: Option<(f64, f64)> = None;
    let mut i = 0;
    while i < points.len() {
        if !interior(&points[i]) {
            i += 1;
            continue;
        }
        let d = points[i].delta_t_s;
        let mut j = i;
        while j + 1 < points.len() && interior(&points[j + 1]) && (points[j + 1].delta_t_s - d).abs() <= tolerance_s {
            j += 1;
        }
        let span = (points[i].epsilon, points[j].epsilon);
        if best.is_none_or(|b| span.1 / span.0 > b.1 / b.0) {
            best = Some(span);
        }
        i = j + 1;
    }
    best
}

/// Order-of-magnitude margin applied to the stationary Γ′ level.
pub const RECOMMEND_FACTOR: f64 = 10.0;

/// Absolute level above which a stationary record is suspicious.
const STATIONARY_CEILING: f64 = 0.05;

/// Robust outlier multiple on the median absolute deviation.
const OUTLIER_MADS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub max_abs_gamma_prime: f64,
    pub epsilon: f64,
    /// Robust spread of Γ′ (1.4826 × MAD), pu².
    pub robust_sigma: f64,
    /// Set when the record does not look stationary.
    pub warning: Option<String>,
}

/// Suggests ε as ten times the largest |Γ′| seen on a stationary record.
///
/// Warns when the largest |Γ′| is both above 0.05 pu² and an outlier
/// against the record's own spread, which is what a transient looks like.
pub fn recommend_epsilon(chain: &FrequencyChain) -> Result<Recommendation> {
    let mut g: Vec<f64> = chain.gamma_prime.iter().copied().filter(|v| v.is_finite()).collect();
    let max = max_abs(&g).ok_or(Error::TooShort {
        needed: 1,
        got: 0,
    })?;
    let centre = median(&mut g);
    let mut dev: Vec<f64> = g.iter().map(|v| (v - centre).abs()).collect();
    let robust_sigma = 1.4826 * median(&mut dev);
    let limit = STATIONARY_CEILING.max(OUTLIER_MADS * robust_sigma);
    let warning = (max > limit).then(|| {
        format!(
            "record does not look stationary: max |Γ′| = {max:.3e} pu² exceeds {limit:.3e} pu²; \
             the recommendation is likely too permissive"
        )
    });
    Ok(Recommendation {
        max_abs_gamma_prime: max,
        epsilon: RECOMMEND_FACTOR * max,
        robust_sigma,
        warning,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
