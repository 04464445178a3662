//! Geometric instantaneous frequency of the voltage space vector.
//!
//! For a trajectory `v(t)` the rotation rate is `|v × v'| / |v|²` and the
//! radial (translation) rate is `|v · v'| / |v|²`. A balanced sinusoid
//! traces a circle at constant speed, so the rotation rate equals the
//! angular frequency and the radial rate vanishes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{cross, dot, norm, SpaceVectorTrace, Vec3};

/// Samples with `|v|²` below this (pu²) carry no usable frequency.
pub const MAGNITUDE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyUnit {
    RadPerS,
    Hz,
    /// Per-unit on the base frequency.
    Pu,
}

impl FrequencyUnit {
    pub fn name(self) -> &'static str {
        match self {
            FrequencyUnit::RadPerS => "rad/s",
            FrequencyUnit::Hz => "Hz",
            FrequencyUnit::Pu => "pu",
        }
    }

    /// Multiplier converting a value in `self` into Hz.
    fn to_hz(self, base_frequency_hz: f64) -> f64 {
        match self {
            FrequencyUnit::RadPerS => 1.0 / (2.0 * PI),
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::Pu => base_frequency_hz,
        }
    }
}

/// Per-sample scalar series with a unit tag and validity mask.
///
/// Rate-of-change traces reuse this type; their unit tag then reads as
/// "per second" (a `Hz` trace produced by a differentiator is in Hz/s).
/// Invalid samples hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrace {
    pub sample_rate_hz: f64,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    pub unit: FrequencyUnit,
}

impl FrequencyTrace {
    pub fn new(sample_rate_hz: f64, values: Vec<f64>, unit: FrequencyUnit) -> Self {
        let valid = values.iter().map(|v| v.is_finite()).collect();
        Self {
            sample_rate_hz,
            values,
            valid,
            unit,
        }
    }

    /// Builds a trace from optional samples; `None` marks an invalid sample.
    pub fn from_options(sample_rate_hz: f64, samples: impl IntoIterator<Item = Option<f64>>, unit: FrequencyUnit) -> Self {
        let (values, valid) = samples
            .into_iter()
            .map(|s| match s {
                Some(v) => (v, true),
                None => (f64::NAN, false),
            })
            .unzip();
        Self {
            sample_rate_hz,
            values,
            valid,
            unit,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.valid[i].then(|| self.values[i])
    }

    /// First valid sample index, if any.
    pub fn valid_from(&self) -> Option<usize> {
        self.valid.iter().position(|&v| v)
    }

    /// Valid samples as `(index, value)`.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.valid)
            .enumerate()
            .filter(|(_, (_, &ok))| ok)
            .map(|(i, (&v, _))| (i, v))
    }

    /// Converts to `unit`; `base_frequency_hz` is only used for pu.
    pub fn to_unit(&self, unit: FrequencyUnit, base_frequency_hz: f64) -> Self {
        let k = self.unit.to_hz(base_frequency_hz) / unit.to_hz(base_frequency_hz);
        Self {
            values: self.values.iter().map(|v| v * k).collect(),
            unit,
            ..self.clone()
        }
    }
}

/// Time derivative of the space vector.
///
/// Fourth-order central differences in the interior and fourth-order
/// one-sided stencils on the first and last two samples; traces of three
/// or four samples fall back to second-order stencils. All stencils are
/// exact for linear trajectories.
pub fn derivative(trace: &SpaceVectorTrace) -> Result<Vec<Vec3>> {
    let v = trace.vectors();
    let n = v.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let fs = trace.sample_rate_hz();
    let combine = |terms: &[(usize, f64)], scale: f64| -> Vec3 {
        let mut out = [0.0; 3];
        for &(i, c) in terms {
            for k in 0..3 {
                out[k] += c * v[i][k];
            }
        }
        out.map(|x| x * scale)
    };

    let mut d = vec![[0.0; 3]; n];
    if n < 5 {
        let h2 = fs / 2.0;
        d[0] = combine(&[(0, -3.0), (1, 4.0), (2, -1.0)], h2);
        for i in 1..n - 1 {
            d[i] = combine(&[(i + 1, 1.0), (i - 1, -1.0)], h2);
        }
        d[n - 1] = combine(&[(n - 1, 3.0), (n - 2, -4.0), (n - 3, 1.0)], h2);
        return Ok(d);
    }

    let h12 = fs / 12.0;
    d[0] = combine(&[(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)], h12);
    d[1] = combine(&[(0, -3.0), (1, -10.0), (2, 18.0), (3, -6.0), (4, 1.0)], h12);
    for i in 2..n - 2 {
        d[i] = combine(&[(i - 2, 1.0), (i - 1, -8.0), (i + 1, 8.0), (i + 2, -1.0)], h12);
    }
    d[n - 2] = combine(&[(n - 1, 3.0), (n - 2, 10.0), (n - 3, -18.0), (n - 4, 6.0), (n - 5, -1.0)], h12);
    d[n - 1] = combine(&[(n - 1, 25.0), (n - 2, -48.0), (n - 3, 36.0), (n - 4, -16.0), (n - 5, 3.0)], h12);
    Ok(d)
}

/// Radial rate ρ and rotation rate ω of the trajectory, both in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricFrequency {
    pub rho: FrequencyTrace,
    pub omega: FrequencyTrace,
}

pub fn geometric_frequency(trace: &SpaceVectorTrace) -> Result<GeometricFrequency> {
    let d = derivative(trace)?;
    let fs = trace.sample_rate_hz();
    let mut rho = Vec::with_capacity(d.len());
    let mut omega = Vec::with_capacity(d.len());
    for ((v, dv), &m2) in trace.vectors().iter().zip(&d).zip(trace.mag2()) {
        if m2 >= MAGNITUDE_FLOOR {
            rho.push(Some(dot(v, dv).abs() / m2));
            omega.push(Some(norm(&cross(v, dv)) / m2));
        } else {
            rho.push(None);
            omega.push(None);
        }
    }
    Ok(GeometricFrequency {
        rho: FrequencyTrace::from_options(fs, rho, FrequencyUnit::RadPerS),
        omega: FrequencyTrace::from_options(fs, omega, FrequencyUnit::RadPerS),
    })
}

/// Rotation rate `|v × v'| / |v|²` in rad/s.
pub fn omega_v(trace: &SpaceVectorTrace) -> Result<FrequencyTrace> {
    geometric_frequency(trace).map(|g| g.omega)
}

/// Radial rate `|v · v'| / |v|²` in 1/s.
pub fn rho_v(trace: &SpaceVectorTrace) -> Result<FrequencyTrace> {
    geometric_frequency(trace).map(|g| g.rho)
}
