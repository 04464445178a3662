//! Amplitude-invariant Clarke transform into the stationary αβγ frame.

use crate::signal::SampledWaveform;

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// Space vector `[α, β, γ]` in pu.
pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Clarke transform of a single abc sample.
#[inline]
pub fn clarke_sample(va: f64, vb: f64, vc: f64) -> Vec3 {
    [
        (2.0 * va - vb - vc) / 3.0,
        (vb - vc) * INV_SQRT3,
        (va + vb + vc) / 3.0,
    ]
}

/// Space-vector samples with their squared magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceVectorTrace {
    sample_rate_hz: f64,
    t0_s: f64,
    v: Vec<Vec3>,
    mag2: Vec<f64>,
}

impl SpaceVectorTrace {
    /// Builds a trace from raw vectors; `mag2` is derived.
    pub fn from_vectors(sample_rate_hz: f64, v: Vec<Vec3>) -> Self {
        let mag2 = v.iter().map(|x| dot(x, x)).collect();
        Self {
            sample_rate_hz,
            t0_s: 0.0,
            v,
            mag2,
        }
    }

    pub fn with_t0(mut self, t0_s: f64) -> Self {
        self.t0_s = t0_s;
        self
    }

    /// Time of the first sample, s.
    pub fn t0_s(&self) -> f64 {
        self.t0_s
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn vectors(&self) -> &[Vec3] {
        &self.v
    }

    /// `|v|²` per sample, pu².
    pub fn mag2(&self) -> &[f64] {
        &self.mag2
    }
}

/// Maps abc samples to αβγ with α = (2va − vb − vc)/3, β = (vb − vc)/√3 and
/// γ = (va + vb + vc)/3, so a balanced set of peak V has |v| = V.
pub fn clarke(waveform: &SampledWaveform) -> SpaceVectorTrace {
    let v = (0..waveform.len())
        .map(|i| {
            let (a, b, c) = waveform.sample(i);
            clarke_sample(a, b, c)
        })
        .collect();
    SpaceVectorTrace::from_vectors(waveform.sample_rate_hz(), v).with_t0(waveform.t0_s())
}
