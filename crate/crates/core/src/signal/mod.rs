//! Three-phase waveform containers, synthetic test signals and the CSV
//! waveform format.
//!
//! Voltages are per-unit on the nominal peak phase voltage, so a balanced
//! set of amplitude 1.0 traces the unit circle in the αβ plane.

mod csv;
mod generate;

pub use self::csv::{read_csv, read_csv_from, write_csv, write_csv_to};
pub use self::generate::{generate, Harmonic, Noise, Ramp, SignalKind, SignalSpec, Step, TransientEvent};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Uniformly sampled three-phase voltage record.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    sample_rate_hz: f64,
    t0_s: f64,
    phases: [Vec<f64>; 3],
}

impl SampledWaveform {
    pub fn new(sample_rate_hz: f64, t0_s: f64, va: Vec<f64>, vb: Vec<f64>, vc: Vec<f64>) -> Result<Self> {
        ensure_positive("sample_rate_hz", sample_rate_hz)?;
        ensure_finite("t0_s", t0_s)?;
        if va.len() != vb.len() || va.len() != vc.len() {
            return Err(Error::param(
                "phases",
                format!("phase lengths differ: {}, {}, {}", va.len(), vb.len(), vc.len()),
            ));
        }
        if va.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: va.len() });
        }
        Ok(Self {
            sample_rate_hz,
            t0_s,
            phases: [va, vb, vc],
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn t0_s(&self) -> f64 {
        self.t0_s
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.phases[0].len()
    }

    /// Always false: a waveform holds at least two samples.
    pub fn is_empty(&self) -> bool {
        self.phases[0].is_empty()
    }

    /// Time of sample `i` in seconds.
    pub fn time(&self, i: usize) -> f64 {
        self.t0_s + i as f64 / self.sample_rate_hz
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn duration_s(&self) -> f64 {
        (self.len() - 1) as f64 / self.sample_rate_hz
    }

    pub fn va(&self) -> &[f64] {
        &self.phases[0]
    }

    pub fn vb(&self) -> &[f64] {
        &self.phases[1]
    }

    pub fn vc(&self) -> &[f64] {
        &self.phases[2]
    }

    pub fn phases(&self) -> &[Vec<f64>; 3] {
        &self.phases
    }

    /// `(va, vb, vc)` at sample `i`.
    pub fn sample(&self, i: usize) -> (f64, f64, f64) {
        (self.phases[0][i], self.phases[1][i], self.phases[2][i])
    }

    /// Index of the first sample at or after `t_s`, clamped to the record.
    pub fn index_at(&self, t_s: f64) -> usize {
        let x = ((t_s - self.t0_s) * self.sample_rate_hz - 1e-9).ceil();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.len() - 1)
        }
    }

    /// Multiplies every phase sample by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let phases = self.phases.clone().map(|p| p.into_iter().map(|x| x * k).collect());
        Self { phases, ..*self }
    }
}
