use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SampledWaveform;
use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Phase offsets of a, b and c.
const PHASE_OFFSETS: [f64; 3] = [0.0, -2.0 * PI / 3.0, 2.0 * PI / 3.0];

/// Common dip applied to all phases during a transient event.
const EVENT_DIP: f64 = 0.2;
/// Additional sag of phase b during a transient event.
const EVENT_SAG_B: f64 = 0.2;
/// 2nd and 5th harmonic burst magnitudes at event onset.
const EVENT_BURST: [(u32, f64); 2] = [(2, 0.08), (5, 0.04)];

/// Minimum number of samples per nominal cycle accepted by [`generate`].
pub const MIN_SAMPLES_PER_CYCLE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    Balanced,
    Chirp,
    AmplitudeStep,
    Polluted,
    TransientEvent,
}

/// Linear frequency ramp `f(t) = f0 + rate * (t - start)` from `start_s` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub rate_hz_per_s: f64,
    pub start_s: f64,
}

/// All phases multiplied by `ratio` from `at_s` onward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub ratio: f64,
    pub at_s: f64,
}

/// Harmonic of the given order, magnitude relative to the fundamental.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub order: u32,
    pub magnitude: f64,
}

/// Zero-mean Gaussian noise added independently to each phase sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    pub std_pu: f64,
    pub seed: u64,
}

/// Distorted interval: every phase dips, phase b sags further, and a
/// decaying 2nd/5th harmonic burst rides on top. Voltages snap back to
/// nominal at `start_s + length_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientEvent {
    pub start_s: f64,
    pub length_s: f64,
}

/// Recipe for a synthetic three-phase record.
///
/// `kind` names the primary feature and determines which component is
/// mandatory; the other components may be layered on top (an outage is a
/// transient event followed by a frequency ramp, for instance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub base_frequency_hz: f64,
    pub amplitude_pu: f64,
    pub duration_s: f64,
    pub ramp: Option<Ramp>,
    pub step: Option<Step>,
    pub harmonics: Vec<Harmonic>,
    pub noise: Option<Noise>,
    /// Linear amplitude drift, fraction of `amplitude_pu` per second.
    pub amplitude_drift_per_s: f64,
    pub event: Option<TransientEvent>,
}

impl SignalSpec {
    pub fn balanced(base_frequency_hz: f64, amplitude_pu: f64, duration_s: f64) -> Self {
        Self {
            kind: SignalKind::Balanced,
            base_frequency_hz,
            amplitude_pu,
            duration_s,
            ramp: None,
            step: None,
            harmonics: Vec::new(),
            noise: None,
            amplitude_drift_per_s: 0.0,
            event: None,
        }
    }

    pub fn chirp(base_frequency_hz: f64, rate_hz_per_s: f64, duration_s: f64) -> Self {
        Self {
            kind: SignalKind::Chirp,
            ..Self::balanced(base_frequency_hz, 1.0, duration_s)
        }
        .with_ramp(rate_hz_per_s, 0.0)
    }

    pub fn amplitude_step(base_frequency_hz: f64, ratio: f64, at_s: f64, duration_s: f64) -> Self {
        Self {
            kind: SignalKind::AmplitudeStep,
            step: Some(Step { ratio, at_s }),
            ..Self::balanced(base_frequency_hz, 1.0, duration_s)
        }
    }

    pub fn polluted(base_frequency_hz: f64, duration_s: f64) -> Self {
        Self {
            kind: SignalKind::Polluted,
            ..Self::balanced(base_frequency_hz, 1.0, duration_s)
        }
    }

    pub fn transient_event(base_frequency_hz: f64, start_s: f64, length_s: f64, duration_s: f64) -> Self {
        Self {
            kind: SignalKind::TransientEvent,
            event: Some(TransientEvent { start_s, length_s }),
            ..Self::balanced(base_frequency_hz, 1.0, duration_s)
        }
    }

    pub fn with_amplitude(mut self, amplitude_pu: f64) -> Self {
        self.amplitude_pu = amplitude_pu;
        self
    }

    pub fn with_ramp(mut self, rate_hz_per_s: f64, start_s: f64) -> Self {
        self.ramp = Some(Ramp { rate_hz_per_s, start_s });
        self
    }

    pub fn with_step(mut self, ratio: f64, at_s: f64) -> Self {
        self.step = Some(Step { ratio, at_s });
        self
    }

    pub fn with_harmonic(mut self, order: u32, magnitude: f64) -> Self {
        self.harmonics.push(Harmonic { order, magnitude });
        self
    }

    pub fn with_noise(mut self, std_pu: f64, seed: u64) -> Self {
        self.noise = Some(Noise { std_pu, seed });
        self
    }

    pub fn with_drift(mut self, per_s: f64) -> Self {
        self.amplitude_drift_per_s = per_s;
        self
    }

    pub fn with_event(mut self, start_s: f64, length_s: f64) -> Self {
        self.event = Some(TransientEvent { start_s, length_s });
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("base_frequency_hz", self.base_frequency_hz)?;
        ensure_positive("amplitude_pu", self.amplitude_pu)?;
        ensure_positive("duration_s", self.duration_s)?;
        ensure_finite("amplitude_drift_per_s", self.amplitude_drift_per_s)?;
        if let Some(r) = &self.ramp {
            ensure_finite("ramp.rate_hz_per_s", r.rate_hz_per_s)?;
            ensure_finite("ramp.start_s", r.start_s)?;
        }
        if let Some(s) = &self.step {
            ensure_positive("step.ratio", s.ratio)?;
            ensure_finite("step.at_s", s.at_s)?;
        }
        for h in &self.harmonics {
            if h.order < 2 {
                return Err(Error::param("harmonics.order", format!("must be >= 2, got {}", h.order)));
            }
            ensure_finite("harmonics.magnitude", h.magnitude)?;
        }
        if let Some(n) = &self.noise {
            ensure_finite("noise.std_pu", n.std_pu)?;
            if n.std_pu < 0.0 {
                return Err(Error::param("noise.std_pu", "must be >= 0"));
            }
        }
        if let Some(e) = &self.event {
            ensure_finite("event.start_s", e.start_s)?;
            ensure_positive("event.length_s", e.length_s)?;
        }
        let missing = match self.kind {
            SignalKind::Balanced => None,
            SignalKind::Chirp => self.ramp.is_none().then_some("ramp"),
            SignalKind::AmplitudeStep => self.step.is_none().then_some("step"),
            SignalKind::Polluted => (self.harmonics.is_empty() && self.noise.is_none()).then_some("harmonics or noise"),
            SignalKind::TransientEvent => self.event.is_none().then_some("event"),
        };
        match missing {
            Some(what) => Err(Error::param("kind", format!("{:?} signal needs {what}", self.kind))),
            None => Ok(()),
        }
    }

    /// Instantaneous fundamental frequency at `t` (s from record start), Hz.
    pub fn frequency_at(&self, t: f64) -> f64 {
        match &self.ramp {
            Some(r) => self.base_frequency_hz + r.rate_hz_per_s * (t - r.start_s).max(0.0),
            None => self.base_frequency_hz,
        }
    }

    /// Fundamental phase angle at `t`: the integral of `2π f`.
    pub fn phase_at(&self, t: f64) -> f64 {
        let ramp = match &self.ramp {
            Some(r) => {
                let u = (t - r.start_s).max(0.0);
                0.5 * r.rate_hz_per_s * u * u
            }
            None => 0.0,
        };
        2.0 * PI * (self.base_frequency_hz * t + ramp)
    }
}

/// Synthesises the record described by `spec` at `sample_rate_hz`.
///
/// The record starts at t = 0 and holds `round(duration * fs)` samples.
pub fn generate(spec: &SignalSpec, sample_rate_hz: f64) -> Result<SampledWaveform> {
    spec.validate()?;
    ensure_positive("sample_rate_hz", sample_rate_hz)?;
    if sample_rate_hz < MIN_SAMPLES_PER_CYCLE * spec.base_frequency_hz {
        return Err(Error::param(
            "sample_rate_hz",
            format!(
                "{sample_rate_hz} Hz is below {MIN_SAMPLES_PER_CYCLE} x base frequency {}",
                spec.base_frequency_hz
            ),
        ));
    }
    let n = (spec.duration_s * sample_rate_hz).round() as usize;
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }

    let mut phases = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let t = i as f64 / sample_rate_hz;
        let theta = spec.phase_at(t);
        let mut amp = spec.amplitude_pu * (1.0 + spec.amplitude_drift_per_s * t);
        if let Some(s) = &spec.step {
            if t >= s.at_s {
                amp *= s.ratio;
            }
        }
        let event = spec.event.as_ref().and_then(|e| {
            let u = t - e.start_s;
            (u >= 0.0 && u < e.length_s).then(|| (-u / (0.5 * e.length_s)).exp())
        });
        for (k, phase) in phases.iter_mut().enumerate() {
            let arg = theta + PHASE_OFFSETS[k];
            let mut v = arg.cos();
            for h in &spec.harmonics {
                v += h.magnitude * (h.order as f64 * arg).cos();
            }
            if let Some(decay) = event {
                let mut gain = 1.0 - EVENT_DIP;
                if k == 1 {
                    gain -= EVENT_SAG_B;
                }
                v *= gain;
                for (order, mag) in EVENT_BURST {
                    v += decay * mag * (order as f64 * arg).cos();
                }
            }
            phase[i] = amp * v;
        }
    }

    if let Some(noise) = spec.noise.filter(|n| n.std_pu > 0.0) {
        let normal = Normal::new(0.0, noise.std_pu)
            .map_err(|e| Error::param("noise.std_pu", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for i in 0..n {
            for phase in phases.iter_mut() {
                phase[i] += normal.sample(&mut rng);
            }
        }
    }

    let [va, vb, vc] = phases;
    SampledWaveform::new(sample_rate_hz, 0.0, va, vb, vc)
}
