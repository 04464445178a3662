//! Synchronous-reference-frame PLL used as the conventional frequency
//! baseline.
//!
//! The phase detector is the q-axis projection of the αβ vector on the
//! estimated angle, normalised by the αβ magnitude so the loop gain does
//! not depend on voltage level. The PI output is a per-unit frequency
//! deviation: `ω = ω0 (1 + kp e + ki ∫e dt)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};
use crate::frame::{SpaceVectorTrace, Vec3};
use crate::geometric::{FrequencyTrace, FrequencyUnit, MAGNITUDE_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PllGains {
    pub kp: f64,
    pub ki: f64,
}

impl Default for PllGains {
    fn default() -> Self {
        Self { kp: 0.2, ki: 0.03 }
    }
}

#[derive(Debug, Clone)]
pub struct Pll {
    gains: PllGains,
    omega0: f64,
    dt: f64,
    theta: Option<f64>,
    integral: f64,
    omega: f64,
}

impl Pll {
    pub fn new(gains: PllGains, nominal_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        ensure_positive("kp", gains.kp)?;
        ensure_positive("ki", gains.ki)?;
        ensure_positive("nominal_hz", nominal_hz)?;
        ensure_positive("sample_rate_hz", sample_rate_hz)?;
        let omega0 = 2.0 * PI * nominal_hz;
        Ok(Self {
            gains,
            omega0,
            dt: 1.0 / sample_rate_hz,
            theta: None,
            integral: 0.0,
            omega: omega0,
        })
    }

    /// Current frequency estimate, rad/s.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Processes one space-vector sample and returns the frequency estimate
    /// in rad/s. The angle locks onto the first usable sample; samples
    /// below the magnitude floor coast at the last estimate.
    pub fn update(&mut self, v: &Vec3) -> f64 {
        let m2 = v[0] * v[0] + v[1] * v[1];
        if m2 < MAGNITUDE_FLOOR {
            if let Some(theta) = self.theta.as_mut() {
                *theta += self.omega * self.dt;
            }
            return self.omega;
        }
        let theta = *self.theta.get_or_insert_with(|| v[1].atan2(v[0]));
        let (s, c) = theta.sin_cos();
        let err = (v[1] * c - v[0] * s) / m2.sqrt();
        self.integral += err * self.dt;
        self.omega = self.omega0 * (1.0 + self.gains.kp * err + self.gains.ki * self.integral);
        self.theta = Some((theta + self.omega * self.dt) % (2.0 * PI));
        self.omega
    }
}

/// Runs a PLL over the whole trace; output in rad/s.
pub fn pll(trace: &SpaceVectorTrace, gains: PllGains, nominal_hz: f64) -> Result<FrequencyTrace> {
    let mut p = Pll::new(gains, nominal_hz, trace.sample_rate_hz())?;
    let values = trace.vectors().iter().map(|v| p.update(v)).collect();
    Ok(FrequencyTrace::new(trace.sample_rate_hz(), values, FrequencyUnit::RadPerS))
}
