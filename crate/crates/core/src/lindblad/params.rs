use crate::channels;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// How a rate was written down before ingestion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    /// Ordinary frequency; multiplied by 2π on ingestion.
    Hz,
    RadPerUs,
    /// "x × 2π MHz"
    TwoPiMhz,
}

impl RateUnit {
    pub fn to_rad_per_us(self, v: f64) -> f64 {
        match self {
            RateUnit::Hz => hz_to_rad_per_us(v),
            RateUnit::RadPerUs => v,
            RateUnit::TwoPiMhz => TAU * v,
        }
    }

    pub fn from_rad_per_us(self, v: f64) -> f64 {
        match self {
            RateUnit::Hz => rad_per_us_to_hz(v),
            RateUnit::RadPerUs => v,
            RateUnit::TwoPiMhz => v / TAU,
        }
    }
}

pub fn hz_to_rad_per_us(hz: f64) -> f64 {
    TAU * hz * 1e-6
}

pub fn rad_per_us_to_hz(w: f64) -> f64 {
    w / TAU * 1e6
}

/// Physical knobs of one link. Rates in rad/µs, times in µs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub g0: f64,
    pub kappa: f64,
    pub gamma0: f64,
    pub t1_us: f64,
    pub t2_us: f64,
    pub length_um: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            g0: hz_to_rad_per_us(1e5),
            kappa: hz_to_rad_per_us(1e4),
            gamma0: 0.0,
            t1_us: 291.99,
            t2_us: 183.9,
            length_um: 250.0,
        }
    }
}

impl PhysicalParams {
    pub fn new(unit: RateUnit, g0: f64, kappa: f64, gamma0: f64) -> Self {
        Self {
            g0: unit.to_rad_per_us(g0),
            kappa: unit.to_rad_per_us(kappa),
            gamma0: unit.to_rad_per_us(gamma0),
            ..Self::default()
        }
    }

    /// Rates given as multiples of 2π MHz.
    pub fn two_pi_mhz(g0: f64, kappa: f64, gamma0: f64) -> Self {
        Self::new(RateUnit::TwoPiMhz, g0, kappa, gamma0)
    }

    pub fn with_coherence(mut self, t1_us: f64, t2_us: f64) -> Self {
        self.t1_us = t1_us;
        self.t2_us = t2_us;
        self
    }

    pub fn with_length(mut self, length_um: f64) -> Self {
        self.length_um = length_um;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g0", self.g0), ("kappa", self.kappa), ("gamma0", self.gamma0), ("length", self.length_um)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        for (name, v) in [("T1", self.t1_us), ("T2", self.t2_us)] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::arg(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn cooperativity(&self) -> Result<f64> {
        channels::cooperativity(self.g0, self.kappa, self.gamma0)
    }

    pub fn g_hz(&self) -> f64 {
        rad_per_us_to_hz(self.g0)
    }

    pub fn kappa_hz(&self) -> f64 {
        rad_per_us_to_hz(self.kappa)
    }

    /// Pure-dephasing rate implied by T1 and T2: `1/T2 - 1/(2 T1)`.
    pub fn pure_dephasing_rate(&self) -> Result<f64> {
        let r = 1.0 / self.t2_us - 0.5 / self.t1_us;
        if r < -1e-15 {
            return Err(Error::arg(format!(
                "T2 = {} exceeds 2 T1 = {}; no physical pure dephasing",
                self.t2_us,
                2.0 * self.t1_us
            )));
        }
        Ok(r.max(0.0))
    }
}
