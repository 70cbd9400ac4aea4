use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// When a constant-coupling hop is switched off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Cutoff {
    /// Stop at the receiver-fidelity maximum inside the search window
    /// (a default window is derived from the rates when `None`).
    AutoPeak {
        window: Option<f64>,
    },
    At(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantPulse {
    pub g_a: f64,
    pub g_b: f64,
    pub cutoff: Cutoff,
}

/// Counterintuitive Gaussian pair. Hop time starts at 0; `Ω_B` peaks at
/// `lead`, `Ω_A` at `lead + delay`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StirapPulse {
    pub omega_max_a: f64,
    pub omega_max_b: f64,
    pub width: f64,
    pub delay: f64,
    pub lead: f64,
    pub total_time: f64,
}

/// Gaussian tails kept on either side of the pulse pair, in widths.
pub const STIRAP_TAIL_WIDTHS: f64 = 3.5;

impl StirapPulse {
    /// Pulse pair from dimensionless shape parameters relative to `g0`:
    /// `Ω/g0`, `T·g0` and `delay/T`. The window spans the full pair.
    pub fn from_shape(g0: f64, omega_ratio: f64, width_g0: f64, delay_ratio: f64) -> Self {
        let width = width_g0 / g0;
        let delay = delay_ratio * width;
        let lead = STIRAP_TAIL_WIDTHS * width;
        Self {
            omega_max_a: omega_ratio * g0,
            omega_max_b: omega_ratio * g0,
            width,
            delay,
            lead,
            total_time: delay + 2.0 * lead,
        }
    }

    pub fn omega_a(&self, t: f64) -> f64 {
        let x = (t - self.lead - self.delay) / self.width;
        self.omega_max_a * (-x * x).exp()
    }

    pub fn omega_b(&self, t: f64) -> f64 {
        let x = (t - self.lead) / self.width;
        self.omega_max_b * (-x * x).exp()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_max_a >= 0.0 && self.omega_max_b >= 0.0) {
            return Err(Error::arg("STIRAP amplitudes must be ≥ 0"));
        }
        if !(self.width > 0.0 && self.total_time > 0.0) {
            return Err(Error::arg("STIRAP width and total time must be > 0"));
        }
        if !(self.delay > 0.0) {
            return Err(Error::arg("STIRAP needs the receiver pulse first (delay > 0)"));
        }
        if !(self.lead >= 0.0) {
            return Err(Error::arg("STIRAP lead must be ≥ 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseSchedule {
    Constant(ConstantPulse),
    GaussianStirap(StirapPulse),
}

impl PulseSchedule {
    pub fn constant(g: f64) -> Self {
        PulseSchedule::Constant(ConstantPulse { g_a: g, g_b: g, cutoff: Cutoff::AutoPeak { window: None } })
    }

    pub fn constant_until(g: f64, t: f64) -> Self {
        PulseSchedule::Constant(ConstantPulse { g_a: g, g_b: g, cutoff: Cutoff::At(t) })
    }

    /// Textbook pulse pair: `Ω = g0`, `T = 6/g0`, delay `T`, 20 µs window.
    pub fn stirap_nominal(g0: f64) -> Self {
        let width = 6.0 / g0;
        PulseSchedule::GaussianStirap(StirapPulse {
            omega_max_a: g0,
            omega_max_b: g0,
            width,
            delay: width,
            lead: STIRAP_TAIL_WIDTHS * width,
            total_time: 20.0,
        })
    }

    /// Time-dependent drive strengths on the sender and receiver side.
    pub fn couplings(&self, t: f64) -> (f64, f64) {
        match self {
            PulseSchedule::Constant(p) => (p.g_a, p.g_b),
            PulseSchedule::GaussianStirap(p) => (p.omega_a(t), p.omega_b(t)),
        }
    }

    pub fn peak_couplings(&self) -> (f64, f64) {
        match self {
            PulseSchedule::Constant(p) => (p.g_a, p.g_b),
            PulseSchedule::GaussianStirap(p) => (p.omega_max_a, p.omega_max_b),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PulseSchedule::Constant(p) => {
                if !(p.g_a >= 0.0 && p.g_b >= 0.0) {
                    return Err(Error::arg("couplings must be ≥ 0"));
                }
                match p.cutoff {
                    Cutoff::At(t) if !(t > 0.0) => Err(Error::arg("cutoff time must be > 0")),
                    Cutoff::AutoPeak { window: Some(w) } if !(w > 0.0) => {
                        Err(Error::arg("peak search window must be > 0"))
                    }
                    _ => Ok(()),
                }
            }
            PulseSchedule::GaussianStirap(p) => p.validate(),
        }
    }

    pub fn is_stirap(&self) -> bool {
        matches!(self, PulseSchedule::GaussianStirap(_))
    }
}
