//! Closed-form link and memory models used by the network layer.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fitted cavity-loss model mapping `(κ, g)` to an amplitude-damping strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelModel {
    /// `δκ / (δκ + εg)`
    Weak {
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    /// `1 - exp(-σ κ / g)`
    Strong {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
}

fn default_delta() -> f64 {
    10.0
}
fn default_epsilon() -> f64 {
    1.0
}
fn default_sigma() -> f64 {
    0.5
}

impl ChannelModel {
    pub fn weak() -> Self {
        ChannelModel::Weak { delta: default_delta(), epsilon: default_epsilon() }
    }

    pub fn strong() -> Self {
        ChannelModel::Strong { sigma: default_sigma() }
    }

    pub fn strong_with(sigma: f64) -> Self {
        ChannelModel::Strong { sigma }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::arg(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            ChannelModel::Weak { delta, epsilon } => {
                ok("delta", delta)?;
                ok("epsilon", epsilon)
            }
            ChannelModel::Strong { sigma } => ok("sigma", sigma),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Weak { .. } => "weak",
            ChannelModel::Strong { .. } => "strong",
        }
    }

    pub fn gamma_cavity(&self, kappa: f64, g: f64) -> Result<f64> {
        gamma_cavity(self, kappa, g)
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel::strong()
    }
}

/// Amplitude-damping strength of one link. Only `κ/g` matters.
pub fn gamma_cavity(model: &ChannelModel, kappa: f64, g: f64) -> Result<f64> {
    if !(kappa >= 0.0 && kappa.is_finite() && g > 0.0) {
        return Err(Error::arg(format!("need κ ≥ 0 and g > 0 (κ={kappa}, g={g})")));
    }
    model.validate()?;
    Ok(match *model {
        ChannelModel::Weak { delta, epsilon } => delta * kappa / (delta * kappa + epsilon * g),
        ChannelModel::Strong { sigma } => -(-sigma * kappa / g).exp_m1(),
    })
}

/// Memory decoherence model with fitted rate multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceModel {
    #[serde(default = "default_eps_t1")]
    pub epsilon_t1: f64,
    #[serde(default = "default_rho_t2")]
    pub rho_t2: f64,
}

fn default_eps_t1() -> f64 {
    5.0
}
fn default_rho_t2() -> f64 {
    6.0
}

impl Default for DecoherenceModel {
    fn default() -> Self {
        Self { epsilon_t1: default_eps_t1(), rho_t2: default_rho_t2() }
    }
}

impl DecoherenceModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_t1 > 0.0 && self.rho_t2 > 0.0) {
            return Err(Error::arg("decoherence multipliers must be positive"));
        }
        Ok(())
    }

    pub fn relaxation(&self, t1: f64, t: f64) -> Result<f64> {
        relaxation_factor(t1, t, self.epsilon_t1)
    }

    pub fn dephasing(&self, t2: f64, t: f64) -> Result<f64> {
        dephasing_factor(t2, t, self.rho_t2)
    }
}

fn decay_factor(tc: f64, t: f64, mult: f64, what: &str) -> Result<f64> {
    if tc.is_nan() || tc <= 0.0 {
        return Err(Error::arg(format!("{what} must be positive, got {tc}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::arg(format!("elapsed time must be ≥ 0, got {t}")));
    }
    if tc.is_infinite() {
        return Ok(1.0);
    }
    Ok((-mult * t / tc).exp())
}

/// `exp(-ε t / T1)`: excited-state survival over `t`.
pub fn relaxation_factor(t1: f64, t: f64, eps: f64) -> Result<f64> {
    decay_factor(t1, t, eps, "T1")
}

/// `exp(-ϱ t / T2)`: coherence multiplier over `t`.
pub fn dephasing_factor(t2: f64, t: f64, rho: f64) -> Result<f64> {
    decay_factor(t2, t, rho, "T2")
}

/// `C = g0² / (κ γ0)`.
pub fn cooperativity(g0: f64, kappa: f64, gamma0: f64) -> Result<f64> {
    if kappa == 0.0 || gamma0 == 0.0 {
        return Err(Error::arg("cooperativity needs nonzero κ and γ0"));
    }
    if kappa < 0.0 || gamma0 < 0.0 || g0 < 0.0 {
        return Err(Error::arg("cooperativity needs nonnegative rates"));
    }
    Ok(g0 * g0 / (kappa * gamma0))
}

/// `1/g^τ + l/v`, with `g` an ordinary frequency in Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyModel {
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_velocity")]
    pub group_velocity_km_s: f64,
}

fn default_tau() -> f64 {
    1.1
}
fn default_velocity() -> f64 {
    2e5
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self { tau: default_tau(), group_velocity_km_s: default_velocity() }
    }
}

impl LatencyModel {
    pub fn latency_seconds(&self, g_hz: f64, length_um: f64) -> Result<f64> {
        latency(self, g_hz, length_um)
    }

    pub fn latency_ns(&self, g_hz: f64, length_um: f64) -> Result<f64> {
        Ok(latency(self, g_hz, length_um)? * 1e9)
    }
}

/// Link latency in seconds.
pub fn latency(model: &LatencyModel, g_hz: f64, length_um: f64) -> Result<f64> {
    if g_hz.is_nan() || g_hz <= 0.0 {
        return Err(Error::arg(format!("g must be positive, got {g_hz}")));
    }
    if length_um.is_nan() || length_um < 0.0 {
        return Err(Error::arg(format!("length must be ≥ 0, got {length_um}")));
    }
    if !(model.tau > 0.0 && model.group_velocity_km_s > 0.0) {
        return Err(Error::arg("latency model needs τ > 0 and v > 0"));
    }
    let km = length_um * 1e-9;
    Ok(g_hz.powf(-model.tau) + km / model.group_velocity_km_s)
}

/// `F(C) = λ1 C^λ2 + λ3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl PowerFit {
    /// Published fit of entanglement fidelity against cooperativity.
    pub const REFERENCE_ENTANGLEMENT: PowerFit = PowerFit { lambda1: 1.471, lambda2: 0.054, lambda3: -0.894 };
    /// Published fit of random-state fidelity against cooperativity.
    pub const REFERENCE_RANDOM_STATE: PowerFit = PowerFit { lambda1: 0.981, lambda2: 0.054, lambda3: -0.263 };

    pub fn eval(&self, c: f64) -> Result<f64> {
        eval_power_fit(self, c)
    }
}

pub fn eval_power_fit(fit: &PowerFit, c: f64) -> Result<f64> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::arg(format!("cooperativity must be positive, got {c}")));
    }
    Ok(fit.lambda1 * c.powf(fit.lambda2) + fit.lambda3)
}
