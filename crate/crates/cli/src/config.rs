//! Experiment configuration (JSON). See `docs/config.md` for the schema.

use crate::CliError;
use cavnet::channels::{ChannelModel, DecoherenceModel, LatencyModel};
use cavnet::fitting::{lin_space, log_space, Metric, SweepPulse};
use cavnet::lindblad::{hz_to_rad_per_us, FrameMode, HopOptions, PhysicalParams, PulseSchedule, RateUnit, StirapPulse};
use cavnet::netsim::Pacing;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Hop,
    Chain,
    Sweep,
    Fit,
    Compare,
    Latency,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Hop => "hop",
            Kind::Chain => "chain",
            Kind::Sweep => "sweep",
            Kind::Fit => "fit",
            Kind::Compare => "compare",
            Kind::Latency => "latency",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Lindblad,
    Netsim,
    Both,
}

impl Engine {
    pub fn lindblad(self) -> bool {
        matches!(self, Engine::Lindblad | Engine::Both)
    }

    pub fn netsim(self) -> bool {
        matches!(self, Engine::Netsim | Engine::Both)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Option<Kind>,
    #[serde(default)]
    pub engine: Option<Engine>,
    /// Unit of every rate in `params` and of rate sweep ranges.
    pub rates_unit: RateUnit,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub hop: HopConfig,
    #[serde(default)]
    pub channel: ChannelModel,
    #[serde(default)]
    pub decoherence: DecoherenceModel,
    #[serde(default)]
    pub latency: LatencyModel,
    #[serde(default)]
    pub pacing: Pacing,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub fit: Option<FitConfig>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_nodes() -> usize {
    5
}
fn default_samples() -> usize {
    200
}

/// Physical parameters; unset entries take the reference device defaults.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub g0: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma0: Option<f64>,
    pub t1_us: Option<f64>,
    pub t2_us: Option<f64>,
    pub length_um: Option<f64>,
}

impl ParamsConfig {
    pub fn resolve(&self, unit: RateUnit) -> PhysicalParams {
        let d = PhysicalParams::default();
        let rate = |v: Option<f64>, def: f64| v.map_or(def, |x| unit.to_rad_per_us(x));
        PhysicalParams {
            g0: rate(self.g0, d.g0),
            kappa: rate(self.kappa, d.kappa),
            gamma0: rate(self.gamma0, d.gamma0),
            t1_us: self.t1_us.unwrap_or(d.t1_us),
            t2_us: self.t2_us.unwrap_or(d.t2_us),
            length_um: self.length_um.unwrap_or(d.length_um),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseConfig {
    /// Constant coupling `g0` on both qubits; stops at the fidelity peak
    /// unless `cutoff_us` is given.
    Constant {
        #[serde(default)]
        cutoff_us: Option<f64>,
    },
    /// Gaussian STIRAP pair optimized for the link rates.
    OptimizedStirap {
        #[serde(default)]
        max_duration_us: Option<f64>,
    },
    /// Explicit Gaussian STIRAP pair in units of `g0`.
    Stirap { omega_ratio: f64, width_g0: f64, delay_ratio: f64 },
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig::Constant { cutoff_us: None }
    }
}

impl PulseConfig {
    pub fn schedule(&self, p: &PhysicalParams) -> Result<PulseSchedule, CliError> {
        Ok(match *self {
            PulseConfig::Constant { cutoff_us: None } => PulseSchedule::constant(p.g0),
            PulseConfig::Constant { cutoff_us: Some(t) } => PulseSchedule::constant_until(p.g0, t),
            PulseConfig::OptimizedStirap { max_duration_us } => {
                SweepPulse::OptimizedStirap { max_duration: max_duration_us }.schedule(p)?
            }
            PulseConfig::Stirap { omega_ratio, width_g0, delay_ratio } => {
                let s = StirapPulse::from_shape(p.g0, omega_ratio, width_g0, delay_ratio);
                s.validate()?;
                PulseSchedule::GaussianStirap(s)
            }
        })
    }

    pub fn sweep_pulse(&self) -> Result<SweepPulse, CliError> {
        match *self {
            PulseConfig::Constant { cutoff_us: None } => Ok(SweepPulse::Constant),
            PulseConfig::OptimizedStirap { max_duration_us } => {
                Ok(SweepPulse::OptimizedStirap { max_duration: max_duration_us })
            }
            _ => Err(CliError::Validation(
                "sweeps support `constant` (peak cutoff) and `optimized_stirap` pulses only".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopConfig {
    #[serde(default)]
    pub coherence: bool,
    #[serde(default = "default_frame")]
    pub frame: FrameMode,
    #[serde(default)]
    pub dt_us: Option<f64>,
    #[serde(default = "default_cutoff")]
    pub cavity_cutoff: usize,
}

fn default_frame() -> FrameMode {
    FrameMode::Auto
}
fn default_cutoff() -> usize {
    2
}

impl Default for HopConfig {
    fn default() -> Self {
        Self { coherence: false, frame: default_frame(), dt_us: None, cavity_cutoff: default_cutoff() }
    }
}

impl HopConfig {
    pub fn options(&self) -> HopOptions {
        HopOptions {
            frame: self.frame,
            dt: self.dt_us,
            coherence: self.coherence,
            cavity_cutoff: self.cavity_cutoff,
            ..HopOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    /// Interval between hop triggers in the master-equation chain.
    #[serde(default = "default_interval")]
    pub hop_interval_us: f64,
}

fn default_interval() -> f64 {
    20.0
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { hop_interval_us: default_interval() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    G0,
    Kappa,
    Gamma0,
    T1Us,
    T2Us,
    LengthUm,
}

impl SweepVariable {
    /// Column name; rates are reported in Hz.
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::G0 => "g_hz",
            SweepVariable::Kappa => "kappa_hz",
            SweepVariable::Gamma0 => "gamma0_hz",
            SweepVariable::T1Us => "t1_us",
            SweepVariable::T2Us => "t2_us",
            SweepVariable::LengthUm => "length_um",
        }
    }

    fn is_rate(self) -> bool {
        matches!(self, SweepVariable::G0 | SweepVariable::Kappa | SweepVariable::Gamma0)
    }

    /// Supported range in reporting units.
    fn bounds(self) -> Option<(f64, f64)> {
        match self {
            SweepVariable::Kappa => Some((1e3, 1e6)),
            SweepVariable::G0 => Some((1e4, 1e7)),
            SweepVariable::T1Us => Some((300.0, 1000.0)),
            SweepVariable::T2Us => Some((100.0, 300.0)),
            SweepVariable::LengthUm => Some((100.0, 1e4)),
            SweepVariable::Gamma0 => None,
        }
    }

    /// `base` with this variable set to `x` (reporting units).
    pub fn apply(self, base: &PhysicalParams, x: f64) -> PhysicalParams {
        let mut p = *base;
        match self {
            SweepVariable::G0 => p.g0 = hz_to_rad_per_us(x),
            SweepVariable::Kappa => p.kappa = hz_to_rad_per_us(x),
            SweepVariable::Gamma0 => p.gamma0 = hz_to_rad_per_us(x),
            SweepVariable::T1Us => p.t1_us = x,
            SweepVariable::T2Us => p.t2_us = x,
            SweepVariable::LengthUm => p.length_um = x,
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub scale: Scale,
    /// Endpoints in `rates_unit` for rates, µs or µm otherwise.
    pub range: [f64; 2],
    pub points: usize,
}

impl SweepConfig {
    /// Sweep points in reporting units, after validation.
    pub fn points(&self, unit: RateUnit, allow_out_of_range: bool) -> Result<Vec<f64>, CliError> {
        if self.points == 0 {
            return Err(CliError::Validation("sweep.points must be ≥ 1".into()));
        }
        let to_report = |v: f64| {
            if self.variable.is_rate() {
                cavnet::lindblad::rad_per_us_to_hz(unit.to_rad_per_us(v))
            } else {
                v
            }
        };
        let [a, b] = self.range.map(to_report);
        if !(a.is_finite() && b.is_finite()) || a > b || (a == b && self.points > 1) {
            return Err(CliError::Validation(format!("sweep.range {:?} must be increasing", self.range)));
        }
        if !allow_out_of_range {
            if let Some((lo, hi)) = self.variable.bounds() {
                let tol = 1e-9 * hi;
                if a < lo - tol || b > hi + tol {
                    return Err(CliError::Validation(format!(
                        "sweep of {} over [{a}, {b}] leaves the supported range [{lo}, {hi}]; pass --allow-out-of-range to override",
                        self.variable.column()
                    )));
                }
            }
        }
        let xs = match self.scale {
            Scale::Linear => lin_space(a, b, self.points)?,
            Scale::Log => log_space(a, b, self.points)?,
        };
        Ok(xs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParameter {
    Sigma,
    Delta,
    Epsilon,
    EpsilonT1,
    RhoT2,
}

impl FitParameter {
    pub fn name(self) -> &'static str {
        match self {
            FitParameter::Sigma => "sigma",
            FitParameter::Delta => "delta",
            FitParameter::Epsilon => "epsilon",
            FitParameter::EpsilonT1 => "epsilon_t1",
            FitParameter::RhoT2 => "rho_t2",
        }
    }

    pub fn apply(
        self,
        channel: ChannelModel,
        deco: DecoherenceModel,
        v: f64,
    ) -> Result<(ChannelModel, DecoherenceModel), CliError> {
        let mut deco = deco;
        let channel = match (self, channel) {
            (FitParameter::Sigma, ChannelModel::Strong { .. }) => ChannelModel::Strong { sigma: v },
            (FitParameter::Delta, ChannelModel::Weak { epsilon, .. }) => ChannelModel::Weak { delta: v, epsilon },
            (FitParameter::Epsilon, ChannelModel::Weak { delta, .. }) => ChannelModel::Weak { delta, epsilon: v },
            (FitParameter::EpsilonT1, c) => {
                deco.epsilon_t1 = v;
                c
            }
            (FitParameter::RhoT2, c) => {
                deco.rho_t2 = v;
                c
            }
            (p, c) => {
                return Err(CliError::Validation(format!(
                    "fit parameter `{}` does not belong to the `{}` channel model",
                    p.name(),
                    c.name()
                )))
            }
        };
        channel.validate()?;
        deco.validate()?;
        Ok((channel, deco))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum FitConfig {
    /// Grid search over one model hyperparameter against an engine benchmark
    /// (computed over `sweep`, or read from a record CSV).
    Grid {
        parameter: FitParameter,
        candidates: Vec<f64>,
        #[serde(default)]
        benchmark: Option<PathBuf>,
    },
    /// Power-exponential fit of optimized-STIRAP entanglement fidelity versus
    /// cooperativity, with `κ = γ0 = g0/√C`.
    Power { cooperativities: Vec<f64> },
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn physical(&self) -> Result<PhysicalParams, CliError> {
        let p = self.params.resolve(self.rates_unit);
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self, kind: Kind) -> Result<(), CliError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(CliError::Validation(format!(
                    "config is for `{}` but the `{}` subcommand was run",
                    k.name(),
                    kind.name()
                )));
            }
        }
        if self.nodes < 2 {
            return Err(CliError::Validation("nodes must be ≥ 2".into()));
        }
        if self.n_samples == 0 {
            return Err(CliError::Validation("n_samples must be ≥ 1".into()));
        }
        self.physical()?;
        self.channel.validate()?;
        self.decoherence.validate()?;
        if matches!(kind, Kind::Sweep | Kind::Compare) && self.sweep.is_none() {
            return Err(CliError::Validation(format!("`{}` needs a sweep section", kind.name())));
        }
        match (&self.fit, kind) {
            (None, Kind::Fit) => return Err(CliError::Validation("`fit` needs a fit section".into())),
            (Some(FitConfig::Grid { candidates, benchmark, .. }), Kind::Fit) => {
                if candidates.is_empty() {
                    return Err(CliError::Validation("fit.candidates is empty".into()));
                }
                if self.sweep.is_none() && benchmark.is_none() {
                    return Err(CliError::Validation("grid fit needs a sweep or a benchmark file".into()));
                }
                if self.sweep.is_none() {
                    return Err(CliError::Validation("grid fit needs sweep.variable to read the benchmark".into()));
                }
            }
            (Some(FitConfig::Power { cooperativities }), Kind::Fit) => {
                if cooperativities.len() < 4 || cooperativities.iter().any(|c| !c.is_finite() || *c <= 0.0) {
                    return Err(CliError::Validation("power fit needs ≥ 4 positive cooperativities".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn engine(&self, kind: Kind) -> Engine {
        self.engine.unwrap_or(match kind {
            Kind::Hop => Engine::Lindblad,
            Kind::Latency => Engine::Netsim,
            _ => Engine::Both,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::parse(s)
    }

    #[test]
    fn minimal_config_uses_reference_defaults() {
        let c = parse(r#"{"schema_version": 1, "rates_unit": "hz"}"#).unwrap();
        let p = c.physical().unwrap();
        assert!((p.g_hz() - 1e5).abs() < 1e-6);
        assert!((p.kappa_hz() - 1e4).abs() < 1e-6);
        assert_eq!((p.t1_us, p.t2_us, p.length_um), (291.99, 183.9, 250.0));
        assert_eq!(c.nodes, 5);
        assert_eq!(c.n_samples, 200);
    }

    #[test]
    fn rates_unit_is_mandatory_and_typos_fail() {
        assert!(matches!(parse(r#"{"schema_version": 1}"#), Err(CliError::Validation(_))));
        assert!(parse(r#"{"schema_version": 1, "rates_unit": "hz", "sede": 3}"#).is_err());
        assert!(parse(r#"{"schema_version": 1, "rates_unit": "hz", "params": {"kapa": 3}}"#).is_err());
        assert!(parse(r#"{"schema_version": 2, "rates_unit": "hz"}"#).is_err());
    }

    #[test]
    fn two_pi_mhz_rates() {
        let c = parse(r#"{"schema_version": 1, "rates_unit": "two_pi_mhz", "params": {"g0": 5.8}}"#).unwrap();
        assert!((c.physical().unwrap().g0 - 5.8 * std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn sweep_points_validation() {
        let s = SweepConfig { variable: SweepVariable::Kappa, scale: Scale::Log, range: [1e3, 1e6], points: 0 };
        assert!(s.points(RateUnit::Hz, false).is_err());
        let s = SweepConfig { points: 4, ..s };
        assert_eq!(s.points(RateUnit::Hz, false).unwrap().len(), 4);
        let wide = SweepConfig { range: [1e2, 1e6], ..s };
        let err = wide.points(RateUnit::Hz, false).unwrap_err();
        assert!(err.to_string().contains("supported range [1000, 1000000]"), "{err}");
        assert!(wide.points(RateUnit::Hz, true).is_ok());
        let t1 = SweepConfig { variable: SweepVariable::T1Us, scale: Scale::Linear, range: [291.99, 500.0], points: 3 };
        assert!(t1.points(RateUnit::Hz, false).is_err());
    }

    #[test]
    fn fit_parameter_must_match_model() {
        let d = DecoherenceModel::default();
        assert!(FitParameter::Sigma.apply(ChannelModel::weak(), d, 0.5).is_err());
        assert_eq!(
            FitParameter::Delta.apply(ChannelModel::weak(), d, 7.0).unwrap().0,
            ChannelModel::Weak { delta: 7.0, epsilon: 1.0 }
        );
        assert_eq!(FitParameter::RhoT2.apply(ChannelModel::strong(), d, 3.0).unwrap().1.rho_t2, 3.0);
    }

    #[test]
    fn subcommand_must_match_kind() {
        let c = parse(r#"{"schema_version": 1, "rates_unit": "hz", "kind": "hop"}"#).unwrap();
        assert!(c.validate(Kind::Hop).is_ok());
        assert!(c.validate(Kind::Chain).is_err());
        assert!(c.validate(Kind::Sweep).is_err());
    }
}
