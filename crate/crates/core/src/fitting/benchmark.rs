use super::BenchmarkCurve;
use crate::channels::{ChannelModel, DecoherenceModel, LatencyModel};
use crate::error::{Error, Result};
use crate::lindblad::{
    composed_node_processes, hop_process, optimize_stirap, HopOptions, PhysicalParams, PulseSchedule,
};
use crate::netsim::{exact_node_processes, ChainTopology, Pacing, TransferProtocol};
use crate::par::Execution;
use crate::quantum::QubitProcess;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Haar-averaged state fidelity.
    #[default]
    Average,
    Entanglement,
}

impl Metric {
    pub fn of(self, p: &QubitProcess) -> f64 {
        let f = match self {
            Metric::Average => p.average_fidelity(),
            Metric::Entanglement => p.entanglement_fidelity(),
        };
        f.clamp(0.0, 1.0)
    }
}

/// Pulse used by every hop of an engine sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepPulse {
    /// Constant coupling at `g0`, switched off at the fidelity peak.
    #[default]
    Constant,
    /// Optimized Gaussian STIRAP pair, optionally bounded in duration (µs).
    OptimizedStirap { max_duration: Option<f64> },
}

impl SweepPulse {
    pub fn schedule(&self, params: &PhysicalParams) -> Result<PulseSchedule> {
        Ok(match *self {
            SweepPulse::Constant => PulseSchedule::constant(params.g0),
            SweepPulse::OptimizedStirap { max_duration } => {
                PulseSchedule::GaussianStirap(optimize_stirap(params, max_duration)?.pulse)
            }
        })
    }
}

/// Closed-form network settings for a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NetsimModel {
    pub channel: ChannelModel,
    pub decoherence: DecoherenceModel,
    pub latency: LatencyModel,
    pub pacing: Pacing,
}

fn check_sweep(xs: &[f64], n_nodes: usize) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::arg("sweep has no points"));
    }
    if n_nodes < 2 {
        return Err(Error::arg("a chain needs at least two nodes"));
    }
    Ok(())
}

fn assemble(variable: &str, xs: &[f64], n_nodes: usize, rows: Vec<Vec<f64>>) -> Result<BenchmarkCurve> {
    let nodes: Vec<usize> = (2..=n_nodes).collect();
    let values = (0..nodes.len()).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    BenchmarkCurve::new(variable, xs.to_vec(), nodes, values)
}

/// Engine fidelity at nodes `2..=n_nodes` for identical back-to-back hops.
pub fn engine_chain_curve<F>(
    variable: &str,
    xs: &[f64],
    n_nodes: usize,
    metric: Metric,
    pulse: SweepPulse,
    opts: &HopOptions,
    params_at: F,
) -> Result<BenchmarkCurve>
where
    F: Fn(f64) -> Result<PhysicalParams> + Sync + Send,
{
    check_sweep(xs, n_nodes)?;
    let rows = Execution::default().try_map(xs.len(), |i| {
        let p = params_at(xs[i])?;
        let (hop, _) = hop_process(&p, &pulse.schedule(&p)?, opts)?;
        Ok(composed_node_processes(&hop, n_nodes)[1..].iter().map(|q| metric.of(q)).collect())
    })?;
    assemble(variable, xs, n_nodes, rows)
}

/// Exact closed-form network fidelity at nodes `2..=n_nodes`.
pub fn netsim_chain_curve<F>(
    variable: &str,
    xs: &[f64],
    n_nodes: usize,
    metric: Metric,
    model: &NetsimModel,
    params_at: F,
) -> Result<BenchmarkCurve>
where
    F: Fn(f64) -> Result<PhysicalParams>,
{
    check_sweep(xs, n_nodes)?;
    let rows = xs
        .iter()
        .map(|&x| {
            let p = params_at(x)?;
            let topo = ChainTopology::uniform(n_nodes, p, model.channel, model.decoherence, model.latency)?;
            let proto = TransferProtocol::end_to_end(&topo).with_pacing(model.pacing);
            Ok(exact_node_processes(&topo, &proto)?[1..].iter().map(|q| metric.of(q)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    assemble(variable, xs, n_nodes, rows)
}

pub fn lin_space(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::arg("sweep needs at least one point"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect())
}

pub fn log_space(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::arg("log sweep needs positive endpoints"));
    }
    let exps = lin_space(a.log10(), b.log10(), n)?;
    Ok(exps
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if i == 0 {
                a
            } else if i == n - 1 {
                b
            } else {
                10f64.powf(*e)
            }
        })
        .collect())
}
