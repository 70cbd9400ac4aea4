//! Calibration of the closed-form network models against engine curves.

mod benchmark;
mod io;
mod power;

pub use benchmark::{engine_chain_curve, lin_space, log_space, netsim_chain_curve, Metric, NetsimModel, SweepPulse};
pub use io::{compare_summary, curve_from_records, fit_summary, write_compare_csv, write_curve_csv, write_fit_csv};
pub use power::{fit_power_exponential, PowerFitResult, LAMBDA2_GRID};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Pointwise error above which a model is flagged as diverging.
pub const DIVERGENCE_THRESHOLD: f64 = 0.05;

/// `√(mean (a_i - b_i)²)`.
pub fn rmse(analytical: &[f64], model: &[f64]) -> Result<f64> {
    if analytical.len() != model.len() {
        return Err(Error::arg(format!("series lengths differ: {} vs {}", analytical.len(), model.len())));
    }
    if analytical.is_empty() {
        return Err(Error::arg("rmse of empty series"));
    }
    let s: f64 = analytical.iter().zip(model).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((s / analytical.len() as f64).sqrt())
}

/// Fidelity per node over a sweep. `values[k][i]` belongs to `nodes[k]` at `x[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkCurve {
    pub variable: String,
    pub x: Vec<f64>,
    pub nodes: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

impl BenchmarkCurve {
    pub fn new(variable: impl Into<String>, x: Vec<f64>, nodes: Vec<usize>, values: Vec<Vec<f64>>) -> Result<Self> {
        if x.is_empty() || nodes.is_empty() {
            return Err(Error::arg("benchmark curve is empty"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::arg("sweep points must be strictly increasing"));
        }
        if values.len() != nodes.len() || values.iter().any(|v| v.len() != x.len()) {
            return Err(Error::arg("benchmark values do not match nodes × points"));
        }
        if values.iter().flatten().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::arg("benchmark fidelities must lie in [0,1]"));
        }
        Ok(Self { variable: variable.into(), x, nodes, values })
    }

    pub fn node_series(&self, node: usize) -> Option<&[f64]> {
        self.nodes.iter().position(|&n| n == node).map(|k| self.values[k].as_slice())
    }

    fn check_matches(&self, other: &BenchmarkCurve) -> Result<()> {
        if self.nodes != other.nodes {
            return Err(Error::arg(format!("node sets differ: {:?} vs {:?}", self.nodes, other.nodes)));
        }
        let same_x = self.x.len() == other.x.len()
            && self.x.iter().zip(&other.x).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
        if !same_x {
            return Err(Error::arg("sweeps have different abscissae"));
        }
        Ok(())
    }

    /// RMSE per node against `model`.
    pub fn node_rmse(&self, model: &BenchmarkCurve) -> Result<Vec<f64>> {
        self.check_matches(model)?;
        self.values.iter().zip(&model.values).map(|(a, b)| rmse(a, b)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub parameter: String,
    pub candidates: Vec<f64>,
    pub nodes: Vec<usize>,
    /// `node_rmse[c][k]`: candidate `c`, node `nodes[k]`.
    pub node_rmse: Vec<Vec<f64>>,
    pub mean_rmse: Vec<f64>,
    pub selected_index: usize,
    pub selected: f64,
}

/// Evaluates every candidate and selects the smallest mean RMSE over nodes.
/// Near-ties (within 1e-12) go to the smaller candidate.
pub fn grid_fit<F>(parameter: &str, candidates: &[f64], benchmark: &BenchmarkCurve, model: F) -> Result<FitReport>
where
    F: Fn(f64) -> Result<BenchmarkCurve> + Sync + Send,
{
    grid_fit_with(Execution::default(), parameter, candidates, benchmark, model)
}

pub fn grid_fit_with<F>(
    exec: Execution,
    parameter: &str,
    candidates: &[f64],
    benchmark: &BenchmarkCurve,
    model: F,
) -> Result<FitReport>
where
    F: Fn(f64) -> Result<BenchmarkCurve> + Sync + Send,
{
    if candidates.is_empty() {
        return Err(Error::arg("grid fit needs at least one candidate"));
    }
    let node_rmse = exec.try_map(candidates.len(), |i| benchmark.node_rmse(&model(candidates[i])?))?;
    let mean_rmse: Vec<f64> = node_rmse.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect();
    let mut best = 0;
    for i in 1..candidates.len() {
        let (m, b) = (mean_rmse[i], mean_rmse[best]);
        if m < b - 1e-12 || ((m - b).abs() <= 1e-12 && candidates[i] < candidates[best]) {
            best = i;
        }
    }
    Ok(FitReport {
        parameter: parameter.to_owned(),
        candidates: candidates.to_vec(),
        nodes: benchmark.nodes.clone(),
        node_rmse,
        mean_rmse,
        selected_index: best,
        selected: candidates[best],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub variable: String,
    pub nodes: Vec<usize>,
    pub node_rmse: Vec<f64>,
    pub max_error: Vec<f64>,
    /// First sweep value where a node's pointwise error exceeds the threshold.
    pub node_divergence: Vec<Option<f64>>,
    /// Earliest divergence over all nodes.
    pub divergence: Option<f64>,
}

pub fn compare_report(analytical: &BenchmarkCurve, model: &BenchmarkCurve) -> Result<CompareReport> {
    let node_rmse = analytical.node_rmse(model)?;
    let mut max_error = vec![];
    let mut node_divergence = vec![];
    for (a, m) in analytical.values.iter().zip(&model.values) {
        let errs: Vec<f64> = a.iter().zip(m).map(|(a, m)| (a - m).abs()).collect();
        max_error.push(errs.iter().cloned().fold(0.0, f64::max));
        node_divergence.push(errs.iter().position(|&e| e > DIVERGENCE_THRESHOLD).map(|i| analytical.x[i]));
    }
    let divergence = node_divergence.iter().flatten().cloned().reduce(f64::min);
    Ok(CompareReport {
        variable: analytical.variable.clone(),
        nodes: analytical.nodes.clone(),
        node_rmse,
        max_error,
        node_divergence,
        divergence,
    })
}
