use crate::error::{Error, Result};
use crate::lindblad::{simulate_hop_towards, HopOptions, PhysicalParams, PulseSchedule};
use crate::quantum::{
    amplitude_damping_kraus, apply_channel, average_fidelity_mc, phase_damping_kraus, DensityMatrix,
    MonteCarloEstimate, PureState, QubitProcess,
};

#[derive(Clone, Debug)]
pub struct NodeRecord {
    /// 1-based node index; node 1 holds the prepared state.
    pub node: usize,
    /// `(absolute time, fidelity)` during the hop that delivered the state.
    pub trajectory: Vec<(f64, f64)>,
    pub completion_time: f64,
    pub fidelity: f64,
    pub state: DensityMatrix,
}

#[derive(Clone, Debug)]
pub struct ChainResult {
    pub per_node: Vec<NodeRecord>,
    pub hop_interval: f64,
    pub with_ancilla: bool,
}

impl ChainResult {
    pub fn fidelities(&self) -> Vec<f64> {
        self.per_node.iter().map(|n| n.fidelity).collect()
    }

    /// Channel from node 1 to `node`, for ancilla-assisted chains.
    pub fn process_to(&self, node: usize) -> Result<QubitProcess> {
        if !self.with_ancilla {
            return Err(Error::arg("node processes need an ancilla-assisted chain"));
        }
        let rec = self
            .per_node
            .iter()
            .find(|n| n.node == node)
            .ok_or_else(|| Error::arg(format!("no node {node} in chain")))?;
        QubitProcess::from_choi(&rec.state)
    }

    /// Exact Haar-averaged fidelity at `node` via `(2 F_e + 1) / 3`.
    pub fn average_fidelity(&self, node: usize) -> Result<f64> {
        Ok(self.process_to(node)?.average_fidelity())
    }

    /// Monte-Carlo estimate of the same average.
    pub fn average_fidelity_mc(&self, node: usize, n_samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
        let p = self.process_to(node)?;
        average_fidelity_mc(|rho| p.apply(rho), n_samples, seed)
    }
}

/// Serial state transfer through `n_nodes` chips. Each hop starts with a fresh
/// vacuum cavity and an empty receiver; hops fire every `hop_interval`.
/// A two-qubit `initial` is treated as (ancilla, qubit).
pub fn simulate_chain(
    initial: &PureState,
    n_nodes: usize,
    links: &[PhysicalParams],
    schedule: &PulseSchedule,
    hop_interval: f64,
    opts: &HopOptions,
) -> Result<ChainResult> {
    if n_nodes < 2 {
        return Err(Error::arg("a chain needs at least 2 nodes"));
    }
    let hops = n_nodes - 1;
    if links.len() != 1 && links.len() != hops {
        return Err(Error::arg(format!("expected 1 or {hops} link parameter sets, got {}", links.len())));
    }
    if !(hop_interval > 0.0) {
        return Err(Error::arg("hop interval must be > 0"));
    }
    let with_ancilla = match initial.layout().dims() {
        [2] => false,
        [2, 2] => true,
        d => return Err(Error::arg(format!("chain input must be a qubit or (ancilla, qubit), got {d:?}"))),
    };
    let target = DensityMatrix::from_pure(initial);
    let mut state = target.clone();
    let mut per_node = vec![NodeRecord {
        node: 1,
        trajectory: vec![(0.0, 1.0)],
        completion_time: 0.0,
        fidelity: target.overlap(&state)?,
        state: state.clone(),
    }];

    for k in 0..hops {
        let params = &links[if links.len() == 1 { 0 } else { k }];
        let res = simulate_hop_towards(&state, &target, params, schedule, with_ancilla, opts)?;
        if res.end_time > hop_interval * (1.0 + 1e-12) {
            return Err(Error::Protocol(format!(
                "hop {} lasts {:.4} us, longer than the {hop_interval} us interval",
                k + 1,
                res.end_time
            )));
        }
        let start = k as f64 * hop_interval;
        per_node.push(NodeRecord {
            node: k + 2,
            trajectory: res.trajectory.iter().map(|&(t, f)| (start + t, f)).collect(),
            completion_time: start + res.end_time,
            fidelity: res.fidelity,
            state: res.final_state.clone(),
        });
        state = res.final_state;
        let idle = hop_interval - res.end_time;
        if opts.coherence && idle > 0.0 && k + 1 < hops {
            state = idle_decay(&state, params, idle)?;
        }
    }
    Ok(ChainResult { per_node, hop_interval, with_ancilla })
}

/// Exact T1/T2 evolution of an uncoupled qubit over `t`.
fn idle_decay(state: &DensityMatrix, params: &PhysicalParams, t: f64) -> Result<DensityMatrix> {
    let last = state.layout().len() - 1;
    let gamma = -(-t / params.t1_us).exp_m1();
    let deph = (-t * params.pure_dephasing_rate()?).exp();
    let s = apply_channel(state, &amplitude_damping_kraus(gamma)?, last)?;
    apply_channel(&s, &phase_damping_kraus(deph)?, last)
}

/// Node-by-node channels for identical hops: node `k + 1` sees `hop^k`.
pub fn composed_node_processes(hop: &QubitProcess, n_nodes: usize) -> Vec<QubitProcess> {
    let mut out = Vec::with_capacity(n_nodes);
    let mut acc = QubitProcess::identity();
    out.push(acc.clone());
    for _ in 1..n_nodes {
        acc = acc.then(hop);
        out.push(acc.clone());
    }
    out
}
