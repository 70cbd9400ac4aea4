use super::{average_by_node, CavityLink, EventQueue, NetworkNode, SimRecord};
use crate::channels::{ChannelModel, DecoherenceModel, LatencyModel};
use crate::error::{Error, Result};
use crate::lindblad::PhysicalParams;
use crate::par::Execution;
use crate::quantum::fidelity::sample_rng;
use crate::quantum::{haar_random_state_from, state_fidelity, DensityMatrix, HilbertLayout, PureState, QubitProcess};
use serde::{Deserialize, Serialize};

/// Linear chain of nodes `0..n` with links between neighbours.
#[derive(Clone, Debug)]
pub struct ChainTopology {
    nodes: Vec<NetworkNode>,
    links: Vec<CavityLink>,
}

impl ChainTopology {
    pub fn new(nodes: Vec<NetworkNode>, links: Vec<CavityLink>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::arg("a chain needs at least two nodes"));
        }
        if let Some((i, n)) = nodes.iter().enumerate().find(|(i, n)| n.id != *i) {
            return Err(Error::arg(format!("node at position {i} has id {}", n.id)));
        }
        if links.len() != nodes.len() - 1 {
            return Err(Error::arg(format!(
                "{} nodes need {} links, got {}",
                nodes.len(),
                nodes.len() - 1,
                links.len()
            )));
        }
        for (i, l) in links.iter().enumerate() {
            if (l.from.min(l.to), l.from.max(l.to)) != (i, i + 1) {
                return Err(Error::arg(format!("link {i} joins {} and {}, expected {i} and {}", l.from, l.to, i + 1)));
            }
        }
        for n in &nodes {
            n.decoherence.validate()?;
        }
        Ok(Self { nodes, links })
    }

    /// `n_nodes` identical nodes joined by identical links.
    pub fn uniform(
        n_nodes: usize,
        params: PhysicalParams,
        channel: ChannelModel,
        decoherence: DecoherenceModel,
        latency: LatencyModel,
    ) -> Result<Self> {
        let nodes = (0..n_nodes).map(|i| NetworkNode::new(i, decoherence, params.t1_us, params.t2_us)).collect();
        let links = (1..n_nodes).map(|i| CavityLink::new(i - 1, i, params, channel, latency)).collect::<Result<_>>()?;
        Self::new(nodes, links)
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[CavityLink] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn link_between(&self, a: usize, b: usize) -> Option<&CavityLink> {
        self.links.get(a.min(b)).filter(|_| a.abs_diff(b) == 1)
    }
}

/// When each hop is triggered.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pacing {
    /// Each node holds the state for `hold_us` after it arrives, then sends.
    OnArrival { hold_us: f64 },
    /// Hop `k` (1-based) fires at `k · interval_us` after preparation.
    Fixed { interval_us: f64 },
}

impl Default for Pacing {
    fn default() -> Self {
        Pacing::OnArrival { hold_us: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferProtocol {
    pub route: Vec<usize>,
    pub pacing: Pacing,
}

impl TransferProtocol {
    /// First node to last node with default pacing.
    pub fn end_to_end(topology: &ChainTopology) -> Self {
        Self { route: (0..topology.len()).collect(), pacing: Pacing::default() }
    }

    pub fn with_pacing(mut self, pacing: Pacing) -> Self {
        self.pacing = pacing;
        self
    }

    pub fn validate(&self, topology: &ChainTopology) -> Result<()> {
        if self.route.len() < 2 {
            return Err(Error::arg("route needs at least two nodes"));
        }
        if let Some(&n) = self.route.iter().find(|&&n| n >= topology.len()) {
            return Err(Error::arg(format!("route node {n} is not in the chain")));
        }
        let up = self.route[1] > self.route[0];
        for w in self.route.windows(2) {
            if w[0].abs_diff(w[1]) != 1 || (w[1] > w[0]) != up {
                return Err(Error::arg(format!("route step {} -> {} is not a contiguous chain path", w[0], w[1])));
            }
        }
        match self.pacing {
            Pacing::OnArrival { hold_us } if !(hold_us >= 0.0 && hold_us.is_finite()) => {
                Err(Error::arg(format!("hold time must be ≥ 0, got {hold_us}")))
            }
            Pacing::Fixed { interval_us } if !(interval_us > 0.0 && interval_us.is_finite()) => {
                Err(Error::arg(format!("hop interval must be > 0, got {interval_us}")))
            }
            _ => Ok(()),
        }
    }

    /// Send time for the hop leaving route position `pos`, given the time the
    /// state arrived there.
    fn send_time(&self, pos: usize, arrived_ns: f64) -> Result<f64> {
        match self.pacing {
            Pacing::OnArrival { hold_us } => Ok(arrived_ns + hold_us * 1e3),
            Pacing::Fixed { interval_us } => {
                let slot = (pos + 1) as f64 * interval_us * 1e3;
                if arrived_ns > slot {
                    return Err(Error::Protocol(format!(
                        "state reaches route position {pos} at {arrived_ns} ns, after its send slot at {slot} ns"
                    )));
                }
                Ok(slot)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum InitialState {
    /// A qubit, or an (ancilla, qubit) pair whose ancilla never moves.
    Pure(PureState),
    /// A fresh Haar-random qubit per sample.
    Haar,
}

enum Event {
    Send { pos: usize },
    Arrive { pos: usize, state: DensityMatrix },
}

fn record_for(link: &CavityLink, run_id: u64, node: usize, arrival_ns: f64, fidelity: f64, seed: u64) -> SimRecord {
    let (sigma, delta, epsilon) = match link.channel {
        ChannelModel::Strong { sigma } => (Some(sigma), None, None),
        ChannelModel::Weak { delta, epsilon } => (None, Some(delta), Some(epsilon)),
    };
    SimRecord {
        run_id,
        node,
        arrival_ns,
        fidelity,
        g_hz: link.params.g_hz(),
        kappa_hz: link.params.kappa_hz(),
        t1_us: link.params.t1_us,
        t2_us: link.params.t2_us,
        length_um: link.params.length_um,
        model: link.channel.name().to_owned(),
        sigma,
        delta,
        epsilon,
        seed,
    }
}

fn run_single(
    topology: &ChainTopology,
    protocol: &TransferProtocol,
    target: &PureState,
    run_id: u64,
    seed: u64,
) -> Result<Vec<SimRecord>> {
    let route = &protocol.route;
    let mut nodes = topology.nodes.clone();
    let mut records = Vec::with_capacity(route.len());
    let mut queue = EventQueue::new();
    let first_link = topology.link_between(route[0], route[1]).expect("validated route");
    let rho0 = DensityMatrix::from_pure(target);
    records.push(record_for(first_link, run_id, 1, 0.0, state_fidelity(target, &rho0)?, seed));
    nodes[route[0]].store(rho0, 0.0)?;
    queue.schedule(Event::Send { pos: 0 }, protocol.send_time(0, 0.0)?)?;

    queue.run_until(f64::INFINITY, |q, ev| {
        let now = q.now();
        match ev {
            Event::Send { pos } => {
                let node = &mut nodes[route[pos]];
                let idle = now - node.memory().expect("stored before send").last_touched_ns;
                node.apply_memory_noise(idle)?;
                let mem = node.take()?;
                let link = topology.link_between(route[pos], route[pos + 1]).expect("validated route");
                let (state, at) = link.transmit(&mem.state, now)?;
                q.schedule(Event::Arrive { pos: pos + 1, state }, at)
            }
            Event::Arrive { pos, state } => {
                let link = topology.link_between(route[pos - 1], route[pos]).expect("validated route");
                records.push(record_for(link, run_id, pos + 1, now, state_fidelity(target, &state)?, seed));
                nodes[route[pos]].store(state, now)?;
                if pos + 1 < route.len() {
                    q.schedule(Event::Send { pos }, protocol.send_time(pos, now)?)?;
                }
                Ok(())
            }
        }
    })?;
    Ok(records)
}

fn check_target(initial: &InitialState) -> Result<()> {
    if let InitialState::Pure(psi) = initial {
        let dims = psi.layout().dims();
        if !(dims == [2] || dims == [2, 2]) {
            return Err(Error::arg(format!("initial state must be a qubit or ancilla-qubit pair, got dims {dims:?}")));
        }
    }
    Ok(())
}

/// Every per-sample record (`run_id` = sample index), ordered by sample then node.
pub fn run_chain_samples(
    topology: &ChainTopology,
    protocol: &TransferProtocol,
    initial: &InitialState,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SimRecord>> {
    protocol.validate(topology)?;
    check_target(initial)?;
    if n_samples == 0 {
        return Err(Error::arg("n_samples must be ≥ 1"));
    }
    let runs = exec.try_map(n_samples, |i| {
        let target = match initial {
            InitialState::Pure(psi) => psi.clone(),
            InitialState::Haar => haar_random_state_from(HilbertLayout::qubit(), &mut sample_rng(seed, i)),
        };
        run_single(topology, protocol, &target, i as u64, seed)
    })?;
    Ok(runs.into_iter().flatten().collect())
}

/// Sample-averaged fidelity per node.
pub fn run_chain_protocol(
    topology: &ChainTopology,
    protocol: &TransferProtocol,
    initial: &InitialState,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<SimRecord>> {
    let all = run_chain_samples(topology, protocol, initial, n_samples, seed, Execution::default())?;
    Ok(average_by_node(&all))
}

/// `(hold_ns, latency_ns)` for each hop of the route.
fn timeline(topology: &ChainTopology, protocol: &TransferProtocol) -> Result<Vec<(f64, f64)>> {
    let mut arrived = 0.0;
    let mut out = vec![];
    for (pos, w) in protocol.route.windows(2).enumerate() {
        let send = protocol.send_time(pos, arrived)?;
        let lat = topology.link_between(w[0], w[1]).expect("validated route").latency_ns()?;
        out.push((send - arrived, lat));
        arrived = send + lat;
    }
    Ok(out)
}

/// Exact end-to-end process from the source to every route position
/// (index 0 is the identity).
pub fn exact_node_processes(topology: &ChainTopology, protocol: &TransferProtocol) -> Result<Vec<QubitProcess>> {
    protocol.validate(topology)?;
    let mut acc = QubitProcess::identity();
    let mut out = vec![acc.clone()];
    for (w, (hold, _)) in protocol.route.windows(2).zip(timeline(topology, protocol)?) {
        let node = &topology.nodes[w[0]];
        let mem = super::memory_noise_channel(&node.decoherence, node.t1_us, node.t2_us, hold * 1e-3)?;
        let link = topology.link_between(w[0], w[1]).expect("validated route");
        let hop = QubitProcess::from_kraus(&mem.then(&link.kraus()?)?)?;
        acc = acc.then(&hop);
        out.push(acc.clone());
    }
    Ok(out)
}

/// Exact Haar-averaged fidelity per node, in the record schema.
pub fn exact_records(topology: &ChainTopology, protocol: &TransferProtocol, run_id: u64) -> Result<Vec<SimRecord>> {
    let procs = exact_node_processes(topology, protocol)?;
    let times = timeline(topology, protocol)?;
    let mut t = 0.0;
    let mut out = vec![];
    for (pos, p) in procs.iter().enumerate() {
        let link = if pos == 0 {
            topology.link_between(protocol.route[0], protocol.route[1])
        } else {
            t += times[pos - 1].0 + times[pos - 1].1;
            topology.link_between(protocol.route[pos - 1], protocol.route[pos])
        }
        .expect("validated route");
        out.push(record_for(link, run_id, pos + 1, t, p.average_fidelity().clamp(0.0, 1.0), 0));
    }
    Ok(out)
}

/// `(F_k - F_{k+1}) / F_k · 100` for consecutive nodes, using the per-node
/// mean of `records`.
pub fn per_hop_loss(records: &[SimRecord]) -> Result<Vec<f64>> {
    let avg = average_by_node(records);
    if avg.len() < 2 {
        return Err(Error::arg("per-hop loss needs records for at least two nodes"));
    }
    for w in avg.windows(2) {
        if w[1].node != w[0].node + 1 {
            return Err(Error::arg(format!("no records for node {}", w[0].node + 1)));
        }
    }
    avg.windows(2)
        .map(|w| {
            if w[0].fidelity <= 0.0 {
                Err(Error::arg(format!("node {} has zero fidelity", w[0].node)))
            } else {
                Ok((w[0].fidelity - w[1].fidelity) / w[0].fidelity * 100.0)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::RateUnit;
    use crate::quantum::{amplitude_damping_kraus, apply_channel, c};
    use approx::assert_relative_eq;

    fn params(kappa_hz: f64) -> PhysicalParams {
        PhysicalParams::new(RateUnit::Hz, 1e5, kappa_hz, 0.0).with_coherence(291.99, 183.9)
    }

    fn chain(n: usize, kappa_hz: f64) -> ChainTopology {
        ChainTopology::uniform(
            n,
            params(kappa_hz),
            ChannelModel::strong(),
            DecoherenceModel::default(),
            LatencyModel::default(),
        )
        .unwrap()
    }

    fn noiseless(n: usize) -> ChainTopology {
        let p = PhysicalParams::new(RateUnit::Hz, 1e5, 0.0, 0.0).with_coherence(f64::INFINITY, f64::INFINITY);
        ChainTopology::uniform(n, p, ChannelModel::strong(), DecoherenceModel::default(), LatencyModel::default())
            .unwrap()
    }

    fn record(node: usize, f: f64) -> SimRecord {
        let l = &chain(2, 1e4).links[0];
        record_for(l, 0, node, 0.0, f, 0)
    }

    #[test]
    fn noiseless_chain_is_perfect() {
        let topo = noiseless(5);
        let proto = TransferProtocol::end_to_end(&topo);
        let recs = run_chain_protocol(&topo, &proto, &InitialState::Haar, 20, 1).unwrap();
        assert_eq!(recs.len(), 5);
        for r in recs {
            assert_relative_eq!(r.fidelity, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_node_run_matches_direct_composition() {
        let topo = chain(2, 2e4);
        let proto = TransferProtocol::end_to_end(&topo);
        let psi = PureState::qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let recs =
            run_chain_samples(&topo, &proto, &InitialState::Pure(psi.clone()), 1, 0, Execution::Sequential).unwrap();

        let rho = DensityMatrix::from_pure(&psi);
        let mem = crate::netsim::memory_noise_channel(&DecoherenceModel::default(), 291.99, 183.9, 1.0).unwrap();
        let rho = apply_channel(&rho, &mem, 0).unwrap();
        let gamma = 1.0 - (-0.5f64 * 2e4 / 1e5).exp();
        let rho = apply_channel(&rho, &amplitude_damping_kraus(gamma).unwrap(), 0).unwrap();
        assert_relative_eq!(recs[1].fidelity, state_fidelity(&psi, &rho).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn completion_time_is_sum_of_latencies_and_holds() {
        let topo = chain(5, 1e4);
        let lat = topo.links[0].latency_ns().unwrap();
        for (pacing, hold) in [(Pacing::OnArrival { hold_us: 1.0 }, 1000.0), (Pacing::OnArrival { hold_us: 0.0 }, 0.0)]
        {
            let proto = TransferProtocol::end_to_end(&topo).with_pacing(pacing);
            let recs = run_chain_protocol(&topo, &proto, &InitialState::Haar, 3, 2).unwrap();
            assert_eq!(recs[4].arrival_ns, (0..4).fold(0.0, |t, _| t + hold + lat));
        }
        let proto = TransferProtocol::end_to_end(&topo).with_pacing(Pacing::Fixed { interval_us: 20.0 });
        let recs = run_chain_protocol(&topo, &proto, &InitialState::Haar, 3, 2).unwrap();
        assert_relative_eq!(recs[4].arrival_ns, 80_000.0 + lat, epsilon = 1e-9);
        let exact = exact_records(&topo, &proto, 0).unwrap();
        for (a, b) in recs.iter().zip(&exact) {
            assert_relative_eq!(a.arrival_ns, b.arrival_ns, epsilon = 1e-9);
        }
    }

    #[test]
    fn fixed_interval_shorter_than_latency_fails() {
        let topo = chain(3, 1e4);
        let proto = TransferProtocol::end_to_end(&topo).with_pacing(Pacing::Fixed { interval_us: 2.0 });
        let err = run_chain_protocol(&topo, &proto, &InitialState::Haar, 1, 0).unwrap_err();
        assert!(matches!(err, Error::Protocol(_)));
    }

    #[test]
    fn fidelity_non_increasing_per_run() {
        let topo = chain(5, 5e4);
        let proto = TransferProtocol::end_to_end(&topo);
        let recs = run_chain_samples(&topo, &proto, &InitialState::Haar, 50, 9, Execution::default()).unwrap();
        for run in recs.chunks(5) {
            for w in run.windows(2) {
                assert!(w[1].fidelity <= w[0].fidelity + 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact_average() {
        let topo = chain(5, 3e4);
        let proto = TransferProtocol::end_to_end(&topo);
        let all = run_chain_samples(&topo, &proto, &InitialState::Haar, 2000, 5, Execution::default()).unwrap();
        let exact = exact_records(&topo, &proto, 0).unwrap();
        for node in 2..=5 {
            let xs: Vec<f64> = all.iter().filter(|r| r.node == node).map(|r| r.fidelity).collect();
            let est = crate::quantum::MonteCarloEstimate::from_samples(&xs);
            let want = exact[node - 1].fidelity;
            assert!((est.mean - want).abs() < 4.0 * est.std_error, "node {node}: {} vs {want}", est.mean);
        }
    }

    #[test]
    fn ancilla_target_gives_entanglement_fidelity() {
        let topo = chain(4, 3e4);
        let proto = TransferProtocol::end_to_end(&topo);
        let recs = run_chain_protocol(&topo, &proto, &InitialState::Pure(PureState::bell_phi_plus()), 1, 0).unwrap();
        let procs = exact_node_processes(&topo, &proto).unwrap();
        for (r, p) in recs.iter().zip(&procs) {
            assert_relative_eq!(r.fidelity, p.entanglement_fidelity(), epsilon = 1e-12);
        }
    }

    #[test]
    fn deep_loss_tends_to_one_half() {
        let topo = chain(5, 1e7);
        let recs = exact_records(&topo, &TransferProtocol::end_to_end(&topo), 0).unwrap();
        for r in &recs[1..] {
            assert!((r.fidelity - 0.5).abs() < 1e-6, "{}", r.fidelity);
        }
    }

    #[test]
    fn identical_seeds_replay() {
        let topo = chain(5, 2e4);
        let proto = TransferProtocol::end_to_end(&topo);
        let a = run_chain_samples(&topo, &proto, &InitialState::Haar, 64, 77, Execution::Parallel).unwrap();
        let b = run_chain_samples(&topo, &proto, &InitialState::Haar, 64, 77, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_routes_are_rejected() {
        let topo = chain(4, 1e4);
        for route in [vec![0], vec![0, 2], vec![0, 1, 0], vec![1, 2, 7]] {
            let p = TransferProtocol { route, pacing: Pacing::default() };
            assert!(p.validate(&topo).is_err());
        }
        let back = TransferProtocol { route: vec![3, 2, 1], pacing: Pacing::default() };
        assert!(back.validate(&topo).is_ok());
        assert!(run_chain_protocol(&topo, &back, &InitialState::Haar, 0, 0).is_err());
    }

    #[test]
    fn losses_per_hop() {
        let recs = vec![record(1, 1.0), record(2, 0.8), record(3, 0.72)];
        let l = per_hop_loss(&recs).unwrap();
        assert_relative_eq!(l[0], 20.0, epsilon = 1e-12);
        assert_relative_eq!(l[1], 10.0, epsilon = 1e-12);
        let flat = vec![record(1, 0.9), record(2, 0.9)];
        assert_eq!(per_hop_loss(&flat).unwrap(), vec![0.0]);
        assert!(per_hop_loss(&[record(1, 1.0)]).is_err());
        assert!(per_hop_loss(&[record(1, 1.0), record(3, 0.5)]).is_err());
    }

    #[test]
    fn first_hop_loses_most_at_high_kappa() {
        for kappa in [2e5, 5e5, 1e6] {
            let topo = chain(5, kappa);
            let recs = exact_records(&topo, &TransferProtocol::end_to_end(&topo), 0).unwrap();
            let l = per_hop_loss(&recs).unwrap();
            assert!(l[1..].iter().all(|&x| l[0] >= x), "{l:?}");
        }
    }
}
