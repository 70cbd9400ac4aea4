use cavnet::channels::{ChannelModel, DecoherenceModel, LatencyModel};
use cavnet::fitting::{curve_from_records, netsim_chain_curve, Metric, NetsimModel};
use cavnet::lindblad::{PhysicalParams, RateUnit};
use cavnet::netsim::*;
use cavnet::par::Execution;
use cavnet::quantum::{MonteCarloEstimate, PureState};

fn topology(n: usize, kappa_hz: f64, channel: ChannelModel) -> ChainTopology {
    let p = PhysicalParams::new(RateUnit::Hz, 1e5, kappa_hz, 0.0);
    ChainTopology::uniform(n, p, channel, DecoherenceModel::default(), LatencyModel::default()).unwrap()
}

#[test]
fn haar_sampling_converges_to_exact_average() {
    let topo = topology(5, 3e4, ChannelModel::strong());
    let proto = TransferProtocol::end_to_end(&topo).with_pacing(Pacing::Fixed { interval_us: 20.0 });
    let samples = run_chain_samples(&topo, &proto, &InitialState::Haar, 4000, 9, Execution::default()).unwrap();
    let exact = exact_records(&topo, &proto, 0).unwrap();
    for node in 2..=5 {
        let xs: Vec<f64> = samples.iter().filter(|r| r.node == node).map(|r| r.fidelity).collect();
        let est = MonteCarloEstimate::from_samples(&xs);
        let want = exact[node - 1].fidelity;
        assert!((est.mean - want).abs() <= 3.0 * est.std_error, "node {node}: {} vs {want}", est.mean);
    }
}

#[test]
fn records_round_trip_through_csv() {
    let topo = topology(4, 1e4, ChannelModel::weak());
    let proto = TransferProtocol::end_to_end(&topo);
    let recs = run_chain_samples(&topo, &proto, &InitialState::Haar, 10, 3, Execution::Sequential).unwrap();
    let mut buf = vec![];
    write_records(&mut buf, &recs).unwrap();
    let back = read_records(buf.as_slice()).unwrap();
    assert_eq!(back, recs);
    let mut again = vec![];
    write_records(&mut again, &back).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn sweep_from_records_matches_closed_form_curve() {
    let kappas = [1e3, 1e4, 5e4];
    let mut recs = vec![];
    for (i, &k) in kappas.iter().enumerate() {
        let topo = topology(4, k, ChannelModel::strong());
        recs.extend(exact_records(&topo, &TransferProtocol::end_to_end(&topo), i as u64).unwrap());
    }
    let from_records = curve_from_records(&recs, "kappa_hz").unwrap();
    let at = |k: f64| Ok(PhysicalParams::new(RateUnit::Hz, 1e5, k, 0.0));
    let direct = netsim_chain_curve("kappa_hz", &kappas, 4, Metric::Average, &NetsimModel::default(), at).unwrap();
    assert_eq!(from_records.nodes, direct.nodes);
    for (a, b) in from_records.values.iter().flatten().zip(direct.values.iter().flatten()) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn losses_compound_along_the_chain() {
    let topo = topology(5, 2e4, ChannelModel::strong());
    let proto = TransferProtocol::end_to_end(&topo);
    let recs = run_chain_protocol(&topo, &proto, &InitialState::Pure(PureState::bell_phi_plus()), 1, 0).unwrap();
    let f: Vec<f64> = recs.iter().map(|r| r.fidelity).collect();
    assert_eq!(f[0], 1.0);
    assert!(f.windows(2).all(|w| w[1] < w[0]), "{f:?}");
    let loss = per_hop_loss(&recs).unwrap();
    assert_eq!(loss.len(), 4);
    assert!(loss.iter().all(|&l| l > 0.0));
}

#[test]
fn late_arrival_under_fixed_pacing_is_a_protocol_error() {
    let p = PhysicalParams::new(RateUnit::Hz, 10.0, 1e3, 0.0);
    let topo =
        ChainTopology::uniform(3, p, ChannelModel::strong(), DecoherenceModel::default(), LatencyModel::default())
            .unwrap();
    let proto = TransferProtocol::end_to_end(&topo).with_pacing(Pacing::Fixed { interval_us: 1.0 });
    let r = run_chain_samples(&topo, &proto, &InitialState::Haar, 1, 0, Execution::Sequential);
    assert!(matches!(r, Err(cavnet::Error::Protocol(_))), "{r:?}");
}
