//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints its verdict; exits nonzero if any criterion fails.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::process::ExitCode;
use std::time::Instant;

use cavnet::channels::{ChannelModel, DecoherenceModel, LatencyModel, PowerFit};
use cavnet::fitting::*;
use cavnet::lindblad::*;
use cavnet::netsim::{run_chain_samples, write_records, ChainTopology, InitialState, Pacing, TransferProtocol};
use cavnet::par::Execution;
use cavnet::quantum::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lossless(g: f64) -> PhysicalParams {
    PhysicalParams { g0: g, kappa: 0.0, gamma0: 0.0, ..PhysicalParams::default() }
}

fn population(sys: &HopSystem, rho: &DensityMatrix, digits: &[usize]) -> f64 {
    let i = sys.layout.index_of(digits);
    rho.matrix()[(i, i)].re
}

fn basis(sys: &HopSystem, digits: &[usize]) -> DensityMatrix {
    DensityMatrix::from_pure(&PureState::basis(sys.layout.clone(), sys.layout.index_of(digits)).unwrap())
}

fn channel_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut completeness) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let lambda: f64 = rng.random();
        let gamma: f64 = rng.random();
        let r = rng.random::<f64>() * (lambda * (1.0 - lambda)).sqrt();
        let alpha = Complex64::from_polar(r, rng.random::<f64>() * TAU);
        let rho = DensityMatrix::qubit_from_parts(lambda, alpha).unwrap();
        let ch = amplitude_damping_kraus(gamma).unwrap();
        let out = apply_channel(&rho, &ch, 0).unwrap();
        let s = (1.0 - gamma).sqrt();
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0 - (1.0 - gamma) * lambda, 0.0), alpha * s, alpha.conj() * s, c((1.0 - gamma) * lambda, 0.0)],
        );
        worst = worst.max(max_abs_diff(out.matrix(), &expect));
        completeness = completeness.max(ch.completeness_error());
    }
    check(
        worst <= 1e-12 && completeness <= 1e-10,
        format!("max entry error {worst:.2e} (≤ 1e-12), completeness {completeness:.2e} (≤ 1e-10)"),
    )
}

fn integrator_oracles() -> Outcome {
    let g = 2.0;
    let sys = HopSystem::new(&lossless(g), QubitModel::TwoLevel, false, false, 2).unwrap();
    let sched = PulseSchedule::Constant(ConstantPulse { g_a: g, g_b: 0.0, cutoff: Cutoff::At(3.0) });
    let traj = evolve(&basis(&sys, &[1, 0, 0]), &sys, &sched, (0.0, 3.0), 1e-3, 300).unwrap();
    let jc = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, r)| (population(&sys, r, &[1, 0, 0]) - (g * t).cos().powi(2)).abs())
        .fold(0.0, f64::max);

    let g = 1.5;
    let sys = HopSystem::new(&lossless(g), QubitModel::TwoLevel, false, false, 2).unwrap();
    let t_full = PI / (SQRT_2 * g);
    let traj =
        evolve(&basis(&sys, &[1, 0, 0]), &sys, &PulseSchedule::constant_until(g, t_full), (0.0, t_full), 1e-4, 400)
            .unwrap();
    let transfer = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, r)| (population(&sys, r, &[0, 0, 1]) - (SQRT_2 * g * t / 2.0).sin().powi(4)).abs())
        .fold(0.0, f64::max);
    let full = (population(&sys, traj.states.last().unwrap(), &[0, 0, 1]) - 1.0).abs();

    let kappa = 0.8;
    let p = PhysicalParams { g0: 0.0, kappa, gamma0: 0.0, ..PhysicalParams::default() };
    let sys = HopSystem::new(&p, QubitModel::TwoLevel, false, false, 2).unwrap();
    let sched = PulseSchedule::Constant(ConstantPulse { g_a: 0.0, g_b: 0.0, cutoff: Cutoff::At(4.0) });
    let traj = evolve(&basis(&sys, &[0, 1, 0]), &sys, &sched, (0.0, 4.0), 1e-3, 100).unwrap();
    let decay = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, r)| (population(&sys, r, &[0, 1, 0]) - (-kappa * t).exp()).abs())
        .fold(0.0, f64::max);

    check(
        jc <= 1e-6 && transfer <= 1e-6 && full <= 1e-6 && decay <= 1e-6,
        format!("cos² {jc:.1e}, sin⁴ {transfer:.1e} (full transfer {full:.1e}), e^-κt {decay:.1e}; all ≤ 1e-6"),
    )
}

fn point_values() -> Outcome {
    let opts = HopOptions::default();
    let mut ok = true;
    let mut parts = vec![];
    for ((g, k, y), f_ref) in [((5.8, 0.34, 6.0), 0.54), ((5.8, 6.0, 0.34), 0.76)] {
        let p = PhysicalParams::two_pi_mhz(g, k, y);
        let (_, hop) = hop_process(&p, &PulseSchedule::constant(p.g0), &opts).map_err(|e| e.to_string())?;
        ok &= (hop.peak_fidelity - f_ref).abs() <= 0.02;
        parts.push(format!("κ={k} γ0={y}: F_e {:.4} (ref {f_ref} ± 0.02)", hop.peak_fidelity));
    }
    for (g, gain_ref) in [(1.8, 45.7), (9.0, 28.1)] {
        let p = PhysicalParams::two_pi_mhz(g, 0.34, 6.0);
        let gain = stirap_gain(&p, &opts).map_err(|e| e.to_string())?;
        ok &= (gain.percent_gain - gain_ref).abs() <= 5.0;
        parts.push(format!(
            "g0={g}: STIRAP gain {:.2}% (ref {gain_ref} ± 5; F {:.4} vs {:.4})",
            gain.percent_gain, gain.f_with, gain.f_without
        ));
    }
    check(ok, parts.join("; "))
}

fn five_node_chain() -> Outcome {
    let p = PhysicalParams::two_pi_mhz(100.0, 6.0, 65.0);
    let opt = optimize_stirap(&p, Some(20.0)).map_err(|e| e.to_string())?;
    let chain = simulate_chain(
        &PureState::bell_phi_plus(),
        5,
        &[p],
        &PulseSchedule::GaussianStirap(opt.pulse),
        20.0,
        &HopOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let f = chain.fidelities();
    let (f2, f5) = (f[1], f[4]);
    check(
        (f2 - 0.8711).abs() <= 0.02 && (f5 - 0.6115).abs() <= 0.02 && f5 > f2.powi(4),
        format!("node 2 {f2:.4} (0.8711 ± 0.02), node 5 {f5:.4} (0.6115 ± 0.02), F5 > F2⁴ = {:.4}", f2.powi(4)),
    )
}

fn calibration() -> Outcome {
    let cavity_only =
        |k: f64| Ok(PhysicalParams::new(RateUnit::Hz, 1e5, k, 0.0).with_coherence(f64::INFINITY, f64::INFINITY));
    let xs = log_space(1e3, 1e5, 21).unwrap();
    let bench = engine_chain_curve(
        "kappa_hz",
        &xs,
        5,
        Metric::Average,
        SweepPulse::Constant,
        &HopOptions::default(),
        cavity_only,
    )
    .map_err(|e| e.to_string())?;
    let grid = [0.4, 0.48, 0.49, 0.5, 0.51, 0.52, 0.6];
    let rep = grid_fit("sigma", &grid, &bench, |s| {
        let m = NetsimModel {
            channel: ChannelModel::strong_with(s),
            pacing: Pacing::OnArrival { hold_us: 0.0 },
            ..NetsimModel::default()
        };
        netsim_chain_curve("kappa_hz", &xs, 5, Metric::Average, &m, cavity_only)
    })
    .map_err(|e| e.to_string())?;
    let half = grid.iter().position(|&s| s == 0.5).unwrap();
    let strong_rmse = rep.mean_rmse[half];

    let weak = |k: f64| Ok(PhysicalParams::new(RateUnit::Hz, 1e3, k, 0.0));
    let xs = log_space(1e3, 1e6, 31).unwrap();
    let opts = HopOptions { coherence: true, ..HopOptions::default() };
    let bench = engine_chain_curve("kappa_hz", &xs, 5, Metric::Average, SweepPulse::Constant, &opts, weak)
        .map_err(|e| e.to_string())?;
    let m = NetsimModel { channel: ChannelModel::weak(), ..NetsimModel::default() };
    let model = netsim_chain_curve("kappa_hz", &xs, 5, Metric::Average, &m, weak).map_err(|e| e.to_string())?;
    let weak_rmse = bench.node_rmse(&model).map_err(|e| e.to_string())?;

    check(
        rep.selected == 0.5 && strong_rmse <= 0.01 && weak_rmse.iter().all(|&r| r <= 0.02),
        format!(
            "strong grid selects σ={} (expected 0.5), mean RMSE at σ=0.5 {strong_rmse:.5} (≤ 0.01); weak per-node RMSE {:?} (≤ 0.02)",
            rep.selected,
            weak_rmse.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn divergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut parts = vec![];
    let mut ok = true;
    for _ in 0..3 {
        let g = 10f64.powf(rng.random_range(4.5..5.5));
        let at =
            move |k: f64| Ok(PhysicalParams::new(RateUnit::Hz, g, k, 0.0).with_coherence(f64::INFINITY, f64::INFINITY));
        let xs = log_space(1e-2 * g, 10.0 * g, 31).unwrap();
        let eng =
            engine_chain_curve("kappa_hz", &xs, 5, Metric::Average, SweepPulse::Constant, &HopOptions::default(), at)
                .map_err(|e| e.to_string())?;
        let m = NetsimModel { pacing: Pacing::OnArrival { hold_us: 0.0 }, ..NetsimModel::default() };
        let net = netsim_chain_curve("kappa_hz", &xs, 5, Metric::Average, &m, at).map_err(|e| e.to_string())?;
        let rep = compare_report(&eng, &net).map_err(|e| e.to_string())?;
        let flagged = rep.divergence.is_some_and(|k| k >= g);
        ok &= flagged;
        parts.push(format!("g={g:.3e}: flagged at κ={:?}", rep.divergence.map(|k| format!("{k:.3e}"))));
    }

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = 10f64.powf(rng.random_range(4.0..6.0));
        let at = move |k: f64| Ok(PhysicalParams::new(RateUnit::Hz, g, k, 0.0));
        let xs = [g, 10.0 * g, 100.0 * g];
        let net = netsim_chain_curve("kappa_hz", &xs, 5, Metric::Average, &NetsimModel::default(), at)
            .map_err(|e| e.to_string())?;
        for series in &net.values {
            ok &= series.windows(2).all(|w| w[1] < w[0]);
            worst = worst.max(series[2] - 0.5);
        }
    }
    ok &= worst <= 1e-6;
    parts.push(format!("κ = 100 g gives F - 0.5 ≤ {worst:.1e} on 20 random g, decreasing in κ"));
    check(ok, parts.join("; "))
}

fn latency() -> Outcome {
    let m = LatencyModel::default();
    let ls = log_space(100.0, 1e4, 101).unwrap();
    let lat: Vec<f64> = ls.iter().map(|&l| m.latency_ns(1e5, l).unwrap()).collect();
    let (lo, hi) = (lat[0], lat[100]);
    check(
        (lo - 3162.278).abs() <= 0.002 && (hi - 3162.328).abs() <= 0.002 && lat.windows(2).all(|w| w[1] > w[0]),
        format!("{lo:.5} ns at 100 µm, {hi:.5} ns at 1 cm (3162.278–3162.328 ± 0.002)"),
    )
}

fn random_channel(rng: &mut ChaCha8Rng) -> KrausChannel {
    let g = DMatrix::from_fn(4, 2, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let q = g.qr().q();
    KrausChannel::new(vec![q.view((0, 0), (2, 2)).into_owned(), q.view((2, 0), (2, 2)).into_owned()]).unwrap()
}

fn fidelity_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_z = 0.0f64;
    for i in 0..10 {
        let ch = random_channel(&mut rng);
        let fe: f64 = ch.operators().iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / 4.0;
        let mc = average_fidelity_mc(|rho| apply_channel(rho, &ch, 0), 4000, 100 + i).map_err(|e| e.to_string())?;
        worst_z = worst_z.max((mc.mean - (2.0 * fe + 1.0) / 3.0).abs() / mc.std_error);
    }

    let p = PhysicalParams::new(RateUnit::Hz, 1e5, 2e4, 0.0);
    let topo =
        ChainTopology::uniform(2, p, ChannelModel::strong(), DecoherenceModel::default(), LatencyModel::default())
            .map_err(|e| e.to_string())?;
    let proto = TransferProtocol::end_to_end(&topo);
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let psi = haar_random_state(2, seed).unwrap();
        let recs = run_chain_samples(&topo, &proto, &InitialState::Pure(psi.clone()), 1, 0, Execution::Sequential)
            .map_err(|e| e.to_string())?;
        let (a, b) = (psi.amplitudes()[0], psi.amplitudes()[1]);
        let (mut p11, mut coh) = (b.norm_sqr(), a * b.conj());
        let decay = (-5.0 * 1.0 / p.t1_us).exp();
        p11 *= decay;
        coh *= decay.sqrt() * (-6.0 * 1.0 / p.t2_us).exp();
        let link = (-0.5f64 * 2e4 / 1e5).exp();
        p11 *= link;
        coh *= link.sqrt();
        let f = (1.0 - p11) * a.norm_sqr() + p11 * b.norm_sqr() + 2.0 * (a.conj() * coh * b).re;
        worst = worst.max((recs[1].fidelity - f).abs());
    }
    check(
        worst_z <= 3.0 && worst <= 1e-12,
        format!("MC vs (2F_e+1)/3 worst {worst_z:.2} SE (≤ 3) over 10 channels; netsim 2-node vs composition {worst:.1e} (≤ 1e-12)"),
    )
}

fn power_fit() -> Outcome {
    let truth = PowerFit::REFERENCE_ENTANGLEMENT;
    let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 5.0, 10.0, 20.0, 25.0]
        .iter()
        .map(|&c| (c, truth.lambda1 * c.powf(truth.lambda2) + truth.lambda3))
        .collect();
    let syn = fit_power_exponential(&pts).map_err(|e| e.to_string())?;
    let err = [syn.fit.lambda1 - truth.lambda1, syn.fit.lambda2 - truth.lambda2, syn.fit.lambda3 - truth.lambda3]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()));

    let g0 = 5.8 * TAU;
    let cs = [0.5f64, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0, 25.0];
    let data: Vec<(f64, f64)> = cavnet::par::try_map(cs.len(), |i| {
        let k = g0 / cs[i].sqrt();
        let p = PhysicalParams { g0, kappa: k, gamma0: k, ..PhysicalParams::default() };
        let opt = optimize_stirap(&p, None)?;
        let (_, r) = hop_process(&p, &PulseSchedule::GaussianStirap(opt.pulse), &HopOptions::default())?;
        Ok((cs[i], r.fidelity))
    })
    .map_err(|e| e.to_string())?;
    let eng = fit_power_exponential(&data).map_err(|e| e.to_string())?;
    check(
        err <= 1e-6 && syn.rss <= 1e-12 && eng.rmse <= 0.02,
        format!(
            "synthetic λ error {err:.1e} (≤ 1e-6), rss {:.1e}; engine F(C) fit RMSE {:.4} (≤ 0.02)",
            syn.rss, eng.rmse
        ),
    )
}

fn determinism() -> Outcome {
    let p = PhysicalParams::new(RateUnit::Hz, 1e5, 1e4, 0.0);
    let topo =
        ChainTopology::uniform(5, p, ChannelModel::strong(), DecoherenceModel::default(), LatencyModel::default())
            .map_err(|e| e.to_string())?;
    let proto = TransferProtocol::end_to_end(&topo);
    let csv = |seed: u64, exec: Execution| -> Result<Vec<u8>, String> {
        let recs = run_chain_samples(&topo, &proto, &InitialState::Haar, 200, seed, exec).map_err(|e| e.to_string())?;
        let mut buf = vec![];
        write_records(&mut buf, &recs).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let a = csv(42, Execution::Parallel)?;
    let b = csv(42, Execution::Parallel)?;
    let s = csv(42, Execution::Sequential)?;
    let other = csv(43, Execution::Parallel)?;

    let xs = log_space(1e3, 1e5, 5).unwrap();
    let at = |k: f64| Ok(PhysicalParams::new(RateUnit::Hz, 1e5, k, 0.0));
    let curve = || -> Result<Vec<u8>, String> {
        let c =
            engine_chain_curve("kappa_hz", &xs, 3, Metric::Average, SweepPulse::Constant, &HopOptions::default(), at)
                .map_err(|e| e.to_string())?;
        let mut buf = vec![];
        write_curve_csv(&mut buf, &c).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let (c1, c2) = (curve()?, curve()?);
    check(
        a == b && a == s && a != other && c1 == c2,
        format!(
            "netsim records ({} bytes) and engine sweep CSV identical on replay and across execution modes",
            a.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("channel algebra", channel_algebra),
        ("integrator oracles", integrator_oracles),
        ("single-hop point values", point_values),
        ("five-node chain", five_node_chain),
        ("model calibration", calibration),
        ("divergence behavior", divergence),
        ("latency", latency),
        ("fidelity identities", fidelity_identities),
        ("power-fit recovery", power_fit),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS criterion {}: {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
