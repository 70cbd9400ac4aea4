use crate::config::{Engine, ExperimentConfig, FitConfig, Kind, PulseConfig, SweepVariable};
use crate::CliError;
use cavnet::fitting::{
    compare_report, compare_summary, curve_from_records, engine_chain_curve, fit_power_exponential, fit_summary,
    grid_fit, netsim_chain_curve, write_compare_csv, write_curve_csv, write_fit_csv, BenchmarkCurve, Metric,
    NetsimModel, SweepPulse,
};
use cavnet::lindblad::{hop_process, simulate_chain, PhysicalParams};
use cavnet::netsim::{
    per_hop_loss, read_records, run_chain_protocol, write_records, ChainTopology, InitialState, SimRecord,
    TransferProtocol,
};
use cavnet::quantum::PureState;
use serde::Serialize;
use std::path::Path;

/// Files produced by one run, in emission order.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn csv<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    {
        let mut buf = vec![];
        f(&mut buf)?;
        self.files.push((name.to_owned(), buf));
        Ok(())
    }

    fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
        self.csv(name, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            let io = |e: csv::Error| CliError::Other(e.to_string());
            w.write_record(header).map_err(io)?;
            for r in rows {
                w.write_record(r).map_err(io)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_owned(), body.into_bytes()));
    }

    pub fn write(&self, dir: &Path, kind: Kind, cfg: &ExperimentConfig) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        let manifest = Manifest {
            tool: "cavnet",
            version: env!("CARGO_PKG_VERSION"),
            kind: kind.name(),
            seed: cfg.seed,
            outputs: self.files.iter().map(|f| f.0.as_str()).collect(),
            config: cfg,
        };
        let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Other(e.to_string()))?;
        json.push('\n');
        std::fs::write(dir.join("manifest.json"), json)?;
        for (name, bytes) in &self.files {
            if name.ends_with(".txt") {
                print!("{}", String::from_utf8_lossy(bytes));
            }
        }
        println!("wrote {} files to {}", self.files.len() + 1, dir.display());
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    kind: &'static str,
    seed: u64,
    outputs: Vec<&'a str>,
    config: &'a ExperimentConfig,
}

fn records_csv(out: &mut Outputs, name: &str, records: &[SimRecord]) -> Result<(), CliError> {
    out.csv(name, |buf| Ok(write_records(buf, records)?))
}

fn curve_csv(out: &mut Outputs, name: &str, curve: &BenchmarkCurve) -> Result<(), CliError> {
    out.csv(name, |buf| Ok(write_curve_csv(buf, curve)?))
}

fn netsim_model(cfg: &ExperimentConfig) -> NetsimModel {
    NetsimModel { channel: cfg.channel, decoherence: cfg.decoherence, latency: cfg.latency, pacing: cfg.pacing }
}

fn topology(cfg: &ExperimentConfig, p: PhysicalParams, nodes: usize) -> Result<ChainTopology, CliError> {
    Ok(ChainTopology::uniform(nodes, p, cfg.channel, cfg.decoherence, cfg.latency)?)
}

/// Netsim records for one chain. Entanglement metric uses a Bell pair with a
/// stationary ancilla; the average metric samples Haar states.
fn netsim_chain(
    cfg: &ExperimentConfig,
    p: PhysicalParams,
    nodes: usize,
    seed: u64,
) -> Result<Vec<SimRecord>, CliError> {
    let topo = topology(cfg, p, nodes)?;
    let proto = TransferProtocol::end_to_end(&topo).with_pacing(cfg.pacing);
    let recs = match cfg.metric {
        Metric::Average => run_chain_protocol(&topo, &proto, &InitialState::Haar, cfg.n_samples, seed)?,
        Metric::Entanglement => {
            run_chain_protocol(&topo, &proto, &InitialState::Pure(PureState::bell_phi_plus()), 1, seed)?
        }
    };
    Ok(recs.into_iter().map(|r| SimRecord { seed, ..r }).collect())
}

fn num(x: f64) -> String {
    x.to_string()
}

pub fn run(kind: Kind, cfg: &ExperimentConfig, allow_out_of_range: bool) -> Result<Outputs, CliError> {
    let mut out = Outputs::default();
    let engine = cfg.engine(kind);
    let p = cfg.physical()?;
    let sweep = match &cfg.sweep {
        Some(s) if kind != Kind::Hop && kind != Kind::Chain => {
            Some((s.variable, s.points(cfg.rates_unit, allow_out_of_range)?))
        }
        _ => None,
    };
    let at = |var: SweepVariable| {
        move |x: f64| {
            let q = var.apply(&p, x);
            q.validate()?;
            Ok(q)
        }
    };

    match kind {
        Kind::Hop => {
            if engine.lindblad() {
                let (proc, res) = hop_process(&p, &cfg.pulse.schedule(&p)?, &cfg.hop.options())?;
                let rows = res.trajectory.iter().map(|&(t, f)| vec![num(t), num(f)]).collect();
                out.table("hop_trajectory.csv", &["time_us", "entanglement_fidelity"], rows)?;
                let coop = p.cooperativity().map(num).unwrap_or_default();
                let frame = serde_json::to_value(res.frame)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default();
                let model = serde_json::to_value(res.model)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default();
                out.table(
                    "hop_summary.csv",
                    &[
                        "g_hz",
                        "kappa_hz",
                        "gamma0_hz",
                        "cooperativity",
                        "model",
                        "frame",
                        "peak_entanglement_fidelity",
                        "peak_time_us",
                        "end_entanglement_fidelity",
                        "end_time_us",
                        "average_fidelity",
                        "dt_us",
                        "steps",
                    ],
                    vec![vec![
                        num(p.g_hz()),
                        num(p.kappa_hz()),
                        num(cavnet::lindblad::rad_per_us_to_hz(p.gamma0)),
                        coop,
                        model,
                        frame,
                        num(res.peak_fidelity),
                        num(res.peak_time),
                        num(res.fidelity),
                        num(res.end_time),
                        num(proc.average_fidelity()),
                        num(res.dt),
                        res.steps.to_string(),
                    ]],
                )?;
                out.text(
                    "hop.txt",
                    format!(
                        "hop: peak entanglement fidelity {:.4} at {:.4} us, average fidelity {:.4}\n",
                        res.peak_fidelity,
                        res.peak_time,
                        proc.average_fidelity()
                    ),
                );
            }
            if engine.netsim() {
                records_csv(&mut out, "hop_netsim.csv", &netsim_chain(cfg, p, 2, cfg.seed)?)?;
            }
        }
        Kind::Chain => {
            if engine.lindblad() {
                let res = simulate_chain(
                    &PureState::bell_phi_plus(),
                    cfg.nodes,
                    &[p],
                    &cfg.pulse.schedule(&p)?,
                    cfg.chain.hop_interval_us,
                    &cfg.hop.options(),
                )?;
                let mut rows = vec![];
                let mut summary = String::new();
                for n in &res.per_node {
                    let avg = res.average_fidelity(n.node)?;
                    summary += &format!(
                        "node {}: entanglement fidelity {:.4}, average fidelity {:.4}\n",
                        n.node, n.fidelity, avg
                    );
                    rows.push(vec![n.node.to_string(), num(n.completion_time), num(n.fidelity), num(avg)]);
                }
                out.table(
                    "chain_lindblad.csv",
                    &["node", "completion_us", "entanglement_fidelity", "average_fidelity"],
                    rows,
                )?;
                out.text("chain_lindblad.txt", summary);
            }
            if engine.netsim() {
                let recs = netsim_chain(cfg, p, cfg.nodes, cfg.seed)?;
                let loss = per_hop_loss(&recs)?;
                records_csv(&mut out, "chain_netsim.csv", &recs)?;
                let rows = loss
                    .iter()
                    .enumerate()
                    .map(|(k, l)| vec![(k + 1).to_string(), (k + 1).to_string(), (k + 2).to_string(), num(*l)])
                    .collect();
                out.table("chain_netsim_loss.csv", &["hop", "from_node", "to_node", "loss_percent"], rows)?;
            }
        }
        Kind::Sweep => {
            let (var, xs) = sweep.expect("validated");
            if engine.lindblad() {
                let curve = engine_chain_curve(
                    var.column(),
                    &xs,
                    cfg.nodes,
                    cfg.metric,
                    cfg.pulse.sweep_pulse()?,
                    &cfg.hop.options(),
                    at(var),
                )?;
                curve_csv(&mut out, "sweep_lindblad.csv", &curve)?;
            }
            if engine.netsim() {
                let runs = cavnet::par::try_map(xs.len(), |i| {
                    let recs = netsim_chain(cfg, at(var)(xs[i])?, cfg.nodes, cfg.seed).map_err(|e| match e {
                        CliError::Validation(m) => cavnet::Error::InvalidArgument(m),
                        other => cavnet::Error::Protocol(other.to_string()),
                    })?;
                    Ok(recs.into_iter().map(|r| SimRecord { run_id: i as u64, ..r }).collect::<Vec<_>>())
                })?;
                records_csv(&mut out, "sweep_netsim.csv", &runs.concat())?;
            }
        }
        Kind::Compare => {
            let (var, xs) = sweep.expect("validated");
            let analytical = engine_chain_curve(
                var.column(),
                &xs,
                cfg.nodes,
                cfg.metric,
                cfg.pulse.sweep_pulse()?,
                &cfg.hop.options(),
                at(var),
            )?;
            let model = netsim_chain_curve(var.column(), &xs, cfg.nodes, cfg.metric, &netsim_model(cfg), at(var))?;
            let rep = compare_report(&analytical, &model)?;
            curve_csv(&mut out, "compare_lindblad.csv", &analytical)?;
            curve_csv(&mut out, "compare_netsim.csv", &model)?;
            out.csv("compare.csv", |b| Ok(write_compare_csv(b, &rep)?))?;
            out.text("compare.txt", compare_summary(&rep));
        }
        Kind::Fit => match cfg.fit.as_ref().expect("validated") {
            FitConfig::Grid { parameter, candidates, benchmark } => {
                let var = cfg.sweep.as_ref().expect("validated").variable;
                let bench = match benchmark {
                    Some(path) => {
                        let file = std::fs::File::open(path)
                            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
                        curve_from_records(&read_records(file)?, var.column())?
                    }
                    None => {
                        let (_, xs) = sweep.as_ref().expect("validated");
                        engine_chain_curve(
                            var.column(),
                            xs,
                            cfg.nodes,
                            cfg.metric,
                            cfg.pulse.sweep_pulse()?,
                            &cfg.hop.options(),
                            at(var),
                        )?
                    }
                };
                let models = candidates
                    .iter()
                    .map(|&v| {
                        let (channel, decoherence) = parameter.apply(cfg.channel, cfg.decoherence, v)?;
                        Ok((v, NetsimModel { channel, decoherence, ..netsim_model(cfg) }))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let n_nodes = bench.nodes.last().copied().unwrap_or(cfg.nodes);
                let rep = grid_fit(parameter.name(), candidates, &bench, |v| {
                    let m = models.iter().find(|c| c.0.to_bits() == v.to_bits()).expect("candidate").1;
                    netsim_chain_curve(var.column(), &bench.x, n_nodes, cfg.metric, &m, at(var))
                })?;
                curve_csv(&mut out, "fit_benchmark.csv", &bench)?;
                out.csv("fit.csv", |b| Ok(write_fit_csv(b, &rep)?))?;
                out.text("fit.txt", fit_summary(&rep));
            }
            FitConfig::Power { cooperativities } => {
                let pulse = match cfg.pulse {
                    PulseConfig::OptimizedStirap { max_duration_us } => {
                        SweepPulse::OptimizedStirap { max_duration: max_duration_us }
                    }
                    _ => SweepPulse::OptimizedStirap { max_duration: None },
                };
                let opts = cfg.hop.options();
                let pts = cavnet::par::try_map(cooperativities.len(), |i| {
                    let c = cooperativities[i];
                    let loss = p.g0 / c.sqrt();
                    let q = PhysicalParams { kappa: loss, gamma0: loss, ..p };
                    let (proc, _) = hop_process(&q, &pulse.schedule(&q)?, &opts)?;
                    Ok((c, proc.entanglement_fidelity()))
                })?;
                let fit = fit_power_exponential(&pts)?;
                out.table(
                    "power_points.csv",
                    &["cooperativity", "entanglement_fidelity"],
                    pts.iter().map(|(c, f)| vec![num(*c), num(*f)]).collect(),
                )?;
                let f = fit.fit;
                out.table(
                    "power_fit.csv",
                    &["lambda1", "lambda2", "lambda3", "rss", "rmse"],
                    vec![vec![num(f.lambda1), num(f.lambda2), num(f.lambda3), num(fit.rss), num(fit.rmse)]],
                )?;
                out.text(
                    "power_fit.txt",
                    format!(
                        "F(C) = {:.4} C^{:.4} + {:.4}, residual rmse {:.5}\n",
                        f.lambda1, f.lambda2, f.lambda3, fit.rmse
                    ),
                );
            }
        },
        Kind::Latency => {
            if engine == Engine::Lindblad {
                return Err(CliError::Validation("latency is a network-model quantity; use engine netsim".into()));
            }
            let points: Vec<PhysicalParams> = match &sweep {
                Some((var @ (SweepVariable::LengthUm | SweepVariable::G0), xs)) => {
                    xs.iter().map(|&x| var.apply(&p, x)).collect()
                }
                Some((var, _)) => {
                    return Err(CliError::Validation(format!(
                        "latency sweeps take g0 or length_um, not {}",
                        var.column()
                    )))
                }
                None => vec![p],
            };
            let rows = points
                .iter()
                .map(|q| Ok(vec![num(q.g_hz()), num(q.length_um), num(cfg.latency.latency_ns(q.g_hz(), q.length_um)?)]))
                .collect::<Result<Vec<_>, CliError>>()?;
            out.table("latency.csv", &["g_hz", "length_um", "latency_ns"], rows)?;
        }
    }
    Ok(out)
}
