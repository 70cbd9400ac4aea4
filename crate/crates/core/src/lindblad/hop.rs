use crate::error::{Error, Result};
use crate::lindblad::integrate::{enforce_trace, grid, ReducedModel, Stepper};
use crate::lindblad::{Cutoff, HopSystem, PhysicalParams, PulseSchedule, QubitModel};
use crate::quantum::{r, CMatrix, DensityMatrix, HilbertLayout, PureState, QubitProcess, C64};
use serde::{Deserialize, Serialize};

/// Step size is `DT_FACTOR` over the generator's row-sum norm ...
pub const DT_FACTOR: f64 = 0.01;
/// ... and never coarser than the window split into this many steps.
pub const MIN_STEPS: usize = 2000;

/// Pauli frame applied by the receiver before comparing with the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMode {
    /// Track whichever of `I` and `Z` gives the higher fidelity. The transfer
    /// amplitude is real, so this is the sign of the delivered coherence.
    Auto,
    Identity,
    PauliZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Identity,
    PauliZ,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopOptions {
    /// Defaults to two-level qubits for constant pulses and Λ qubits for STIRAP.
    pub model: Option<QubitModel>,
    pub frame: FrameMode,
    pub dt: Option<f64>,
    /// Adds intrinsic T1 relaxation and pure dephasing on both qubits.
    pub coherence: bool,
    pub cavity_cutoff: usize,
    /// Maximum number of stored trajectory samples.
    pub max_points: usize,
}

impl Default for HopOptions {
    fn default() -> Self {
        Self { model: None, frame: FrameMode::Auto, dt: None, coherence: false, cavity_cutoff: 2, max_points: 2000 }
    }
}

impl HopOptions {
    pub fn model_for(&self, schedule: &PulseSchedule) -> QubitModel {
        self.model.unwrap_or(if schedule.is_stirap() { QubitModel::Lambda } else { QubitModel::TwoLevel })
    }
}

#[derive(Clone, Debug)]
pub struct HopResult {
    /// Receiver qubit (or ancilla ⊗ receiver), frame-corrected.
    pub final_state: DensityMatrix,
    pub trajectory: Vec<(f64, f64)>,
    pub peak_fidelity: f64,
    pub peak_time: f64,
    /// Fidelity when the hop ends.
    pub fidelity: f64,
    pub end_time: f64,
    pub frame: Frame,
    /// Largest population found at the cavity truncation edge.
    pub edge_population: f64,
    pub dt: f64,
    pub steps: usize,
    pub model: QubitModel,
}

/// Default peak-search window for a constant pulse: two full transfer times,
/// stretched in the bad-cavity regime.
pub fn default_peak_window(g_a: f64, g_b: f64, params: &PhysicalParams, coherence: bool) -> Result<f64> {
    let g = ((g_a * g_a + g_b * g_b) / 2.0).sqrt();
    if !(g > 0.0) {
        return Err(Error::arg("constant pulse with zero coupling needs an explicit window"));
    }
    let transfer = std::f64::consts::PI / (std::f64::consts::SQRT_2 * g);
    let mut w = 2.0 * transfer * (1.0 + params.kappa / (2.0 * g));
    if coherence {
        w = w.min(5.0 * params.t1_us.min(params.t2_us));
    }
    Ok(w)
}

pub fn simulate_hop(
    input: &DensityMatrix,
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    with_ancilla: bool,
    opts: &HopOptions,
) -> Result<HopResult> {
    simulate_hop_towards(input, input, params, schedule, with_ancilla, opts)
}

/// Hop whose fidelity is measured against `target` instead of the input.
pub fn simulate_hop_towards(
    input: &DensityMatrix,
    target: &DensityMatrix,
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    with_ancilla: bool,
    opts: &HopOptions,
) -> Result<HopResult> {
    let expect: &[usize] = if with_ancilla { &[2, 2] } else { &[2] };
    if input.layout().dims() != expect || target.layout().dims() != expect {
        return Err(Error::arg(format!("hop input must have layout {expect:?}, got {:?}", input.layout().dims())));
    }
    schedule.validate()?;
    let model = opts.model_for(schedule);
    let sys = HopSystem::new(params, model, with_ancilla, opts.coherence, opts.cavity_cutoff)?;
    let q = model.dim();
    let full = sys.layout.total_dim();

    let rho0 = embed_input(&sys, input);
    let red = ReducedModel::new(&sys, &rho0);
    let n = red.n;

    let (window, auto_peak) = match schedule {
        PulseSchedule::Constant(p) => match p.cutoff {
            Cutoff::At(t) => (t, false),
            Cutoff::AutoPeak { window } => {
                let w = match window {
                    Some(w) => w,
                    None => default_peak_window(p.g_a, p.g_b, params, opts.coherence)?,
                };
                (w, true)
            }
        },
        PulseSchedule::GaussianStirap(p) => (p.total_time, false),
    };
    let (pa, pb) = schedule.peak_couplings();
    let dt_req = match opts.dt {
        Some(dt) => dt,
        None => (DT_FACTOR / red.rate_scale(pa, pb)).min(window / MIN_STEPS as f64),
    };
    let (steps, h) = grid(window, dt_req)?;

    let z_out = z_on_last(with_ancilla);
    let t_id = target.matrix().clone();
    let t_z = &z_out * &t_id * &z_out;
    let w_id = functional(&sys, &red, &t_id);
    let w_z = functional(&sys, &red, &t_z);
    let edge: Vec<usize> = (0..n).filter(|&a| sys.at_truncation_edge(red.basis[a])).collect();

    let eval = |rho: &[C64]| -> (f64, Frame) {
        let fi = dot(&w_id, rho);
        let fz = dot(&w_z, rho);
        match opts.frame {
            FrameMode::Identity => (fi, Frame::Identity),
            FrameMode::PauliZ => (fz, Frame::PauliZ),
            FrameMode::Auto => {
                if fz > fi {
                    (fz, Frame::PauliZ)
                } else {
                    (fi, Frame::Identity)
                }
            }
        }
    };

    let mut rho = red.restrict(&rho0);
    let mut stepper = Stepper::new(&red, schedule);
    let stride = steps.div_ceil(opts.max_points.max(1)).max(1);
    let (f0, fr0) = eval(&rho);
    let mut trajectory = vec![(0.0, f0)];
    let mut best = (f0, 0.0, fr0, rho.clone());
    let mut edge_pop = 0.0f64;

    for s in 1..=steps {
        stepper.step((s - 1) as f64 * h, h, &mut rho);
        let t = s as f64 * h;
        let (f, frame) = eval(&rho);
        if f > best.0 + 1e-12 {
            best.0 = f;
            best.1 = t;
            best.2 = frame;
            if auto_peak {
                best.3.copy_from_slice(&rho);
            }
        }
        if !edge.is_empty() {
            edge_pop = edge_pop.max(edge.iter().map(|&a| rho[a * n + a].re).sum());
        }
        if s % stride == 0 || s == steps {
            enforce_trace(&mut rho, n, t, h)?;
            trajectory.push((t, f));
        }
    }
    if edge_pop > 1e-9 {
        return Err(Error::arg(format!(
            "cavity cutoff {} too small: edge population {edge_pop:.3e}",
            opts.cavity_cutoff
        )));
    }

    let (end_state, end_time, end_f, end_frame) = if auto_peak {
        let mut snap = best.3.clone();
        enforce_trace(&mut snap, n, best.1, h)?;
        (snap, best.1, best.0, best.2)
    } else {
        let (f, fr) = eval(&rho);
        (rho, window, f, fr)
    };
    if auto_peak {
        trajectory.retain(|&(t, _)| t <= end_time);
        if trajectory.last().map(|p| p.0) != Some(end_time) {
            trajectory.push((end_time, end_f));
        }
    }

    let out = output_state(&sys, &red.expand(&end_state, full), q)?;
    let out = match end_frame {
        Frame::Identity => out,
        Frame::PauliZ => out.conjugate_by(&z_out),
    };

    Ok(HopResult {
        final_state: out,
        trajectory,
        peak_fidelity: best.0,
        peak_time: best.1,
        fidelity: end_f,
        end_time,
        frame: end_frame,
        edge_population: edge_pop,
        dt: h,
        steps,
        model,
    })
}

/// Hop channel read off the ancilla-assisted run (the normalized Choi state).
pub fn hop_process(
    params: &PhysicalParams,
    schedule: &PulseSchedule,
    opts: &HopOptions,
) -> Result<(QubitProcess, HopResult)> {
    let phi = DensityMatrix::from_pure(&PureState::bell_phi_plus());
    let res = simulate_hop(&phi, params, schedule, true, opts)?;
    Ok((QubitProcess::from_choi(&res.final_state)?, res))
}

fn z_on_last(with_ancilla: bool) -> CMatrix {
    let z = crate::quantum::pauli_z();
    if with_ancilla {
        CMatrix::identity(2, 2).kronecker(&z)
    } else {
        z
    }
}

fn dot(w: &[(usize, C64)], rho: &[C64]) -> f64 {
    w.iter().map(|&(k, c)| (c * rho[k]).re).sum()
}

/// Input ⊗ vacuum ⊗ |0>, with the sender qubit embedded in its level space.
fn embed_input(sys: &HopSystem, input: &DensityMatrix) -> CMatrix {
    let full = sys.layout.total_dim();
    let mut m = CMatrix::zeros(full, full);
    let to_full = |i: usize| {
        let digits = if sys.ancilla { vec![i / 2, i % 2, 0, 0] } else { vec![i, 0, 0] };
        sys.layout.index_of(&digits)
    };
    let d = input.dim();
    for i in 0..d {
        for j in 0..d {
            m[(to_full(i), to_full(j))] = input.matrix()[(i, j)];
        }
    }
    m
}

/// Output-space index (ancilla, receiver level) of a full basis index and the
/// key of the traced subsystems.
fn split(sys: &HopSystem, index: usize, q: usize) -> (usize, usize) {
    let d = sys.layout.digits(index);
    let off = sys.sender();
    let c = if sys.ancilla { d[0] } else { 0 };
    let traced = d[off] * sys.cavity_dim + d[off + 1];
    (c * q + d[off + 2], traced)
}

/// Heisenberg-picture weights so that `Σ w ρ_reduced = Tr[T out(ρ)]`, where
/// `out` traces to (ancilla, receiver) and folds `|E>` into `|0>`.
fn functional(sys: &HopSystem, red: &ReducedModel, target: &CMatrix) -> Vec<(usize, C64)> {
    let q = sys.model.dim();
    let heis = |k: usize, kk: usize| -> C64 {
        let (c1, l1) = (k / q, k % q);
        let (c2, l2) = (kk / q, kk % q);
        match (l1, l2) {
            (0 | 1, 0 | 1) => target[(2 * c1 + l1, 2 * c2 + l2)],
            (2, 2) => target[(2 * c1, 2 * c2)],
            _ => C64::new(0.0, 0.0),
        }
    };
    let n = red.n;
    let mut w = Vec::new();
    for a in 0..n {
        let (ka, ta) = split(sys, red.basis[a], q);
        for b in 0..n {
            let (kb, tb) = split(sys, red.basis[b], q);
            if ta == tb {
                let v = heis(kb, ka);
                if v.norm() > 0.0 {
                    w.push((a * n + b, v));
                }
            }
        }
    }
    w
}

fn output_state(sys: &HopSystem, full_rho: &CMatrix, q: usize) -> Result<DensityMatrix> {
    let keep: Vec<usize> = if sys.ancilla { vec![0, sys.receiver()] } else { vec![sys.receiver()] };
    let kept = crate::quantum::partial_trace_matrix(full_rho, &sys.layout, &keep)?;
    let na = if sys.ancilla { 2 } else { 1 };
    let mut out = CMatrix::zeros(2 * na, 2 * na);
    for c1 in 0..na {
        for c2 in 0..na {
            for l1 in 0..2 {
                for l2 in 0..2 {
                    out[(2 * c1 + l1, 2 * c2 + l2)] = kept[(c1 * q + l1, c2 * q + l2)];
                }
            }
            if q == 3 {
                out[(2 * c1, 2 * c2)] += kept[(c1 * q + 2, c2 * q + 2)];
            }
        }
    }
    let herm = (&out + out.adjoint()) * r(0.5);
    let layout = if sys.ancilla { HilbertLayout::qubits(2) } else { HilbertLayout::qubit() };
    DensityMatrix::from_matrix_unchecked(layout, herm)
}
