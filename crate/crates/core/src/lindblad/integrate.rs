use crate::error::{Error, Result};
use crate::lindblad::{HopSystem, PulseSchedule};
use crate::quantum::{c, CMatrix, DensityMatrix, C64};
use std::collections::VecDeque;

/// Trace drift tolerated silently, and the hard limit for a run.
pub const RENORMALIZE_TOL: f64 = 1e-8;
pub const DRIFT_LIMIT: f64 = 1e-6;

/// Stored states of one integration.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Sparse {
    pub entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    fn from_dense(m: &CMatrix, basis: &[usize]) -> Self {
        let mut entries = Vec::new();
        for (a, &ia) in basis.iter().enumerate() {
            for (b, &ib) in basis.iter().enumerate() {
                let v = m[(ia, ib)];
                if v.norm() > 0.0 {
                    entries.push((a, b, v));
                }
            }
        }
        Self { entries }
    }
}

/// Generator restricted to the subspace reachable from the initial support.
pub(crate) struct ReducedModel {
    pub n: usize,
    pub basis: Vec<usize>,
    h_static: Sparse,
    h_drive: [Sparse; 2],
    jumps: Vec<Sparse>,
}

impl ReducedModel {
    pub fn new(sys: &HopSystem, rho0: &CMatrix) -> Self {
        let full = sys.layout.total_dim();
        let mut ops: Vec<&CMatrix> = vec![&sys.h_static, &sys.h_drive[0], &sys.h_drive[1]];
        ops.extend(sys.collapse.iter().map(|(l, _)| l));

        let mut seen = vec![false; full];
        let mut queue = VecDeque::new();
        for i in 0..full {
            if (0..full).any(|j| rho0[(i, j)].norm() > 0.0) {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(j) = queue.pop_front() {
            for op in &ops {
                for i in 0..full {
                    if !seen[i] && op[(i, j)].norm() > 0.0 {
                        seen[i] = true;
                        queue.push_back(i);
                    }
                }
            }
        }
        let basis: Vec<usize> = (0..full).filter(|&i| seen[i]).collect();

        let mut heff = sys.h_static.clone();
        for (l, rate) in &sys.collapse {
            heff -= l.adjoint() * l * c(0.0, 0.5 * rate);
        }
        let jumps =
            sys.collapse.iter().map(|(l, rate)| Sparse::from_dense(&(l * c(rate.sqrt(), 0.0)), &basis)).collect();
        Self {
            n: basis.len(),
            h_static: Sparse::from_dense(&heff, &basis),
            h_drive: [Sparse::from_dense(&sys.h_drive[0], &basis), Sparse::from_dense(&sys.h_drive[1], &basis)],
            jumps,
            basis,
        }
    }

    pub fn restrict(&self, m: &CMatrix) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.n * self.n);
        for &i in &self.basis {
            for &j in &self.basis {
                v.push(m[(i, j)]);
            }
        }
        v
    }

    pub fn expand(&self, v: &[C64], full: usize) -> CMatrix {
        let mut m = CMatrix::zeros(full, full);
        for (a, &i) in self.basis.iter().enumerate() {
            for (b, &j) in self.basis.iter().enumerate() {
                m[(i, j)] = v[a * self.n + b];
            }
        }
        m
    }

    /// Row-sum bound on the spectral radius of the effective generator.
    pub fn rate_scale(&self, fa: f64, fb: f64) -> f64 {
        let mut rows = vec![0.0; self.n];
        for (a, _, v) in &self.h_static.entries {
            rows[*a] += v.norm();
        }
        for (sp, f) in self.h_drive.iter().zip([fa, fb]) {
            for (a, _, v) in &sp.entries {
                rows[*a] += f.abs() * v.norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    fn rhs(&self, fa: f64, fb: f64, rho: &[C64], k: &mut [C64], out: &mut [C64]) {
        let n = self.n;
        k.fill(C64::new(0.0, 0.0));
        let terms = [(&self.h_static, 1.0), (&self.h_drive[0], fa), (&self.h_drive[1], fb)];
        for (sp, f) in terms {
            if f == 0.0 {
                continue;
            }
            for &(a, i, v) in &sp.entries {
                let w = v * f;
                let (dst, src) = (a * n, i * n);
                for j in 0..n {
                    k[dst + j] += w * rho[src + j];
                }
            }
        }
        // -i Heff ρ + (-i Heff ρ)†, valid because ρ is Hermitian.
        for a in 0..n {
            for b in 0..n {
                let x = k[a * n + b];
                let y = k[b * n + a];
                out[a * n + b] = C64::new(x.im + y.im, y.re - x.re);
            }
        }
        for sp in &self.jumps {
            for &(a, i, v) in &sp.entries {
                for &(b, j, w) in &sp.entries {
                    out[a * n + b] += v * rho[i * n + j] * w.conj();
                }
            }
        }
    }
}

/// Classical RK4 on the reduced density matrix.
pub(crate) struct Stepper<'a> {
    model: &'a ReducedModel,
    schedule: &'a PulseSchedule,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
    scratch: Vec<C64>,
}

impl<'a> Stepper<'a> {
    pub fn new(model: &'a ReducedModel, schedule: &'a PulseSchedule) -> Self {
        let z = vec![C64::new(0.0, 0.0); model.n * model.n];
        Self { model, schedule, k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z.clone(), scratch: z }
    }

    pub fn step(&mut self, t: f64, dt: f64, rho: &mut [C64]) {
        let (f0a, f0b) = self.schedule.couplings(t);
        let (fma, fmb) = self.schedule.couplings(t + 0.5 * dt);
        let (f1a, f1b) = self.schedule.couplings(t + dt);
        let m = self.model;
        let [k1, k2, k3, k4] = &mut self.k;

        m.rhs(f0a, f0b, rho, &mut self.scratch, k1);
        for (x, (r0, d)) in self.tmp.iter_mut().zip(rho.iter().zip(k1.iter())) {
            *x = r0 + d * (0.5 * dt);
        }
        m.rhs(fma, fmb, &self.tmp, &mut self.scratch, k2);
        for (x, (r0, d)) in self.tmp.iter_mut().zip(rho.iter().zip(k2.iter())) {
            *x = r0 + d * (0.5 * dt);
        }
        m.rhs(fma, fmb, &self.tmp, &mut self.scratch, k3);
        for (x, (r0, d)) in self.tmp.iter_mut().zip(rho.iter().zip(k3.iter())) {
            *x = r0 + d * dt;
        }
        m.rhs(f1a, f1b, &self.tmp, &mut self.scratch, k4);
        let s = dt / 6.0;
        for i in 0..rho.len() {
            rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * s;
        }
    }
}

pub(crate) fn trace_of(rho: &[C64], n: usize) -> f64 {
    (0..n).map(|i| rho[i * n + i].re).sum()
}

/// Applies the drift policy; returns the (possibly renormalized) trace error.
pub(crate) fn enforce_trace(rho: &mut [C64], n: usize, time: f64, dt: f64) -> Result<f64> {
    let tr = trace_of(rho, n);
    let drift = (tr - 1.0).abs();
    if drift > DRIFT_LIMIT || !tr.is_finite() {
        return Err(Error::Integration { drift, time, dt });
    }
    // RK4 keeps the trace of a traceless generator even when unstable, so
    // populations are checked as well.
    let excursion = (0..n).map(|i| rho[i * n + i].re).map(|p| (-p).max(p - 1.0)).fold(0.0, f64::max);
    if excursion > DRIFT_LIMIT {
        return Err(Error::Integration { drift: excursion, time, dt });
    }
    if drift <= RENORMALIZE_TOL {
        for x in rho.iter_mut() {
            *x /= tr;
        }
    }
    Ok(drift)
}

/// Number of steps and the exact step that lands on `span`.
pub(crate) fn grid(span: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) {
        return Err(Error::arg(format!("dt must be > 0, got {dt}")));
    }
    if !(span >= 0.0) {
        return Err(Error::arg("time span must be nondecreasing"));
    }
    let steps = ((span / dt).ceil() as usize).max(1);
    Ok((steps, span / steps as f64))
}

/// Fixed-step RK4 evolution under `schedule`, storing at most about
/// `max_stored` evenly spaced states (always including both ends).
pub fn evolve(
    rho0: &DensityMatrix,
    system: &HopSystem,
    schedule: &PulseSchedule,
    t_span: (f64, f64),
    dt: f64,
    max_stored: usize,
) -> Result<Trajectory> {
    if rho0.layout() != &system.layout {
        return Err(Error::arg("initial state layout does not match the system"));
    }
    schedule.validate()?;
    let (t0, t1) = t_span;
    let (steps, h) = grid(t1 - t0, dt)?;
    let model = ReducedModel::new(system, rho0.matrix());
    let n = model.n;
    let full = system.layout.total_dim();
    let mut rho = model.restrict(rho0.matrix());
    let mut stepper = Stepper::new(&model, schedule);
    let stride = steps.div_ceil(max_stored.max(1)).max(1);

    let mut times = vec![t0];
    let mut states = vec![rho0.clone()];
    for s in 1..=steps {
        let t = t0 + (s - 1) as f64 * h;
        stepper.step(t, h, &mut rho);
        if s % stride == 0 || s == steps {
            let now = t0 + s as f64 * h;
            enforce_trace(&mut rho, n, now, h)?;
            times.push(now);
            let m = model.expand(&rho, full);
            states.push(DensityMatrix::from_matrix_unchecked(system.layout.clone(), m)?);
        }
    }
    Ok(Trajectory { times, states })
}
