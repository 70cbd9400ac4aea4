//! Single-excitation amplitude propagation.
//!
//! Without intrinsic qubit decoherence the hop maps `|1>` to a real amplitude
//! `a` on the receiver and the rest of the excitation is lost to `|0>`, so the
//! channel is amplitude damping with `√(1-γ) = a`. Propagating the pure
//! amplitudes under the non-Hermitian Hamiltonian is enough to find `a`.

use crate::error::Result;
use crate::lindblad::integrate::grid;
use crate::lindblad::{PhysicalParams, PulseSchedule, QubitModel};
use num_complex::Complex64;

/// Entanglement fidelity of an amplitude-damping channel with transfer `a`.
pub fn entanglement_fidelity_from_amplitude(a: f64) -> f64 {
    (1.0 + a.abs()).powi(2) / 4.0
}

pub fn average_fidelity_from_amplitude(a: f64) -> f64 {
    (2.0 * entanglement_fidelity_from_amplitude(a) + 1.0) / 3.0
}

struct Chain {
    diag: Vec<Complex64>,
    model: QubitModel,
    g0: f64,
}

impl Chain {
    fn new(params: &PhysicalParams, model: QubitModel) -> Self {
        let z = Complex64::new(0.0, 0.0);
        let loss = |r: f64| Complex64::new(0.0, -0.5 * r);
        let diag = match model {
            // A, cavity, B
            QubitModel::TwoLevel => vec![loss(params.gamma0), loss(params.kappa), loss(params.gamma0)],
            // 1A, EA, cavity, EB, 1B
            QubitModel::Lambda => vec![z, loss(params.gamma0), loss(params.kappa), loss(params.gamma0), z],
        };
        Self { diag, model, g0: params.g0 }
    }

    /// Tridiagonal couplings along the chain at time `t`.
    fn links(&self, fa: f64, fb: f64) -> [f64; 4] {
        match self.model {
            QubitModel::TwoLevel => [fa, fb, 0.0, 0.0],
            QubitModel::Lambda => [fa, self.g0, self.g0, fb],
        }
    }

    fn deriv(&self, links: &[f64; 4], psi: &[Complex64], out: &mut [Complex64]) {
        let n = psi.len();
        let mi = Complex64::new(0.0, -1.0);
        for i in 0..n {
            let mut acc = self.diag[i] * psi[i];
            if i > 0 {
                acc += psi[i - 1] * links[i - 1];
            }
            if i + 1 < n {
                acc += psi[i + 1] * links[i];
            }
            out[i] = mi * acc;
        }
    }
}

/// Receiver amplitude at the end of `duration` (signed, real up to roundoff)
/// together with its largest magnitude along the way.
pub fn transfer_amplitude(
    params: &PhysicalParams,
    model: QubitModel,
    schedule: &PulseSchedule,
    duration: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    let chain = Chain::new(params, model);
    let n = chain.diag.len();
    let (steps, h) = grid(duration, dt)?;
    let z = Complex64::new(0.0, 0.0);
    let mut psi = vec![z; n];
    psi[0] = Complex64::new(1.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![z; n], vec![z; n], vec![z; n], vec![z; n], vec![z; n]);
    let mut best = 0.0f64;
    for s in 0..steps {
        let t = s as f64 * h;
        let l0 = {
            let (a, b) = schedule.couplings(t);
            chain.links(a, b)
        };
        let lm = {
            let (a, b) = schedule.couplings(t + 0.5 * h);
            chain.links(a, b)
        };
        let l1 = {
            let (a, b) = schedule.couplings(t + h);
            chain.links(a, b)
        };
        chain.deriv(&l0, &psi, &mut k1);
        for i in 0..n {
            tmp[i] = psi[i] + k1[i] * (0.5 * h);
        }
        chain.deriv(&lm, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = psi[i] + k2[i] * (0.5 * h);
        }
        chain.deriv(&lm, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = psi[i] + k3[i] * h;
        }
        chain.deriv(&l1, &tmp, &mut k4);
        for i in 0..n {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        best = best.max(psi[n - 1].norm());
    }
    // The phase is a power of -i along the chain.
    let last = psi[n - 1];
    let a = if last.re.abs() >= last.im.abs() { last.re.signum() } else { last.im.signum() } * last.norm();
    Ok((a, best))
}
