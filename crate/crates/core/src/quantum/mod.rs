//! Small dense Hilbert-space algebra: states, Kraus channels and fidelities.

mod channel;
pub(crate) mod fidelity;
mod layout;
mod ops;
mod process;
mod state;

pub use channel::{amplitude_damping_kraus, apply_channel, phase_damping_kraus, KrausChannel};
pub use fidelity::{
    average_fidelity_mc, average_fidelity_mc_with, entanglement_fidelity, haar_random_state, haar_random_state_from,
    state_fidelity, MonteCarloEstimate,
};
pub use layout::HilbertLayout;
pub use ops::{kron, lowering, partial_trace_matrix, pauli_x, pauli_y, pauli_z, raising};
pub use process::QubitProcess;
pub use state::{DensityMatrix, PureState};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const PSD_TOL: f64 = -1e-8;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Random mixed state of full rank via G G† / Tr.
    pub fn random_density(layout: &HilbertLayout, rng: &mut impl Rng) -> DensityMatrix {
        let d = layout.total_dim();
        let g = CMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityMatrix::new(layout.clone(), m / tr).unwrap()
    }

    pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
        let g = CMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        (&g + g.adjoint()) * r(0.5)
    }
}
