use crate::error::{Error, Result};
use crate::par::Execution;
use crate::quantum::{c, CVector, DensityMatrix, HilbertLayout, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `<ψ|ρ|ψ>`.
pub fn state_fidelity(target: &PureState, rho: &DensityMatrix) -> Result<f64> {
    let psi = target.amplitudes();
    if psi.len() != rho.dim() {
        return Err(Error::arg(format!("target has dimension {}, state has {}", psi.len(), rho.dim())));
    }
    let v = psi.adjoint() * rho.matrix() * psi;
    Ok(v[(0, 0)].re.clamp(0.0, 1.0))
}

/// Haar-random pure state from a complex Gaussian vector.
pub fn haar_random_state_from(layout: HilbertLayout, rng: &mut impl Rng) -> PureState {
    let d = layout.total_dim();
    loop {
        let v =
            CVector::from_fn(d, |_, _| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
        if let Ok(s) = PureState::normalized(layout.clone(), v) {
            return s;
        }
    }
}

pub fn haar_random_state(dim: usize, seed: u64) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::arg(format!("Haar state needs dim ≥ 2, got {dim}")));
    }
    let layout = HilbertLayout::new(vec![dim])?;
    Ok(haar_random_state_from(layout, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Deterministic RNG for sample `index` of a seeded Monte-Carlo run.
pub(crate) fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl MonteCarloEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error, n_samples: n }
    }
}

/// Haar-averaged `<ψ|ε(ψ)|ψ>` for a single-qubit channel.
pub fn average_fidelity_mc<F>(runner: F, n_samples: usize, seed: u64) -> Result<MonteCarloEstimate>
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix> + Sync + Send,
{
    average_fidelity_mc_with(Execution::default(), runner, n_samples, seed)
}

pub fn average_fidelity_mc_with<F>(
    exec: Execution,
    runner: F,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate>
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix> + Sync + Send,
{
    if n_samples == 0 {
        return Err(Error::arg("n_samples must be ≥ 1"));
    }
    let xs = exec.try_map(n_samples, |i| {
        let psi = haar_random_state_from(HilbertLayout::qubit(), &mut sample_rng(seed, i));
        let out = runner(&DensityMatrix::from_pure(&psi))?;
        state_fidelity(&psi, &out)
    })?;
    Ok(MonteCarloEstimate::from_samples(&xs))
}

/// `<Φ⁺|(I ⊗ ε)(Φ⁺)|Φ⁺>`, where `runner` maps the ancilla-qubit pair.
pub fn entanglement_fidelity<F>(runner: F) -> Result<f64>
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix>,
{
    let phi = PureState::bell_phi_plus();
    let out = runner(&DensityMatrix::from_pure(&phi))?;
    state_fidelity(&phi, &out)
}
