use crate::error::{Error, Result};
use crate::quantum::{max_abs_diff, r, CMatrix, DensityMatrix};

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    dim: usize,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::arg("channel needs at least one operator"))?;
        let dim = first.nrows();
        if ops.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::arg("Kraus operators must be square and of equal size"));
        }
        let ch = Self { ops, dim };
        let err = ch.completeness_error();
        if err > 1e-10 {
            return Err(Error::arg(format!("Kraus completeness violated by {err:.3e}")));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self { ops: vec![CMatrix::identity(dim, dim)], dim }
    }

    /// `ρ -> (1-p) ρ + p I/2` on a qubit.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::arg(format!("depolarizing p = {p} outside [0,1]")));
        }
        let q = (p / 4.0).sqrt();
        let ops = vec![
            CMatrix::identity(2, 2) * r((1.0 - 0.75 * p).sqrt()),
            crate::quantum::pauli_x() * r(q),
            crate::quantum::pauli_y() * r(q),
            crate::quantum::pauli_z() * r(q),
        ];
        Self::new(ops)
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn completeness_error(&self) -> f64 {
        let sum = self.ops.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &CMatrix::identity(self.dim, self.dim))
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if self.dim != other.dim {
            return Err(Error::arg("cannot compose channels of different dimension"));
        }
        let ops = other.ops.iter().flat_map(|b| self.ops.iter().map(move |a| b * a)).collect();
        Ok(KrausChannel { ops, dim: self.dim })
    }

    /// Action on a bare matrix of the channel's dimension.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        self.ops.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k * m * k.adjoint())
    }
}

/// `K0 = diag(1, √(1-γ))`, `K1 = √γ |0><1|`.
pub fn amplitude_damping_kraus(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) || gamma.is_nan() {
        return Err(Error::arg(format!("amplitude damping γ = {gamma} outside [0,1]")));
    }
    let k0 = CMatrix::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r((1.0 - gamma).sqrt())]);
    let k1 = CMatrix::from_row_slice(2, 2, &[r(0.0), r(gamma.sqrt()), r(0.0), r(0.0)]);
    KrausChannel::new(vec![k0, k1])
}

/// Phase damping that multiplies qubit coherences by `factor`.
pub fn phase_damping_kraus(factor: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&factor) || factor.is_nan() {
        return Err(Error::arg(format!("coherence factor {factor} outside [0,1]")));
    }
    let k0 = CMatrix::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r(factor)]);
    let k1 = CMatrix::from_row_slice(2, 2, &[r(0.0), r(0.0), r(0.0), r((1.0 - factor * factor).sqrt())]);
    KrausChannel::new(vec![k0, k1])
}

/// Applies `ch` on one subsystem of `rho`.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, subsystem: usize) -> Result<DensityMatrix> {
    let layout = rho.layout();
    let d = *layout.dims().get(subsystem).ok_or_else(|| Error::arg(format!("subsystem {subsystem} out of range")))?;
    if d != ch.dim() {
        return Err(Error::arg(format!("channel dimension {} does not match subsystem dimension {d}", ch.dim())));
    }
    if layout.len() == 1 {
        return Ok(rho.map_matrix(ch.apply_matrix(rho.matrix())));
    }
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for k in ch.operators() {
        let big = layout.embed(k, subsystem)?;
        out += &big * rho.matrix() * big.adjoint();
    }
    Ok(rho.map_matrix(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::testutil::*;
    use crate::quantum::{c, HilbertLayout, C64};
    use proptest::prelude::*;

    /// Output matrix of amplitude damping written out by hand.
    fn damped_by_hand(lambda: f64, alpha: C64, gamma: f64) -> CMatrix {
        let s = (1.0 - gamma).sqrt();
        CMatrix::from_row_slice(
            2,
            2,
            &[r(1.0 - (1.0 - gamma) * lambda), alpha * s, alpha.conj() * s, r((1.0 - gamma) * lambda)],
        )
    }

    #[test]
    fn zero_damping_is_identity() {
        let ch = amplitude_damping_kraus(0.0).unwrap();
        let mut g = rng(3);
        let rho = random_density(&HilbertLayout::qubit(), &mut g);
        let out = apply_channel(&rho, &ch, 0).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn full_decay_to_ground() {
        let ch = amplitude_damping_kraus(1.0).unwrap();
        let rho = DensityMatrix::qubit_from_parts(1.0, r(0.0)).unwrap();
        let out = apply_channel(&rho, &ch, 0).unwrap();
        assert!((out.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_decay_populations() {
        let ch = amplitude_damping_kraus(0.36).unwrap();
        let rho = DensityMatrix::qubit_from_parts(1.0, r(0.0)).unwrap();
        let out = apply_channel(&rho, &ch, 0).unwrap();
        assert!((out.matrix()[(0, 0)].re - 0.36).abs() < 1e-15);
        assert!((out.matrix()[(1, 1)].re - 0.64).abs() < 1e-15);
    }

    #[test]
    fn half_damping_on_plus_state() {
        let ch = amplitude_damping_kraus(0.5).unwrap();
        let rho = DensityMatrix::qubit_from_parts(0.5, r(0.5)).unwrap();
        let out = apply_channel(&rho, &ch, 0).unwrap();
        let coh = 0.5 * 0.5f64.sqrt();
        let expected = CMatrix::from_row_slice(2, 2, &[r(0.75), r(coh), r(coh), r(0.25)]);
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn rejects_gamma_out_of_range() {
        assert!(amplitude_damping_kraus(-0.1).is_err());
        assert!(amplitude_damping_kraus(1.1).is_err());
        assert!(amplitude_damping_kraus(f64::NAN).is_err());
    }

    #[test]
    fn dimension_mismatch_errors() {
        let rho = DensityMatrix::maximally_mixed(HilbertLayout::new(vec![2, 3]).unwrap());
        let ch = amplitude_damping_kraus(0.2).unwrap();
        assert!(apply_channel(&rho, &ch, 1).is_err());
        assert!(apply_channel(&rho, &ch, 2).is_err());
        assert!(apply_channel(&rho, &ch, 0).is_ok());
    }

    #[test]
    fn sequential_damping_composes() {
        let mut g = rng(11);
        let (g1, g2) = (0.23, 0.61);
        let a = amplitude_damping_kraus(g1).unwrap();
        let b = amplitude_damping_kraus(g2).unwrap();
        let ab = amplitude_damping_kraus(1.0 - (1.0 - g1) * (1.0 - g2)).unwrap();
        for _ in 0..100 {
            let rho = random_density(&HilbertLayout::qubit(), &mut g);
            let two = apply_channel(&apply_channel(&rho, &a, 0).unwrap(), &b, 0).unwrap();
            let one = apply_channel(&rho, &ab, 0).unwrap();
            assert!(max_abs_diff(two.matrix(), one.matrix()) < 1e-14);
        }
    }

    #[test]
    fn embedded_channel_matches_reduced_action() {
        let mut g = rng(5);
        let layout = HilbertLayout::new(vec![2, 3, 2]).unwrap();
        let rho = random_density(&layout, &mut g);
        let ch = amplitude_damping_kraus(0.4).unwrap();
        let out = apply_channel(&rho, &ch, 2).unwrap();
        out.check().unwrap();
        let lhs = out.partial_trace(&[2]).unwrap();
        let rhs = apply_channel(&rho.partial_trace(&[2]).unwrap(), &ch, 0).unwrap();
        assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-14);
        // Untouched subsystems keep their marginal.
        let m0 = out.partial_trace(&[0, 1]).unwrap();
        assert!(max_abs_diff(m0.matrix(), rho.partial_trace(&[0, 1]).unwrap().matrix()) < 1e-14);
    }

    #[test]
    fn phase_damping_scales_coherence() {
        let ch = phase_damping_kraus(0.3).unwrap();
        let rho = DensityMatrix::qubit_from_parts(0.4, c(0.2, 0.1)).unwrap();
        let out = apply_channel(&rho, &ch, 0).unwrap();
        assert!((out.matrix()[(0, 1)] - c(0.06, 0.03)).norm() < 1e-15);
        assert!((out.matrix()[(1, 1)].re - 0.4).abs() < 1e-15);
    }

    #[test]
    fn composition_via_then() {
        let a = amplitude_damping_kraus(0.2).unwrap();
        let p = phase_damping_kraus(0.7).unwrap();
        let ap = a.then(&p).unwrap();
        assert!(ap.completeness_error() < 1e-12);
        let mut g = rng(2);
        let rho = random_density(&HilbertLayout::qubit(), &mut g);
        let seq = apply_channel(&apply_channel(&rho, &a, 0).unwrap(), &p, 0).unwrap();
        let one = apply_channel(&rho, &ap, 0).unwrap();
        assert!(max_abs_diff(seq.matrix(), one.matrix()) < 1e-14);
    }

    proptest! {
        #[test]
        fn damping_matches_hand_formula(
            lambda in 0.0f64..=1.0,
            phase in 0.0f64..std::f64::consts::TAU,
            frac in 0.0f64..=1.0,
            gamma in 0.0f64..=1.0,
        ) {
            // |α|² ≤ λ(1-λ) keeps the input positive.
            let amp = frac * (lambda * (1.0 - lambda)).sqrt();
            let alpha = C64::from_polar(amp, phase);
            let rho = DensityMatrix::qubit_from_parts(lambda, alpha).unwrap();
            let ch = amplitude_damping_kraus(gamma).unwrap();
            prop_assert!(ch.completeness_error() <= 1e-10);
            let out = apply_channel(&rho, &ch, 0).unwrap();
            prop_assert!(max_abs_diff(out.matrix(), &damped_by_hand(lambda, alpha, gamma)) <= 1e-12);
            prop_assert!(out.check().is_ok());
        }

        #[test]
        fn channels_preserve_state_invariants(seed in 0u64..1000, gamma in 0.0f64..=1.0, f in 0.0f64..=1.0) {
            let mut g = rng(seed);
            let layout = HilbertLayout::new(vec![2, 2, 3]).unwrap();
            let rho = random_density(&layout, &mut g);
            let out = apply_channel(&rho, &amplitude_damping_kraus(gamma).unwrap(), 1).unwrap();
            let out = apply_channel(&out, &phase_damping_kraus(f).unwrap(), 0).unwrap();
            prop_assert!(out.hermiticity_error() <= 1e-10);
            prop_assert!((out.trace() - 1.0).abs() <= 1e-10);
            prop_assert!(out.min_eigenvalue() >= -1e-8);
        }
    }
}
