use crate::error::{Error, Result};
use crate::quantum::ops::partial_trace_matrix;
use crate::quantum::{r, CMatrix, CVector, HilbertLayout, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
use serde::{Deserialize, Serialize};

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    layout: HilbertLayout,
    amps: CVector,
}

impl PureState {
    pub fn new(layout: HilbertLayout, amps: CVector) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::arg(format!(
                "{} amplitudes for a {}-dimensional layout",
                amps.len(),
                layout.total_dim()
            )));
        }
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::arg(format!("state norm² = {n2}, expected 1")));
        }
        Ok(Self { layout, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(layout: HilbertLayout, amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::arg("cannot normalize a zero vector"));
        }
        Self::new(layout, amps / r(n))
    }

    pub fn basis(layout: HilbertLayout, index: usize) -> Result<Self> {
        if index >= layout.total_dim() {
            return Err(Error::arg(format!("basis index {index} out of range")));
        }
        let mut v = CVector::zeros(layout.total_dim());
        v[index] = r(1.0);
        Ok(Self { layout, amps: v })
    }

    /// `α|0> + β|1>` (normalized on construction).
    pub fn qubit(alpha: crate::quantum::C64, beta: crate::quantum::C64) -> Result<Self> {
        Self::normalized(HilbertLayout::qubit(), nalgebra::dvector![alpha, beta])
    }

    /// `(|00> + |11>)/√2`.
    pub fn bell_phi_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = nalgebra::dvector![r(s), r(0.0), r(0.0), r(s)];
        Self { layout: HilbertLayout::qubits(2), amps: v }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { layout: self.layout.concat(&other.layout), amps: self.amps.kronecker(&other.amps) }
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    data: CMatrix,
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(layout: HilbertLayout, data: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(layout, data)?;
        rho.check()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(layout: HilbertLayout, data: CMatrix) -> Result<Self> {
        let d = layout.total_dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::arg(format!("matrix is {}x{}, layout needs {d}x{d}", data.nrows(), data.ncols())));
        }
        Ok(Self { layout, data })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { layout: psi.layout.clone(), data: psi.projector() }
    }

    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        Self { data: CMatrix::identity(d, d) * r(1.0 / d as f64), layout }
    }

    /// Single-qubit state `[[1-λ, α], [ᾱ, λ]]`.
    pub fn qubit_from_parts(lambda: f64, alpha: crate::quantum::C64) -> Result<Self> {
        let m = CMatrix::from_row_slice(2, 2, &[r(1.0 - lambda), alpha, alpha.conj(), r(lambda)]);
        Self::new(HilbertLayout::qubit(), m)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        crate::quantum::max_abs_diff(&self.data, &self.data.adjoint())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()) * r(0.5);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, trace and the eigenvalue floor.
    pub fn check(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > HERMITIAN_TOL {
            return Err(Error::arg(format!("density matrix not Hermitian (error {h:.3e})")));
        }
        let t = self.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::arg(format!("density matrix trace {t}")));
        }
        let e = self.min_eigenvalue();
        if e < PSD_TOL {
            return Err(Error::arg(format!("density matrix has eigenvalue {e:.3e}")));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { layout: self.layout.concat(&other.layout), data: self.data.kronecker(&other.data) }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let layout = self.layout.subset(keep)?;
        let data = partial_trace_matrix(&self.data, &self.layout, keep)?;
        Ok(DensityMatrix { layout, data })
    }

    /// `Tr[σ ρ]`, the overlap used as fidelity when `σ` is pure.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if self.layout.total_dim() != other.layout.total_dim() {
            return Err(Error::arg("overlap of states with different dimension"));
        }
        let mut s = 0.0;
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                s += (self.data[(i, j)] * other.data[(j, i)]).re;
            }
        }
        Ok(s)
    }

    /// Conjugation `U ρ U†` for a unitary `u`.
    pub fn conjugate_by(&self, u: &CMatrix) -> DensityMatrix {
        DensityMatrix { layout: self.layout.clone(), data: u * &self.data * u.adjoint() }
    }

    pub(crate) fn map_matrix(&self, data: CMatrix) -> DensityMatrix {
        DensityMatrix { layout: self.layout.clone(), data }
    }

    /// Serializable snapshot (row-major real and imaginary parts).
    pub fn to_snapshot(&self) -> StateSnapshot {
        let d = self.dim();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(self.data[(i, j)].re);
                im.push(self.data[(i, j)].im);
            }
        }
        StateSnapshot { dims: self.layout.dims().to_vec(), re, im }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::c;

    #[test]
    fn validation_rejects_bad_matrices() {
        let l = HilbertLayout::qubit();
        let not_herm = CMatrix::from_row_slice(2, 2, &[r(0.5), r(0.1), r(0.0), r(0.5)]);
        assert!(DensityMatrix::new(l.clone(), not_herm).is_err());
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(l.clone(), bad_trace).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[r(1.5), r(0.0), r(0.0), r(-0.5)]);
        assert!(DensityMatrix::new(l, negative).is_err());
    }

    #[test]
    fn pure_state_norm_checked() {
        let l = HilbertLayout::qubit();
        assert!(PureState::new(l.clone(), nalgebra::dvector![r(1.0), r(1.0)]).is_err());
        let s = PureState::normalized(l, nalgebra::dvector![r(1.0), c(0.0, 1.0)]).unwrap();
        assert!((s.amplitudes().norm_squared() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_state_has_half_purity() {
        let m = DensityMatrix::maximally_mixed(HilbertLayout::qubit());
        assert!((m.purity() - 0.5).abs() < 1e-15);
        m.check().unwrap();
    }
}
