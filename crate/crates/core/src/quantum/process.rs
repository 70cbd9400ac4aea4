use crate::error::{Error, Result};
use crate::quantum::{c, r, CMatrix, DensityMatrix, HilbertLayout, KrausChannel, PureState, C64};

/// A single-qubit linear map stored through its action on the matrix units
/// `|i><j|`, indexed `2 i + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitProcess {
    images: [CMatrix; 4],
}

impl QubitProcess {
    pub fn identity() -> Self {
        Self::from_fn(|m| m.clone())
    }

    fn unit(i: usize, j: usize) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(i, j)] = r(1.0);
        m
    }

    fn from_fn(f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self { images: [f(&Self::unit(0, 0)), f(&Self::unit(0, 1)), f(&Self::unit(1, 0)), f(&Self::unit(1, 1))] }
    }

    pub fn from_kraus(ch: &KrausChannel) -> Result<Self> {
        if ch.dim() != 2 {
            return Err(Error::arg("qubit process needs a 2-dimensional channel"));
        }
        Ok(Self::from_fn(|m| ch.apply_matrix(m)))
    }

    /// Process tomography from the images of `|0>, |1>, |+>, |+i>`.
    pub fn from_runner<F>(runner: F) -> Result<Self>
    where
        F: Fn(&DensityMatrix) -> Result<DensityMatrix>,
    {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let inputs = [
            PureState::qubit(r(1.0), r(0.0))?,
            PureState::qubit(r(0.0), r(1.0))?,
            PureState::qubit(r(s), r(s))?,
            PureState::qubit(r(s), c(0.0, s))?,
        ];
        let mut outs = Vec::with_capacity(4);
        for psi in &inputs {
            let o = runner(&DensityMatrix::from_pure(psi))?;
            if o.dim() != 2 {
                return Err(Error::arg("runner must return a single-qubit state"));
            }
            outs.push(o.into_matrix());
        }
        let (e00, e11, ep, epi) = (&outs[0], &outs[1], &outs[2], &outs[3]);
        // |0><1| = |+><+| + i|+i><+i| - (1+i)/2 (|0><0| + |1><1|)
        let e01 = ep + epi * c(0.0, 1.0) - (e00 + e11) * c(0.5, 0.5);
        let e10 = e01.adjoint();
        Ok(Self { images: [e00.clone(), e01, e10, e11.clone()] })
    }

    /// From a normalized Choi state on (reference, output).
    pub fn from_choi(choi: &DensityMatrix) -> Result<Self> {
        if choi.layout().dims() != [2, 2] {
            return Err(Error::arg("Choi state must live on two qubits"));
        }
        let j = choi.matrix();
        let block = |i: usize, k: usize| CMatrix::from_fn(2, 2, |a, b| j[(2 * i + a, 2 * k + b)] * r(2.0));
        Ok(Self { images: [block(0, 0), block(0, 1), block(1, 0), block(1, 1)] })
    }

    pub fn to_choi(&self) -> DensityMatrix {
        let mut j = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for k in 0..2 {
                let e = &self.images[2 * i + k];
                for a in 0..2 {
                    for b in 0..2 {
                        j[(2 * i + a, 2 * k + b)] = e[(a, b)] * r(0.5);
                    }
                }
            }
        }
        DensityMatrix::from_matrix_unchecked(HilbertLayout::qubits(2), j).expect("4x4")
    }

    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                out += &self.images[2 * i + j] * m[(i, j)];
            }
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != 2 {
            return Err(Error::arg("qubit process applied to a non-qubit state"));
        }
        Ok(rho.map_matrix(self.apply_matrix(rho.matrix())))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &QubitProcess) -> QubitProcess {
        QubitProcess {
            images: [
                other.apply_matrix(&self.images[0]),
                other.apply_matrix(&self.images[1]),
                other.apply_matrix(&self.images[2]),
                other.apply_matrix(&self.images[3]),
            ],
        }
    }

    pub fn power(&self, k: usize) -> QubitProcess {
        (0..k).fold(QubitProcess::identity(), |acc, _| acc.then(self))
    }

    pub fn entanglement_fidelity(&self) -> f64 {
        let s: C64 =
            (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| self.images[2 * k + l][(k, l)]).sum();
        s.re / 4.0
    }

    pub fn average_fidelity(&self) -> f64 {
        (2.0 * self.entanglement_fidelity() + 1.0) / 3.0
    }

    /// Image of `|i><j|`.
    pub fn image(&self, i: usize, j: usize) -> &CMatrix {
        &self.images[2 * i + j]
    }

    /// Conjugates the output by a unitary frame correction.
    pub fn corrected(&self, u: &CMatrix) -> QubitProcess {
        QubitProcess { images: self.images.clone().map(|e| u * e * u.adjoint()) }
    }
}
