use crate::error::{Error, Result};
use crate::lindblad::PhysicalParams;
use crate::quantum::{kron, lowering, r, CMatrix, HilbertLayout};
use serde::{Deserialize, Serialize};

/// Level structure of each chip qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitModel {
    /// `|0>, |1>` coupled directly to the cavity through `σ⁻c† + h.c.`
    TwoLevel,
    /// `|0>, |1>, |E>`: the drive couples `|1>↔|E>`, the cavity couples
    /// `|E>↔|0>` at the fixed rate `g0`, and `γ0` empties `|E>` into `|0>`.
    Lambda,
}

impl QubitModel {
    pub fn dim(self) -> usize {
        match self {
            QubitModel::TwoLevel => 2,
            QubitModel::Lambda => 3,
        }
    }

    /// Excitation number carried by each level.
    pub(crate) fn excitation(self, level: usize) -> usize {
        usize::from(level > 0)
    }
}

/// Single-hop composite (optional ancilla, sender, cavity, receiver) with its
/// drive operators and collapse channels.
#[derive(Clone, Debug)]
pub struct HopSystem {
    pub layout: HilbertLayout,
    pub model: QubitModel,
    pub ancilla: bool,
    pub cavity_dim: usize,
    /// Time-independent Hamiltonian.
    pub h_static: CMatrix,
    /// Operators multiplied by the sender and receiver drive strengths.
    pub h_drive: [CMatrix; 2],
    /// `(L, rate)` pairs of the dissipator.
    pub collapse: Vec<(CMatrix, f64)>,
}

impl HopSystem {
    pub fn new(
        params: &PhysicalParams,
        model: QubitModel,
        ancilla: bool,
        coherence: bool,
        cavity_dim: usize,
    ) -> Result<Self> {
        params.validate()?;
        if cavity_dim < 2 {
            return Err(Error::arg("cavity cutoff must be ≥ 2"));
        }
        let q = model.dim();
        let mut dims = Vec::with_capacity(4);
        if ancilla {
            dims.push(2);
        }
        dims.extend([q, cavity_dim, q]);
        let layout = HilbertLayout::new(dims)?;
        let off = usize::from(ancilla);
        let (ia, ic, ib) = (off, off + 1, off + 2);
        let emb = |op: &CMatrix, s: usize| layout.embed(op, s);

        let cav = emb(&lowering(cavity_dim), ic)?;
        let cav_dag = cav.adjoint();
        let n = layout.total_dim();
        let mut h_static = CMatrix::zeros(n, n);
        let mut collapse = Vec::new();
        let h_drive;

        match model {
            QubitModel::TwoLevel => {
                let sa = emb(&lowering(2), ia)?;
                let sb = emb(&lowering(2), ib)?;
                h_drive = [sa.adjoint() * &cav + &cav_dag * &sa, sb.adjoint() * &cav + &cav_dag * &sb];
                collapse.push((sa, params.gamma0));
                collapse.push((sb, params.gamma0));
            }
            QubitModel::Lambda => {
                let lower_e = unit(3, 0, 2);
                let e_to_1 = unit(3, 2, 1);
                let xa = emb(&(&e_to_1 + e_to_1.adjoint()), ia)?;
                let xb = emb(&(&e_to_1 + e_to_1.adjoint()), ib)?;
                h_drive = [xa, xb];
                for s in [ia, ib] {
                    let m = emb(&lower_e, s)?;
                    h_static += (m.adjoint() * &cav + &cav_dag * &m) * r(params.g0);
                    collapse.push((m, params.gamma0));
                }
            }
        }
        collapse.push((cav, params.kappa));

        if coherence {
            let deph = params.pure_dephasing_rate()?;
            for s in [ia, ib] {
                let sm = emb(&unit(q, 0, 1), s)?;
                collapse.push((sm, 1.0 / params.t1_us));
                let mut z = CMatrix::zeros(q, q);
                z[(0, 0)] = r(1.0);
                z[(1, 1)] = r(-1.0);
                // Λ[√(r/2) Z] damps coherences at rate r.
                collapse.push((emb(&z, s)?, 0.5 * deph));
            }
        }
        collapse.retain(|(_, rate)| *rate > 0.0);

        Ok(Self { layout, model, ancilla, cavity_dim, h_static, h_drive, collapse })
    }

    pub fn sender(&self) -> usize {
        usize::from(self.ancilla)
    }

    pub fn cavity(&self) -> usize {
        self.sender() + 1
    }

    pub fn receiver(&self) -> usize {
        self.sender() + 2
    }

    /// Hamiltonian at drive strengths `(fa, fb)`.
    pub fn hamiltonian(&self, fa: f64, fb: f64) -> CMatrix {
        &self.h_static + &self.h_drive[0] * r(fa) + &self.h_drive[1] * r(fb)
    }

    /// Total excitation number operator (cavity photons plus excited levels).
    pub fn excitation_operator(&self) -> CMatrix {
        let n = self.layout.total_dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = r(self.excitations(i) as f64);
        }
        m
    }

    pub(crate) fn excitations(&self, index: usize) -> usize {
        let d = self.layout.digits(index);
        let off = self.sender();
        self.model.excitation(d[off]) + d[off + 1] + self.model.excitation(d[off + 2])
    }

    /// Basis states sitting at the top cavity level while another excitation
    /// could still be emitted into the cavity.
    pub(crate) fn at_truncation_edge(&self, index: usize) -> bool {
        let d = self.layout.digits(index);
        d[self.cavity()] == self.cavity_dim - 1 && self.excitations(index) > self.cavity_dim - 1
    }
}

fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = r(1.0);
    m
}

/// Interaction Hamiltonian `G_A(σ_A⁺c + c†σ_A⁻) + G_B(σ_B⁺c + c†σ_B⁻)` on a
/// `(qubit, cavity, qubit)` layout.
pub fn build_hamiltonian(g_a: f64, g_b: f64, layout: &HilbertLayout) -> Result<CMatrix> {
    let dims = layout.dims();
    if dims.len() != 3 || dims[0] != 2 || dims[2] != 2 {
        return Err(Error::arg(format!("expected a (2, n, 2) layout, got {dims:?}")));
    }
    let n = dims[1];
    let sm = lowering(2);
    let id2 = CMatrix::identity(2, 2);
    let c_op = kron(&kron(&id2, &lowering(n)), &id2);
    let sa = kron(&kron(&sm, &CMatrix::identity(n, n)), &id2);
    let sb = kron(&kron(&id2, &CMatrix::identity(n, n)), &sm);
    let ha = sa.adjoint() * &c_op + c_op.adjoint() * &sa;
    let hb = sb.adjoint() * &c_op + c_op.adjoint() * &sb;
    Ok(ha * r(g_a) + hb * r(g_b))
}
