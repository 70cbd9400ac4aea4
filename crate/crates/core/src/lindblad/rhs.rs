use crate::error::{Error, Result};
use crate::quantum::{c, r, CMatrix, DensityMatrix};

/// `dρ/dt = -i[H, ρ] + Σ rate (LρL† - ½{L†L, ρ})`.
pub fn lindblad_rhs(rho: &DensityMatrix, h: &CMatrix, collapse: &[(CMatrix, f64)]) -> Result<CMatrix> {
    let n = rho.dim();
    if h.shape() != (n, n) {
        return Err(Error::arg(format!("Hamiltonian is {:?}, state is {n}x{n}", h.shape())));
    }
    let rho = rho.matrix();
    let mut out = (h * rho - rho * h) * c(0.0, -1.0);
    for (l, rate) in collapse {
        if l.shape() != (n, n) {
            return Err(Error::arg(format!("collapse operator is {:?}, state is {n}x{n}", l.shape())));
        }
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += (l * rho * &ld - (&ldl * rho + rho * &ldl) * r(0.5)) * r(*rate);
    }
    Ok(out)
}
