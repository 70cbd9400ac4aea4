use crate::error::Result;
use crate::quantum::{c, r, CMatrix, HilbertLayout};

/// Kronecker product, `a`'s indices slowest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[r(0.0), c(0.0, -1.0), c(0.0, 1.0), r(0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r(-1.0)])
}

/// Ladder lowering operator on a `d`-level mode: `|k> -> sqrt(k)|k-1>`.
/// For `d = 2` this is the qubit `σ⁻ = |0><1|`.
pub fn lowering(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for k in 1..d {
        m[(k - 1, k)] = r((k as f64).sqrt());
    }
    m
}

pub fn raising(d: usize) -> CMatrix {
    lowering(d).adjoint()
}

/// Partial trace of an operator over every subsystem not in `keep`.
pub fn partial_trace_matrix(m: &CMatrix, layout: &HilbertLayout, keep: &[usize]) -> Result<CMatrix> {
    let keep = layout.normalize_keep(keep)?;
    let dims = layout.dims();
    let n = layout.total_dim();
    assert_eq!(m.nrows(), n);

    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    // Flat index -> (kept index, traced index).
    let mut kidx = vec![0usize; n];
    let mut tidx = vec![0usize; n];
    for i in 0..n {
        let digits = layout.digits(i);
        let (mut a, mut b) = (0, 0);
        for (s, (&x, &d)) in digits.iter().zip(dims).enumerate() {
            if keep.binary_search(&s).is_ok() {
                a = a * d + x;
            } else {
                b = b * d + x;
            }
        }
        kidx[i] = a;
        tidx[i] = b;
    }

    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for i in 0..n {
        for j in 0..n {
            if tidx[i] == tidx[j] {
                out[(kidx[i], kidx[j])] += m[(i, j)];
            }
        }
    }
    Ok(out)
}
