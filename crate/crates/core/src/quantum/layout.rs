use crate::error::{Error, Result};
use crate::quantum::CMatrix;

/// Ordered tensor-product structure. The leftmost subsystem varies slowest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    dims: Vec<usize>,
    total: usize,
}

impl HilbertLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::arg("layout needs at least one subsystem"));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::arg(format!("subsystem dimension {d} < 2")));
        }
        let total = dims.iter().product();
        Ok(Self { dims, total })
    }

    pub fn qubit() -> Self {
        Self { dims: vec![2], total: 2 }
    }

    pub fn qubits(n: usize) -> Self {
        assert!(n > 0);
        Self { dims: vec![2; n], total: 1 << n }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn concat(&self, other: &HilbertLayout) -> HilbertLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        HilbertLayout { total: self.total * other.total, dims }
    }

    /// Layout of the kept subsystems, in their original order.
    pub fn subset(&self, keep: &[usize]) -> Result<HilbertLayout> {
        let keep = self.normalize_keep(keep)?;
        HilbertLayout::new(keep.iter().map(|&k| self.dims[k]).collect())
    }

    pub(crate) fn normalize_keep(&self, keep: &[usize]) -> Result<Vec<usize>> {
        if keep.is_empty() {
            return Err(Error::arg("keep set is empty"));
        }
        let mut k = keep.to_vec();
        k.sort_unstable();
        k.dedup();
        if let Some(&bad) = k.iter().find(|&&i| i >= self.dims.len()) {
            return Err(Error::arg(format!("subsystem index {bad} out of range for {} subsystems", self.dims.len())));
        }
        Ok(k)
    }

    /// Mixed-radix digits of a flat basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on `subsystem`.
    pub fn embed(&self, op: &CMatrix, subsystem: usize) -> Result<CMatrix> {
        let d = *self.dims.get(subsystem).ok_or_else(|| Error::arg(format!("subsystem {subsystem} out of range")))?;
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::arg(format!(
                "operator is {}x{}, subsystem {subsystem} has dimension {d}",
                op.nrows(),
                op.ncols()
            )));
        }
        let left: usize = self.dims[..subsystem].iter().product();
        let right: usize = self.dims[subsystem + 1..].iter().product();
        let out = CMatrix::identity(left, left).kronecker(op).kronecker(&CMatrix::identity(right, right));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_dims() {
        assert!(HilbertLayout::new(vec![2, 1]).is_err());
        assert!(HilbertLayout::new(vec![]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let l = HilbertLayout::new(vec![2, 3, 2]).unwrap();
        assert_eq!(l.total_dim(), 12);
        for i in 0..12 {
            assert_eq!(l.index_of(&l.digits(i)), i);
        }
        assert_eq!(l.digits(5), vec![0, 2, 1]);
    }

    #[test]
    fn subset_validates_indices() {
        let l = HilbertLayout::new(vec![2, 3, 2]).unwrap();
        assert_eq!(l.subset(&[2, 0]).unwrap().dims(), &[2, 2]);
        assert!(l.subset(&[3]).is_err());
        assert!(l.subset(&[]).is_err());
    }
}
