//! Sparse LU with partial pivoting.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::MatMut;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// LU factors of a square sparse matrix, reusable for many right-hand sides.
pub struct Factorization {
    lu: Lu<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Factorization(n = {})", self.n)
    }
}

impl Factorization {
    /// Factorizes `a`. Structural singularity and zero pivots both raise
    /// `SingularMatrix`.
    pub fn new(a: &CsrMatrix) -> Result<Factorization> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Argument(format!("matrix is {}×{}, not square", n, a.ncols())));
        }
        let trip: Vec<_> = a.triplets().map(|(row, col, val)| Triplet { row, col, val }).collect();
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Numeric(format!("sparse matrix construction failed: {e:?}")))?;
        let sym = SymbolicLu::try_new(m.symbolic())
            .map_err(|e| Error::Numeric(format!("symbolic factorization failed: {e:?}")))?;
        let lu = Lu::try_new_with_symbolic(sym, m.as_ref()).map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::SingularMatrix { pivot: index },
            LuError::Generic(g) => Error::Numeric(format!("factorization failed: {g:?}")),
        })?;
        let f = Factorization { lu, n };
        f.probe(a)?;
        Ok(f)
    }

    // Zero pivots do not fail the numeric phase; a solve against a known
    // right-hand side exposes them.
    fn probe(&self, a: &CsrMatrix) -> Result<()> {
        let r: Vec<f64> = (0..self.n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
        let b = a.mul_vec(&r);
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        if let Some(p) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { pivot: p });
        }
        let res = a.mul_vec(&x);
        let num = res.iter().zip(&b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        let den = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        if !(num <= 1e-6 * den) {
            let p = res
                .iter()
                .zip(&b)
                .map(|(u, v)| (u - v).abs())
                .enumerate()
                .fold((0, 0.0), |m, (i, d)| if d > m.1 { (i, d) } else { m })
                .0;
            return Err(Error::SingularMatrix { pivot: p });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        self.lu.solve_in_place(MatMut::from_column_major_slice_mut(b, n, 1));
    }

    /// Solves `A x = b`; a non-finite result raises `Numeric`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Argument(format!("rhs length {} for dimension {}", b.len(), self.n)));
        }
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite solution entry {i}")));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let f = Factorization::new(&CsrMatrix::identity(4)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn singular_saddle_block() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(Factorization::new(&a), Err(Error::SingularMatrix { .. })));
        let z = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(Factorization::new(&z), Err(Error::SingularMatrix { .. })));
    }
}
