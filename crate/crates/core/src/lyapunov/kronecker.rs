use nalgebra::DMatrix;

use super::LyapunovSolver;
use crate::error::{Error, Result};
use crate::registry::Named;

/// Vectorized solve: (I⊗A + A⊗I)·vec(X) = −vec(Q) by LU with partial pivoting.
pub struct KroneckerSum;

impl Named for KroneckerSum {
    fn name(&self) -> &'static str {
        "kronecker"
    }
}

impl LyapunovSolver for KroneckerSum {
    fn solve(&self, a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = a.nrows();
        let eye = DMatrix::<f64>::identity(n, n);
        let op = eye.kronecker(a) + a.kronecker(&eye);
        // column-major storage is vec()
        let rhs = DMatrix::from_iterator(n * n, 1, q.iter().map(|v| -v));
        let sol = op
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("Kronecker-sum system is singular".into()))?;
        Ok(DMatrix::from_iterator(n, n, sol.iter().copied()))
    }
}
