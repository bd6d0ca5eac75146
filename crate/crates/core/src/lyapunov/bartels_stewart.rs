use nalgebra::{linalg::Schur, DMatrix};

use super::LyapunovSolver;
use crate::error::{Error, Result};
use crate::registry::Named;

/// Bartels–Stewart: reduce A to real Schur form A = U·T·Uᵀ, solve the
/// quasi-triangular equation T·Y + Y·Tᵀ = −Uᵀ·Q·U block by block, and map
/// back with X = U·Y·Uᵀ.
pub struct BartelsStewart;

impl Named for BartelsStewart {
    fn name(&self) -> &'static str {
        "bartels-stewart"
    }
}

/// Start index and size of each diagonal block of a quasi-triangular matrix.
fn diagonal_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        let two = i + 1 < n && {
            let sub = t[(i + 1, i)].abs();
            sub > f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs())
        };
        let size = if two { 2 } else { 1 };
        blocks.push((i, size));
        i += size;
    }
    blocks
}

impl LyapunovSolver for BartelsStewart {
    fn solve(&self, a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = a.nrows();
        let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numerical("real Schur iteration did not converge".into()))?;
        let (u, t) = schur.unpack();
        let c = -(u.transpose() * q * &u);
        let blocks = diagonal_blocks(&t);
        let mut y = DMatrix::<f64>::zeros(n, n);

        for &(j0, q_len) in blocks.iter().rev() {
            for &(i0, p_len) in blocks.iter().rev() {
                let mut rhs = c.view((i0, j0), (p_len, q_len)).into_owned();
                let below = i0 + p_len;
                if below < n {
                    rhs -= t.view((i0, below), (p_len, n - below)) * y.view((below, j0), (n - below, q_len));
                }
                let right = j0 + q_len;
                if right < n {
                    rhs -= y.view((i0, right), (p_len, n - right)) * t.view((j0, right), (q_len, n - right)).transpose();
                }
                let t_ii = t.view((i0, i0), (p_len, p_len));
                let t_jj = t.view((j0, j0), (q_len, q_len));
                let op = DMatrix::<f64>::identity(q_len, q_len).kronecker(&t_ii.into_owned())
                    + t_jj.into_owned().kronecker(&DMatrix::<f64>::identity(p_len, p_len));
                let vec_rhs = DMatrix::from_iterator(p_len * q_len, 1, rhs.iter().copied());
                let sol = op
                    .lu()
                    .solve(&vec_rhs)
                    .ok_or_else(|| Error::Numerical("singular Schur block system".into()))?;
                y.view_mut((i0, j0), (p_len, q_len))
                    .copy_from(&DMatrix::from_iterator(p_len, q_len, sol.iter().copied()));
            }
        }
        Ok(&u * y * u.transpose())
    }
}
