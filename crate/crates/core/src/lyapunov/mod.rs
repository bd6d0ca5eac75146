//! Stationary covariance from the Lyapunov equation K·V + V·Kᵀ = −D.

mod bartels_stewart;
mod kronecker;

use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix2, Matrix6};

use crate::error::{Error, Result};
use crate::model::{stability, DiffusionMatrix, DriftMatrix, Mode};
use crate::registry::{Named, Registry};

pub use bartels_stewart::BartelsStewart;
pub use kronecker::KroneckerSum;

/// A dense solver for A·X + X·Aᵀ = −Q with A Hurwitz.
pub trait LyapunovSolver: Named + Send + Sync {
    fn solve(&self, a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>>;
}

/// Registry holding the built-in solvers; `kronecker` is the default.
pub fn solvers() -> Registry<dyn LyapunovSolver> {
    let mut reg: Registry<dyn LyapunovSolver> = Registry::new("lyapunov solver");
    reg.register(Box::new(KroneckerSum))
        .register(Box::new(BartelsStewart));
    reg
}

/// Relative residual bound every accepted solution must meet.
pub const RESIDUAL_RTOL: f64 = 1e-10;

/// Symmetric 6×6 stationary covariance over (δx, δy, δq̃, δp̃, δQ, δP).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix6<f64>);

impl CovarianceMatrix {
    /// Wraps `m`, symmetrizing it.
    pub fn new(m: Matrix6<f64>) -> Self {
        Self(0.5 * (m + m.transpose()))
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(6, 6, self.0.iter().copied())
    }

    /// 2×2 block between the quadratures of `row` and `col`.
    pub fn block(&self, row: Mode, col: Mode) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(row.offset(), col.offset()).into_owned()
    }

    /// Row-major plain text, one row per line, 17 significant digits.
    pub fn to_text(&self) -> String {
        matrix_to_text(&self.to_dmatrix())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let m = matrix_from_text(text)?;
        if m.nrows() != 6 {
            return Err(Error::Format(format!("expected 6×6 matrix, got {}×{}", m.nrows(), m.ncols())));
        }
        Ok(Self(Matrix6::from_iterator(m.iter().copied())))
    }
}

pub fn matrix_to_text(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

pub fn matrix_from_text(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Format(format!("bad entry `{t}`: {e}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format("matrix text must be square and non-empty".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// ‖A·X + X·Aᵀ + Q‖_F.
pub fn residual(a: &DMatrix<f64>, x: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    (a * x + x * a.transpose() + q).norm()
}

/// ‖K·V + V·Kᵀ + D‖_F for a model and a candidate covariance.
pub fn stationary_residual(k: &DriftMatrix, d: &DiffusionMatrix, v: &CovarianceMatrix) -> f64 {
    (k.0 * v.0 + v.0 * k.0.transpose() + d.matrix).norm()
}

fn to_dmatrix6(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_iterator(6, 6, m.iter().copied())
}

/// Stationary covariance of the linear Langevin system.
///
/// Refuses non-Hurwitz drift with [`Error::NoStationaryState`], and rejects
/// any solution whose residual exceeds `RESIDUAL_RTOL·max(1, ‖D‖_F)`.
pub fn solve_lyapunov(k: &DriftMatrix, d: &DiffusionMatrix, solver: &dyn LyapunovSolver) -> Result<CovarianceMatrix> {
    let st = stability(k)?;
    if !st.stable {
        return Err(Error::NoStationaryState { margin: st.margin });
    }
    let a = to_dmatrix6(&k.0);
    let q = to_dmatrix6(&d.matrix);
    let x = solver.solve(&a, &q)?;
    let x = 0.5 * (&x + x.transpose());
    let res = residual(&a, &x, &q);
    let bound = RESIDUAL_RTOL * q.norm().max(1.0);
    if !(res <= bound) {
        return Err(Error::Numerical(format!(
            "{} Lyapunov residual {res:e} exceeds {bound:e}",
            solver.name()
        )));
    }
    Ok(CovarianceMatrix(Matrix6::from_iterator(x.iter().copied())))
}
