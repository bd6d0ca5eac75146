//! Phase-space operations on 2n×2n Gaussian covariance matrices ordered as
//! (x₁, p₁, x₂, p₂, …), vacuum variance 1/2.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lyapunov::CovarianceMatrix;
use crate::model::Mode;

/// Tolerance on the physicality condition ν ≥ 1/2.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Direct sum of n copies of [[0, 1], [−1, 0]].
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// Rows/columns of `v` belonging to `modes`, in basis order.
pub fn reduced_covariance(v: &CovarianceMatrix, modes: &[Mode]) -> Result<DMatrix<f64>> {
    if modes.is_empty() {
        return Err(Error::param("modes", "reduced covariance needs at least one mode"));
    }
    let mut sorted = modes.to_vec();
    sorted.sort();
    sorted.dedup();
    let idx: Vec<usize> = sorted.iter().flat_map(|m| [m.offset(), m.offset() + 1]).collect();
    let full = v.matrix();
    Ok(DMatrix::from_fn(idx.len(), idx.len(), |i, j| full[(idx[i], idx[j])]))
}

/// Momentum inversion P·V·P on the local modes listed in `flipped`.
pub fn partial_transpose(v: &DMatrix<f64>, flipped: &[usize]) -> DMatrix<f64> {
    let mut out = v.clone();
    for &m in flipped {
        let p = 2 * m + 1;
        out.row_mut(p).neg_mut();
        out.column_mut(p).neg_mut();
    }
    out
}

/// Applies a phase-space rotation by `theta` to local mode `mode`.
pub fn rotate_mode(v: &DMatrix<f64>, mode: usize, theta: f64) -> DMatrix<f64> {
    let mut r = DMatrix::<f64>::identity(v.nrows(), v.ncols());
    let (s, c) = theta.sin_cos();
    let i = 2 * mode;
    r[(i, i)] = c;
    r[(i, i + 1)] = s;
    r[(i + 1, i)] = -s;
    r[(i + 1, i + 1)] = c;
    &r * v * r.transpose()
}

fn check_shape(v: &DMatrix<f64>) -> Result<usize> {
    let n = v.nrows();
    if n == 0 || !n.is_multiple_of(2) || v.ncols() != n {
        return Err(Error::NonPhysical(format!("covariance must be 2n×2n, got {}×{}", n, v.ncols())));
    }
    let asym = (v - v.transpose()).abs().max();
    if asym > 1e-12 * v.abs().max().max(1.0) {
        return Err(Error::NonPhysical(format!("covariance is not symmetric (max |V − Vᵀ| = {asym:e})")));
    }
    Ok(n / 2)
}

/// Symplectic eigenvalues of a positive-definite covariance, ascending.
///
/// With S = V^{1/2}, the antisymmetric matrix S·J·S has eigenvalues ±iν_k,
/// so the symmetric matrix (SJS)ᵀ(SJS) has every ν_k² twice. That route is
/// accurate relative to the largest ν only, so values below 1 are taken as
/// reciprocals of the spectrum of V⁻¹, which is {1/ν_k}.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = check_shape(v)?;
    let direct = spectrum_via_sqrt(v, n)?;
    if direct.iter().all(|nu| *nu >= 1.0) {
        return Ok(direct);
    }
    let inv = v
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NonPhysical("covariance is not positive definite".into()))?
        .inverse();
    let inv = 0.5 * (&inv + inv.transpose());
    let reciprocal = spectrum_via_sqrt(&inv, n)?;
    Ok(direct
        .iter()
        .enumerate()
        .map(|(k, nu)| if *nu < 1.0 { 1.0 / reciprocal[n - 1 - k] } else { *nu })
        .collect())
}

fn spectrum_via_sqrt(v: &DMatrix<f64>, n: usize) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(v.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if !(min > 0.0) {
            return Err(Error::NonPhysical(format!("covariance is not positive definite (eigenvalue {min:e})")));
        }
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let s = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let a = &s * symplectic_form(n) * &s;
    let m = a.transpose() * &a;
    let m = 0.5 * (&m + m.transpose());
    let sq = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut vals: Vec<f64> = sq.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

/// Closed form for two modes: ν²_+ = (Σ + sqrt(Σ² − 4 det V)) / 2 with
/// Σ = det A + det B + 2 det C for V = [[A, C], [Cᵀ, B]], and
/// ν_− = sqrt(det V)/ν_+ to avoid the cancellation in the minus branch.
pub fn two_mode_symplectic_eigenvalues(v: &Matrix4<f64>) -> [f64; 2] {
    let a = v.fixed_view::<2, 2>(0, 0).determinant();
    let b = v.fixed_view::<2, 2>(2, 2).determinant();
    let c = v.fixed_view::<2, 2>(0, 2).determinant();
    let sigma = a + b + 2.0 * c;
    let det = v.determinant();
    let disc = (sigma * sigma - 4.0 * det).max(0.0).sqrt();
    let plus = (0.5 * (sigma + disc)).max(0.0).sqrt();
    let minus = if plus > 0.0 { det.max(0.0).sqrt() / plus } else { 0.0 };
    [minus.min(plus), plus]
}

/// Smallest symplectic eigenvalue.
pub fn min_symplectic(v: &DMatrix<f64>) -> Result<f64> {
    Ok(symplectic_eigenvalues(v)?[0])
}

/// Checks ν_min ≥ 1/2 − PHYSICALITY_TOL.
pub fn check_physical(v: &DMatrix<f64>) -> Result<f64> {
    let nu = min_symplectic(v)?;
    if nu < 0.5 - PHYSICALITY_TOL {
        return Err(Error::NonPhysical(format!("smallest symplectic eigenvalue {nu} < 1/2")));
    }
    Ok(nu)
}

/// Two-mode squeezed vacuum with squeezing `r`.
pub fn two_mode_squeezed(r: f64) -> DMatrix<f64> {
    let c = 0.5 * (2.0 * r).cosh();
    let s = 0.5 * (2.0 * r).sinh();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    )
}

/// Random physical covariance of `n_modes` modes: a thermal state with
/// ν_k ∈ [1/2, 3) sent through random rotations, single-mode squeezers
/// (|r| < 1) and beam splitters.
pub fn random_physical<R: Rng + ?Sized>(n_modes: usize, rng: &mut R) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut s = DMatrix::<f64>::identity(dim, dim);
    for _ in 0..2 {
        for k in 0..n_modes {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let r: f64 = rng.random_range(-1.0..1.0);
            let (sn, cs) = f64::sin_cos(theta);
            let mut local = DMatrix::<f64>::identity(dim, dim);
            local[(2 * k, 2 * k)] = cs * r.exp();
            local[(2 * k, 2 * k + 1)] = sn * r.exp();
            local[(2 * k + 1, 2 * k)] = -sn * (-r).exp();
            local[(2 * k + 1, 2 * k + 1)] = cs * (-r).exp();
            s = local * s;
        }
        for i in 0..n_modes {
            for j in i + 1..n_modes {
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                let (sn, cs) = phi.sin_cos();
                let mut bs = DMatrix::<f64>::identity(dim, dim);
                for q in 0..2 {
                    bs[(2 * i + q, 2 * i + q)] = cs;
                    bs[(2 * i + q, 2 * j + q)] = sn;
                    bs[(2 * j + q, 2 * i + q)] = -sn;
                    bs[(2 * j + q, 2 * j + q)] = cs;
                }
                s = bs * s;
            }
        }
    }
    let mut thermal = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..n_modes {
        let nu = rng.random_range(0.5..3.0);
        thermal[(2 * k, 2 * k)] = nu;
        thermal[(2 * k + 1, 2 * k + 1)] = nu;
    }
    let v = &s * thermal * s.transpose();
    0.5 * (&v + v.transpose())
}
