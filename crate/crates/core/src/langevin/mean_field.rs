//! Classical mean-field flow before linearization, and its fixed point.
//!
//! State y = (Re a, Im a, q̃, p̃, Q, P):
//!
//! ```text
//! ȧ  = −(κ + iΔ_eff)·a + η·e^{iφ},   Δ_eff = Δ₀ − χ q̃ + ζ Q
//! q̃̇ = ω_m p̃          p̃̇ = −ω_m q̃ − γ p̃ + χ|a|²
//! Q̇  = Ω P            Ṗ  = −Ω Q − ζ|a|²
//! ```
//!
//! The pump phase φ is chosen so the stationary amplitude is real positive.

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::model::{Rates, SteadyState};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy)]
pub struct MeanFieldFlow {
    pub kappa: f64,
    pub gamma: f64,
    pub eta_re: f64,
    pub eta_im: f64,
    pub bare_detuning: f64,
    pub chi: f64,
    pub zeta: f64,
    pub omega_m: f64,
    pub omega_bogoliubov: f64,
}

/// Fixed point of the flow, in the units of [`SteadyState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalFixedPoint {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub alpha_sq: f64,
    pub q_scaled: f64,
    pub big_q: f64,
    pub effective_detuning: f64,
    pub newton_iterations: usize,
}

impl MeanFieldFlow {
    /// Flow whose effective detuning at the fixed point is `params.detuning`:
    /// Δ₀ = Δ + χ q̃_s − ζ Q_s.
    pub fn new(params: &SystemParams, rates: &Rates, steady: &SteadyState) -> Self {
        let bare = params.detuning + params.chi * steady.q_s_scaled - params.zeta * steady.big_q_s;
        let norm = (rates.kappa.powi(2) + params.detuning.powi(2)).sqrt();
        Self {
            kappa: rates.kappa,
            gamma: rates.gamma,
            eta_re: rates.eta * rates.kappa / norm,
            eta_im: rates.eta * params.detuning / norm,
            bare_detuning: bare,
            chi: params.chi,
            zeta: params.zeta,
            omega_m: params.omega_m,
            omega_bogoliubov: params.omega_bogoliubov,
        }
    }

    pub fn rhs(&self, y: &Vector6<f64>) -> Vector6<f64> {
        let (ar, ai, q, p, bq, bp) = (y[0], y[1], y[2], y[3], y[4], y[5]);
        let n = ar * ar + ai * ai;
        let det = self.bare_detuning - self.chi * q + self.zeta * bq;
        Vector6::new(
            -self.kappa * ar + det * ai + self.eta_re,
            -self.kappa * ai - det * ar + self.eta_im,
            self.omega_m * p,
            -self.omega_m * q - self.gamma * p + self.chi * n,
            self.omega_bogoliubov * bp,
            -self.omega_bogoliubov * bq - self.zeta * n,
        )
    }

    fn jacobian_fd(&self, y: &Vector6<f64>) -> Matrix6<f64> {
        let mut jac = Matrix6::zeros();
        for j in 0..6 {
            let h = 1e-6 * y[j].abs().max(1.0);
            let mut plus = *y;
            let mut minus = *y;
            plus[j] += h;
            minus[j] -= h;
            let col = (self.rhs(&plus) - self.rhs(&minus)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        jac
    }

    /// Damped Newton iteration on rhs(y) = 0, started from the empty
    /// cavity response a = η/(κ + iΔ₀) with the mechanics at rest.
    pub fn fixed_point(&self) -> Result<ClassicalFixedPoint> {
        let denom = self.kappa.powi(2) + self.bare_detuning.powi(2);
        let mut y = Vector6::new(
            (self.eta_re * self.kappa + self.eta_im * self.bare_detuning) / denom,
            (self.eta_im * self.kappa - self.eta_re * self.bare_detuning) / denom,
            0.0,
            0.0,
            0.0,
            0.0,
        );
        let mut f = self.rhs(&y);
        for iter in 1..=200 {
            let step = self
                .jacobian_fd(&y)
                .lu()
                .solve(&(-f))
                .ok_or_else(|| Error::Numerical("singular mean-field Jacobian".into()))?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial = y + step * lambda;
                let ft = self.rhs(&trial);
                if ft.norm() < f.norm() || ft.norm() == 0.0 {
                    y = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            let scale = y.norm().max(1.0);
            if !accepted || step.norm() * lambda <= 1e-15 * scale {
                if !accepted && step.norm() > 1e-9 * scale {
                    return Err(Error::Numerical("mean-field Newton line search stalled".into()));
                }
                return Ok(self.finish(&y, iter));
            }
        }
        Err(Error::Numerical("mean-field Newton iteration did not converge".into()))
    }

    fn finish(&self, y: &Vector6<f64>, iterations: usize) -> ClassicalFixedPoint {
        ClassicalFixedPoint {
            alpha_re: y[0],
            alpha_im: y[1],
            alpha_sq: y[0] * y[0] + y[1] * y[1],
            q_scaled: y[2],
            big_q: y[4],
            effective_detuning: self.bare_detuning - self.chi * y[2] + self.zeta * y[4],
            newton_iterations: iterations,
        }
    }
}

/// Fixed point of the mean-field flow at `params`.
pub fn classical_fixed_point(params: &SystemParams, rates: &Rates, steady: &SteadyState) -> Result<ClassicalFixedPoint> {
    MeanFieldFlow::new(params, rates, steady).fixed_point()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinearModel;

    fn check(params: &SystemParams) {
        let model = LinearModel::new(params).unwrap();
        let fp = classical_fixed_point(params, &model.rates, &model.steady).unwrap();
        let s = &model.steady;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        assert!(rel(fp.alpha_sq, s.alpha_s_sq) < 1e-6, "{} vs {}", fp.alpha_sq, s.alpha_s_sq);
        assert!(fp.alpha_im.abs() < 1e-6 * fp.alpha_re.abs());
        assert!(rel(fp.q_scaled, s.q_s_scaled) < 1e-6);
        assert!(rel(fp.big_q, s.big_q_s) < 1e-6);
        assert!((fp.effective_detuning - params.detuning).abs() < 1e-6 * params.detuning.abs());
    }

    #[test]
    fn newton_fixed_point_matches_closed_form() {
        check(&SystemParams::reference());
        let mut p = SystemParams::reference();
        p.chi = 40.0;
        p.zeta = 160.0;
        p.detuning = 0.7 * p.omega_m;
        check(&p);
    }

    #[test]
    fn flow_vanishes_at_closed_form_point() {
        let p = SystemParams::reference();
        let model = LinearModel::new(&p).unwrap();
        let flow = MeanFieldFlow::new(&p, &model.rates, &model.steady);
        let s = &model.steady;
        let y = Vector6::new(s.alpha_s, 0.0, s.q_s_scaled, 0.0, s.big_q_s, 0.0);
        let f = flow.rhs(&y);
        let scale = model.rates.kappa * s.alpha_s;
        assert!(f.amax() < 1e-9 * scale, "{f}");
    }
}
