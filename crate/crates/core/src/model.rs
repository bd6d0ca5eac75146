//! Effective linear model: derived rates, classical steady state, drift and
//! diffusion matrices of the fluctuation dynamics, and stability analysis.
//!
//! Fluctuation basis, in order: cavity (δx, δy), mirror (δq̃, δp̃),
//! Bogoliubov mode (δQ, δP). All quadratures are dimensionless with vacuum
//! variance 1/2.

use nalgebra::{Complex, Matrix6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::units::{BOLTZMANN, HBAR, SPEED_OF_LIGHT, TWO_PI};

/// One of the three bosonic modes, in basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// Cavity field.
    C,
    /// Mechanical mirror.
    M,
    /// Bogoliubov mode of the condensate.
    A,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::C, Mode::M, Mode::A];

    /// Row/column of the position-like quadrature; momentum is `offset() + 1`.
    pub fn offset(self) -> usize {
        match self {
            Mode::C => 0,
            Mode::M => 2,
            Mode::A => 4,
        }
    }

    pub fn label(self) -> char {
        match self {
            Mode::C => 'C',
            Mode::M => 'M',
            Mode::A => 'A',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// Cavity decay κ = πc/(2LF).
    pub kappa: f64,
    /// Mechanical damping γ = ω_m/Q.
    pub gamma: f64,
    /// Pump strength η = sqrt(2κR/(ħω_L)).
    pub eta: f64,
    /// Thermal occupation of the mechanical mode.
    pub n_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// Intracavity photon number |α_s|².
    pub alpha_s_sq: f64,
    /// Real positive intracavity amplitude.
    pub alpha_s: f64,
    /// Mean mirror displacement in units of sqrt(ħ/(m ω_m)).
    pub q_s_scaled: f64,
    /// Mean Bogoliubov position quadrature.
    pub big_q_s: f64,
}

impl SteadyState {
    /// Mean mirror displacement in metres.
    pub fn q_s_metres(&self, params: &SystemParams) -> f64 {
        self.q_s_scaled * (HBAR / (params.mass * params.omega_m)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix6<f64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix {
    pub matrix: Matrix6<f64>,
    pub n_bar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub stable: bool,
    /// −max Re λ over the spectrum of K, rad/s.
    pub margin: f64,
    pub eigenvalues: Vec<Complex<f64>>,
}

/// Bose occupation 1/(exp(ħω/(k_B T)) − 1); zero for T → 0⁺.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    let x = HBAR * omega / (BOLTZMANN * temperature);
    1.0 / x.exp_m1()
}

pub fn derive_rates(params: &SystemParams) -> Result<Rates> {
    params.validate()?;
    let kappa = std::f64::consts::PI * SPEED_OF_LIGHT / (2.0 * params.cavity_length * params.finesse);
    let gamma = params.omega_m / params.quality;
    let omega_laser = TWO_PI * SPEED_OF_LIGHT / params.laser_wavelength;
    let eta = (2.0 * kappa * params.pump_power / (HBAR * omega_laser)).sqrt();
    let n_bar = thermal_occupation(params.omega_m, params.temperature);
    Ok(Rates {
        kappa,
        gamma,
        eta,
        n_bar,
    })
}

pub fn steady_state(params: &SystemParams, rates: &Rates) -> SteadyState {
    let alpha_s_sq = rates.eta * rates.eta / (params.detuning * params.detuning + rates.kappa * rates.kappa);
    SteadyState {
        alpha_s_sq,
        alpha_s: alpha_s_sq.sqrt(),
        q_s_scaled: params.chi * alpha_s_sq / params.omega_m,
        big_q_s: -params.zeta * alpha_s_sq / params.omega_bogoliubov,
    }
}

pub fn drift_matrix(params: &SystemParams, rates: &Rates, steady: &SteadyState) -> DriftMatrix {
    let kappa = rates.kappa;
    let delta = params.detuning;
    let g_m = std::f64::consts::SQRT_2 * params.chi * steady.alpha_s;
    let g_a = std::f64::consts::SQRT_2 * params.zeta * steady.alpha_s;
    let wm = params.omega_m;
    let om = params.omega_bogoliubov;
    #[rustfmt::skip]
    let k = Matrix6::new(
        -kappa, delta, 0.0, 0.0,          0.0,  0.0,
        -delta, -kappa, g_m, 0.0,         -g_a,  0.0,
        0.0,    0.0,    0.0, wm,          0.0,  0.0,
        g_m,    0.0,    -wm, -rates.gamma, 0.0,  0.0,
        0.0,    0.0,    0.0, 0.0,          0.0,  om,
        -g_a,   0.0,    0.0, 0.0,          -om, -params.atom_damping,
    );
    DriftMatrix(k)
}

pub fn diffusion_matrix(params: &SystemParams, rates: &Rates) -> DiffusionMatrix {
    let mut d = Matrix6::zeros();
    d[(0, 0)] = rates.kappa;
    d[(1, 1)] = rates.kappa;
    d[(3, 3)] = rates.gamma * (2.0 * rates.n_bar + 1.0);
    d[(5, 5)] = params.atom_damping;
    DiffusionMatrix {
        matrix: d,
        n_bar: rates.n_bar,
    }
}

/// Relative size (w.r.t. ‖K‖_F) below which a real part counts as zero.
const HURWITZ_RTOL: f64 = 1e-12;

/// Hurwitz test: stable iff every eigenvalue of K has negative real part.
pub fn stability(k: &DriftMatrix) -> Result<Stability> {
    let schur = nalgebra::linalg::Schur::try_new(k.0, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration for drift spectrum did not converge".into()))?;
    let eigenvalues: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    let max_re = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = -max_re;
    let stable = margin > HURWITZ_RTOL * k.0.norm();
    Ok(Stability {
        stable,
        margin,
        eigenvalues,
    })
}

/// Everything downstream consumers need about one parameter point.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub params: SystemParams,
    pub rates: Rates,
    pub steady: SteadyState,
    pub drift: DriftMatrix,
    pub diffusion: DiffusionMatrix,
    /// False when √2·χ·α_s or √2·ζ·α_s exceeds κ/2.
    pub backaction_small: bool,
}

impl LinearModel {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let rates = derive_rates(params)?;
        let steady = steady_state(params, &rates);
        let drift = drift_matrix(params, &rates, &steady);
        let diffusion = diffusion_matrix(params, &rates);
        let g = std::f64::consts::SQRT_2 * steady.alpha_s * params.chi.max(params.zeta);
        let backaction_small = g <= 0.5 * rates.kappa;
        if !backaction_small {
            log::warn!(
                "coupling sqrt(2)*max(chi,zeta)*alpha_s = {g:.3e} exceeds kappa/2 = {:.3e}: back-action is not small",
                0.5 * rates.kappa
            );
        }
        Ok(Self {
            params: *params,
            rates,
            steady,
            drift,
            diffusion,
            backaction_small,
        })
    }

    pub fn stability(&self) -> Result<Stability> {
        stability(&self.drift)
    }

    /// Largest rate in the problem; sets the simulator's step-size bound.
    pub fn fastest_rate(&self) -> f64 {
        [
            self.rates.kappa,
            self.params.omega_m,
            self.params.omega_bogoliubov,
            self.params.detuning.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
