//! One-step discretizations of dX = K·X dt + S·dW with S·Sᵀ = D.
//!
//! Both schemes reduce a linear SDE to an affine Gaussian recursion
//! X' = T·X + N·ξ with ξ ~ N(0, I).

use nalgebra::Matrix6;

use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearStep {
    pub transition: Matrix6<f64>,
    pub noise: Matrix6<f64>,
}

pub trait Integrator: Named + Send + Sync {
    fn discretize(&self, drift: &Matrix6<f64>, diffusion: &Matrix6<f64>, dt: f64) -> Result<LinearStep>;
}

/// Registry of the built-in schemes; `trapezoidal` is the default.
pub fn integrators() -> Registry<dyn Integrator> {
    let mut reg: Registry<dyn Integrator> = Registry::new("integrator");
    reg.register(Box::new(Trapezoidal))
        .register(Box::new(EulerMaruyama));
    reg
}

fn diffusion_sqrt(diffusion: &Matrix6<f64>, dt: f64) -> Result<Matrix6<f64>> {
    let mut s = Matrix6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            if i != j && diffusion[(i, j)] != 0.0 {
                return Err(Error::Numerical("simulator expects a diagonal diffusion matrix".into()));
            }
        }
        let d = diffusion[(i, i)];
        if d < 0.0 {
            return Err(Error::Numerical(format!("negative diffusion entry D[{i},{i}] = {d}")));
        }
        s[(i, i)] = (d * dt).sqrt();
    }
    Ok(s)
}

/// X' = (I + K h)·X + sqrt(D h)·ξ.
pub struct EulerMaruyama;

impl Named for EulerMaruyama {
    fn name(&self) -> &'static str {
        "euler-maruyama"
    }
}

impl Integrator for EulerMaruyama {
    fn discretize(&self, drift: &Matrix6<f64>, diffusion: &Matrix6<f64>, dt: f64) -> Result<LinearStep> {
        Ok(LinearStep {
            transition: Matrix6::identity() + drift * dt,
            noise: diffusion_sqrt(diffusion, dt)?,
        })
    }
}

/// Stochastic trapezoidal rule (Crank–Nicolson drift, noise injected once
/// per step): X' = (I − Kh/2)⁻¹[(I + Kh/2)·X + sqrt(D h)·ξ].
///
/// A-stable, and its stationary covariance solves K·V + V·Kᵀ = −D exactly
/// for every step size.
pub struct Trapezoidal;

impl Named for Trapezoidal {
    fn name(&self) -> &'static str {
        "trapezoidal"
    }
}

impl Integrator for Trapezoidal {
    fn discretize(&self, drift: &Matrix6<f64>, diffusion: &Matrix6<f64>, dt: f64) -> Result<LinearStep> {
        let half = drift * (0.5 * dt);
        let implicit = (Matrix6::identity() - half)
            .try_inverse()
            .ok_or_else(|| Error::Numerical("I − K·dt/2 is singular".into()))?;
        Ok(LinearStep {
            transition: implicit * (Matrix6::identity() + half),
            noise: implicit * diffusion_sqrt(diffusion, dt)?,
        })
    }
}
