//! Stationary Gaussian state of a linearized cavity field / moving mirror /
//! Bogoliubov-mode system, its bipartite and tripartite entanglement, a
//! probe-beam readout model, and a stochastic Langevin simulator used as an
//! independent check of the covariance solver.

pub mod config;
pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod langevin;
pub mod lyapunov;
pub mod model;
pub mod params;
pub mod probe;
pub mod registry;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
