//! Physical constants (CODATA 2018 exact / recommended values, SI).

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Converts an ordinary frequency in Hz to an angular frequency in rad/s.
pub fn hz_to_rad(f: f64) -> f64 {
    TWO_PI * f
}
