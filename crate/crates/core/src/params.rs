//! Physical inputs of the cavity / mirror / Bogoliubov-mode system.

use serde::{Deserialize, Serialize};

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::units::TWO_PI;

/// All physical and effective rates defining the three-mode system.
///
/// Frequencies and rates are angular (rad/s). The effective detuning is a
/// direct input: the microscopic contributions to it are not modelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Mechanical angular frequency ω_m.
    pub omega_m: f64,
    /// Bogoliubov-mode angular frequency Ω (config key `Omega`).
    #[serde(rename = "Omega", alias = "omega_bogoliubov")]
    pub omega_bogoliubov: f64,
    /// Effective mirror mass, kg.
    pub mass: f64,
    /// Mechanical quality factor; γ = ω_m / quality.
    pub quality: f64,
    pub finesse: f64,
    /// Cavity length, m.
    pub cavity_length: f64,
    /// Pump power, W.
    pub pump_power: f64,
    /// Pump wavelength, m; sets ω_L.
    pub laser_wavelength: f64,
    /// Effective cavity detuning Δ, rad/s.
    pub detuning: f64,
    /// Scaled mirror-cavity coupling χ = χ'·sqrt(ħ/(m ω_m)), s⁻¹.
    pub chi: f64,
    /// Bogoliubov-mode-cavity coupling ζ, s⁻¹.
    pub zeta: f64,
    /// Mechanical bath temperature, K.
    pub temperature: f64,
    /// Optional damping of the Bogoliubov momentum, rad/s (zero-temperature
    /// bath). Zero in the physical model; used to regularize the otherwise
    /// undamped atom block when the couplings vanish.
    #[serde(default)]
    pub atom_damping: f64,
}

/// Names accepted by [`SystemParams::get`] / [`SystemParams::set`].
pub const PARAM_NAMES: &[&str] = &[
    "omega_m",
    "Omega",
    "mass",
    "quality",
    "finesse",
    "cavity_length",
    "pump_power",
    "laser_wavelength",
    "detuning",
    "chi",
    "zeta",
    "temperature",
    "atom_damping",
];

/// Keys for non-numeric run settings that may appear in a system config.
pub const SETTING_KEYS: &[&str] = &["lyapunov_solver", "integrator"];

impl SystemParams {
    /// Base working point of the symmetric bipartite analysis:
    /// ω_m/2π = 3 MHz, Ω = ω_m, Q_m = 3×10⁴, m = 50 ng, R = 50 mW,
    /// F = 10⁴, L = 1 mm, Δ = 2ω_m, χ = ζ = 100 s⁻¹, T = 10 μK.
    pub fn reference() -> Self {
        let omega_m = TWO_PI * 3.0e6;
        Self {
            omega_m,
            omega_bogoliubov: omega_m,
            mass: 50e-12,
            quality: 3.0e4,
            finesse: 1.0e4,
            cavity_length: 1.0e-3,
            pump_power: 50e-3,
            laser_wavelength: 780e-9,
            detuning: 2.0 * omega_m,
            chi: 100.0,
            zeta: 100.0,
            temperature: 10e-6,
            atom_damping: 0.0,
        }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "omega_m" => self.omega_m,
            "Omega" | "omega_bogoliubov" => self.omega_bogoliubov,
            "mass" => self.mass,
            "quality" => self.quality,
            "finesse" => self.finesse,
            "cavity_length" => self.cavity_length,
            "pump_power" => self.pump_power,
            "laser_wavelength" => self.laser_wavelength,
            "detuning" => self.detuning,
            "chi" => self.chi,
            "zeta" => self.zeta,
            "temperature" => self.temperature,
            "atom_damping" => self.atom_damping,
            _ => return Err(Error::param(name, "not a system parameter")),
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "omega_m" => &mut self.omega_m,
            "Omega" | "omega_bogoliubov" => &mut self.omega_bogoliubov,
            "mass" => &mut self.mass,
            "quality" => &mut self.quality,
            "finesse" => &mut self.finesse,
            "cavity_length" => &mut self.cavity_length,
            "pump_power" => &mut self.pump_power,
            "laser_wavelength" => &mut self.laser_wavelength,
            "detuning" => &mut self.detuning,
            "chi" => &mut self.chi,
            "zeta" => &mut self.zeta,
            "temperature" => &mut self.temperature,
            "atom_damping" => &mut self.atom_damping,
            _ => return Err(Error::param(name, "not a system parameter")),
        };
        *slot = value;
        Ok(())
    }

    pub fn is_param(name: &str) -> bool {
        PARAM_NAMES.contains(&name) || name == "omega_bogoliubov"
    }

    /// Applies every numeric system-parameter assignment in `kv` on top of
    /// `self`. Keys that belong to neither the system nor `extra_keys` are
    /// rejected.
    pub fn apply_config(&mut self, kv: &KeyValues, extra_keys: &[&str]) -> Result<()> {
        for e in kv.entries() {
            if SETTING_KEYS.contains(&e.key.as_str()) {
                continue;
            }
            let canonical = e.key.strip_suffix("_hz").unwrap_or(&e.key);
            if Self::is_param(canonical) {
                let (k, v) = KeyValues::parse_number(e)?;
                self.set(&k, v)?;
            } else if !extra_keys.contains(&canonical) {
                return Err(Error::Config {
                    line: e.line,
                    reason: format!("unknown key `{}`", e.key),
                });
            }
        }
        self.validate()
    }

    pub fn from_config(kv: &KeyValues, extra_keys: &[&str]) -> Result<Self> {
        let mut p = Self::reference();
        p.apply_config(kv, extra_keys)?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("omega_m", self.omega_m),
            ("Omega", self.omega_bogoliubov),
            ("mass", self.mass),
            ("quality", self.quality),
            ("finesse", self.finesse),
            ("cavity_length", self.cavity_length),
            ("laser_wavelength", self.laser_wavelength),
            ("temperature", self.temperature),
        ];
        for (name, v) in strictly_positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [
            ("pump_power", self.pump_power),
            ("chi", self.chi),
            ("zeta", self.zeta),
            ("atom_damping", self.atom_damping),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.detuning.is_finite() {
            return Err(Error::param("detuning", "must be finite"));
        }
        Ok(())
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::reference()
    }
}
