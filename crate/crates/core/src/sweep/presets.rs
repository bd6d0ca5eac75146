//! Named sweeps.
//!
//! On the fig2a/fig2b grid, Δ starts one step above zero because Δ = 0 and
//! χ = 0 are marginal. χ stops at 250 s⁻¹ because the grid corner near
//! 300 s⁻¹ is already unstable.

use super::{Axis, SweepSpec};
use crate::error::{Error, Result};
use crate::params::SystemParams;

pub const PRESET_NAMES: &[&str] = &["fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4"];

/// Grids for the `stability-map` command.
pub const STABILITY_PRESET_NAMES: &[&str] = &["fig2a", "fig2b", "negative-detuning"];

const GRID: usize = 60;

fn fig2_axes() -> Vec<Axis> {
    vec![
        Axis::linear("delta_over_omega_m", 3.0 / GRID as f64, 3.0, GRID),
        Axis::linear("chi_eq_zeta", 250.0 / GRID as f64, 250.0, GRID),
    ]
}

pub fn preset(name: &str) -> Result<SweepSpec> {
    let base = SystemParams::reference();
    let spec = match name {
        "fig2a" => SweepSpec::new(name, base, fig2_axes()).with_fields(&["stable", "e_ac", "e_am", "stability_margin"]),
        "fig2b" => SweepSpec::new(name, base, fig2_axes()).with_fields(&["stable", "e_mc", "e_am", "stability_margin"]),
        "fig2c" => SweepSpec::new(name, base, vec![Axis::log("temperature", 1e-6, 1e-3, 31)]).with_fields(&["e_ac", "e_mc"]),
        "fig3a" => SweepSpec::new(name, base, vec![Axis::linear("coupling_ratio", 0.5, 2.0, 31)]).with_fields(&["e_ac", "e_mc"]),
        "fig3b" => {
            let mut b = base;
            b.temperature = 1e-6;
            b.finesse = 4e4;
            SweepSpec::new(name, b, vec![Axis::linear("omega_ratio", 0.25, 4.0, 76)]).with_fields(&["e_ac", "e_mc"])
        }
        "fig4" => SweepSpec::new(name, base, vec![Axis::log("temperature", 1e-6, 2e-2, 44)]).with_fields(&[
            "e_a_mc",
            "e_m_ac",
            "e_c_am",
            "g_tri_proxy",
            "tripartite_class",
            "e_ac",
            "e_mc",
        ]),
        _ => return Err(unknown("preset", name, PRESET_NAMES)),
    };
    Ok(spec)
}

pub fn stability_preset(name: &str) -> Result<SweepSpec> {
    match name {
        "fig2a" | "fig2b" => preset(name),
        "negative-detuning" => Ok(SweepSpec::new(
            name,
            SystemParams::reference(),
            vec![
                Axis::linear("delta_over_omega_m", -3.0, -3.0 / GRID as f64, GRID),
                Axis::linear("chi_eq_zeta", 100.0, 1000.0, GRID),
            ],
        )
        .with_fields(&["stable", "stability_margin"])),
        _ => Err(unknown("stability preset", name, STABILITY_PRESET_NAMES)),
    }
}

fn unknown(kind: &'static str, name: &str, available: &[&str]) -> Error {
    Error::UnknownStrategy {
        kind,
        name: name.to_string(),
        available: available.join(", "),
    }
}
