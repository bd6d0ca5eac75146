//! Parameter sweeps over one or two axes, with named presets, CSV/JSON
//! emission and an on-disk cache.

mod output;
mod presets;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::KeyValues;
use crate::entanglement::{log_negativity, Bipartition, EntanglementReport, REPORT_FIELDS};
use crate::error::{Error, Result};
use crate::lyapunov::{solve_lyapunov, solvers, LyapunovSolver};
use crate::model::LinearModel;
use crate::params::SystemParams;
use crate::probe::{apply_readout_map, infer_ac_entanglement, measured_log_negativity, ProbeParams, PROBE_PARAM_NAMES};

pub use output::{cache_dir_from_env, cache_key, run_cached, to_csv, to_json, CachedSweep, CACHE_DIR_ENV};
pub use presets::{preset, stability_preset, PRESET_NAMES, STABILITY_PRESET_NAMES};

/// Axes that set parameters relative to others rather than directly.
pub const RATIO_AXES: &[&str] = &["delta_over_omega_m", "omega_ratio", "chi_eq_zeta", "coupling_ratio"];

/// Extra report columns available when the probe readout is enabled.
pub const PROBE_FIELDS: &[&str] = &["probe_gain", "e_measured", "e_inferred", "adiabatic_ok", "weak_probe_ok"];

/// Readout gain used when the probe is enabled without an explicit gain.
pub const DEFAULT_PROBE_GAIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(parameter: &str, min: f64, max: f64, points: usize) -> Self {
        Self {
            parameter: parameter.to_string(),
            min,
            max,
            points,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(parameter: &str, min: f64, max: f64, points: usize) -> Self {
        Self {
            spacing: Spacing::Log,
            ..Self::linear(parameter, min, max, points)
        }
    }

    /// Parses `name min max points [linear|log]`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::param("axis", format!("expected `name min max points [linear|log]`, got `{text}`")));
        }
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::param("axis", format!("`{s}` is not a number"))) };
        let points = parts[3]
            .parse()
            .map_err(|_| Error::param("axis", format!("`{}` is not a point count", parts[3])))?;
        let spacing = match parts.get(4).copied().unwrap_or("linear") {
            "linear" | "lin" => Spacing::Linear,
            "log" => Spacing::Log,
            other => return Err(Error::param("axis", format!("unknown spacing `{other}`"))),
        };
        Ok(Self {
            parameter: parts[0].to_string(),
            min: num(parts[1])?,
            max: num(parts[2])?,
            points,
            spacing,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let known = SystemParams::is_param(&self.parameter)
            || PROBE_PARAM_NAMES.contains(&self.parameter.as_str())
            || RATIO_AXES.contains(&self.parameter.as_str());
        if !known {
            return Err(Error::param(&self.parameter, "axis must name a system, probe or ratio parameter"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::param(&self.parameter, "axis bounds must be finite"));
        }
        // a single point is only meaningful as a degenerate range
        if self.points < 2 && !(self.points == 1 && self.min == self.max) {
            return Err(Error::param(&self.parameter, "axis needs at least 2 points (or 1 point with min == max)"));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0 && self.max > 0.0) {
            return Err(Error::param(&self.parameter, "log axis bounds must be > 0"));
        }
        Ok(())
    }

    /// Grid values; both endpoints are reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i == self.points - 1 {
                    self.max
                } else {
                    let t = i as f64 / last;
                    match self.spacing {
                        Spacing::Linear => self.min + (self.max - self.min) * t,
                        Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub base: SystemParams,
    pub axes: Vec<Axis>,
    /// Report columns, in output order.
    pub fields: Vec<String>,
    pub solver: String,
    /// Enables the probe readout columns at this gain.
    pub probe_gain: Option<f64>,
    /// Probe parameters pinned on top of the designed probe.
    pub probe_overrides: BTreeMap<String, f64>,
}

impl SweepSpec {
    pub fn new(name: &str, base: SystemParams, axes: Vec<Axis>) -> Self {
        Self {
            name: name.to_string(),
            base,
            axes,
            fields: REPORT_FIELDS.iter().map(|s| s.to_string()).collect(),
            solver: solvers().default_strategy().name().to_string(),
            probe_gain: None,
            probe_overrides: BTreeMap::new(),
        }
    }

    pub fn with_fields(mut self, fields: &[&str]) -> Self {
        self.fields = fields.iter().map(|s| s.to_string()).collect();
        self
    }

    /// Builds a spec from key-value text. `preset = <name>` starts from a
    /// named preset; `axis`/`axis1`/`axis2`, `fields`, `name`,
    /// `lyapunov_solver`, `probe_gain` and probe parameter keys are read
    /// here; every other key must be a system parameter override.
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let mut spec = match kv.get_str("preset") {
            Some(e) => preset(&e.value)?,
            None => Self::new("custom", SystemParams::reference(), Vec::new()),
        };
        let axis_keys = ["axis", "axis1", "axis2"];
        let axes: Vec<Axis> = kv
            .entries()
            .iter()
            .filter(|e| axis_keys.contains(&e.key.as_str()))
            .map(|e| {
                Axis::parse(&e.value).map_err(|err| Error::Config {
                    line: e.line,
                    reason: err.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        if !axes.is_empty() {
            spec.axes = axes;
        }
        if let Some(e) = kv.get_str("name") {
            spec.name = e.value.clone();
        }
        if let Some(e) = kv.get_str("fields") {
            spec.fields = e
                .value
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
        }
        if let Some(e) = kv.get_str("lyapunov_solver") {
            spec.solver = e.value.clone();
        }
        let mut extra: Vec<&str> = vec!["preset", "name", "fields", "probe_gain"];
        extra.extend(axis_keys);
        extra.extend(PROBE_PARAM_NAMES);
        for e in kv.entries() {
            if e.key == "probe_gain" {
                spec.probe_gain = Some(KeyValues::parse_number(e)?.1);
            } else if PROBE_PARAM_NAMES.contains(&e.key.as_str()) {
                let (k, v) = KeyValues::parse_number(e)?;
                spec.probe_overrides.insert(k, v);
            }
        }
        spec.base.apply_config(kv, &extra)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::param("axes", format!("a sweep has 1 or 2 axes, got {}", self.axes.len())));
        }
        for a in &self.axes {
            a.validate()?;
        }
        if self.axes.len() == 2 && self.axes[0].parameter == self.axes[1].parameter {
            return Err(Error::param(&self.axes[0].parameter, "both axes sweep the same parameter"));
        }
        if self.fields.is_empty() {
            return Err(Error::param("fields", "select at least one output field"));
        }
        for f in &self.fields {
            if !REPORT_FIELDS.contains(&f.as_str()) && !PROBE_FIELDS.contains(&f.as_str()) {
                return Err(Error::param(f, "unknown output field"));
            }
        }
        solvers().get(&self.solver)?;
        if let Some(g) = self.probe_gain {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::param("probe_gain", "must be finite and > 0"));
            }
        }
        for k in self.probe_overrides.keys() {
            if !PROBE_PARAM_NAMES.contains(&k.as_str()) {
                return Err(Error::param(k, "not a probe parameter"));
            }
        }
        self.base.validate()
    }

    pub fn uses_probe(&self) -> bool {
        self.probe_gain.is_some()
            || !self.probe_overrides.is_empty()
            || self.fields.iter().any(|f| PROBE_FIELDS.contains(&f.as_str()))
            || self.axes.iter().any(|a| PROBE_PARAM_NAMES.contains(&a.parameter.as_str()))
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis coordinates of every grid point, first axis outermost.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = vec![Vec::new()];
        for vals in &values {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// System parameters at one grid point. Direct axes are applied before
    /// ratio axes, so a ratio always refers to the final value of its
    /// reference parameter.
    pub fn point_params(&self, coords: &[f64]) -> Result<SystemParams> {
        let mut p = self.base;
        let pairs: Vec<(&Axis, f64)> = self.axes.iter().zip(coords.iter().copied()).collect();
        for (axis, v) in &pairs {
            if SystemParams::is_param(&axis.parameter) {
                p.set(&axis.parameter, *v)?;
            }
        }
        for (axis, v) in &pairs {
            match axis.parameter.as_str() {
                "delta_over_omega_m" => p.detuning = v * p.omega_m,
                "omega_ratio" => p.omega_bogoliubov = v * p.omega_m,
                "chi_eq_zeta" => {
                    p.chi = *v;
                    p.zeta = *v;
                }
                "coupling_ratio" => {
                    // ζ/χ = v at fixed χ² + ζ², anchored so v = 1 is the base coupling
                    let chi = self.base.chi * (2.0 / (1.0 + v * v)).sqrt();
                    p.chi = chi;
                    p.zeta = v * chi;
                }
                _ => {}
            }
        }
        p.validate()?;
        Ok(p)
    }

    fn point_probe(&self, model: &LinearModel, coords: &[f64]) -> Result<ProbeParams> {
        let mut probe = ProbeParams::design(model, self.probe_gain.unwrap_or(DEFAULT_PROBE_GAIN))?;
        for (k, v) in &self.probe_overrides {
            probe.set(k, *v)?;
        }
        for (axis, v) in self.axes.iter().zip(coords) {
            if PROBE_PARAM_NAMES.contains(&axis.parameter.as_str()) {
                probe.set(&axis.parameter, *v)?;
            }
        }
        probe.validate()?;
        Ok(probe)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe_gain: f64,
    pub e_measured: f64,
    pub e_inferred: f64,
    pub adiabatic_ok: bool,
    pub weak_probe_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub report: Option<EntanglementReport>,
    pub probe: Option<ProbeReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Values of a numeric column, `None` where the row has no value.
    pub fn column(&self, field: &str) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| {
                if let Some(v) = r.report.as_ref().and_then(|rep| rep.numeric_field(field)) {
                    return Some(v);
                }
                let probe = r.probe.as_ref()?;
                match field {
                    "probe_gain" => Some(probe.probe_gain),
                    "e_measured" => Some(probe.e_measured),
                    "e_inferred" => Some(probe.e_inferred),
                    _ => None,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub table: SweepTable,
    /// Number of point computations actually performed.
    pub evaluations: usize,
}

/// Stationary entanglement report of one parameter point. Points without a
/// stationary state give a report with `stable = false` and no negativities.
pub fn run_point(params: &SystemParams, solver: &dyn LyapunovSolver) -> Result<EntanglementReport> {
    params.validate()?;
    let model = LinearModel::new(params)?;
    let st = model.stability()?;
    if !st.stable {
        return Ok(EntanglementReport::unstable(st.margin));
    }
    let v = solve_lyapunov(&model.drift, &model.diffusion, solver)?;
    EntanglementReport::from_covariance(&v, st.margin)
}

fn probe_report(spec: &SweepSpec, params: &SystemParams, coords: &[f64], solver: &dyn LyapunovSolver) -> Result<ProbeReport> {
    let model = LinearModel::new(params)?;
    let probe = spec.point_probe(&model, coords)?;
    let validity = probe.validity(&model);
    if !validity.ok() {
        log::warn!("probe outside its validity window at {coords:?}: {validity:?}");
    }
    let v = solve_lyapunov(&model.drift, &model.diffusion, solver)?;
    let map = probe.readout_map();
    let measured = apply_readout_map(&v, &map)?;
    let e_inferred = infer_ac_entanglement(&measured, &map)?;
    debug_assert!((e_inferred - log_negativity(&v, Bipartition::AC)?).abs() < 1e-9);
    Ok(ProbeReport {
        probe_gain: map.gain,
        e_measured: measured_log_negativity(&measured)?,
        e_inferred,
        adiabatic_ok: validity.adiabatic_ok,
        weak_probe_ok: validity.weak_probe_ok,
    })
}

fn evaluate(spec: &SweepSpec, coords: Vec<f64>, solver: &dyn LyapunovSolver) -> SweepRow {
    let outcome = spec.point_params(&coords).and_then(|params| {
        let report = run_point(&params, solver)?;
        let probe = if spec.uses_probe() && report.stable {
            Some(probe_report(spec, &params, &coords, solver)?)
        } else {
            None
        };
        Ok((report, probe))
    });
    match outcome {
        Ok((report, probe)) => SweepRow {
            coords,
            report: Some(report),
            probe,
            error: None,
        },
        Err(e) => SweepRow {
            coords,
            report: None,
            probe: None,
            error: Some(e.to_string()),
        },
    }
}

/// Evaluates every grid point in parallel. Rows come back in grid order;
/// a failing point is recorded in its row and the sweep carries on.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepRun> {
    spec.validate()?;
    let registry = solvers();
    let solver = registry.get(&spec.solver)?;
    let counter = AtomicUsize::new(0);
    let rows: Vec<SweepRow> = spec
        .grid()
        .into_par_iter()
        .map(|coords| {
            counter.fetch_add(1, Ordering::Relaxed);
            evaluate(spec, coords, solver)
        })
        .collect();
    Ok(SweepRun {
        table: SweepTable { spec: spec.clone(), rows },
        evaluations: counter.into_inner(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityPoint {
    pub coords: Vec<f64>,
    pub stable: Option<bool>,
    pub margin: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMap {
    pub axes: Vec<Axis>,
    pub points: Vec<StabilityPoint>,
}

impl StabilityMap {
    pub fn unstable_count(&self) -> usize {
        self.points.iter().filter(|p| p.stable == Some(false)).count()
    }

    pub fn stable_count(&self) -> usize {
        self.points.iter().filter(|p| p.stable == Some(true)).count()
    }
}

/// Hurwitz check of the drift matrix over the grid of `spec`; no
/// covariance is computed.
pub fn stability_map(spec: &SweepSpec) -> Result<StabilityMap> {
    spec.validate()?;
    let points = spec
        .grid()
        .into_par_iter()
        .map(|coords| {
            let res = spec
                .point_params(&coords)
                .and_then(|p| LinearModel::new(&p))
                .and_then(|m| m.stability());
            match res {
                Ok(st) => StabilityPoint {
                    coords,
                    stable: Some(st.stable),
                    margin: Some(st.margin),
                    error: None,
                },
                Err(e) => StabilityPoint {
                    coords,
                    stable: None,
                    margin: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(StabilityMap {
        axes: spec.axes.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::KroneckerSum;

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis::log("temperature", 1e-6, 1e-3, 4);
        let v = a.values();
        assert_eq!(v[0], 1e-6);
        assert_eq!(v[3], 1e-3);
        assert!((v[1] - 1e-5).abs() < 1e-18);
        let l = Axis::linear("chi", 0.0, 3.0, 4).values();
        assert_eq!(l, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn axis_parse_and_validation() {
        let a = Axis::parse("temperature 1e-6 1e-3 31 log").unwrap();
        assert_eq!(a.spacing, Spacing::Log);
        assert_eq!(a.points, 31);
        assert!(Axis::parse("chi 0 1").is_err());
        assert!(Axis::parse("chi 0 1 5 cubic").is_err());
        assert!(Axis::linear("bogus", 0.0, 1.0, 3).validate().is_err());
        assert!(Axis::linear("chi", 0.0, 1.0, 1).validate().is_err());
        assert!(Axis::linear("chi", 5.0, 5.0, 1).validate().is_ok());
        assert!(Axis::log("chi", 0.0, 1.0, 3).validate().is_err());
    }

    #[test]
    fn grid_is_axis_major() {
        let spec = SweepSpec::new(
            "t",
            SystemParams::reference(),
            vec![Axis::linear("chi", 1.0, 2.0, 2), Axis::linear("zeta", 10.0, 30.0, 3)],
        );
        let g = spec.grid();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![1.0, 10.0]);
        assert_eq!(g[1], vec![1.0, 20.0]);
        assert_eq!(g[3], vec![2.0, 10.0]);
    }

    #[test]
    fn ratio_axes_apply_after_direct_ones() {
        let base = SystemParams::reference();
        let spec = SweepSpec::new(
            "t",
            base,
            vec![Axis::linear("delta_over_omega_m", 1.0, 2.0, 2), Axis::linear("omega_m", 1e7, 2e7, 2)],
        );
        let p = spec.point_params(&[1.5, 2e7]).unwrap();
        assert_eq!(p.detuning, 1.5 * 2e7);
        let spec = SweepSpec::new("t", base, vec![Axis::linear("coupling_ratio", 0.5, 2.0, 2)]);
        let p = spec.point_params(&[1.0]).unwrap();
        assert!((p.chi - base.chi).abs() < 1e-12 && (p.zeta - base.chi).abs() < 1e-12);
        let p = spec.point_params(&[2.0]).unwrap();
        assert!((p.zeta / p.chi - 2.0).abs() < 1e-12);
        assert!((p.chi.powi(2) + p.zeta.powi(2) - 2.0 * base.chi.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn run_point_is_deterministic_and_e_am_vanishes() {
        let p = SystemParams::reference();
        let a = run_point(&p, &KroneckerSum).unwrap();
        let b = run_point(&p, &KroneckerSum).unwrap();
        assert_eq!(a, b);
        assert!(a.stable);
        assert!(a.e_am.unwrap() < 1e-9);
    }

    #[test]
    fn no_pump_gives_no_entanglement() {
        let mut p = SystemParams::reference();
        p.pump_power = 0.0;
        // without light the atomic mode is undamped, so regularize it
        p.atom_damping = 1e-3 * p.omega_m;
        let r = run_point(&p, &KroneckerSum).unwrap();
        assert!(r.stable);
        for f in ["e_ac", "e_mc", "e_am", "e_a_mc", "e_m_ac", "e_c_am", "g_tri_proxy"] {
            assert!(r.numeric_field(f).unwrap() < 1e-9, "{f}");
        }
    }

    #[test]
    fn unstable_point_reports_nulls() {
        let mut p = SystemParams::reference();
        p.detuning = -p.detuning;
        p.chi = 300.0;
        p.zeta = 300.0;
        let r = run_point(&p, &KroneckerSum).unwrap();
        assert!(!r.stable);
        assert!(r.e_ac.is_none() && r.tripartite_class.is_none());
    }

    #[test]
    fn single_point_sweep_matches_run_point() {
        let base = SystemParams::reference();
        let spec = SweepSpec::new("one", base, vec![Axis::linear("chi", 100.0, 100.0, 1)]);
        let run = run_sweep(&spec).unwrap();
        assert_eq!(run.evaluations, 1);
        assert_eq!(run.table.rows[0].report.as_ref().unwrap(), &run_point(&base, &KroneckerSum).unwrap());
    }

    #[test]
    fn evaluation_count_matches_grid() {
        let spec = SweepSpec::new(
            "count",
            SystemParams::reference(),
            vec![Axis::linear("chi", 50.0, 150.0, 4), Axis::log("temperature", 1e-6, 1e-4, 3)],
        );
        let run = run_sweep(&spec).unwrap();
        assert_eq!(run.evaluations, 12);
        assert_eq!(run.table.rows.len(), 12);
        assert_eq!(run.table.rows[5].coords, spec.grid()[5]);
    }

    #[test]
    fn point_errors_do_not_abort_sweep() {
        let spec = SweepSpec::new("err", SystemParams::reference(), vec![Axis::linear("temperature", -1e-5, 1e-5, 3)]);
        let run = run_sweep(&spec).unwrap();
        assert!(run.table.rows[0].error.is_some());
        assert!(run.table.rows[1].error.is_some());
        assert!(run.table.rows[2].report.is_some());
    }

    #[test]
    fn probe_columns_reproduce_e_ac() {
        let mut spec = SweepSpec::new("probe", SystemParams::reference(), vec![Axis::linear("chi_eq_zeta", 80.0, 120.0, 3)])
            .with_fields(&["e_ac", "e_inferred", "e_measured", "adiabatic_ok"]);
        spec.probe_gain = Some(2.0);
        let run = run_sweep(&spec).unwrap();
        for row in &run.table.rows {
            let e_ac = row.report.as_ref().unwrap().e_ac.unwrap();
            let probe = row.probe.unwrap();
            assert!((probe.e_inferred - e_ac).abs() < 1e-12);
            assert!(probe.e_measured < e_ac);
            assert!(probe.adiabatic_ok && probe.weak_probe_ok);
        }
    }

    #[test]
    fn spec_from_config() {
        let kv = KeyValues::parse(
            "preset = fig2c\naxis = temperature 1e-6 1e-4 5 log\nfields = e_ac, e_mc\nfinesse = 2e4\nprobe_gain = 1.5\n",
        )
        .unwrap();
        let spec = SweepSpec::from_config(&kv).unwrap();
        assert_eq!(spec.axes.len(), 1);
        assert_eq!(spec.axes[0].points, 5);
        assert_eq!(spec.fields, vec!["e_ac", "e_mc"]);
        assert_eq!(spec.base.finesse, 2e4);
        assert_eq!(spec.probe_gain, Some(1.5));
        assert!(SweepSpec::from_config(&KeyValues::parse("axis = chi 0 1 3\nbogus = 1\n").unwrap()).is_err());
        assert!(SweepSpec::from_config(&KeyValues::parse("finesse = 2e4\n").unwrap()).is_err());
        assert!(SweepSpec::from_config(&KeyValues::parse("axis = chi 1 2 3\nfields = e_xx\n").unwrap()).is_err());
    }

    #[test]
    fn stability_map_finds_negative_detuning_instability() {
        let map = stability_map(&stability_preset("negative-detuning").unwrap()).unwrap();
        assert!(map.unstable_count() > 0);
    }
}
