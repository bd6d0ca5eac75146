use std::io::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde_json::json;

use optomech_core::config::KeyValues;
use optomech_core::entanglement::{log_negativity, Bipartition, EntanglementReport};
use optomech_core::langevin::{compare, integrators, simulate, RecordSet, SimConfig};
use optomech_core::lyapunov::{solve_lyapunov, solvers, stationary_residual};
use optomech_core::model::LinearModel;
use optomech_core::params::SystemParams;
use optomech_core::probe::{
    apply_readout_map, infer_ac_entanglement, measured_covariance_from_records, measured_log_negativity, ProbeParams,
};
use optomech_core::sweep::{self, SweepSpec};

use crate::{PointArgs, SpecSource};

/// Exit code of `verify` when the comparison fails.
const VERIFY_FAILED: u8 = 2;

const QUADRATURES: [&str; 6] = ["x", "y", "q", "p", "Q", "P"];

struct Point {
    params: SystemParams,
    kv: KeyValues,
}

fn load_point(args: &PointArgs) -> Result<Point> {
    let mut text = match &args.config {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => String::new(),
    };
    for o in &args.overrides {
        let (k, v) = o.split_once('=').with_context(|| format!("`--set {o}` is not KEY=VALUE"))?;
        text.push_str(&format!("\n{} = {}", k.trim(), v.trim()));
    }
    let kv = KeyValues::parse(&text)?;
    let params = SystemParams::from_config(&kv, &[])?;
    Ok(Point { params, kv })
}

fn setting<'a>(flag: Option<&'a str>, kv: &'a KeyValues, key: &str) -> Option<&'a str> {
    flag.or_else(|| kv.get_str(key).map(|e| e.value.as_str()))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(value)?) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

pub fn steady(args: &PointArgs, covariance_out: Option<&Path>) -> Result<ExitCode> {
    let point = load_point(args)?;
    let registry = solvers();
    let solver = registry.resolve(setting(args.solver.as_deref(), &point.kv, "lyapunov_solver"))?;
    let model = LinearModel::new(&point.params)?;
    let st = model.stability()?;
    let mut out = json!({
        "params": point.params,
        "rates": {
            "kappa": model.rates.kappa,
            "gamma": model.rates.gamma,
            "eta": model.rates.eta,
            "n_bar": model.rates.n_bar,
        },
        "steady_state": {
            "alpha_s_sq": model.steady.alpha_s_sq,
            "alpha_s": model.steady.alpha_s,
            "q_s_scaled": model.steady.q_s_scaled,
            "Q_s": model.steady.big_q_s,
        },
        "backaction_small": model.backaction_small,
        "solver": solver.name(),
    });
    if st.stable {
        let v = solve_lyapunov(&model.drift, &model.diffusion, solver)?;
        let res = stationary_residual(&model.drift, &model.diffusion, &v);
        out["residual"] = json!(res);
        out["report"] = serde_json::to_value(EntanglementReport::from_covariance(&v, st.margin)?)?;
        if let Some(path) = covariance_out {
            fs::write(path, v.to_text()).with_context(|| format!("writing {}", path.display()))?;
        }
    } else {
        out["report"] = serde_json::to_value(EntanglementReport::unstable(st.margin))?;
        if covariance_out.is_some() {
            log::warn!("no stationary state, covariance not written");
        }
    }
    print_json(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn load_spec(source: &SpecSource, stability: bool) -> Result<SweepSpec> {
    match (&source.preset, &source.spec) {
        (Some(name), _) if stability => Ok(sweep::stability_preset(name)?),
        (Some(name), _) => Ok(sweep::preset(name)?),
        (None, Some(path)) => {
            let kv = KeyValues::from_file(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(SweepSpec::from_config(&kv)?)
        }
        (None, None) => bail!("give --preset or --spec"),
    }
}

pub fn sweep(source: &SpecSource, out_dir: &Path, no_cache: bool) -> Result<ExitCode> {
    let spec = load_spec(source, false)?;
    let cache = if no_cache { None } else { sweep::cache_dir_from_env() };
    let result = sweep::run_cached(&spec, cache.as_deref())?;
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", spec.name));
    let json_path = out_dir.join(format!("{}.json", spec.name));
    fs::write(&csv_path, &result.csv)?;
    fs::write(&json_path, &result.json)?;
    eprintln!(
        "{}: {} points, {} evaluated ({}), wrote {} and {}",
        spec.name,
        spec.len(),
        result.evaluations,
        if result.hit { "cache hit" } else { "computed" },
        csv_path.display(),
        json_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

pub struct VerifyArgs<'a> {
    pub point: &'a PointArgs,
    pub seed: u64,
    pub trajectories: usize,
    pub z_threshold: f64,
    pub integrator: Option<&'a str>,
    pub sample_steps: Option<usize>,
    pub out: Option<&'a Path>,
    pub records: Option<&'a Path>,
    pub record_stride: Option<usize>,
}

pub fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let point = load_point(args.point)?;
    let model = LinearModel::new(&point.params)?;
    let solver_registry = solvers();
    let solver = solver_registry.resolve(setting(args.point.solver.as_deref(), &point.kv, "lyapunov_solver"))?;
    let integrator_registry = integrators();
    let integrator = integrator_registry.resolve(setting(args.integrator, &point.kv, "integrator"))?;
    let v = solve_lyapunov(&model.drift, &model.diffusion, solver)?;

    let mut cfg = SimConfig::oracle(&model, args.trajectories, args.seed)?;
    if let Some(n) = args.sample_steps {
        cfg.sample_steps = n;
    }
    cfg.record_stride = args.records.and(args.record_stride);
    let out = simulate(&model, &cfg, integrator)?;
    let dev = compare(&out.stats, &v, args.z_threshold);

    if let Some(path) = args.out {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["row", "col", "lyapunov", "simulated", "std_error", "z"])?;
        for i in 0..6 {
            for j in i..6 {
                w.write_record([
                    QUADRATURES[i].to_string(),
                    QUADRATURES[j].to_string(),
                    format!("{:.16e}", v.matrix()[(i, j)]),
                    format!("{:.16e}", out.stats.covariance[(i, j)]),
                    format!("{:.16e}", out.stats.std_error[(i, j)]),
                    format!("{:.16e}", dev.z[(i, j)]),
                ])?;
            }
        }
        w.flush()?;
    }
    if let (Some(path), Some(records)) = (args.records, &out.records) {
        records.save(path).with_context(|| format!("writing {}", path.display()))?;
    }
    let (wi, wj) = dev.worst_entry;
    print_json(&json!({
        "integrator": integrator.name(),
        "solver": solver.name(),
        "config": cfg,
        "max_abs_z": dev.max_abs_z,
        "worst_entry": [QUADRATURES[wi], QUADRATURES[wj]],
        "z_threshold": dev.z_threshold,
        "effective_samples": out.stats.effective_samples,
        "passed": dev.passed,
    }))?;
    Ok(if dev.passed { ExitCode::SUCCESS } else { ExitCode::from(VERIFY_FAILED) })
}

pub fn probe(args: &PointArgs, gain: f64, phase: f64, records: Option<&Path>, seed: u64) -> Result<ExitCode> {
    let point = load_point(args)?;
    let model = LinearModel::new(&point.params)?;
    let registry = solvers();
    let solver = registry.resolve(setting(args.solver.as_deref(), &point.kv, "lyapunov_solver"))?;
    let v = solve_lyapunov(&model.drift, &model.diffusion, solver)?;
    let mut probe = ProbeParams::design(&model, gain)?;
    probe.homodyne_phase = phase;
    let validity = probe.validity(&model);
    if !validity.ok() {
        log::warn!("probe outside its validity window: {validity:?}");
    }
    let map = probe.readout_map();
    let measured = match records {
        Some(path) => {
            let recs = RecordSet::load(path).with_context(|| format!("reading {}", path.display()))?;
            measured_covariance_from_records(&recs, &map, seed)?
        }
        None => apply_readout_map(&v, &map)?,
    };
    let e_ac = log_negativity(&v, Bipartition::AC)?;
    let inferred = infer_ac_entanglement(&measured, &map);
    print_json(&json!({
        "probe": probe,
        "alpha_p_sq": probe.alpha_p().powi(2),
        "readout": map,
        "validity": validity,
        "source": if records.is_some() { "records" } else { "exact" },
        "e_ac": e_ac,
        "e_measured": measured_log_negativity(&measured)?,
        "e_inferred": inferred.as_ref().ok(),
        "calibration_error": inferred.as_ref().err().map(|e| e.to_string()),
    }))?;
    Ok(if inferred.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(VERIFY_FAILED) })
}

pub fn stability_map(source: &SpecSource, out: Option<&Path>) -> Result<ExitCode> {
    let spec = load_spec(source, true)?;
    let map = sweep::stability_map(&spec)?;
    if let Some(path) = out {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        let mut header: Vec<String> = map.axes.iter().map(|a| a.parameter.clone()).collect();
        header.extend(["stable", "margin", "error"].map(String::from));
        w.write_record(&header)?;
        for p in &map.points {
            let mut rec: Vec<String> = p.coords.iter().map(|c| format!("{c:.16e}")).collect();
            rec.push(p.stable.map(|s| s.to_string()).unwrap_or_default());
            rec.push(p.margin.map(|m| format!("{m:.16e}")).unwrap_or_default());
            rec.push(p.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    let errors = map.points.iter().filter(|p| p.error.is_some()).count();
    print_json(&json!({
        "name": spec.name,
        "points": map.points.len(),
        "stable": map.stable_count(),
        "unstable": map.unstable_count(),
        "errors": errors,
    }))?;
    Ok(ExitCode::SUCCESS)
}

pub fn list() -> Result<ExitCode> {
    print_json(&json!({
        "lyapunov_solvers": solvers().names(),
        "integrators": integrators().names(),
        "presets": sweep::PRESET_NAMES,
        "stability_presets": sweep::STABILITY_PRESET_NAMES,
    }))?;
    Ok(ExitCode::SUCCESS)
}
