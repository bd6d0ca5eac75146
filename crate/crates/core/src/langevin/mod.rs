//! Brute-force stochastic oracle for the stationary covariance.
//!
//! Integrates dδφ = K·δφ dt + S·dW (S·Sᵀ = D) for an ensemble of independent
//! trajectories and estimates the stationary second moments from
//! time-and-ensemble averages. Nothing here calls the Lyapunov solver.

mod integrator;
mod mean_field;
mod records;

use nalgebra::{Matrix6, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lyapunov::CovarianceMatrix;
use crate::model::LinearModel;

pub use integrator::{integrators, EulerMaruyama, Integrator, LinearStep, Trapezoidal};
pub use mean_field::{classical_fixed_point, ClassicalFixedPoint, MeanFieldFlow};
pub use records::{RecordSet, MAGIC as RECORD_MAGIC};

/// Any quadrature beyond this magnitude means the run has blown up.
const DIVERGENCE_LIMIT: f64 = 1e8;
const DIVERGENCE_CHECK_EVERY: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Step used while accumulating statistics, s.
    pub dt: f64,
    /// Step used during burn-in; defaults to `dt`.
    pub burn_in_dt: Option<f64>,
    pub burn_in_steps: usize,
    pub sample_steps: usize,
    /// Accumulate moments on every `sample_stride`-th sample step.
    pub sample_stride: usize,
    pub n_trajectories: usize,
    pub rng_seed: u64,
    /// When set, keep every `record_stride`-th sample-phase state.
    pub record_stride: Option<usize>,
}

/// Minimum ensemble size for oracle comparisons.
pub const ORACLE_MIN_TRAJECTORIES: usize = 100;

impl SimConfig {
    /// Oracle settings: dt = 0.02/(fastest rate), a coarse burn-in covering
    /// three relaxation times of the slowest eigenmode, then `sample_steps`
    /// at the fine step.
    pub fn oracle(model: &LinearModel, n_trajectories: usize, rng_seed: u64) -> Result<Self> {
        let st = model.stability()?;
        if !st.stable {
            return Err(Error::NoStationaryState { margin: st.margin });
        }
        let fastest = model.fastest_rate();
        let burn_in_dt = 2.0 / fastest;
        let burn_in_steps = (3.0 / st.margin / burn_in_dt).ceil() as usize;
        Ok(Self {
            dt: 0.02 / fastest,
            burn_in_dt: Some(burn_in_dt),
            burn_in_steps,
            sample_steps: 5000,
            sample_stride: 5,
            n_trajectories,
            rng_seed,
            record_stride: None,
        })
    }

    pub fn max_dt(model: &LinearModel) -> f64 {
        0.05 / model.fastest_rate()
    }

    pub fn validate(&self, model: &LinearModel) -> Result<()> {
        let max_dt = Self::max_dt(model);
        if !(self.dt > 0.0 && self.dt <= max_dt) {
            return Err(Error::param("dt", format!("must lie in (0, {max_dt:e}] to resolve the fastest rate, got {:e}", self.dt)));
        }
        if let Some(b) = self.burn_in_dt {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::param("burn_in_dt", "must be finite and > 0"));
            }
        }
        if self.sample_steps == 0 || self.sample_stride == 0 || self.sample_stride > self.sample_steps {
            return Err(Error::param("sample_steps", "need sample_steps >= sample_stride >= 1"));
        }
        if self.n_trajectories < 2 {
            return Err(Error::param("n_trajectories", "need at least 2 trajectories for error bars"));
        }
        if self.record_stride == Some(0) {
            return Err(Error::param("record_stride", "must be >= 1"));
        }
        Ok(())
    }

    pub fn samples_per_trajectory(&self) -> usize {
        self.sample_steps / self.sample_stride
    }
}

/// Empirical moments with trajectory-to-trajectory error bars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub mean: Vector6<f64>,
    pub mean_std_error: Vector6<f64>,
    pub covariance: Matrix6<f64>,
    pub std_error: Matrix6<f64>,
    pub n_trajectories: usize,
    pub samples_per_trajectory: usize,
    /// min over quadratures of 2σ⁴ / SE(σ²)²: the number of independent
    /// Gaussian samples the error bars are worth.
    pub effective_samples: f64,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub stats: TrajectoryStats,
    pub records: Option<RecordSet>,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

const PAIRS: usize = 21;

fn pair_index() -> [(usize, usize); PAIRS] {
    let mut out = [(0, 0); PAIRS];
    let mut k = 0;
    for i in 0..6 {
        for j in i..6 {
            out[k] = (i, j);
            k += 1;
        }
    }
    out
}

struct TrajectoryMoments {
    mean: [f64; 6],
    second: [f64; PAIRS],
    records: Vec<f64>,
}

struct Stepper {
    step: LinearStep,
    noise_cols: Vec<usize>,
}

impl Stepper {
    fn new(step: LinearStep) -> Self {
        let noise_cols = (0..6).filter(|&c| step.noise.column(c).iter().any(|v| *v != 0.0)).collect();
        Self { step, noise_cols }
    }

    #[inline]
    fn advance(&self, x: &Vector6<f64>, rng: &mut ChaCha8Rng) -> Vector6<f64> {
        let mut next = self.step.transition * x;
        for &c in &self.noise_cols {
            let xi: f64 = StandardNormal.sample(rng);
            next += self.step.noise.column(c) * xi;
        }
        next
    }
}

fn diverged(x: &Vector6<f64>) -> Option<f64> {
    let norm = x.amax();
    (!norm.is_finite() || norm > DIVERGENCE_LIMIT).then_some(norm)
}

fn run_trajectory(
    index: usize,
    model: &LinearModel,
    config: &SimConfig,
    burn: &Stepper,
    sample: &Stepper,
) -> Result<TrajectoryMoments> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(index as u64);

    // uncoupled ground state, mirror at its bath temperature
    let sd = [
        0.5f64.sqrt(),
        0.5f64.sqrt(),
        (model.rates.n_bar + 0.5).sqrt(),
        (model.rates.n_bar + 0.5).sqrt(),
        0.5f64.sqrt(),
        0.5f64.sqrt(),
    ];
    let mut x = Vector6::from_fn(|i, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        sd[i] * z
    });

    for step in 0..config.burn_in_steps {
        x = burn.advance(&x, &mut rng);
        if step % DIVERGENCE_CHECK_EVERY == 0 {
            if let Some(norm) = diverged(&x) {
                return Err(Error::Diverged { trajectory: index, step, norm });
            }
        }
    }

    let pairs = pair_index();
    let mut mean = [CompensatedSum::default(); 6];
    let mut second = [CompensatedSum::default(); PAIRS];
    let mut records = Vec::new();
    let mut count = 0usize;
    for step in 1..=config.sample_steps {
        x = sample.advance(&x, &mut rng);
        if step % DIVERGENCE_CHECK_EVERY == 0 {
            if let Some(norm) = diverged(&x) {
                return Err(Error::Diverged {
                    trajectory: index,
                    step: config.burn_in_steps + step,
                    norm,
                });
            }
        }
        if step % config.sample_stride == 0 {
            count += 1;
            for i in 0..6 {
                mean[i].add(x[i]);
            }
            for (k, &(i, j)) in pairs.iter().enumerate() {
                second[k].add(x[i] * x[j]);
            }
        }
        if let Some(rs) = config.record_stride {
            if step % rs == 0 {
                records.extend(x.iter().copied());
            }
        }
    }
    if let Some(norm) = diverged(&x) {
        return Err(Error::Diverged {
            trajectory: index,
            step: config.burn_in_steps + config.sample_steps,
            norm,
        });
    }
    let n = count as f64;
    Ok(TrajectoryMoments {
        mean: mean.map(|s| s.value() / n),
        second: second.map(|s| s.value() / n),
        records,
    })
}

/// Runs the ensemble. Trajectory `i` draws from ChaCha8 stream `i` of
/// `rng_seed`, and per-trajectory results are combined in index order, so
/// the output does not depend on thread scheduling.
pub fn simulate(model: &LinearModel, config: &SimConfig, integrator: &dyn Integrator) -> Result<SimOutput> {
    let st = model.stability()?;
    if !st.stable {
        return Err(Error::NoStationaryState { margin: st.margin });
    }
    config.validate(model)?;
    let k = model.drift.0;
    let d = model.diffusion.matrix;
    let sample = Stepper::new(integrator.discretize(&k, &d, config.dt)?);
    let burn = Stepper::new(integrator.discretize(&k, &d, config.burn_in_dt.unwrap_or(config.dt))?);

    let per_traj: Vec<TrajectoryMoments> = (0..config.n_trajectories)
        .into_par_iter()
        .map(|i| run_trajectory(i, model, config, &burn, &sample))
        .collect::<Result<_>>()?;

    let stats = combine(&per_traj, config.samples_per_trajectory());
    let records = config.record_stride.map(|rs| RecordSet {
        cols: 6,
        dt: config.dt * rs as f64,
        n_trajectories: config.n_trajectories,
        data: per_traj.iter().flat_map(|t| t.records.iter().copied()).collect(),
    });
    Ok(SimOutput { stats, records })
}

fn combine(per_traj: &[TrajectoryMoments], samples_per_trajectory: usize) -> TrajectoryStats {
    let n = per_traj.len() as f64;
    let pairs = pair_index();

    let mut mean = Vector6::zeros();
    let mut mean_se = Vector6::zeros();
    for i in 0..6 {
        let mut s = CompensatedSum::default();
        per_traj.iter().for_each(|t| s.add(t.mean[i]));
        mean[i] = s.value() / n;
        let mut v = CompensatedSum::default();
        per_traj.iter().for_each(|t| v.add((t.mean[i] - mean[i]).powi(2)));
        mean_se[i] = (v.value() / (n - 1.0) / n).sqrt();
    }

    let mut cov = Matrix6::zeros();
    let mut se = Matrix6::zeros();
    for (k, &(i, j)) in pairs.iter().enumerate() {
        // linearized per-trajectory contribution to the centred moment
        let centred = |t: &TrajectoryMoments| t.second[k] - t.mean[i] * mean[j] - mean[i] * t.mean[j] + mean[i] * mean[j];
        let mut s = CompensatedSum::default();
        per_traj.iter().for_each(|t| s.add(centred(t)));
        let c = s.value() / n;
        let mut v = CompensatedSum::default();
        per_traj.iter().for_each(|t| v.add((centred(t) - c).powi(2)));
        let e = (v.value() / (n - 1.0) / n).sqrt();
        cov[(i, j)] = c;
        cov[(j, i)] = c;
        se[(i, j)] = e;
        se[(j, i)] = e;
    }
    let effective_samples = (0..6)
        .filter(|&i| se[(i, i)] > 0.0)
        .map(|i| 2.0 * cov[(i, i)].powi(2) / se[(i, i)].powi(2))
        .fold(f64::INFINITY, f64::min);

    TrajectoryStats {
        mean,
        mean_std_error: mean_se,
        covariance: cov,
        std_error: se,
        n_trajectories: per_traj.len(),
        samples_per_trajectory,
        effective_samples,
    }
}

/// Per-entry z-scores of an empirical covariance against a reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub z: Matrix6<f64>,
    pub max_abs_z: f64,
    pub worst_entry: (usize, usize),
    pub z_threshold: f64,
    pub passed: bool,
}

impl Deviation {
    /// Upper-triangle entries with |z| above the threshold.
    pub fn flagged(&self) -> Vec<(usize, usize)> {
        pair_index()
            .into_iter()
            .filter(|&(i, j)| self.z[(i, j)].abs() > self.z_threshold)
            .collect()
    }
}

pub fn compare(stats: &TrajectoryStats, v: &CovarianceMatrix, z_threshold: f64) -> Deviation {
    let reference = v.matrix();
    let mut z = Matrix6::zeros();
    let mut max_abs_z: f64 = 0.0;
    let mut worst_entry = (0, 0);
    for (i, j) in pair_index() {
        let diff = stats.covariance[(i, j)] - reference[(i, j)];
        let se = stats.std_error[(i, j)];
        let zij = if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        z[(i, j)] = zij;
        z[(j, i)] = zij;
        if zij.abs() > max_abs_z {
            max_abs_z = zij.abs();
            worst_entry = (i, j);
        }
    }
    Deviation {
        z,
        max_abs_z,
        worst_entry,
        z_threshold,
        passed: max_abs_z <= z_threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;

    fn decoupled(temperature: f64) -> LinearModel {
        let mut p = SystemParams::reference();
        p.chi = 0.0;
        p.zeta = 0.0;
        p.temperature = temperature;
        let kappa = LinearModel::new(&p).unwrap().rates.kappa;
        p.atom_damping = 1e-6 * kappa;
        // keep the mirror relaxation short enough for a unit test
        p.quality = 30.0;
        LinearModel::new(&p).unwrap()
    }

    fn quick_config(model: &LinearModel, n: usize, seed: u64) -> SimConfig {
        // atoms start in their stationary vacuum, so only the mirror has to relax
        let fastest = model.fastest_rate();
        SimConfig {
            dt: 0.02 / fastest,
            burn_in_dt: Some(2.0 / fastest),
            burn_in_steps: (6.0 / model.rates.gamma / (2.0 / fastest)) as usize,
            sample_steps: 2000,
            sample_stride: 4,
            n_trajectories: n,
            rng_seed: seed,
            record_stride: None,
        }
    }

    #[test]
    fn cavity_reaches_vacuum_and_mirror_thermal() {
        let model = decoupled(1e-4);
        let cfg = quick_config(&model, 200, 7);
        let out = simulate(&model, &cfg, &Trapezoidal).unwrap();
        let s = &out.stats;
        for i in 0..2 {
            let z = (s.covariance[(i, i)] - 0.5) / s.std_error[(i, i)];
            assert!(z.abs() < 3.0, "cavity {i}: z={z}");
        }
        let target = model.rates.n_bar + 0.5;
        for i in 2..4 {
            let z = (s.covariance[(i, i)] - target) / s.std_error[(i, i)];
            assert!(z.abs() < 3.0, "mirror {i}: z={z} ({} vs {target})", s.covariance[(i, i)]);
        }
        for i in 0..6 {
            assert!(s.mean[i].abs() < 5.0 * s.mean_std_error[i], "mean {i}");
        }
        assert!(s.std_error.iter().all(|e| *e > 0.0));
        assert_eq!(s.covariance, s.covariance.transpose());
    }

    #[test]
    fn replay_is_bit_identical() {
        let model = decoupled(1e-4);
        let mut cfg = quick_config(&model, 8, 42);
        cfg.burn_in_steps = 500;
        cfg.record_stride = Some(100);
        let a = simulate(&model, &cfg, &Trapezoidal).unwrap();
        let b = simulate(&model, &cfg, &Trapezoidal).unwrap();
        assert!(a.stats.covariance.iter().zip(b.stats.covariance.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.records, b.records);
        let recs = a.records.unwrap();
        assert_eq!(recs.rows(), 8 * 20);
        cfg.rng_seed = 43;
        let c = simulate(&model, &cfg, &Trapezoidal).unwrap();
        assert_ne!(a.stats.covariance, c.stats.covariance);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let model = decoupled(1e-4);
        let mut cfg = quick_config(&model, 6, 9);
        cfg.burn_in_steps = 200;
        let par = simulate(&model, &cfg, &Trapezoidal).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let ser = pool.install(|| simulate(&model, &cfg, &Trapezoidal).unwrap());
        assert_eq!(par.stats, ser.stats);
    }

    #[test]
    fn compare_flags_perturbed_entry() {
        let mut m = Matrix6::identity() * 0.5;
        m[(0, 1)] = 0.1;
        m[(1, 0)] = 0.1;
        let v = CovarianceMatrix::new(m);
        let stats = TrajectoryStats {
            mean: Vector6::zeros(),
            mean_std_error: Vector6::repeat(0.01),
            covariance: m,
            std_error: Matrix6::repeat(0.01),
            n_trajectories: 100,
            samples_per_trajectory: 1,
            effective_samples: 100.0,
        };
        let dev = compare(&stats, &v, 5.0);
        assert!(dev.passed);
        assert_eq!(dev.max_abs_z, 0.0);

        let mut shifted = stats.clone();
        shifted.covariance[(2, 4)] += 0.1;
        shifted.covariance[(4, 2)] += 0.1;
        let dev = compare(&shifted, &v, 5.0);
        assert!(!dev.passed);
        assert_eq!(dev.worst_entry, (2, 4));
        assert_eq!(dev.flagged(), vec![(2, 4)]);
        assert!((dev.max_abs_z - 10.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        let model = decoupled(1e-4);
        let mut cfg = quick_config(&model, 4, 1);
        cfg.dt = 1.0 / model.fastest_rate();
        assert!(simulate(&model, &cfg, &Trapezoidal).is_err());
        let mut cfg = quick_config(&model, 1, 1);
        cfg.burn_in_steps = 0;
        assert!(cfg.validate(&model).is_err());
    }

    #[test]
    fn refuses_unstable_model() {
        let mut p = SystemParams::reference();
        p.chi = 0.0;
        p.zeta = 0.0;
        let model = LinearModel::new(&p).unwrap();
        let cfg = SimConfig {
            dt: 1e-10,
            burn_in_dt: None,
            burn_in_steps: 10,
            sample_steps: 10,
            sample_stride: 1,
            n_trajectories: 2,
            rng_seed: 0,
            record_stride: None,
        };
        assert!(matches!(simulate(&model, &cfg, &Trapezoidal), Err(Error::NoStationaryState { .. })));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
