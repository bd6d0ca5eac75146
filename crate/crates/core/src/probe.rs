//! Probe-beam readout of the Bogoliubov mode.
//!
//! A weak, far-detuned probe driven at Δ̃_P = Ω follows the Bogoliubov mode
//! adiabatically, so its output carries the atomic quadratures with gain
//! G = ζ_P·α_P·√(τ_m/κ_P) plus one unit of vacuum noise. Homodyning the
//! primary cavity and the probe output gives a 4×4 covariance from which
//! the cavity-atom entanglement is reconstructed by inverting that map.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::entanglement::log_negativity_of;
use crate::error::{Error, Result};
use crate::gaussian::{check_physical, min_symplectic, PHYSICALITY_TOL};
use crate::langevin::RecordSet;
use crate::lyapunov::CovarianceMatrix;
use crate::model::{LinearModel, Mode};

/// "≫" in the regime conditions is tested as a ratio of at least this.
pub const MUCH_GREATER: f64 = 10.0;
/// "≪" in the weak-probe conditions is tested as a ratio of at most this.
pub const MUCH_SMALLER: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    /// Probe cavity decay rate, rad/s.
    pub kappa_p: f64,
    /// Probe-Bogoliubov coupling, 1/s.
    pub zeta_p: f64,
    /// Probe pump strength, 1/s.
    pub eta_p: f64,
    /// Effective probe detuning Δ̃_P, rad/s.
    pub delta_p_tilde: f64,
    /// Mode-matching time of the detected temporal mode, s.
    pub mode_matching_time: f64,
    /// Extra homodyne rotation of the probe quadratures, rad.
    pub homodyne_phase: f64,
}

pub const PROBE_PARAM_NAMES: [&str; 6] = [
    "kappa_p",
    "zeta_p",
    "eta_p",
    "delta_p_tilde",
    "mode_matching_time",
    "homodyne_phase",
];

impl ProbeParams {
    /// Probe settings that sit inside every validity window for `model`:
    /// Δ̃_P = Ω, κ_P = Ω/20, α_P = α_s/20, ζ_P = ζ/20 (or Ω/1000 when ζ = 0),
    /// with τ_m chosen so the readout gain equals `gain`.
    pub fn design(model: &LinearModel, gain: f64) -> Result<Self> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::param("gain", "must be finite and > 0"));
        }
        let omega = model.params.omega_bogoliubov;
        let kappa_p = omega / 20.0;
        let alpha_p = model.steady.alpha_s / 20.0;
        let zeta_p = if model.params.zeta > 0.0 { model.params.zeta / 20.0 } else { omega / 1000.0 };
        if alpha_p <= 0.0 {
            return Err(Error::param("pump_power", "probe design needs a populated primary cavity"));
        }
        let eta_p = alpha_p * (omega * omega + kappa_p * kappa_p).sqrt();
        let mode_matching_time = kappa_p * (gain / (zeta_p * alpha_p)).powi(2);
        let p = Self {
            kappa_p,
            zeta_p,
            eta_p,
            delta_p_tilde: omega,
            mode_matching_time,
            homodyne_phase: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "kappa_p" => self.kappa_p,
            "zeta_p" => self.zeta_p,
            "eta_p" => self.eta_p,
            "delta_p_tilde" => self.delta_p_tilde,
            "mode_matching_time" => self.mode_matching_time,
            "homodyne_phase" => self.homodyne_phase,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "kappa_p" => &mut self.kappa_p,
            "zeta_p" => &mut self.zeta_p,
            "eta_p" => &mut self.eta_p,
            "delta_p_tilde" => &mut self.delta_p_tilde,
            "mode_matching_time" => &mut self.mode_matching_time,
            "homodyne_phase" => &mut self.homodyne_phase,
            _ => return Err(Error::param(name, "not a probe parameter")),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("kappa_p", self.kappa_p), ("mode_matching_time", self.mode_matching_time)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("zeta_p", self.zeta_p), ("eta_p", self.eta_p)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("delta_p_tilde", self.delta_p_tilde), ("homodyne_phase", self.homodyne_phase)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn alpha_p(&self) -> f64 {
        probe_steady(self).sqrt()
    }

    pub fn readout_map(&self) -> ReadoutMap {
        ReadoutMap {
            gain: self.zeta_p * self.alpha_p() * (self.mode_matching_time / self.kappa_p).sqrt(),
            phase: self.homodyne_phase,
        }
    }

    /// Regime checks. None of them involve τ_m, so rescaling the gain
    /// through the mode-matching time cannot change the verdict.
    pub fn validity(&self, model: &LinearModel) -> Validity {
        let omega = model.params.omega_bogoliubov;
        let alpha_p = self.alpha_p();
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
        let omega_over_kappa_p = ratio(omega, self.kappa_p);
        let omega_over_probe_coupling = ratio(omega, self.zeta_p * alpha_p);
        let zeta_p_over_omega = self.zeta_p / omega;
        let zeta_p_over_zeta = ratio(self.zeta_p, model.params.zeta);
        let alpha_p_over_alpha_s = ratio(alpha_p, model.steady.alpha_s);
        let detuning_matched = (self.delta_p_tilde - omega).abs() <= 1e-9 * omega;
        Validity {
            detuning_matched,
            omega_over_kappa_p,
            omega_over_probe_coupling,
            zeta_p_over_omega,
            zeta_p_over_zeta,
            alpha_p_over_alpha_s,
            adiabatic_ok: detuning_matched
                && omega_over_kappa_p >= MUCH_GREATER
                && omega_over_probe_coupling >= MUCH_GREATER,
            weak_probe_ok: zeta_p_over_omega <= MUCH_SMALLER
                && zeta_p_over_zeta <= MUCH_SMALLER
                && alpha_p_over_alpha_s <= MUCH_SMALLER,
        }
    }
}

/// |α_P|² = η_P²/(Δ̃_P² + κ_P²).
pub fn probe_steady(p: &ProbeParams) -> f64 {
    p.eta_p * p.eta_p / (p.delta_p_tilde * p.delta_p_tilde + p.kappa_p * p.kappa_p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validity {
    pub detuning_matched: bool,
    pub omega_over_kappa_p: f64,
    pub omega_over_probe_coupling: f64,
    pub zeta_p_over_omega: f64,
    pub zeta_p_over_zeta: f64,
    pub alpha_p_over_alpha_s: f64,
    pub adiabatic_ok: bool,
    pub weak_probe_ok: bool,
}

impl Validity {
    pub fn ok(&self) -> bool {
        self.adiabatic_ok && self.weak_probe_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutMap {
    pub gain: f64,
    pub phase: f64,
}

impl ReadoutMap {
    /// Phase-space rotation taking (Q, P) to the detected probe quadratures:
    /// the −i of the output relation is a quarter turn, on top of which the
    /// homodyne phase is applied. Local rotations leave every negativity
    /// unchanged, so any phase is as good as any other for the inference.
    pub fn rotation(&self) -> Matrix2<f64> {
        let phi = std::f64::consts::FRAC_PI_2 + self.phase;
        let (s, c) = phi.sin_cos();
        Matrix2::new(c, s, -s, c)
    }

    fn check(&self) -> Result<()> {
        if self.gain.is_finite() && self.gain > 0.0 && self.phase.is_finite() {
            Ok(())
        } else {
            Err(Error::param("gain", format!("readout gain must be finite and > 0, got {}", self.gain)))
        }
    }
}

fn assemble(cc: Matrix2<f64>, pp: Matrix2<f64>, cp: Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&cc);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&pp);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&cp);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&cp.transpose());
    m
}

/// Covariance of (cavity x, y, probe-output u, v).
pub fn apply_readout_map(v: &CovarianceMatrix, map: &ReadoutMap) -> Result<Matrix4<f64>> {
    map.check()?;
    check_physical(&v.to_dmatrix())?;
    let r = map.rotation();
    let g = map.gain;
    let probe = r * v.block(Mode::A, Mode::A) * r.transpose() * (g * g) + Matrix2::identity() * 0.5;
    let cross = v.block(Mode::C, Mode::A) * r.transpose() * g;
    Ok(assemble(v.block(Mode::C, Mode::C), probe, cross))
}

/// Undoes [`apply_readout_map`] and returns the (C, A) covariance.
pub fn reconstruct_ac(measured: &Matrix4<f64>, map: &ReadoutMap) -> Result<Matrix4<f64>> {
    map.check()?;
    let r = map.rotation();
    let g = map.gain;
    let cc: Matrix2<f64> = measured.fixed_view::<2, 2>(0, 0).into();
    let pp: Matrix2<f64> = measured.fixed_view::<2, 2>(2, 2).into();
    let cp: Matrix2<f64> = measured.fixed_view::<2, 2>(0, 2).into();
    let aa = r.transpose() * (pp - Matrix2::identity() * 0.5) * r / (g * g);
    let ca = cp * r / g;
    let v = assemble(cc, aa, ca);
    let nu = min_symplectic(&DMatrix::from_iterator(4, 4, v.iter().copied())).map_err(|_| Error::Calibration { min_symplectic: f64::NAN })?;
    if nu < 0.5 - PHYSICALITY_TOL {
        return Err(Error::Calibration { min_symplectic: nu });
    }
    Ok(v)
}

/// Log-negativity of the reconstructed cavity-atom pair.
pub fn infer_ac_entanglement(measured: &Matrix4<f64>, map: &ReadoutMap) -> Result<f64> {
    let v = reconstruct_ac(measured, map)?;
    log_negativity_of(&DMatrix::from_iterator(4, 4, v.iter().copied()), &[1])
}

/// Log-negativity of the detected (cavity, probe-output) pair itself.
pub fn measured_log_negativity(measured: &Matrix4<f64>) -> Result<f64> {
    log_negativity_of(&DMatrix::from_iterator(4, 4, measured.iter().copied()), &[1])
}

/// Sample covariance of (x, y, u, v) built from simulator records: every
/// stored state is passed through the readout map with a fresh vacuum
/// draw on the probe port.
pub fn measured_covariance_from_records(records: &RecordSet, map: &ReadoutMap, seed: u64) -> Result<Matrix4<f64>> {
    map.check()?;
    if records.cols != 6 {
        return Err(Error::Format(format!("expected 6 quadrature columns, found {}", records.cols)));
    }
    let n = records.rows();
    if n < 2 {
        return Err(Error::Format("need at least two recorded states".into()));
    }
    let r = map.rotation();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vac = 0.5f64.sqrt();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let s = records.row(i);
        let atom = nalgebra::Vector2::new(s[4], s[5]);
        let noise = nalgebra::Vector2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)) * vac;
        let out = r * atom * map.gain + noise;
        rows.push([s[0], s[1], out[0], out[1]]);
    }
    let mut mean = [0.0; 4];
    for row in &rows {
        for k in 0..4 {
            mean[k] += row[k];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix4::zeros();
    for row in &rows {
        for i in 0..4 {
            for j in i..4 {
                cov[(i, j)] += (row[i] - mean[i]) * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..4 {
        for j in i..4 {
            cov[(i, j)] /= (n - 1) as f64;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{log_negativity, Bipartition};
    use crate::lyapunov::{solve_lyapunov, KroneckerSum};
    use crate::params::SystemParams;
    use proptest::prelude::*;

    fn reference() -> (LinearModel, CovarianceMatrix) {
        let model = LinearModel::new(&SystemParams::reference()).unwrap();
        let v = solve_lyapunov(&model.drift, &model.diffusion, &KroneckerSum).unwrap();
        (model, v)
    }

    #[test]
    fn steady_intensity_limits() {
        let mut p = ProbeParams {
            kappa_p: 2.0,
            zeta_p: 1.0,
            eta_p: 0.0,
            delta_p_tilde: 5.0,
            mode_matching_time: 1.0,
            homodyne_phase: 0.0,
        };
        assert_eq!(probe_steady(&p), 0.0);
        p.eta_p = 3.0;
        p.delta_p_tilde = 0.0;
        assert_eq!(probe_steady(&p), 9.0 / 4.0);
    }

    #[test]
    fn designed_probe_is_valid_and_hits_gain() {
        let (model, _) = reference();
        let p = ProbeParams::design(&model, 2.0).unwrap();
        let val = p.validity(&model);
        assert!(val.ok(), "{val:?}");
        assert!((p.alpha_p() / model.steady.alpha_s - 0.05).abs() < 1e-12);
        assert!((p.readout_map().gain - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validity_ignores_gain_normalization() {
        let (model, _) = reference();
        let p = ProbeParams::design(&model, 2.0).unwrap();
        for tau in [1e-12, 1e-3, 1.0, 1e6] {
            let mut q = p;
            q.mode_matching_time = tau;
            assert_eq!(q.validity(&model), p.validity(&model));
        }
        let mut off = p;
        off.delta_p_tilde *= 1.5;
        assert!(!off.validity(&model).adiabatic_ok);
        let mut strong = p;
        strong.zeta_p = model.params.zeta;
        assert!(!strong.validity(&model).weak_probe_ok);
    }

    #[test]
    fn vanishing_gain_gives_vacuum_output() {
        let (_, v) = reference();
        let m = apply_readout_map(&v, &ReadoutMap { gain: 1e-12, phase: 0.3 }).unwrap();
        let probe: Matrix2<f64> = m.fixed_view::<2, 2>(2, 2).into();
        assert!((probe - Matrix2::identity() * 0.5).amax() < 1e-20);
        assert!(m.fixed_view::<2, 2>(0, 2).amax() < 1e-11);
        assert!(measured_log_negativity(&m).unwrap() < 1e-12);
    }

    #[test]
    fn product_vacuum_maps_to_separable_state() {
        let v = CovarianceMatrix::new(nalgebra::Matrix6::identity() * 0.5);
        let m = apply_readout_map(&v, &ReadoutMap { gain: 3.0, phase: 0.0 }).unwrap();
        assert!(measured_log_negativity(&m).unwrap() < 1e-12);
    }

    #[test]
    fn exact_round_trip() {
        let (_, v) = reference();
        let e_ac = log_negativity(&v, Bipartition::AC).unwrap();
        assert!(e_ac > 0.0);
        for gain in [0.1, 1.0, 2.0, 30.0] {
            for phase in [0.0, 0.7, -2.0] {
                let map = ReadoutMap { gain, phase };
                let m = apply_readout_map(&v, &map).unwrap();
                let e = infer_ac_entanglement(&m, &map).unwrap();
                assert!((e - e_ac).abs() <= 1e-12, "G={gain} θ={phase}: {e} vs {e_ac}");
            }
        }
    }

    #[test]
    fn vacuum_penalty_at_gain_two() {
        let (_, v) = reference();
        let e_ac = log_negativity(&v, Bipartition::AC).unwrap();
        let m = apply_readout_map(&v, &ReadoutMap { gain: 2.0, phase: 0.0 }).unwrap();
        assert!(measured_log_negativity(&m).unwrap() < e_ac);
    }

    #[test]
    fn miscalibrated_gain_is_reported() {
        let (_, v) = reference();
        let e_ac = log_negativity(&v, Bipartition::AC).unwrap();
        let truth = ReadoutMap { gain: 2.0, phase: 0.0 };
        let m = apply_readout_map(&v, &truth).unwrap();
        let wrong = ReadoutMap { gain: 2.2, ..truth };
        match infer_ac_entanglement(&m, &wrong) {
            Err(Error::Calibration { .. }) => {}
            Ok(e) => assert!((e - e_ac).abs() > 1e-6 * e_ac, "bias not visible: {e} vs {e_ac}"),
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mapped_negativity_monotone_and_bounded(g1 in 0.05f64..20.0, g2 in 0.05f64..20.0, phase in -3.0f64..3.0) {
            let (_, v) = reference();
            let e_ac = log_negativity(&v, Bipartition::AC).unwrap();
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let e_lo = measured_log_negativity(&apply_readout_map(&v, &ReadoutMap { gain: lo, phase }).unwrap()).unwrap();
            let e_hi = measured_log_negativity(&apply_readout_map(&v, &ReadoutMap { gain: hi, phase }).unwrap()).unwrap();
            prop_assert!(e_lo <= e_hi + 1e-12);
            prop_assert!(e_hi <= e_ac + 1e-12);
        }
    }
}
