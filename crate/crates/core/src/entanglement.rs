//! Logarithmic negativities of every bipartition, tripartite classification
//! and the residual (monogamy) tripartite measure.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gaussian::{min_symplectic, partial_transpose, reduced_covariance};
use crate::lyapunov::CovarianceMatrix;
use crate::model::Mode;

/// E below this is treated as zero when classifying.
pub const INSEPARABLE_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bipartition {
    AC,
    MC,
    AM,
    /// A | MC
    AvsMC,
    /// M | AC
    MvsAC,
    /// C | AM
    CvsAM,
}

impl Bipartition {
    pub const ALL: [Bipartition; 6] = [
        Bipartition::AC,
        Bipartition::MC,
        Bipartition::AM,
        Bipartition::AvsMC,
        Bipartition::MvsAC,
        Bipartition::CvsAM,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Bipartition::AC => "e_ac",
            Bipartition::MC => "e_mc",
            Bipartition::AM => "e_am",
            Bipartition::AvsMC => "e_a_mc",
            Bipartition::MvsAC => "e_m_ac",
            Bipartition::CvsAM => "e_c_am",
        }
    }

    /// Modes kept in the reduced state, and the one whose momentum is flipped.
    pub fn modes(self) -> (&'static [Mode], Mode) {
        match self {
            Bipartition::AC => (&[Mode::C, Mode::A], Mode::A),
            Bipartition::MC => (&[Mode::C, Mode::M], Mode::M),
            Bipartition::AM => (&[Mode::M, Mode::A], Mode::A),
            Bipartition::AvsMC => (&Mode::ALL, Mode::A),
            Bipartition::MvsAC => (&Mode::ALL, Mode::M),
            Bipartition::CvsAM => (&Mode::ALL, Mode::C),
        }
    }

    /// Pairwise bipartition {a, b}.
    pub fn pair(a: Mode, b: Mode) -> Option<Self> {
        use Mode::*;
        match (a.min(b), a.max(b)) {
            (C, A) => Some(Bipartition::AC),
            (C, M) => Some(Bipartition::MC),
            (M, A) => Some(Bipartition::AM),
            _ => None,
        }
    }

    /// One-vs-two bipartition with `single` on its own.
    pub fn single(single: Mode) -> Self {
        match single {
            Mode::A => Bipartition::AvsMC,
            Mode::M => Bipartition::MvsAC,
            Mode::C => Bipartition::CvsAM,
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Bipartition::AC => "AC",
            Bipartition::MC => "MC",
            Bipartition::AM => "AM",
            Bipartition::AvsMC => "A|MC",
            Bipartition::MvsAC => "M|AC",
            Bipartition::CvsAM => "C|AM",
        };
        f.write_str(s)
    }
}

/// E = max(0, −ln 2ν̃_min) of a 2n×2n covariance after flipping the
/// momenta of the local modes in `flipped`.
pub fn log_negativity_of(v: &DMatrix<f64>, flipped: &[usize]) -> Result<f64> {
    let nu = min_symplectic(&partial_transpose(v, flipped))?;
    Ok((-(2.0 * nu).ln()).max(0.0))
}

pub fn log_negativity(v: &CovarianceMatrix, label: Bipartition) -> Result<f64> {
    let (modes, flipped) = label.modes();
    let reduced = reduced_covariance(v, modes)?;
    let local = modes.iter().position(|m| *m == flipped).expect("flipped mode is kept");
    log_negativity_of(&reduced, &[local])
}

/// All six negativities of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Negativities {
    pub e_ac: f64,
    pub e_mc: f64,
    pub e_am: f64,
    pub e_a_mc: f64,
    pub e_m_ac: f64,
    pub e_c_am: f64,
}

impl Negativities {
    pub fn compute(v: &CovarianceMatrix) -> Result<Self> {
        Ok(Self {
            e_ac: log_negativity(v, Bipartition::AC)?,
            e_mc: log_negativity(v, Bipartition::MC)?,
            e_am: log_negativity(v, Bipartition::AM)?,
            e_a_mc: log_negativity(v, Bipartition::AvsMC)?,
            e_m_ac: log_negativity(v, Bipartition::MvsAC)?,
            e_c_am: log_negativity(v, Bipartition::CvsAM)?,
        })
    }

    pub fn get(&self, label: Bipartition) -> f64 {
        match label {
            Bipartition::AC => self.e_ac,
            Bipartition::MC => self.e_mc,
            Bipartition::AM => self.e_am,
            Bipartition::AvsMC => self.e_a_mc,
            Bipartition::MvsAC => self.e_m_ac,
            Bipartition::CvsAM => self.e_c_am,
        }
    }

    pub fn one_vs_two(&self) -> [f64; 3] {
        [self.e_a_mc, self.e_m_ac, self.e_c_am]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripartiteClass {
    /// All three one-vs-two bipartitions inseparable.
    FullyInseparable,
    /// Exactly one inseparable.
    OneModeBiseparable,
    /// Exactly two inseparable.
    TwoModeBiseparable,
    /// None inseparable.
    FullySeparable,
}

impl TripartiteClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TripartiteClass::FullyInseparable => "fully-inseparable",
            TripartiteClass::OneModeBiseparable => "one-mode-biseparable",
            TripartiteClass::TwoModeBiseparable => "two-mode-biseparable",
            TripartiteClass::FullySeparable => "fully-separable",
        }
    }
}

pub fn classify_tripartite(one_vs_two: [f64; 3]) -> TripartiteClass {
    match one_vs_two.iter().filter(|e| **e > INSEPARABLE_THRESHOLD).count() {
        3 => TripartiteClass::FullyInseparable,
        2 => TripartiteClass::TwoModeBiseparable,
        1 => TripartiteClass::OneModeBiseparable,
        _ => TripartiteClass::FullySeparable,
    }
}

/// max(0, min over i of [G_i|jk − G_ij − G_ik]) with G = E².
///
/// Squared log-negativities of the mixed reductions stand in for their
/// convex-roof extensions. Returns zero unless the state is fully
/// inseparable.
pub fn residual_tripartite(e: &Negativities) -> f64 {
    if classify_tripartite(e.one_vs_two()) != TripartiteClass::FullyInseparable {
        return 0.0;
    }
    let g = |l: Bipartition| e.get(l).powi(2);
    let min = Mode::ALL
        .iter()
        .map(|&i| {
            let others: Vec<Mode> = Mode::ALL.iter().copied().filter(|m| *m != i).collect();
            g(Bipartition::single(i))
                - g(Bipartition::pair(i, others[0]).unwrap())
                - g(Bipartition::pair(i, others[1]).unwrap())
        })
        .fold(f64::INFINITY, f64::min);
    min.max(0.0)
}

/// Serialized result of one parameter point. Negativity fields are `None`
/// when the point has no stationary state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub stable: bool,
    pub e_ac: Option<f64>,
    pub e_mc: Option<f64>,
    pub e_am: Option<f64>,
    pub e_a_mc: Option<f64>,
    pub e_m_ac: Option<f64>,
    pub e_c_am: Option<f64>,
    pub g_tri_proxy: Option<f64>,
    pub tripartite_class: Option<TripartiteClass>,
    pub stability_margin: f64,
}

/// Report field names, in output order.
pub const REPORT_FIELDS: &[&str] = &[
    "stable",
    "e_ac",
    "e_mc",
    "e_am",
    "e_a_mc",
    "e_m_ac",
    "e_c_am",
    "g_tri_proxy",
    "tripartite_class",
    "stability_margin",
];

impl EntanglementReport {
    pub fn from_covariance(v: &CovarianceMatrix, stability_margin: f64) -> Result<Self> {
        let e = Negativities::compute(v)?;
        Ok(Self::from_negativities(&e, stability_margin))
    }

    pub fn from_negativities(e: &Negativities, stability_margin: f64) -> Self {
        Self {
            stable: true,
            e_ac: Some(e.e_ac),
            e_mc: Some(e.e_mc),
            e_am: Some(e.e_am),
            e_a_mc: Some(e.e_a_mc),
            e_m_ac: Some(e.e_m_ac),
            e_c_am: Some(e.e_c_am),
            g_tri_proxy: Some(residual_tripartite(e)),
            tripartite_class: Some(classify_tripartite(e.one_vs_two())),
            stability_margin,
        }
    }

    pub fn unstable(stability_margin: f64) -> Self {
        Self {
            stable: false,
            e_ac: None,
            e_mc: None,
            e_am: None,
            e_a_mc: None,
            e_m_ac: None,
            e_c_am: None,
            g_tri_proxy: None,
            tripartite_class: None,
            stability_margin,
        }
    }

    pub fn negativity(&self, label: Bipartition) -> Option<f64> {
        match label {
            Bipartition::AC => self.e_ac,
            Bipartition::MC => self.e_mc,
            Bipartition::AM => self.e_am,
            Bipartition::AvsMC => self.e_a_mc,
            Bipartition::MvsAC => self.e_m_ac,
            Bipartition::CvsAM => self.e_c_am,
        }
    }

    /// Numeric value of a report field; `stable` maps to 0/1 and the class
    /// is not numeric.
    pub fn numeric_field(&self, name: &str) -> Option<f64> {
        match name {
            "stable" => Some(if self.stable { 1.0 } else { 0.0 }),
            "e_ac" => self.e_ac,
            "e_mc" => self.e_mc,
            "e_am" => self.e_am,
            "e_a_mc" => self.e_a_mc,
            "e_m_ac" => self.e_m_ac,
            "e_c_am" => self.e_c_am,
            "g_tri_proxy" => self.g_tri_proxy,
            "stability_margin" => Some(self.stability_margin),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{rotate_mode, two_mode_squeezed};
    use nalgebra::Matrix6;

    fn product_state() -> CovarianceMatrix {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&nalgebra::Matrix2::new(0.7, 0.1, 0.1, 0.6));
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&nalgebra::Matrix2::new(2.0, -0.3, -0.3, 1.5));
        m.fixed_view_mut::<2, 2>(4, 4).copy_from(&nalgebra::Matrix2::new(0.5, 0.0, 0.0, 0.5));
        CovarianceMatrix::new(m)
    }

    /// TMS between modes at offsets `a` and `b` of the 6×6 state, vacuum elsewhere.
    fn embedded_tms(r: f64, a: Mode, b: Mode) -> CovarianceMatrix {
        let t = two_mode_squeezed(r);
        let mut m = Matrix6::identity() * 0.5;
        let idx = [a.offset(), a.offset() + 1, b.offset(), b.offset() + 1];
        for i in 0..4 {
            for j in 0..4 {
                m[(idx[i], idx[j])] = t[(i, j)];
            }
        }
        CovarianceMatrix::new(m)
    }

    #[test]
    fn product_state_has_no_entanglement() {
        let e = Negativities::compute(&product_state()).unwrap();
        for l in Bipartition::ALL {
            assert_eq!(e.get(l), 0.0, "{l}");
        }
        assert_eq!(residual_tripartite(&e), 0.0);
        assert_eq!(classify_tripartite(e.one_vs_two()), TripartiteClass::FullySeparable);
    }

    #[test]
    fn tms_log_negativity_is_twice_squeezing() {
        for r in [0.1, 0.5, 1.0, 2.0] {
            let v = embedded_tms(r, Mode::C, Mode::A);
            let e = log_negativity(&v, Bipartition::AC).unwrap();
            assert!((e - 2.0 * r).abs() < 1e-10, "r={r}: {e}");
            assert!(log_negativity(&v, Bipartition::AM).unwrap() < 1e-12);
            // C|AM and A|MC see the same pure pair
            assert!((log_negativity(&v, Bipartition::CvsAM).unwrap() - 2.0 * r).abs() < 1e-10);
            assert!(log_negativity(&v, Bipartition::MvsAC).unwrap() < 1e-12);
        }
    }

    #[test]
    fn classification_patterns() {
        assert_eq!(classify_tripartite([0.1, 0.2, 0.3]), TripartiteClass::FullyInseparable);
        assert_eq!(classify_tripartite([0.0, 0.0, 0.0]), TripartiteClass::FullySeparable);
        assert_eq!(classify_tripartite([0.0, 0.3, 0.0]), TripartiteClass::OneModeBiseparable);
        assert_eq!(classify_tripartite([0.1, 0.0, 0.3]), TripartiteClass::TwoModeBiseparable);
        assert_eq!(classify_tripartite([1e-10, 1.0, 1.0]), TripartiteClass::TwoModeBiseparable);
    }

    #[test]
    fn residual_enumerates_permutations() {
        let e = Negativities {
            e_ac: 0.2,
            e_mc: 0.2,
            e_am: 0.0,
            e_a_mc: 0.5,
            e_m_ac: 0.45,
            e_c_am: 0.4,
        };
        let by_hand = [
            0.5f64.powi(2) - 0.2f64.powi(2) - 0.0,
            0.45f64.powi(2) - 0.2f64.powi(2) - 0.0,
            0.4f64.powi(2) - 0.2f64.powi(2) - 0.2f64.powi(2),
        ];
        let expected = by_hand.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((residual_tripartite(&e) - expected).abs() < 1e-15);

        let neg = Negativities { e_c_am: 0.1, ..e };
        assert_eq!(residual_tripartite(&neg), 0.0);
        let sep = Negativities { e_m_ac: 0.0, ..e };
        assert_eq!(residual_tripartite(&sep), 0.0);
    }

    #[test]
    fn local_rotations_leave_negativities_unchanged() {
        let v0 = embedded_tms(0.6, Mode::C, Mode::M);
        let mut d = v0.to_dmatrix();
        // mix in the third mode so every label is non-trivial
        d = rotate_mode(&d, 2, 0.4);
        let base = CovarianceMatrix::new(nalgebra::Matrix6::from_iterator(d.iter().copied()));
        let e0 = Negativities::compute(&base).unwrap();
        for mode in 0..3 {
            for theta in [0.3, 1.1, -2.0] {
                let r = rotate_mode(&base.to_dmatrix(), mode, theta);
                let v = CovarianceMatrix::new(nalgebra::Matrix6::from_iterator(r.iter().copied()));
                let e = Negativities::compute(&v).unwrap();
                for l in Bipartition::ALL {
                    assert!((e.get(l) - e0.get(l)).abs() < 1e-10, "{l}");
                }
            }
        }
    }

    #[test]
    fn unstable_report_serializes_nulls() {
        let r = EntanglementReport::unstable(-3.0);
        let json = serde_json::to_value(&r).unwrap();
        for key in REPORT_FIELDS {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(json["e_ac"].is_null() && json["tripartite_class"].is_null());
        assert_eq!(json["stable"], false);
    }

    #[test]
    fn class_serializes_kebab_case() {
        let s = serde_json::to_string(&TripartiteClass::OneModeBiseparable).unwrap();
        assert_eq!(s, "\"one-mode-biseparable\"");
        assert_eq!(TripartiteClass::FullyInseparable.as_str(), "fully-inseparable");
    }
}
