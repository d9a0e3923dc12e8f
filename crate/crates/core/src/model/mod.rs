//! Scenario parameters, the one-excitation basis and the record types shared by
//! every other module.
//!
//! Units: `kappa_sq = 1` sets the frequency unit. Configurations in physical
//! units are converted before they reach this crate.

mod record;
mod sweep;

use alloc::vec::Vec;
use core::fmt;

pub use record::{AmplitudeTrajectory, DissipationLedger, OutputRecord};
pub use sweep::{Knob, SweepError, SweepProfile};

/// Every rate and detuning of the two-site system, in units of `kappa_sq`.
///
/// The storage atom is a ladder with `levels_s` levels: ground, then rungs
/// `1..levels_s - 1`. Rung 1 couples to cavity `s` with `g_s`; rung `i` couples
/// to rung `i + 1` with `ladder_rabi[i - 1]`, and rung `i >= 2` sits at
/// `detuning_s + ladder_detuning[i - 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    /// Storage atom-cavity coupling.
    pub g_s: f64,
    /// Switch atom-cavity coupling.
    pub g_q: f64,
    /// Intercavity coupling; the unit, always 1.
    pub kappa_sq: f64,
    /// Coherent out-coupling of cavity `q` into the waveguide.
    pub kappa_wq: f64,
    /// Detuning of cavity `q` from cavity `s`.
    pub cavity_detuning_q: f64,
    /// Storage atom detuning (the tuning knob of the ladder protocols).
    pub detuning_s: f64,
    /// Switch atom detuning (the tuning knob of the Q-switch protocols).
    pub detuning_q: f64,
    /// Transverse loss of cavity `s`.
    pub kappa_s: f64,
    /// Transverse loss of cavity `q`.
    pub kappa_q: f64,
    /// Spontaneous emission of the storage atom, applied to every rung.
    pub gamma_s: f64,
    /// Spontaneous emission of the switch atom.
    pub gamma_q: f64,
    /// Number of levels of the storage atom (2 for a two-level atom).
    pub levels_s: usize,
    /// Ladder drive strengths, `levels_s - 2` entries.
    pub ladder_rabi: Vec<f64>,
    /// Ladder drive detunings, `levels_s - 2` entries.
    pub ladder_detuning: Vec<f64>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            g_s: 0.0,
            g_q: 0.0,
            kappa_sq: 1.0,
            kappa_wq: 0.0,
            cavity_detuning_q: 0.0,
            detuning_s: 0.0,
            detuning_q: 0.0,
            kappa_s: 0.0,
            kappa_q: 0.0,
            gamma_s: 0.0,
            gamma_q: 0.0,
            levels_s: 2,
            ladder_rabi: Vec::new(),
            ladder_detuning: Vec::new(),
        }
    }
}

impl ScenarioParams {
    /// Two-level storage atom with the given couplings, lossless and closed.
    pub fn two_level(g_s: f64, g_q: f64, cavity_detuning_q: f64) -> Self {
        Self {
            g_s,
            g_q,
            cavity_detuning_q,
            ..Self::default()
        }
    }

    /// Ladder storage atom with `rabi.len() + 2` levels and zero ladder detunings.
    pub fn ladder(g_s: f64, g_q: f64, cavity_detuning_q: f64, detuning_q: f64, rabi: &[f64]) -> Self {
        Self {
            g_s,
            g_q,
            cavity_detuning_q,
            detuning_q,
            levels_s: rabi.len() + 2,
            ladder_rabi: rabi.to_vec(),
            ladder_detuning: alloc::vec![0.0; rabi.len()],
            ..Self::default()
        }
    }

    /// The Q-switch working point: `g_s = 5`, `g_q = 20`, `delta_q = 2`.
    pub fn q_switch_reference() -> Self {
        Self::two_level(5.0, 20.0, 2.0)
    }

    /// The three-level ladder working point: `g_s = 1`, `Omega_s = 4.94`,
    /// `g_q = 10`, `delta_q = -15`, `Delta_q = -8.6`.
    pub fn three_level_reference() -> Self {
        Self::ladder(1.0, 10.0, -15.0, -8.6, &[4.94])
    }

    /// Four-level ladder variant with every drive at `Omega = 5`.
    pub fn four_level_reference() -> Self {
        Self::ladder(1.0, 10.0, -15.0, -8.6, &[5.0, 5.0])
    }

    pub fn with_kappa_wq(mut self, kappa_wq: f64) -> Self {
        self.kappa_wq = kappa_wq;
        self
    }

    pub fn with_detunings(mut self, detuning_s: f64, detuning_q: f64) -> Self {
        self.detuning_s = detuning_s;
        self.detuning_q = detuning_q;
        self
    }

    /// Manifold dimension `levels_s + 2`.
    pub fn dim(&self) -> usize {
        self.levels_s + 2
    }

    /// Index of `|e_{s;rung}, 0_s>`; rungs count from 1.
    pub fn atom_s_index(&self, rung: usize) -> usize {
        debug_assert!(rung >= 1 && rung < self.levels_s);
        rung
    }

    pub fn photon_s_index(&self) -> usize {
        0
    }

    pub fn photon_q_index(&self) -> usize {
        self.levels_s
    }

    pub fn atom_q_index(&self) -> usize {
        self.levels_s + 1
    }

    /// Fails on the first broken invariant.
    pub fn validate(&self) -> Result<(), ModelError> {
        let named = [
            ("g_s", self.g_s),
            ("g_q", self.g_q),
            ("kappa_sq", self.kappa_sq),
            ("kappa_wq", self.kappa_wq),
            ("cavity_detuning_q", self.cavity_detuning_q),
            ("detuning_s", self.detuning_s),
            ("detuning_q", self.detuning_q),
            ("kappa_s", self.kappa_s),
            ("kappa_q", self.kappa_q),
            ("gamma_s", self.gamma_s),
            ("gamma_q", self.gamma_q),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(name));
            }
        }
        if self.kappa_sq <= 0.0 {
            return Err(ModelError::NonPositiveKappaSq(self.kappa_sq));
        }
        if self.kappa_sq != 1.0 {
            return Err(ModelError::UnnormalizedKappaSq(self.kappa_sq));
        }
        let rates = [
            ("g_s", self.g_s),
            ("g_q", self.g_q),
            ("kappa_wq", self.kappa_wq),
            ("kappa_s", self.kappa_s),
            ("kappa_q", self.kappa_q),
            ("gamma_s", self.gamma_s),
            ("gamma_q", self.gamma_q),
        ];
        for (name, v) in rates {
            if v < 0.0 {
                return Err(ModelError::NegativeRate(name));
            }
        }
        if self.levels_s < 2 {
            return Err(ModelError::TooFewLevels(self.levels_s));
        }
        let expected = self.levels_s - 2;
        if self.ladder_rabi.len() != expected || self.ladder_detuning.len() != expected {
            return Err(ModelError::LengthMismatch {
                levels: self.levels_s,
                rabi: self.ladder_rabi.len(),
                detunings: self.ladder_detuning.len(),
            });
        }
        if self.ladder_rabi.iter().chain(&self.ladder_detuning).any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("ladder"));
        }
        if self.ladder_rabi.iter().any(|&v| v < 0.0) {
            return Err(ModelError::NegativeRate("ladder_rabi"));
        }
        Ok(())
    }

    /// Largest magnitude among couplings, detunings and half decay rates; sets
    /// the default integration step.
    pub fn max_rate(&self) -> f64 {
        let mut m = self
            .g_s
            .max(self.g_q)
            .max(self.kappa_sq)
            .max(self.cavity_detuning_q.abs())
            .max(self.detuning_s.abs())
            .max(self.detuning_q.abs())
            .max(0.5 * (self.kappa_wq + self.kappa_q))
            .max(0.5 * self.kappa_s)
            .max(0.5 * self.gamma_s)
            .max(0.5 * self.gamma_q);
        for (i, &w) in self.ladder_rabi.iter().enumerate() {
            m = m.max(w).max((self.detuning_s + self.ladder_detuning[i]).abs());
        }
        m
    }
}

/// Validation failures of [`ScenarioParams`] and related inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    NegativeRate(&'static str),
    LengthMismatch { levels: usize, rabi: usize, detunings: usize },
    NonPositiveKappaSq(f64),
    /// `kappa_sq` must be exactly one; other units are converted at ingestion.
    UnnormalizedKappaSq(f64),
    TooFewLevels(usize),
    NonFinite(&'static str),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegativeRate(name) => write!(f, "rate `{name}` must be nonnegative"),
            Self::LengthMismatch { levels, rabi, detunings } => write!(
                f,
                "a {levels}-level storage atom needs {} ladder drives and detunings, got {rabi} and {detunings}",
                levels.saturating_sub(2)
            ),
            Self::NonPositiveKappaSq(v) => write!(f, "kappa_sq must be positive, got {v}"),
            Self::UnnormalizedKappaSq(v) => write!(f, "kappa_sq is the unit and must equal 1, got {v}"),
            Self::TooFewLevels(n) => write!(f, "storage atom needs at least 2 levels, got {n}"),
            Self::NonFinite(name) => write!(f, "parameter `{name}` is not finite"),
        }
    }
}

impl core::error::Error for ModelError {}

/// One-excitation basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    /// `|g_s, 1_s>`
    PhotonS,
    /// `|e_{s;i}, 0_s>`, `i = 1..levels_s - 1`
    AtomS(usize),
    /// `|g_q, 1_q>`
    PhotonQ,
    /// `|e_q, 0_q>`
    AtomQ,
}

/// Basis in the fixed order `[PhotonS, AtomS(1..N-1), PhotonQ, AtomQ]`.
pub fn basis(params: &ScenarioParams) -> Vec<BasisLabel> {
    let mut out = Vec::with_capacity(params.dim());
    out.push(BasisLabel::PhotonS);
    out.extend((1..params.levels_s).map(BasisLabel::AtomS));
    out.push(BasisLabel::PhotonQ);
    out.push(BasisLabel::AtomQ);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_params_validate() {
        assert_eq!(ScenarioParams::q_switch_reference().validate(), Ok(()));
        assert_eq!(ScenarioParams::three_level_reference().validate(), Ok(()));
        assert_eq!(ScenarioParams::four_level_reference().validate(), Ok(()));
    }

    #[test]
    fn negative_coupling_is_rejected() {
        let p = ScenarioParams {
            g_s: -1.0,
            ..ScenarioParams::q_switch_reference()
        };
        assert_eq!(p.validate(), Err(ModelError::NegativeRate("g_s")));
    }

    #[test]
    fn ladder_length_mismatch() {
        let p = ScenarioParams {
            levels_s: 4,
            ladder_rabi: alloc::vec![1.0],
            ladder_detuning: alloc::vec![0.0],
            ..ScenarioParams::default()
        };
        assert!(matches!(p.validate(), Err(ModelError::LengthMismatch { levels: 4, .. })));
    }

    #[test]
    fn kappa_sq_is_the_unit() {
        let mut p = ScenarioParams::default();
        p.kappa_sq = 0.0;
        assert_eq!(p.validate(), Err(ModelError::NonPositiveKappaSq(0.0)));
        p.kappa_sq = 2.0;
        assert_eq!(p.validate(), Err(ModelError::UnnormalizedKappaSq(2.0)));
    }

    #[test]
    fn validate_is_idempotent() {
        let p = ScenarioParams::three_level_reference();
        let before = p.clone();
        assert_eq!(p.validate(), p.validate());
        assert_eq!(p, before);
    }

    #[test]
    fn basis_order_and_dimension() {
        use BasisLabel::*;
        let p2 = ScenarioParams::q_switch_reference();
        assert_eq!(basis(&p2), [PhotonS, AtomS(1), PhotonQ, AtomQ]);
        assert_eq!(basis(&ScenarioParams::three_level_reference()).len(), 5);
        let p4 = ScenarioParams::four_level_reference();
        assert_eq!(basis(&p4), [PhotonS, AtomS(1), AtomS(2), AtomS(3), PhotonQ, AtomQ]);
        assert_eq!(p4.photon_q_index(), 4);
        assert_eq!(p4.atom_q_index(), 5);
    }
}
