//! The named experiments: confinement and leakage, passive and shaped
//! emission, sweep reconstruction, dissipation scans, multi-time emission from
//! a ladder atom, and capture of a mirrored pulse.

mod capture;
mod confinement;
mod emission;
mod qudit;
mod reconstruct;
mod switching;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

pub use capture::{capture_run, mirror_drive, mirrored_capture, CaptureResult};
pub use confinement::{confinement_run, confinement_survival, leakage_cell, leakage_map, LeakageCell, LeakageMap};
pub use emission::{
    best_linear_sweep, passive_emission, run_sweep, shaped_emission_linear, Horizon, LinearSweepSearch, SweepEndpoint,
};
pub use qudit::{qudit_emission, QuditPulse, QuditResult, QuditTiming};
pub use reconstruct::{reconstruct_sweep, Reconstruction};
pub use switching::{degradation_onset, dissipation_scan_switching, switching_p_out, LossChannel};

use crate::analysis::{emitted_probability, AnalysisError, PulseMetrics};
use crate::dynamics::DynamicsError;
use crate::model::{AmplitudeTrajectory, ModelError, OutputRecord, ScenarioParams, SweepProfile};
use crate::spectra::SpectraError;

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolError {
    Model(ModelError),
    Spectra(SpectraError),
    Dynamics(DynamicsError),
    Analysis(AnalysisError),
    InvalidInput(&'static str),
    /// No resonance or off point for this storage branch.
    UnresolvedResonance { branch: usize },
    /// Neighbouring pulses are not separated by a quiet gap.
    PulseOverlap { boundary: usize },
    NonMonotoneCumulative,
    /// Reconstruction never beat the trial; carries the best attempt.
    NoImprovement(Box<Reconstruction>),
}

impl fmt::Display for ProtocolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(e) => write!(f, "invalid parameters: {e}"),
            Self::Spectra(e) => write!(f, "{e}"),
            Self::Dynamics(e) => write!(f, "{e}"),
            Self::Analysis(e) => write!(f, "{e}"),
            Self::InvalidInput(what) => f.write_str(what),
            Self::UnresolvedResonance { branch } => write!(f, "no resonance or off point for storage branch {branch}"),
            Self::PulseOverlap { boundary } => write!(f, "pulses {boundary} and {} overlap", boundary + 1),
            Self::NonMonotoneCumulative => f.write_str("trial emission has no usable cumulative profile"),
            Self::NoImprovement(best) => write!(
                f,
                "reconstruction did not improve on the trial (best xi {:.5})",
                best.best_xi()
            ),
        }
    }
}

impl core::error::Error for ProtocolError {}

macro_rules! wrap_error {
    ($($from:ty => $variant:ident),*) => {
        $(impl From<$from> for ProtocolError {
            fn from(e: $from) -> Self {
                Self::$variant(e)
            }
        })*
    };
}

wrap_error!(ModelError => Model, SpectraError => Spectra, DynamicsError => Dynamics, AnalysisError => Analysis);

/// One protocol run with its inputs echoed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub params: ScenarioParams,
    pub sweep: SweepProfile,
    pub trajectory: AmplitudeTrajectory,
    pub record: OutputRecord,
    pub metrics: Option<PulseMetrics>,
    /// Protocol-specific numbers such as detuning points and adiabaticity.
    pub scalars: Vec<(&'static str, f64)>,
}

impl ExperimentResult {
    pub fn p_out(&self) -> f64 {
        emitted_probability(&self.record)
    }

    pub fn xi(&self) -> Option<f64> {
        self.metrics.as_ref().map(|m| m.xi)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }

    pub fn t_end(&self) -> f64 {
        self.trajectory.times.last().copied().unwrap_or(0.0)
    }

    /// Largest deviation of the probability ledger from one.
    pub fn ledger_error(&self) -> f64 {
        (0..self.trajectory.len())
            .map(|k| (self.trajectory.ledger_total(k) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn final_norm_sqr(&self) -> f64 {
        let n = self.trajectory.len();
        if n == 0 {
            0.0
        } else {
            self.trajectory.norm_sqr(n - 1)
        }
    }
}
