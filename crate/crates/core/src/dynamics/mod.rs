//! Amplitude equations of motion with loss, waveguide coupling, an optional
//! input field and a detuning sweep, integrated by RK4 or an adaptive
//! Dormand-Prince pair.

mod drive;
mod integrate;
mod propagator;
mod rhs;
mod states;

use core::fmt;

pub use drive::DriveField;
pub use integrate::{integrate, integrate_observed, Control, Integrator, Method, StepView};
pub use propagator::StaticPropagator;
pub use rhs::derivative;
pub use states::{basis_state, minus_s_state, site_s_branch_state, superposition, survival_overlap, vacuum};

use crate::model::ModelError;
use crate::spectra::SpectraError;

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    Model(ModelError),
    Spectra(SpectraError),
    InvalidIntegrator(&'static str),
    DimensionMismatch { expected: usize, found: usize },
    /// The adaptive step fell below `dt_min`.
    StepUnderflow { t: f64 },
    NonFiniteState { t: f64 },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(e) => write!(f, "invalid parameters: {e}"),
            Self::Spectra(e) => write!(f, "{e}"),
            Self::InvalidIntegrator(what) => write!(f, "invalid integrator: {what}"),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "state has {found} amplitudes, expected {expected}")
            }
            Self::StepUnderflow { t } => write!(f, "adaptive step underflow at t = {t}"),
            Self::NonFiniteState { t } => write!(f, "state became non-finite at t = {t}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<ModelError> for DynamicsError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl From<SpectraError> for DynamicsError {
    fn from(e: SpectraError) -> Self {
        Self::Spectra(e)
    }
}
