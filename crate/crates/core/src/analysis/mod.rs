//! Scalar metrics extracted from trajectories and output records.

mod decay;
mod gaussian;
mod pulses;

use core::fmt;

pub use decay::{fit_exponential_rate, DecayWindow};
pub use gaussian::{fit_gaussian, mode_mismatch, normalized_mode_mismatch, GaussianFit};
pub use pulses::{
    emitted_probability, main_lobe_skewness, moving_average, pulse_metrics, secondary_lobe_ratio, segment_pulses,
    PulseMetrics, PulseSegment,
};

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    /// The series never left the upper edge of the fit window.
    InsufficientDecay,
    TooFewPoints { found: usize },
    /// Less than `1e-3` emitted in the fitted window.
    NoPulse,
    NonConvergence,
    LengthMismatch,
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InsufficientDecay => f.write_str("series does not decay into the fit window"),
            Self::TooFewPoints { found } => write!(f, "only {found} samples in the fit window (need 10)"),
            Self::NoPulse => f.write_str("no pulse: emitted probability below 1e-3"),
            Self::NonConvergence => f.write_str("Gaussian fit did not converge"),
            Self::LengthMismatch => f.write_str("sample arrays differ in length"),
        }
    }
}

impl core::error::Error for AnalysisError {}
