//! The one-excitation Hamiltonian, its eigensystem, branch continuation and the
//! closed-form spectral quantities used to pick sweep endpoints.

mod adiabaticity;
mod branches;
mod closed_form;
mod eigen;
mod matrix;

use core::fmt;

pub use adiabaticity::{adiabaticity, Adiabaticity};
pub use branches::{find_anticrossing, track_branches, Anticrossing, Branch, BranchTable};
pub use closed_form::{
    coupling_element_j, coupling_element_j_beta, dressed_energies_three_level, dressed_energy_minus_s,
    hopping_element, ladder_points, mixing_angle, off_detuning_two_level, refine_off_detuning,
    res_detuning_two_level, site_q_dressed, site_s_branch_energy, site_s_branch_vector, site_s_eigensystem,
    JBeta, LadderPoints, QBranch, SiteQDressed, ThreeLevelEnergies,
};
pub use eigen::{eigensystem, Eigensystem};
pub use matrix::{build_matrix, knob_derivative, site_q_block, site_s_block, ManifoldMatrix};

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectraError {
    Model(ModelError),
    /// Jacobi sweeps hit their cap before the off-diagonal norm vanished.
    NoConvergence,
    InvalidGrid,
    /// Branch continuation was ambiguous between grid points `index - 1` and `index`.
    GridTooCoarse { index: usize },
    DegenerateDenominator,
    NoBracket,
    DegenerateGap { time: f64 },
    /// The operation needs a different storage-atom level count.
    Unsupported(&'static str),
}

impl fmt::Display for SpectraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(e) => write!(f, "invalid parameters: {e}"),
            Self::NoConvergence => f.write_str("eigensolver did not converge"),
            Self::InvalidGrid => f.write_str("grid must be strictly increasing with at least two points"),
            Self::GridTooCoarse { index } => write!(f, "branch continuation ambiguous at grid point {index}"),
            Self::DegenerateDenominator => f.write_str("delta_q + g_s vanishes; no resonance detuning"),
            Self::NoBracket => f.write_str("no sign change found on the scanned interval"),
            Self::DegenerateGap { time } => write!(f, "eigenvalue gap vanishes at t = {time}"),
            Self::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

impl core::error::Error for SpectraError {}

impl From<ModelError> for SpectraError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}
