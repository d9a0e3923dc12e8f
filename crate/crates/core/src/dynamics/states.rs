use alloc::vec::Vec;

use super::DynamicsError;
use crate::model::{AmplitudeTrajectory, BasisLabel, ScenarioParams};
use crate::spectra::site_s_branch_vector;
use crate::C64;

/// No excitation anywhere: every manifold amplitude is zero.
pub fn vacuum(params: &ScenarioParams) -> Vec<C64> {
    alloc::vec![C64::new(0.0, 0.0); params.dim()]
}

pub fn basis_state(params: &ScenarioParams, label: BasisLabel) -> Vec<C64> {
    let mut y = vacuum(params);
    let i = match label {
        BasisLabel::PhotonS => params.photon_s_index(),
        BasisLabel::AtomS(r) => params.atom_s_index(r),
        BasisLabel::PhotonQ => params.photon_q_index(),
        BasisLabel::AtomQ => params.atom_q_index(),
    };
    y[i] = C64::new(1.0, 0.0);
    y
}

/// Storage-site eigenstate `branch` (1-based, ascending energy) at the
/// detuning `detuning_s`, embedded in the full manifold with the switch empty.
pub fn site_s_branch_state(params: &ScenarioParams, detuning_s: f64, branch: usize) -> Result<Vec<C64>, DynamicsError> {
    let v = site_s_branch_vector(params, detuning_s, branch)?;
    let mut y = vacuum(params);
    for (slot, c) in y.iter_mut().zip(v) {
        *slot = C64::new(c, 0.0);
    }
    Ok(y)
}

/// Lowest storage dressed state at the configured `detuning_s`; for a
/// two-level atom at zero detuning this is `(|1_s> - |e_s>)/sqrt 2`.
pub fn minus_s_state(params: &ScenarioParams) -> Result<Vec<C64>, DynamicsError> {
    site_s_branch_state(params, params.detuning_s, 1)
}

/// Normalized `sum_k c_k |branch_k>` of storage eigenstates at `detuning_s`.
pub fn superposition(
    params: &ScenarioParams,
    detuning_s: f64,
    terms: &[(usize, C64)],
) -> Result<Vec<C64>, DynamicsError> {
    let mut y = vacuum(params);
    for &(branch, c) in terms {
        let b = site_s_branch_state(params, detuning_s, branch)?;
        for (slot, v) in y.iter_mut().zip(b) {
            *slot += v * c;
        }
    }
    let n = crate::math::sqrt(y.iter().map(|a| a.norm_sqr()).sum());
    if n == 0.0 {
        return Err(DynamicsError::InvalidIntegrator("superposition has zero norm"));
    }
    y.iter_mut().for_each(|a| *a /= n);
    Ok(y)
}

/// `|<reference|psi(t)>|^2` at every stored sample.
pub fn survival_overlap(trajectory: &AmplitudeTrajectory, reference: &[C64]) -> Vec<f64> {
    trajectory
        .amplitudes
        .iter()
        .map(|psi| {
            let o: C64 = reference.iter().zip(psi).map(|(r, p)| r.conj() * p).sum();
            o.norm_sqr()
        })
        .collect()
}
