//! Two coupled atom-cavity systems in the one-excitation manifold.
//!
//! A storage site `s` (cavity plus a two-level or ladder atom) is evanescently
//! coupled to a switch site `q` (cavity plus a two-level atom), and the switch
//! cavity leaks coherently into a waveguide. Tuning one atomic transition moves
//! the storage excitation between a confined (high-Q) and an emitting (low-Q)
//! regime, which is used here to shape single-photon pulses and to emit photons
//! in temporal superpositions.
//!
//! All frequencies are in units of the intercavity coupling `kappa_sq`, which is
//! fixed to one; times are in units of `1 / kappa_sq`.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and the
//! command line live in the companion `qswitch-cli` crate.
//!
//! Module map:
//! - [`model`]: parameters, manifold basis, sweep profiles, trajectory records.
//! - [`spectra`]: the manifold Hamiltonian, its eigensystem and closed-form
//!   spectral quantities (confinement and resonance detunings, hopping elements,
//!   adiabaticity).
//! - [`dynamics`]: amplitude equations of motion, RK integration, probability
//!   ledger and input-output record.
//! - [`analysis`]: emitted probability, decay-rate fits, Gaussian fits, mode
//!   mismatch and pulse segmentation.
//! - [`protocols`]: the named experiments built from the pieces above.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod dynamics;
mod math;
pub mod model;
pub mod protocols;
pub mod spectra;

pub use num_complex::Complex64 as C64;

pub use model::{BasisLabel, Knob, ModelError, ScenarioParams, SweepProfile};
