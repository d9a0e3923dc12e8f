use alloc::vec::Vec;

use super::emission::{run_sweep, storage_initial_state, Horizon, SweepEndpoint};
use super::ProtocolError;
use crate::analysis::emitted_probability;
use crate::model::{Knob, ScenarioParams, SweepProfile};
use crate::spectra::{off_detuning_two_level, res_detuning_two_level};

/// Switch-site decay channel varied by [`dissipation_scan_switching`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossChannel {
    KappaQ,
    GammaQ,
}

impl LossChannel {
    pub fn name(self) -> &'static str {
        match self {
            Self::KappaQ => "kappa_q",
            Self::GammaQ => "gamma_q",
        }
    }

    fn set(self, params: &mut ScenarioParams, rate: f64) {
        match self {
            Self::KappaQ => params.kappa_q = rate,
            Self::GammaQ => params.gamma_q = rate,
        }
    }
}

/// `P_out` of one linear switching run with `channel` set to `rate`.
pub fn switching_p_out(
    params: &ScenarioParams,
    duration: f64,
    endpoint: SweepEndpoint,
    channel: LossChannel,
    rate: f64,
) -> Result<f64, ProtocolError> {
    if !(rate >= 0.0) {
        return Err(ProtocolError::InvalidInput("loss rates must be non-negative"));
    }
    let mut p = params.clone();
    channel.set(&mut p, rate);
    let off = off_detuning_two_level(&p)?;
    let res = res_detuning_two_level(&p)?;
    let ds = p.detuning_s;
    let p = p.with_detunings(ds, off);
    let sweep = SweepProfile::linear(Knob::DetuningQ, duration, off, off + endpoint.fraction() * (res - off));
    let y0 = storage_initial_state(&p)?;
    let (_, record) = run_sweep(&p, &sweep, &y0, Horizon::default(), 2e-2)?;
    Ok(emitted_probability(&record))
}

/// `(rate, P_out)` for every rate, with the other loss channels as given in
/// `params`. Runs are independent; callers may split `rates` across threads.
pub fn dissipation_scan_switching(
    params: &ScenarioParams,
    duration: f64,
    endpoint: SweepEndpoint,
    channel: LossChannel,
    rates: &[f64],
) -> Result<Vec<(f64, f64)>, ProtocolError> {
    rates
        .iter()
        .map(|&r| Ok((r, switching_p_out(params, duration, endpoint, channel, r)?)))
        .collect()
}

/// First scanned rate whose `P_out` drops below `threshold`.
pub fn degradation_onset(scan: &[(f64, f64)], threshold: f64) -> Option<f64> {
    scan.iter().find(|&&(_, p)| p < threshold).map(|&(r, _)| r)
}
