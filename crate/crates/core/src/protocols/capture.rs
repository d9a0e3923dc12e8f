use alloc::vec::Vec;

use super::{ExperimentResult, ProtocolError};
use crate::dynamics::{integrate, vacuum, DriveField, Integrator};
use crate::model::{AmplitudeTrajectory, OutputRecord, ScenarioParams, SweepProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureResult {
    /// Population left in the system when the sweep ends.
    pub capture: f64,
    /// `∫|f_in|^2` delivered by the drive.
    pub injected: f64,
    pub trajectory: AmplitudeTrajectory,
    pub record: OutputRecord,
}

/// `f_in(t) = conj(f_out(t_end - t))` on the mirrored sample grid.
pub fn mirror_drive(record: &OutputRecord, t_end: f64) -> DriveField {
    let (times, values): (Vec<f64>, Vec<_>) = record
        .times
        .iter()
        .zip(&record.f_out)
        .rev()
        .filter(|(&t, _)| t <= t_end)
        .map(|(&t, f)| (t_end - t, f.conj()))
        .unzip();
    DriveField::Table { times, values }
}

/// Drives the empty system with `drive` while `sweep` runs, up to `t_end`.
pub fn capture_run(
    params: &ScenarioParams,
    drive: &DriveField,
    sweep: &SweepProfile,
    t_end: f64,
) -> Result<CaptureResult, ProtocolError> {
    let (ds, dq) = sweep.knob().apply(params, sweep.initial_value());
    let p = params.clone().with_detunings(ds, dq);
    let integ = Integrator::rk4(&p, sweep, t_end).with_sample_interval(Some(2e-2));
    let (trajectory, record) = integrate(&p, sweep, &vacuum(&p), drive, &integ)?;
    let last = trajectory.len() - 1;
    Ok(CaptureResult {
        capture: trajectory.norm_sqr(last),
        injected: trajectory.injected[last],
        trajectory,
        record,
    })
}

/// Replays an emission backwards: the time-mirrored output drives the empty
/// system while the sweep runs in reverse, ending at its starting detuning.
pub fn mirrored_capture(emission: &ExperimentResult, t_end: f64) -> Result<CaptureResult, ProtocolError> {
    if !(t_end > emission.sweep.end_time()) {
        return Err(ProtocolError::InvalidInput("capture window must contain the whole sweep"));
    }
    let drive = mirror_drive(&emission.record, t_end);
    let sweep = emission.sweep.time_reversed(t_end);
    capture_run(&emission.params, &drive, &sweep, t_end)
}
