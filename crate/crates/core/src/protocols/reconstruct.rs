use alloc::boxed::Box;
use alloc::vec::Vec;

use super::emission::{run_profile, Horizon};
use super::{ExperimentResult, ProtocolError};
use crate::math::{cumulative_trapezoid, erf, interp, SQRT_2};
use crate::model::{OutputRecord, SweepProfile};

const WARP_POINTS: usize = 1000;

/// Outcome of [`reconstruct_sweep`]: the best sweep found and its run.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub sweep: SweepProfile,
    pub result: ExperimentResult,
    /// `xi` of the trial followed by every reconstructed run.
    pub history: Vec<f64>,
    /// Active sweep time of the best run over that of the trial.
    pub duration_ratio: f64,
}

impl Reconstruction {
    pub fn best_xi(&self) -> f64 {
        self.result.xi().unwrap_or(f64::INFINITY)
    }
}

/// Time at which the knob stops changing.
fn active_duration(sweep: &SweepProfile) -> f64 {
    let last = sweep.final_value();
    let mut end = sweep.start_time();
    for (t, v) in sweep.points() {
        if v != last {
            end = t;
        }
    }
    sweep.points().map(|p| p.0).find(|&t| t > end).unwrap_or(end) - sweep.start_time()
}

/// Re-times `sweep` so that the emission of `record` would follow a Gaussian
/// cumulative profile centred at `center` with width `width`:
/// `value'(t) = value(F^-1(F_target(t)))`, made monotone in the sweep
/// direction. Sampled on `[0, center + 5 width]`.
pub(crate) fn warp_sweep(
    sweep: &SweepProfile,
    record: &OutputRecord,
    center: f64,
    width: f64,
) -> Result<SweepProfile, ProtocolError> {
    let cum = cumulative_trapezoid(&record.times, &record.intensity());
    let total = cum.last().copied().unwrap_or(0.0);
    if !(total > 0.0) {
        return Err(ProtocolError::NonMonotoneCumulative);
    }
    let (mut fu, mut tu) = (Vec::new(), Vec::new());
    for (&f, &t) in cum.iter().zip(&record.times) {
        let f = f / total;
        if fu.last().map_or(true, |&last| f > last) {
            fu.push(f);
            tu.push(t);
        }
    }
    if fu.len() < 3 {
        return Err(ProtocolError::NonMonotoneCumulative);
    }
    let direction = if sweep.final_value() >= sweep.initial_value() { 1.0 } else { -1.0 };
    let t_hi = center + 5.0 * width;
    if !(t_hi > 0.0) {
        return Err(ProtocolError::InvalidInput("target pulse ends before t = 0"));
    }
    let mut points = Vec::with_capacity(WARP_POINTS + 1);
    let mut running = f64::NEG_INFINITY;
    for i in 0..=WARP_POINTS {
        let t = t_hi * i as f64 / WARP_POINTS as f64;
        let target = 0.5 * (1.0 + erf((t - center) / (SQRT_2 * width)));
        let tau = interp(&fu, &tu, target);
        running = running.max(direction * sweep.value(tau));
        points.push((t, direction * running));
    }
    SweepProfile::from_table(sweep.knob(), &points).map_err(|_| ProtocolError::InvalidInput("warped sweep is not finite"))
}

/// Iteratively re-times the trial sweep towards a Gaussian output of the
/// trial's fitted centre and `target_width` (the fitted width when `None`).
///
/// Each iteration warps the latest sweep with the latest output. Stops after
/// `iterations` runs or when `xi` changes by less than `1e-4`. Candidates
/// that lose more than `0.005` of the trial's `P_out` are discarded.
pub fn reconstruct_sweep(
    trial: &ExperimentResult,
    target_width: Option<f64>,
    iterations: usize,
) -> Result<Reconstruction, ProtocolError> {
    let trial_p = trial.p_out();
    if trial_p <= 0.9 {
        return Err(ProtocolError::InvalidInput("trial must emit with P_out > 0.9"));
    }
    let fit = trial
        .metrics
        .as_ref()
        .map(|m| m.gaussian)
        .ok_or(ProtocolError::InvalidInput("trial has no Gaussian fit"))?;
    let width = target_width.unwrap_or(fit.width);
    if !(width > 0.0) {
        return Err(ProtocolError::InvalidInput("target width must be positive"));
    }
    let trial_xi = trial.xi().unwrap_or(f64::INFINITY);
    let trial_duration = active_duration(&trial.sweep);
    let y0 = trial.trajectory.amplitudes.first().cloned().ok_or(ProtocolError::InvalidInput("trial has no samples"))?;

    let mut history = alloc::vec![trial_xi];
    let mut best: Option<ExperimentResult> = None;
    let (mut sweep, mut record) = (trial.sweep.clone(), trial.record.clone());
    for _ in 0..iterations {
        let next = warp_sweep(&sweep, &record, fit.center, width)?;
        let run = run_profile(&trial.params, next.clone(), &y0, Horizon::default())?;
        let xi = run.xi().unwrap_or(f64::INFINITY);
        let prev = *history.last().unwrap();
        history.push(xi);
        if run.p_out() >= trial_p - 0.005 && best.as_ref().map_or(true, |b| xi < b.xi().unwrap_or(f64::INFINITY)) {
            best = Some(run.clone());
        }
        if (xi - prev).abs() < 1e-4 {
            break;
        }
        sweep = next;
        record = run.record;
    }
    let improved = best.as_ref().is_some_and(|b| b.xi().unwrap_or(f64::INFINITY) < trial_xi);
    let result = best.unwrap_or_else(|| trial.clone());
    let out = Reconstruction {
        sweep: result.sweep.clone(),
        duration_ratio: active_duration(&result.sweep) / trial_duration,
        result,
        history,
    };
    if improved {
        Ok(out)
    } else {
        Err(ProtocolError::NoImprovement(Box::new(out)))
    }
}
