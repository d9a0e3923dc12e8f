use alloc::vec::Vec;

use super::emission::{run_sweep, start_branch, Horizon};
use super::{ExperimentResult, ProtocolError};
use crate::analysis::pulse_metrics;
use crate::dynamics::superposition;
use crate::math::{interp, sqrt, trapezoid};
use crate::model::{Knob, OutputRecord, ScenarioParams, SweepProfile};
use crate::spectra::{adiabaticity, ladder_points, LadderPoints, QBranch};
use crate::C64;

/// Durations of the emission sequence, in units of `1/kappa_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuditTiming {
    /// Wait at each off point before its leg.
    pub hold: f64,
    /// Fixed off-to-resonance leg duration; chosen per branch when `None`.
    pub leg: Option<f64>,
    /// Candidate leg durations for the automatic choice, tried in steps of 5.
    pub leg_range: (f64, f64),
    /// Adiabaticity bound for the automatic leg choice.
    pub adiabaticity_target: f64,
    /// Wait at each resonance point while the pulse leaves. A hold whose
    /// pulse is still above 1% of its peak at the end is doubled, up to
    /// `emit_hold_max`.
    pub emit_hold: f64,
    pub emit_hold_max: f64,
    /// Fast jump from one resonance point to the next off point.
    pub transfer: f64,
}

impl Default for QuditTiming {
    fn default() -> Self {
        Self {
            hold: 5.0,
            leg: None,
            leg_range: (30.0, 40.0),
            adiabaticity_target: 5e-2,
            emit_hold: 40.0,
            emit_hold_max: 320.0,
            transfer: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Hold,
    Transfer,
    Leg,
    EmitHold,
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    stage: Stage,
    branch: usize,
    t0: f64,
    t1: f64,
}

/// One time bin of the emitted photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuditPulse {
    /// Storage branch that fed this pulse.
    pub branch: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub area: f64,
    pub center: f64,
    /// Mode mismatch of the area-normalized pulse; `None` if the fit failed.
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuditResult {
    pub result: ExperimentResult,
    /// In emission (time) order, which is descending branch order.
    pub pulses: Vec<QuditPulse>,
    /// Emission during holds and transfers, before a branch is released.
    pub premature_loss: f64,
    pub points: Vec<LadderPoints>,
    /// Leg duration used per pulse, in time order.
    pub legs: Vec<f64>,
    /// Emission hold used per pulse, in time order.
    pub emit_holds: Vec<f64>,
}

fn choose_leg(params: &ScenarioParams, pts: &LadderPoints, timing: &QuditTiming) -> Result<f64, ProtocolError> {
    if let Some(leg) = timing.leg {
        return Ok(leg);
    }
    let (lo, hi) = timing.leg_range;
    let p = params.clone().with_detunings(pts.off, params.detuning_q);
    let state = superposition(&p, pts.off, &[(pts.branch, C64::new(1.0, 0.0))])?;
    let mut leg = lo;
    while leg < hi {
        let sweep = SweepProfile::linear(Knob::DetuningS, leg, pts.off, pts.resonance);
        let branch = start_branch(&p, &sweep, &state)?;
        let times: Vec<f64> = (0..=200).map(|i| leg * i as f64 / 200.0).collect();
        if adiabaticity(&p, &sweep, &times, branch)?.value <= timing.adiabaticity_target {
            return Ok(leg);
        }
        leg += 5.0;
    }
    Ok(hi)
}

fn integral(record: &OutputRecord, t0: f64, t1: f64) -> (f64, OutputRecord) {
    let w = record.window(t0, t1);
    (trapezoid(&w.times, &w.intensity()), w)
}

/// Emits `sum_i c_i |t_i>` from a ladder storage atom.
///
/// `coefficients[i - 1]` weights storage branch `i`. The state starts at the
/// off point of the highest branch; each branch in turn is held at its off
/// point, swept to its resonance and held while it empties, then the storage
/// detuning jumps to the next lower branch's off point.
pub fn qudit_emission(
    params: &ScenarioParams,
    coefficients: &[C64],
    timing: &QuditTiming,
) -> Result<QuditResult, ProtocolError> {
    params.validate()?;
    let n = params.levels_s;
    if n < 3 {
        return Err(ProtocolError::InvalidInput("qudit emission needs a storage ladder with at least three levels"));
    }
    if coefficients.len() != n - 1 {
        return Err(ProtocolError::InvalidInput("need one coefficient per storage branch"));
    }
    let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(ProtocolError::InvalidInput("coefficients must be unit-norm"));
    }
    for d in [timing.hold, timing.emit_hold, timing.emit_hold_max, timing.transfer] {
        if !(d > 0.0) {
            return Err(ProtocolError::InvalidInput("timing intervals must be positive"));
        }
    }

    let mut points = Vec::with_capacity(n - 1);
    for branch in 1..n {
        points.push(ladder_points(params, branch, QBranch::Plus).map_err(|_| ProtocolError::UnresolvedResonance { branch })?);
    }
    let order: Vec<usize> = (1..n).rev().collect();
    let start = points[n - 2].off;
    let p = params.clone().with_detunings(start, params.detuning_q);
    let legs = order
        .iter()
        .map(|&b| choose_leg(&p, &points[b - 1], timing))
        .collect::<Result<Vec<f64>, _>>()?;
    let terms: Vec<(usize, C64)> = coefficients.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect();
    let y0 = superposition(&p, start, &terms)?;

    let mut emit_holds = alloc::vec![timing.emit_hold; n - 1];
    loop {
        let (sweep, intervals) = schedule(&points, &order, &legs, &emit_holds, timing)?;
        let t_total = intervals.last().map_or(0.0, |iv| iv.t1);
        let (trajectory, record) = run_sweep(&p, &sweep, &y0, Horizon::Fixed(t_total), 2e-2)?;
        let pulses = measure_pulses(&record, &intervals, &order);
        if let Some(k) = first_overlap(&record, &pulses) {
            if 2.0 * emit_holds[k] > timing.emit_hold_max {
                return Err(ProtocolError::PulseOverlap { boundary: k + 1 });
            }
            emit_holds[k] *= 2.0;
            continue;
        }
        let premature_loss = intervals
            .iter()
            .filter(|iv| matches!(iv.stage, Stage::Hold | Stage::Transfer))
            .map(|iv| integral(&record, iv.t0, iv.t1).0)
            .sum();
        let result = ExperimentResult {
            params: p,
            sweep,
            trajectory,
            record,
            metrics: None,
            scalars: alloc::vec![("premature_loss", premature_loss)],
        };
        return Ok(QuditResult {
            result,
            pulses,
            premature_loss,
            points,
            legs,
            emit_holds,
        });
    }
}

fn schedule(
    points: &[LadderPoints],
    order: &[usize],
    legs: &[f64],
    emit_holds: &[f64],
    timing: &QuditTiming,
) -> Result<(SweepProfile, Vec<Interval>), ProtocolError> {
    let mut knots = alloc::vec![(0.0, points[order[0] - 1].off)];
    let mut intervals = Vec::new();
    let mut t = 0.0;
    let mut push = |stage, branch, dt: f64, value: f64| {
        intervals.push(Interval { stage, branch, t0: t, t1: t + dt });
        t += dt;
        knots.push((t, value));
    };
    for (k, &branch) in order.iter().enumerate() {
        let pts = points[branch - 1];
        if k > 0 {
            push(Stage::Transfer, branch, timing.transfer, pts.off);
        }
        push(Stage::Hold, branch, timing.hold, pts.off);
        push(Stage::Leg, branch, legs[k], pts.resonance);
        push(Stage::EmitHold, branch, emit_holds[k], pts.resonance);
    }
    let sweep = SweepProfile::from_table(Knob::DetuningS, &knots)
        .map_err(|_| ProtocolError::InvalidInput("timing produced an invalid sweep"))?;
    Ok((sweep, intervals))
}

/// One pulse per branch, spanning its leg and emission hold.
fn measure_pulses(record: &OutputRecord, intervals: &[Interval], order: &[usize]) -> Vec<QuditPulse> {
    let mut pulses = Vec::with_capacity(order.len());
    for &branch in order {
        let leg = intervals.iter().find(|iv| iv.branch == branch && iv.stage == Stage::Leg).unwrap();
        let tail = intervals.iter().find(|iv| iv.branch == branch && iv.stage == Stage::EmitHold).unwrap();
        let (area, window) = integral(record, leg.t0, tail.t1);
        let tw: Vec<f64> = window.times.iter().zip(window.intensity()).map(|(t, y)| t * y).collect();
        let center = if area > 0.0 { trapezoid(&window.times, &tw) / area } else { leg.t0 };
        let xi = if area > 0.0 {
            let scale = 1.0 / sqrt(area);
            let mut unit = window;
            unit.f_out.iter_mut().for_each(|f| *f *= scale);
            pulse_metrics(&unit).ok().map(|m| m.xi)
        } else {
            None
        };
        pulses.push(QuditPulse {
            branch,
            t_start: leg.t0,
            t_end: tail.t1,
            area,
            center,
            xi,
        });
    }
    pulses
}

/// Index of the first pulse still brighter than 1% of its peak when the
/// next branch is released.
fn first_overlap(record: &OutputRecord, pulses: &[QuditPulse]) -> Option<usize> {
    let intensity = record.intensity();
    pulses.windows(2).position(|pair| {
        let peak = (0..record.len())
            .filter(|&j| record.times[j] >= pair[0].t_start && record.times[j] <= pair[0].t_end)
            .map(|j| intensity[j])
            .fold(0.0, f64::max);
        interp(&record.times, &intensity, pair[0].t_end) > 1e-2 * peak
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SQRT_2;

    fn two_time(c: [f64; 2]) -> QuditResult {
        let p = ScenarioParams::three_level_reference().with_kappa_wq(4.0);
        let coeffs = [C64::new(c[0], 0.0), C64::new(c[1], 0.0)];
        qudit_emission(&p, &coeffs, &QuditTiming::default()).unwrap()
    }

    #[test]
    fn areas_follow_coefficients() {
        let r = two_time([1.0 / SQRT_2, 1.0 / SQRT_2]);
        assert_eq!(r.pulses.len(), 2);
        assert_eq!(r.pulses[0].branch, 2);
        for q in &r.pulses {
            assert!((q.area - 0.5).abs() < 0.03, "{q:?}");
        }
        assert!(r.premature_loss < 1e-2);
        assert!(r.result.ledger_error() < 1e-6);
    }

    #[test]
    fn swapping_coefficients_swaps_areas() {
        let a = two_time([sqrt(2.0 / 3.0), sqrt(1.0 / 3.0)]);
        let b = two_time([sqrt(1.0 / 3.0), sqrt(2.0 / 3.0)]);
        assert!((a.pulses[0].area - b.pulses[1].area).abs() < 0.01);
        assert!((a.pulses[1].area - b.pulses[0].area).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_input() {
        let p = ScenarioParams::three_level_reference().with_kappa_wq(4.0);
        let one = [C64::new(1.0, 0.0)];
        assert!(matches!(qudit_emission(&p, &one, &QuditTiming::default()), Err(ProtocolError::InvalidInput(_))));
        let unnormalized = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(qudit_emission(&p, &unnormalized, &QuditTiming::default()).is_err());
        let two = ScenarioParams::q_switch_reference().with_kappa_wq(4.0);
        assert!(qudit_emission(&two, &one, &QuditTiming::default()).is_err());
    }

    #[test]
    fn tight_timing_merges_pulses() {
        let p = ScenarioParams::three_level_reference().with_kappa_wq(4.0);
        let c = [C64::new(1.0 / SQRT_2, 0.0), C64::new(1.0 / SQRT_2, 0.0)];
        let tight = QuditTiming { emit_hold: 0.5, emit_hold_max: 0.5, leg: Some(30.0), ..QuditTiming::default() };
        assert!(matches!(qudit_emission(&p, &c, &tight), Err(ProtocolError::PulseOverlap { boundary: 1 })));
    }
}
