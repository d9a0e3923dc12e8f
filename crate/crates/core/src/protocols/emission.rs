use alloc::vec::Vec;

use super::{ExperimentResult, ProtocolError};
use crate::analysis::{main_lobe_skewness, pulse_metrics, secondary_lobe_ratio};
use crate::dynamics::{basis_state, integrate_observed, minus_s_state, Control, DriveField, Integrator};
use crate::model::{AmplitudeTrajectory, BasisLabel, Knob, OutputRecord, ScenarioParams, SweepProfile};
use crate::spectra::{adiabaticity, build_matrix, eigensystem, off_detuning_two_level, res_detuning_two_level};
use crate::C64;

/// When to stop integrating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Fixed(f64),
    /// Run past the end of the sweep until the emitted probability grows by
    /// less than `increment` per unit time, or `max_extra` has elapsed.
    Plateau { increment: f64, max_extra: f64 },
}

impl Default for Horizon {
    fn default() -> Self {
        Self::Plateau {
            increment: 1e-5,
            max_extra: 2000.0,
        }
    }
}

/// Integrates an undriven sweep from `initial` with the default RK4 step.
pub fn run_sweep(
    params: &ScenarioParams,
    sweep: &SweepProfile,
    initial: &[C64],
    horizon: Horizon,
    sample_interval: f64,
) -> Result<(AmplitudeTrajectory, OutputRecord), ProtocolError> {
    let sweep_end = sweep.end_time().max(0.0);
    let t_end = match horizon {
        Horizon::Fixed(t) => t,
        Horizon::Plateau { max_extra, .. } => sweep_end + max_extra,
    };
    let integ = Integrator::rk4(params, sweep, t_end).with_sample_interval(Some(sample_interval));
    let mut mark_t = sweep_end;
    let mut mark_emitted = 0.0;
    let out = integrate_observed(params, sweep, initial, &DriveField::Zero, &integ, |v| {
        let Horizon::Plateau { increment, .. } = horizon else {
            return Control::Continue;
        };
        if v.t < sweep_end {
            mark_emitted = v.emitted;
            return Control::Continue;
        }
        if v.t >= mark_t + 1.0 {
            let grew = v.emitted - mark_emitted;
            mark_t = v.t;
            mark_emitted = v.emitted;
            if grew < increment * 1.0 || v.norm_sqr() < 1e-10 {
                return Control::Stop;
            }
        }
        Control::Continue
    })?;
    Ok(out)
}

/// `|-s>` for a coupled storage atom, the bare photon `|1_s>` when `g_s = 0`.
pub(crate) fn storage_initial_state(params: &ScenarioParams) -> Result<Vec<C64>, ProtocolError> {
    if params.g_s == 0.0 {
        Ok(basis_state(params, BasisLabel::PhotonS))
    } else {
        Ok(minus_s_state(params)?)
    }
}

/// Switch held at the resonance detuning from the start.
pub fn passive_emission(params: &ScenarioParams, kappa_wq: f64, t_end: f64) -> Result<ExperimentResult, ProtocolError> {
    let p = params.clone().with_kappa_wq(kappa_wq);
    let res = res_detuning_two_level(&p)?;
    let ds = p.detuning_s;
    let p = p.with_detunings(ds, res);
    let sweep = SweepProfile::constant(Knob::DetuningQ, res);
    let y0 = storage_initial_state(&p)?;
    let (trajectory, record) = run_sweep(&p, &sweep, &y0, Horizon::Fixed(t_end), 1e-2)?;
    let metrics = pulse_metrics(&record).ok();
    let scalars = alloc::vec![
        ("res_detuning", res),
        ("secondary_lobe", secondary_lobe_ratio(&record, 1.0 / p.kappa_sq)),
        ("skewness", main_lobe_skewness(&record, 0.01)),
    ];
    Ok(ExperimentResult {
        params: p,
        sweep,
        trajectory,
        record,
        metrics,
        scalars,
    })
}

/// Where a linear switch sweep starting at the off detuning ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepEndpoint {
    /// Halfway between the off and resonance detunings.
    Midpoint,
    Resonance,
    /// `off + fraction (res - off)`.
    Fraction(f64),
}

impl SweepEndpoint {
    pub fn fraction(self) -> f64 {
        match self {
            Self::Midpoint => 0.5,
            Self::Resonance => 1.0,
            Self::Fraction(f) => f,
        }
    }
}

/// Sorted eigenvalue index of the eigenstate closest to `state` at the
/// start of `sweep`.
pub(crate) fn start_branch(params: &ScenarioParams, sweep: &SweepProfile, state: &[C64]) -> Result<usize, ProtocolError> {
    let (ds, dq) = sweep.knob().apply(params, sweep.initial_value());
    let es = eigensystem(&build_matrix(params, ds, dq))?;
    let mut best = (0, -1.0);
    for (k, v) in es.vectors.iter().enumerate() {
        let o: C64 = v.iter().zip(state).map(|(a, b)| b * *a).sum();
        if o.norm_sqr() > best.1 {
            best = (k, o.norm_sqr());
        }
    }
    Ok(best.0)
}

/// Linear switch sweep from the off detuning to `endpoint` over `duration`,
/// then held.
pub fn shaped_emission_linear(
    params: &ScenarioParams,
    kappa_wq: f64,
    duration: f64,
    endpoint: SweepEndpoint,
    horizon: Horizon,
) -> Result<ExperimentResult, ProtocolError> {
    if !(duration > 0.0) {
        return Err(ProtocolError::InvalidInput("sweep duration must be positive"));
    }
    let p = params.clone().with_kappa_wq(kappa_wq);
    let off = off_detuning_two_level(&p)?;
    let res = res_detuning_two_level(&p)?;
    let end = off + endpoint.fraction() * (res - off);
    let ds = p.detuning_s;
    let p = p.with_detunings(ds, off);
    let sweep = SweepProfile::linear(Knob::DetuningQ, duration, off, end);
    let y0 = storage_initial_state(&p)?;
    let mut result = run_profile(&p, sweep, &y0, horizon)?;
    result.scalars.extend([
        ("off_detuning", off),
        ("res_detuning", res),
        ("end_detuning", end),
        ("duration", duration),
    ]);
    Ok(result)
}

/// Runs `sweep` from `y0` and attaches pulse metrics and adiabaticity.
pub(crate) fn run_profile(
    p: &ScenarioParams,
    sweep: SweepProfile,
    y0: &[C64],
    horizon: Horizon,
) -> Result<ExperimentResult, ProtocolError> {
    let (trajectory, record) = run_sweep(p, &sweep, y0, horizon, 2e-2)?;
    let metrics = Some(pulse_metrics(&record)?);
    let branch = start_branch(p, &sweep, y0)?;
    let (t0, t1) = (sweep.start_time(), sweep.end_time());
    let grid: Vec<f64> = if t1 > t0 {
        (0..=400).map(|i| t0 + (t1 - t0) * i as f64 / 400.0).collect()
    } else {
        alloc::vec![t0]
    };
    let a = adiabaticity(p, &sweep, &grid, branch)?;
    Ok(ExperimentResult {
        params: p.clone(),
        sweep,
        trajectory,
        record,
        metrics,
        scalars: alloc::vec![("adiabaticity", a.value)],
    })
}

/// Every `(endpoint, duration)` combination tried by [`best_linear_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSweepSearch {
    /// Lowest `xi` among runs with `P_out > 0.99` (lowest overall if none).
    pub best: ExperimentResult,
    pub best_endpoint: SweepEndpoint,
    pub best_duration: f64,
    /// `(endpoint, duration, P_out, xi)` per run.
    pub table: Vec<(SweepEndpoint, f64, f64, f64)>,
}

pub fn best_linear_sweep(
    params: &ScenarioParams,
    kappa_wq: f64,
    durations: &[f64],
    endpoints: &[SweepEndpoint],
    horizon: Horizon,
) -> Result<LinearSweepSearch, ProtocolError> {
    let mut best: Option<(bool, f64, ExperimentResult, SweepEndpoint, f64)> = None;
    let mut table = Vec::new();
    for &e in endpoints {
        for &d in durations {
            let r = shaped_emission_linear(params, kappa_wq, d, e, horizon)?;
            let (p, xi) = (r.p_out(), r.xi().unwrap_or(1.0));
            table.push((e, d, p, xi));
            let ok = p > 0.99;
            let better = match &best {
                None => true,
                Some((bok, bxi, ..)) => (ok && !bok) || (ok == *bok && xi < *bxi),
            };
            if better {
                best = Some((ok, xi, r, e, d));
            }
        }
    }
    let (_, _, best, best_endpoint, best_duration) =
        best.ok_or(ProtocolError::InvalidInput("no durations or endpoints to search"))?;
    Ok(LinearSweepSearch {
        best,
        best_endpoint,
        best_duration,
        table,
    })
}
