use alloc::vec::Vec;

use super::rhs::{System, LEDGER_SLOTS};
use super::{DriveField, DynamicsError};
use crate::math::pow;
use crate::model::{AmplitudeTrajectory, DissipationLedger, OutputRecord, ScenarioParams, SweepProfile};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fixed-step RK4; the last step is shortened to land on `t_end`
    /// by spreading the span evenly over `ceil(span / dt)` steps.
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4) with per-step error control.
    Adaptive {
        rel_tol: f64,
        abs_tol: f64,
        dt_min: f64,
        dt_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub method: Method,
    pub t_start: f64,
    pub t_end: f64,
    /// Store a sample each time `t` crosses this uniform grid. `None` stores only
    /// the first and last states.
    pub sample_interval: Option<f64>,
}

impl Integrator {
    /// `min(1e-3, 0.01 / r)` with `r` a Gershgorin bound on the coherent
    /// spectrum along the sweep plus the largest half decay rate. Keeps the
    /// RK4 norm error of a lossless run below `1e-9` over tens of `1/kappa_sq`.
    pub fn default_dt(params: &ScenarioParams, sweep: &SweepProfile) -> f64 {
        let damping = 0.5
            * (params.kappa_wq + params.kappa_q)
                .max(params.kappa_s)
                .max(params.gamma_s)
                .max(params.gamma_q);
        let mut rate = params.max_rate();
        for (_, v) in sweep.points() {
            let (ds, dq) = sweep.knob().apply(params, v);
            let h = crate::spectra::build_matrix(params, ds, dq);
            for i in 0..h.dim() {
                let row: f64 = (0..h.dim()).map(|j| h.get(i, j).abs()).sum();
                rate = rate.max(row + damping);
            }
        }
        if rate > 0.0 {
            (0.01 / rate).min(1e-3)
        } else {
            1e-3
        }
    }

    /// RK4 at the default step from 0 to `t_end`, sampled every `1e-2`.
    pub fn rk4(params: &ScenarioParams, sweep: &SweepProfile, t_end: f64) -> Self {
        Self {
            method: Method::Rk4 {
                dt: Self::default_dt(params, sweep),
            },
            t_start: 0.0,
            t_end,
            sample_interval: Some(1e-2),
        }
    }

    pub fn adaptive(t_end: f64, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            method: Method::Adaptive {
                rel_tol,
                abs_tol,
                dt_min: 1e-12,
                dt_max: 0.1,
            },
            t_start: 0.0,
            t_end,
            sample_interval: Some(1e-2),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.method = Method::Rk4 { dt };
        self
    }

    pub fn with_sample_interval(mut self, interval: Option<f64>) -> Self {
        self.sample_interval = interval;
        self
    }

    pub fn with_t_start(mut self, t_start: f64) -> Self {
        self.t_start = t_start;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(DynamicsError::InvalidIntegrator("t_span must be finite and increasing"));
        }
        if let Some(s) = self.sample_interval {
            if !(s > 0.0 && s.is_finite()) {
                return Err(DynamicsError::InvalidIntegrator("sample interval must be positive"));
            }
        }
        match self.method {
            Method::Rk4 { dt } if !(dt > 0.0 && dt.is_finite()) => {
                Err(DynamicsError::InvalidIntegrator("dt must be positive"))
            }
            Method::Adaptive {
                rel_tol,
                abs_tol,
                dt_min,
                dt_max,
            } if !(rel_tol > 0.0 && abs_tol > 0.0 && dt_min > 0.0 && dt_max >= dt_min) => {
                Err(DynamicsError::InvalidIntegrator("tolerances and step bounds must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// State handed to an observer after every accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub t: f64,
    pub amplitudes: &'a [C64],
    pub emitted: f64,
    pub dissipated: DissipationLedger,
    pub injected: f64,
    pub f_in: C64,
    pub f_out: C64,
}

impl StepView<'_> {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

pub fn integrate(
    params: &ScenarioParams,
    sweep: &SweepProfile,
    initial: &[C64],
    drive: &DriveField,
    integrator: &Integrator,
) -> Result<(AmplitudeTrajectory, OutputRecord), DynamicsError> {
    integrate_observed(params, sweep, initial, drive, integrator, |_| Control::Continue)
}

/// Like [`integrate`], calling `observer` at the start and after every step.
/// Returning [`Control::Stop`] ends the run at that step; the stopping state
/// is always stored.
pub fn integrate_observed(
    params: &ScenarioParams,
    sweep: &SweepProfile,
    initial: &[C64],
    drive: &DriveField,
    integrator: &Integrator,
    mut observer: impl FnMut(&StepView<'_>) -> Control,
) -> Result<(AmplitudeTrajectory, OutputRecord), DynamicsError> {
    params.validate()?;
    integrator.validate()?;
    let d = params.dim();
    if initial.len() != d {
        return Err(DynamicsError::DimensionMismatch {
            expected: d,
            found: initial.len(),
        });
    }
    let norm: f64 = initial.iter().map(|a| a.norm_sqr()).sum();
    if drive.is_zero() && (norm - 1.0).abs() > 1e-9 {
        log::warn!("initial state norm^2 is {norm}, not one");
    }
    let sys = System::new(params, sweep, drive);
    let mut y: Vec<C64> = initial.iter().copied().chain(core::iter::repeat_n(C64::new(0.0, 0.0), LEDGER_SLOTS)).collect();
    let mut rec = Recorder::new(integrator.t_start, integrator.sample_interval);
    let mut t = integrator.t_start;
    let t_end = integrator.t_end;

    let mut stop = emit(&sys, t, &y, &mut rec, &mut observer, true);
    match integrator.method {
        Method::Rk4 { dt } => {
            let span = t_end - integrator.t_start;
            let steps = libm::ceil(span / dt - 1e-9).max(1.0) as u64;
            let h = span / steps as f64;
            let mut work = Rk4Work::new(y.len());
            let mut k = 0;
            while !stop && k < steps {
                rk4_step(&sys, t, h, &mut y, &mut work);
                k += 1;
                t = if k == steps { t_end } else { integrator.t_start + h * k as f64 };
                check_finite(&y, t)?;
                stop = emit(&sys, t, &y, &mut rec, &mut observer, k == steps);
            }
        }
        Method::Adaptive {
            rel_tol,
            abs_tol,
            dt_min,
            dt_max,
        } => {
            let mut work = DpWork::new(y.len());
            let mut h = dt_max.min(1e-3).max(dt_min);
            sys.augmented(t, &y, &mut work.k[0]);
            while !stop && t < t_end {
                let last = t + h >= t_end;
                let step = if last { t_end - t } else { h };
                let err = dp_step(&sys, t, step, &y, &mut work, rel_tol, abs_tol, d);
                if !err.is_finite() {
                    return Err(DynamicsError::NonFiniteState { t });
                }
                if err <= 1.0 {
                    t = if last { t_end } else { t + step };
                    core::mem::swap(&mut y, &mut work.y_new);
                    work.k.swap(0, 6);
                    check_finite(&y, t)?;
                    stop = emit(&sys, t, &y, &mut rec, &mut observer, last);
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * pow(err, -0.2)).clamp(0.2, 5.0) };
                h = (step * factor).min(dt_max);
                if h < dt_min {
                    return Err(DynamicsError::StepUnderflow { t });
                }
            }
        }
    }
    if let Some(&last) = rec.traj.times.last() {
        if last != t {
            rec.push(&sys, t, &y);
        }
    }
    Ok((rec.traj, rec.out))
}

fn check_finite(y: &[C64], t: f64) -> Result<(), DynamicsError> {
    if y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(DynamicsError::NonFiniteState { t })
    }
}

fn emit(
    sys: &System<'_>,
    t: f64,
    y: &[C64],
    rec: &mut Recorder,
    observer: &mut impl FnMut(&StepView<'_>) -> Control,
    force: bool,
) -> bool {
    let d = sys.dim();
    let (f_in, f_out) = sys.fields(t, y);
    let view = StepView {
        t,
        amplitudes: &y[..d],
        emitted: y[d].re,
        dissipated: ledger(y, d),
        injected: y[d + 5].re,
        f_in,
        f_out,
    };
    let stop = observer(&view) == Control::Stop;
    if force || stop || rec.due(t) {
        rec.push(sys, t, y);
    }
    stop
}

fn ledger(y: &[C64], d: usize) -> DissipationLedger {
    DissipationLedger {
        kappa_s: y[d + 1].re,
        kappa_q: y[d + 2].re,
        gamma_s: y[d + 3].re,
        gamma_q: y[d + 4].re,
    }
}

struct Recorder {
    t0: f64,
    interval: Option<f64>,
    next_index: u64,
    traj: AmplitudeTrajectory,
    out: OutputRecord,
}

impl Recorder {
    fn new(t0: f64, interval: Option<f64>) -> Self {
        Self {
            t0,
            interval,
            next_index: 0,
            traj: AmplitudeTrajectory::default(),
            out: OutputRecord::default(),
        }
    }

    fn due(&self, t: f64) -> bool {
        match self.interval {
            Some(s) => t >= self.t0 + s * self.next_index as f64 - 1e-9 * s,
            None => false,
        }
    }

    fn push(&mut self, sys: &System<'_>, t: f64, y: &[C64]) {
        if self.traj.times.last() == Some(&t) {
            return;
        }
        let d = sys.dim();
        let (f_in, f_out) = sys.fields(t, y);
        self.traj.times.push(t);
        self.traj.amplitudes.push(y[..d].to_vec());
        self.traj.emitted.push(y[d].re);
        self.traj.dissipated.push(ledger(y, d));
        self.traj.injected.push(y[d + 5].re);
        self.out.times.push(t);
        self.out.f_in.push(f_in);
        self.out.f_out.push(f_out);
        if let Some(s) = self.interval {
            let passed = libm::floor((t - self.t0) / s + 1e-9) as u64;
            self.next_index = self.next_index.max(passed + 1);
        }
    }
}

struct Rk4Work {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Work {
    fn new(n: usize) -> Self {
        let z = alloc::vec![C64::new(0.0, 0.0); n];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }
}

fn rk4_step(sys: &System<'_>, t: f64, h: f64, y: &mut [C64], w: &mut Rk4Work) {
    let n = y.len();
    sys.augmented(t, y, &mut w.k1);
    for i in 0..n {
        w.tmp[i] = y[i] + w.k1[i] * (0.5 * h);
    }
    sys.augmented(t + 0.5 * h, &w.tmp, &mut w.k2);
    for i in 0..n {
        w.tmp[i] = y[i] + w.k2[i] * (0.5 * h);
    }
    sys.augmented(t + 0.5 * h, &w.tmp, &mut w.k3);
    for i in 0..n {
        w.tmp[i] = y[i] + w.k3[i] * h;
    }
    sys.augmented(t + h, &w.tmp, &mut w.k4);
    for i in 0..n {
        y[i] += (w.k1[i] + (w.k2[i] + w.k3[i]) * 2.0 + w.k4[i]) * (h / 6.0);
    }
}

struct DpWork {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
}

impl DpWork {
    fn new(n: usize) -> Self {
        let z = alloc::vec![C64::new(0.0, 0.0); n];
        Self {
            k: core::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            y_new: z,
        }
    }
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One trial step; `w.k[0]` must hold the derivative at `(t, y)`. Leaves the
/// fifth-order result in `w.y_new`, its derivative in `w.k[6]`, and returns the
/// scaled error norm over the amplitudes.
#[allow(clippy::too_many_arguments)]
fn dp_step(sys: &System<'_>, t: f64, h: f64, y: &[C64], w: &mut DpWork, rel: f64, abs: f64, d: usize) -> f64 {
    let n = y.len();
    for s in 1..7 {
        for i in 0..n {
            let mut acc = y[i];
            for (j, &a) in DP_A[s][..s].iter().enumerate() {
                if a != 0.0 {
                    acc += w.k[j][i] * (h * a);
                }
            }
            w.tmp[i] = acc;
        }
        sys.augmented(t + DP_C[s] * h, &w.tmp, &mut w.k[s]);
    }
    // stage 7 was evaluated at the fifth-order solution (FSAL)
    w.y_new.copy_from_slice(&w.tmp);
    let mut err: f64 = 0.0;
    for i in 0..d {
        let mut e = C64::new(0.0, 0.0);
        for s in 0..7 {
            e += w.k[s][i] * (DP_B5[s] - DP_B4[s]);
        }
        let scale = abs + rel * y[i].norm().max(w.y_new[i].norm());
        err = err.max((e * h).norm() / scale);
    }
    err
}
