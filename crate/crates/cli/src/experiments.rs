//! One function per subcommand. Each reads what it needs from the config and
//! fills an [`Outputs`] bundle; nothing touches the disk here.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use qswitch_core::analysis::{AnalysisError, GaussianFit};
use qswitch_core::dynamics::{
    basis_state, integrate, minus_s_state, vacuum, DriveField, Integrator, Method,
};
use qswitch_core::model::basis;
use qswitch_core::protocols::{
    best_linear_sweep, capture_run, confinement_run, leakage_cell, mirrored_capture, qudit_emission, reconstruct_sweep,
    shaped_emission_linear, switching_p_out, ExperimentResult, Horizon, LossChannel, ProtocolError, QuditTiming,
    SweepEndpoint,
};
use qswitch_core::spectra::{
    ladder_points, off_detuning_two_level, res_detuning_two_level, track_branches, QBranch,
};
use qswitch_core::{BasisLabel, Knob, ScenarioParams, SweepProfile, C64};
use serde_json::Value;

use crate::config::{ConfigError, RunConfig};
use crate::output::{float, nums, row, AppError, Object, Outputs};

fn invalid(msg: impl Into<String>) -> AppError {
    AppError::Validation(msg.into())
}

fn label(l: BasisLabel) -> String {
    match l {
        BasisLabel::PhotonS => "photon_s".into(),
        BasisLabel::AtomS(r) => format!("atom_s{r}"),
        BasisLabel::PhotonQ => "photon_q".into(),
        BasisLabel::AtomQ => "atom_q".into(),
    }
}

fn knob(cfg: &RunConfig, key: &str) -> Result<Knob, ConfigError> {
    Ok(match cfg.choice(key, &["detuning_q", "detuning_s"], "detuning_q")? {
        "detuning_s" => Knob::DetuningS,
        _ => Knob::DetuningQ,
    })
}

fn knob_value(p: &ScenarioParams, k: Knob) -> f64 {
    match k {
        Knob::DetuningS => p.detuning_s,
        Knob::DetuningQ => p.detuning_q,
    }
}

fn endpoint_name(e: SweepEndpoint) -> String {
    match e {
        SweepEndpoint::Midpoint => "midpoint".into(),
        SweepEndpoint::Resonance => "resonance".into(),
        SweepEndpoint::Fraction(f) => format!("{f}"),
    }
}

/// `sweep_endpoint`: comma-separated `midpoint`, `resonance` or fractions of
/// the way from the off to the resonance detuning.
fn endpoints(cfg: &RunConfig, default: &[SweepEndpoint]) -> Result<Vec<SweepEndpoint>, AppError> {
    let Some(text) = cfg.text("sweep_endpoint") else {
        return Ok(default.to_vec());
    };
    text.split(',')
        .map(|s| match s.trim() {
            "midpoint" => Ok(SweepEndpoint::Midpoint),
            "resonance" => Ok(SweepEndpoint::Resonance),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|f| f.is_finite())
                .map(SweepEndpoint::Fraction)
                .ok_or_else(|| invalid(format!("sweep_endpoint `{other}` is not midpoint, resonance or a number"))),
        })
        .collect()
}

fn single_endpoint(cfg: &RunConfig, default: SweepEndpoint) -> Result<SweepEndpoint, AppError> {
    match endpoints(cfg, &[default])?.as_slice() {
        [e] => Ok(*e),
        _ => Err(invalid("sweep_endpoint must name a single endpoint here")),
    }
}

fn horizon(cfg: &RunConfig) -> Result<Horizon, AppError> {
    Ok(match cfg.float_opt("t_end")? {
        Some(t) if t > 0.0 => Horizon::Fixed(t),
        Some(_) => return Err(invalid("t_end must be positive")),
        None => Horizon::default(),
    })
}

fn gaussian_json(g: &GaussianFit) -> Result<Value, AppError> {
    Ok(Object::new()
        .num("area", g.area)?
        .num("t0", g.center)?
        .num("sigma", g.width)?
        .into_value())
}

fn output_rows(r: &ExperimentResult) -> Result<Vec<Vec<String>>, AppError> {
    let fit = r.metrics.as_ref().map(|m| m.gaussian);
    r.record
        .times
        .iter()
        .zip(&r.record.f_out)
        .map(|(&t, f)| row(&[t, f.re, f.im, f.norm_sqr(), fit.map_or(0.0, |g| g.intensity(t))]))
        .collect()
}

fn output_header() -> Vec<String> {
    ["t", "re_f_out", "im_f_out", "f_out_sq", "gaussian_sq"].map(String::from).to_vec()
}

fn drive(cfg: &RunConfig) -> Result<DriveField, AppError> {
    Ok(match cfg.choice("drive", &["none", "gaussian"], "none")? {
        "gaussian" => {
            let width = cfg.float("drive_width", 1.0)?;
            if !(width > 0.0) {
                return Err(invalid("drive_width must be positive"));
            }
            DriveField::Gaussian {
                amplitude: C64::new(cfg.float("drive_amplitude", 1.0)?, 0.0),
                center: cfg.float_opt("drive_center")?.ok_or_else(|| invalid("drive_center is required"))?,
                width,
                detuning: cfg.float("drive_detuning", 0.0)?,
            }
        }
        _ => DriveField::Zero,
    })
}

/// Eigenbranches along `spectrum_grid`, with the squared weight of every basis
/// state on every branch.
pub fn spectrum(cfg: &RunConfig, out: &mut Outputs) -> Result<(), AppError> {
    let p = &cfg.scenario;
    let k = knob(cfg, "spectrum_knob")?;
    let grid = cfg.list("spectrum_grid")?;
    let table = track_branches(p, k, &grid).map_err(ProtocolError::from)?;
    let labels: Vec<String> = basis(p).into_iter().map(label).collect();
    let d = labels.len();

    let mut header = vec![k.name().to_string()];
    header.extend((1..=d).map(|b| format!("lambda_{b}")));
    for b in 1..=d {
        header.extend(labels.iter().map(|l| format!("w{b}_{l}")));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &x) in grid.iter().enumerate() {
        let mut v = vec![x];
        v.extend(table.branches.iter().map(|b| b.energies[i]));
        for b in &table.branches {
            v.extend(b.vectors[i].iter().map(|c| c * c));
        }
        rows.push(row(&v)?);
    }
    out.csv("spectrum.csv", &header, &rows)?;

    let mut gaps = Vec::new();
    for b in 0..d - 1 {
        let (at, gap) = table.min_gap(b, b + 1);
        gaps.push(Object::new().set("lower", b + 1).num("position", at)?.num("gap", gap)?.into_value());
    }
    let mut summary = Object::new()
        .set("knob", k.name())
        .set("points", grid.len())
        .set("basis", labels)
        .set("min_gaps", gaps);
    if p.levels_s == 2 && k == Knob::DetuningQ {
        if let (Ok(off), Ok(res)) = (off_detuning_two_level(p), res_detuning_two_level(p)) {
            summary = summary.num("off_detuning", off)?.num("res_detuning", res)?;
        }
    }
    if p.levels_s > 2 && k == Knob::DetuningS {
        let mut pts = Vec::new();
        for b in 1..p.levels_s {
            if let Ok(lp) = ladder_points(p, b, QBranch::Plus) {
                pts.push(Object::new().set("branch", b).num("off", lp.off)?.num("resonance", lp.resonance)?.into_value());
            }
        }
        summary = summary.set("ladder_points", pts);
    }
    out.json("spectrum.json", &summary.into_value())
}

/// Free evolution (optionally driven and swept) with the full amplitude record.
pub fn evolve(cfg: &RunConfig, out: &mut Outputs) -> Result<(), AppError> {
    let k = knob(cfg, "sweep_knob")?;
    let base = cfg.scenario.clone();
    let from = cfg.float("sweep_from", knob_value(&base, k))?;
    let sweep = match cfg.float_opt("sweep_T")? {
        Some(t) => {
            let to = cfg.float_opt("sweep_to")?.ok_or_else(|| invalid("sweep_to is required with sweep_T"))?;
            if !(t > 0.0) {
                return Err(invalid("sweep_T must be positive"));
            }
            SweepProfile::linear(k, t, from, to)
        }
        None => SweepProfile::constant(k, from),
    };
    let (ds, dq) = k.apply(&base, from);
    let p = base.with_detunings(ds, dq);

    let initial = match cfg.choice(
        "initial",
        &["minus_s", "photon_s", "atom_s", "photon_q", "atom_q", "vacuum"],
        "minus_s",
    )? {
        "photon_s" => basis_state(&p, BasisLabel::PhotonS),
        "atom_s" => basis_state(&p, BasisLabel::AtomS(1)),
        "photon_q" => basis_state(&p, BasisLabel::PhotonQ),
        "atom_q" => basis_state(&p, BasisLabel::AtomQ),
        "vacuum" => vacuum(&p),
        _ => minus_s_state(&p).map_err(ProtocolError::from)?,
    };
    let t_end = cfg.float_opt("t_end")?.ok_or_else(|| invalid("t_end is required"))?;
    let mut integ = match cfg.choice("integrator", &["rk4", "adaptive"], "rk4")? {
        "adaptive" => Integrator::adaptive(t_end, cfg.float("rel_tol", 1e-8)?, cfg.float("abs_tol", 1e-10)?),
        _ => Integrator::rk4(&p, &sweep, t_end),
    };
    if let Some(dt) = cfg.float_opt("dt")? {
        if !matches!(integ.method, Method::Rk4 { .. }) {
            return Err(invalid("dt only applies to the rk4 integrator"));
        }
        integ = integ.with_dt(dt);
    }
    integ = integ.with_sample_interval(Some(cfg.float("sample_interval", 1e-2)?));
    let drive = drive(cfg)?;
    let (traj, record) = integrate(&p, &sweep, &initial, &drive, &integ).map_err(ProtocolError::from)?;

    let labels: Vec<String> = basis(&p).into_iter().map(label).collect();
    let mut header = vec!["t".to_string()];
    for l in &labels {
        header.push(format!("re_{l}"));
        header.push(format!("im_{l}"));
    }
    header.extend(["f_in_sq", "f_out_sq", "norm_sqr", "emitted", "dissipated", "injected"].map(String::from));
    let mut rows = Vec::with_capacity(traj.len());
    let mut ledger_error: f64 = 0.0;
    for i in 0..traj.len() {
        let mut v = vec![traj.times[i]];
        for a in &traj.amplitudes[i] {
            v.push(a.re);
            v.push(a.im);
        }
        v.extend([
            record.f_in[i].norm_sqr(),
            record.f_out[i].norm_sqr(),
            traj.norm_sqr(i),
            traj.emitted[i],
            traj.dissipated[i].total(),
            traj.injected[i],
        ]);
        ledger_error = ledger_error.max((traj.ledger_total(i) - traj.ledger_total(0)).abs());
        rows.push(row(&v)?);
    }
    out.csv("evolve.csv", &header, &rows)?;

    let last = traj.len() - 1;
    let lost = traj.dissipated[last];
    let summary = Object::new()
        .num("t_end", traj.times[last])?
        .num("norm_sqr", traj.norm_sqr(last))?
        .num("emitted", traj.emitted[last])?
        .num("injected", traj.injected[last])?
        .num("ledger_error", ledger_error)?
        .set(
            "dissipated",
            Object::new()
                .num("kappa_s", lost.kappa_s)?
                .num("kappa_q", lost.kappa_q)?
                .num("gamma_s", lost.gamma_s)?
                .num("gamma_q", lost.gamma_q)?,
        );
    out.json("evolve.json", &summary.into_value())
}

fn sweep_rows(sweep: &SweepProfile, other: Option<&SweepProfile>, t_end: f64) -> Result<Vec<Vec<String>>, AppError> {
    let n = 2000;
    (0..=n)
        .map(|i| {
            let t = t_end * i as f64 / n as f64;
            let mut v = vec![t, sweep.value(t)];
            if let Some(o) = other {
                v.push(o.value(t));
            }
            row(&v)
        })
        .collect()
}

/// Linear switch sweeps over `sweep_T` and `sweep_endpoint`, keeping the best,
/// optionally followed by sweep reconstruction.
pub fn shape(cfg: &RunConfig, out: &mut Outputs) -> Result<(), AppError> {
    let p = &cfg.scenario;
    if !(p.kappa_wq > 0.0) {
        return Err(invalid("shape needs kappa_wq > 0"));
    }
    let durations = cfg.list_or("sweep_T", (2..=8).map(|i| 5.0 * i as f64).collect())?;
    let ends = endpoints(cfg, &[SweepEndpoint::Midpoint, SweepEndpoint::Resonance])?;
    let search = best_linear_sweep(p, p.kappa_wq, &durations, &ends, horizon(cfg)?)?;
    let best = &search.best;
    let metrics = best.metrics.as_ref().ok_or_else(|| AppError::Numerical("trial has no pulse metrics".into()))?;

    let mut table = Vec::new();
    for &(e, d, p_out, xi) in &search.table {
        table.push(
            Object::new()
                .set("endpoint", endpoint_name(e))
                .num("duration", d)?
                .num("p_out", p_out)?
                .num("xi", xi)?
                .into_value(),
        );
    }
    let scalar = |name: &str| best.scalar(name).ok_or_else(|| AppError::Numerical(format!("missing {name}")));
    let mut summary = Object::new()
        .num("p_out", best.p_out())?
        .num("xi", metrics.xi)?
        .set("gaussian", gaussian_json(&metrics.gaussian)?)
        .num("A", scalar("adiabaticity")?)?
        .num("off_detuning", scalar("off_detuning")?)?
        .num("res_detuning", scalar("res_detuning")?)?
        .num("end_detuning", scalar("end_detuning")?)?
        .num("duration", search.best_duration)?
        .set("endpoint", endpoint_name(search.best_endpoint))
        .set("search", table);

    let iterations = cfg.int("reconstruct_iterations", 0)?;
    if iterations < 0 {
        return Err(invalid("reconstruct_iterations must be non-negative"));
    }
    let mut reconstructed = None;
    if iterations > 0 {
        let width = cfg.float_opt("reconstruct_width")?;
        let (rec, improved) = match reconstruct_sweep(best, width, iterations as usize) {
            Ok(r) => (r, true),
            Err(ProtocolError::NoImprovement(r)) => (*r, false),
            Err(e) => return Err(e.into()),
        };
        let m = rec.result.metrics.as_ref().ok_or_else(|| AppError::Numerical("reconstruction has no metrics".into()))?;
        summary = summary.set(
            "reconstruction",
            Object::new()
                .num("p_out", rec.result.p_out())?
                .num("xi", m.xi)?
                .set("gaussian", gaussian_json(&m.gaussian)?)
                .set("history", nums(&rec.history)?)
                .num("duration_ratio", rec.duration_ratio)?
                .set("improved", improved),
        );
        out.csv("output_reconstructed.csv", &output_header(), &output_rows(&rec.result)?)?;
        reconstructed = Some(rec);
    }

    let span = 2.0 * search.best_duration;
    let mut header = vec!["t".to_string(), "detuning_q".to_string()];
    if reconstructed.is_some() {
        header.push("detuning_q_reconstructed".into());
    }
    let rows = sweep_rows(&best.sweep, reconstructed.as_ref().map(|r| &r.sweep), span)?;
    out.csv("sweep.csv", &header, &rows)?;
    out.csv("output.csv", &output_header(), &output_rows(best)?)?;
    out.json("shape.json", &summary.into_value())
}

/// Multi-time emission from a storage ladder.
pub fn qudit(cfg: &RunConfig, out: &mut Outputs) -> Result<(), AppError> {
    let p = &cfg.scenario;
    let mags = cfg.list("qudit_coefficients")?;
    let phases = cfg.list_or("qudit_phases", vec![0.0; mags.len()])?;
    if phases.len() != mags.len() {
        return Err(invalid("qudit_phases must match qudit_coefficients in length"));
    }
    // Relative weights; normalized here so presets can say `1, 1, 1`.
    let norm = mags.iter().map(|m| m * m).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(invalid("qudit_coefficients must not all be zero"));
    }
    let coefficients: Vec<C64> = mags.iter().zip(&phases).map(|(&r, &ph)| C64::from_polar(r / norm, ph)).collect();
    let mut timing = QuditTiming::default();
    timing.hold = cfg.float("qudit_hold", timing.hold)?;
    timing.leg = cfg.float_opt("qudit_leg")?;
    timing.emit_hold = cfg.float("qudit_emit_hold", timing.emit_hold)?;
    timing.emit_hold_max = timing.emit_hold_max.max(timing.emit_hold);
    timing.transfer = cfg.float("qudit_transfer", timing.transfer)?;
    let q = qudit_emission(p, &coefficients, &timing)?;

    let mut pulses = Vec::new();
    for pl in &q.pulses {
        let mut o = Object::new()
            .set("branch", pl.branch)
            .num("t_start", pl.t_start)?
            .num("t_end", pl.t_end)?
            .num("area", pl.area)?
            .num("center", pl.center)?;
        if let Some(xi) = pl.xi {
            o = o.num("xi", xi)?;
        }
        pulses.push(o.into_value());
    }
    let mut points = Vec::new();
    for lp in &q.points {
        points.push(Object::new().set("branch", lp.branch).num("off", lp.off)?.num("resonance", lp.resonance)?.into_value());
    }
    let summary = Object::new()
        .num("p_out", q.result.p_out())?
        .num("premature_loss", q.premature_loss)?
        .num("ledger_error", q.result.ledger_error())?
        .set("pulses", pulses)
        .set("weights", nums(&coefficients.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>())?)
        .set("ladder_points", points)
        .set("legs", nums(&q.legs)?)
        .set("emit_holds", nums(&q.emit_holds)?);
    out.json("qudit.json", &summary.into_value())?;

    let r = &q.result;
    let rows = r
        .record
        .times
        .iter()
        .zip(&r.record.f_out)
        .map(|(&t, f)| row(&[t, r.sweep.value(t), f.re, f.im, f.norm_sqr()]))
        .collect::<Result<Vec<_>, _>>()?;
    let header = ["t", "detuning_s", "re_f_out", "im_f_out", "f_out_sq"].map(String::from);
    out.csv("qudit.csv", &header, &rows)
}

/// Evaluates `f` on every item with up to `workers` threads; results come back
/// in item order and the first failure in that order wins.
fn par_map<T: Sync, R: Send>(
    items: &[T],
    workers: usize,
    f: impl Fn(&T) -> Result<R, AppError> + Sync,
) -> Result<Vec<R>, AppError> {
    let slots: Vec<Mutex<Option<Result<R, AppError>>>> = items.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                log::info!("scan cell {}/{} done", i + 1, items.len());
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every cell is evaluated"))
        .collect()
}

fn set_rate(p: &mut ScenarioParams, channel: &str, rate: f64) {
    match channel {
        "kappa_s" => p.kappa_s = rate,
        "kappa_q" => p.kappa_q = rate,
        "gamma_s" => p.gamma_s = rate,
        _ => p.gamma_q = rate,
    }
}

/// Fitted decay rate, or `None` when the population barely decays.
fn decay_rate(p: &ScenarioParams, t_max: f64) -> Result<Option<f64>, AppError> {
    match confinement_run(p, t_max) {
        Ok(r) => Ok(Some(r)),
        Err(ProtocolError::Analysis(AnalysisError::InsufficientDecay | AnalysisError::TooFewPoints { .. })) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Parameter grids: switching loss, confinement decay or leakage map.
pub fn scan(cfg: &RunConfig, workers: usize, out: &mut Outputs) -> Result<(), AppError> {
    let p = &cfg.scenario;
    let kind = cfg
        .text("scan_kind")
        .ok_or_else(|| invalid("scan_kind is required (switching, confinement or leakage)"))?;
    let t_max = cfg.float("scan_t_max", 2000.0)?;
    match kind {
        "switching" => {
            let channel = match cfg.choice("scan_channel", &["kappa_q", "gamma_q"], "kappa_q")? {
                "gamma_q" => LossChannel::GammaQ,
                _ => LossChannel::KappaQ,
            };
            let rates = cfg.list("scan_rates")?;
            let duration = cfg.float("sweep_T", 25.0)?;
            let end = single_endpoint(cfg, SweepEndpoint::Resonance)?;
            let p_out = par_map(&rates, workers, |&r| Ok(switching_p_out(p, duration, end, channel, r)?))?;
            let rows = rates.iter().zip(&p_out).map(|(&r, &v)| row(&[r, v])).collect::<Result<Vec<_>, _>>()?;
            out.csv("scan.csv", &[channel.name().into(), "p_out".into()], &rows)?;
            let onset = rates.iter().zip(&p_out).find(|(_, &v)| v < 0.99).map(|(&r, _)| r);
            let mut summary = Object::new()
                .set("kind", kind)
                .set("channel", channel.name())
                .num("duration", duration)?
                .set("endpoint", endpoint_name(end));
            summary = match onset {
                Some(r) => summary.num("onset", r)?,
                None => summary.set("onset", Value::Null),
            };
            out.json("scan.json", &summary.into_value())
        }
        "confinement" => {
            let channel = cfg.choice("scan_channel", &["kappa_s", "kappa_q", "gamma_s", "gamma_q"], "gamma_q")?;
            let rates = cfg.list("scan_rates")?;
            let fits = par_map(&rates, workers, |&r| {
                let mut q = p.clone();
                set_rate(&mut q, channel, r);
                decay_rate(&q, t_max)
            })?;
            let rows = rates
                .iter()
                .zip(&fits)
                .map(|(&r, f)| Ok(vec![float(r)?, float(f.unwrap_or(0.0))?, u8::from(f.is_none()).to_string()]))
                .collect::<Result<Vec<_>, AppError>>()?;
            out.csv("scan.csv", &[channel.into(), "decay_rate".into(), "below_threshold".into()], &rows)?;
            let peak = rates
                .iter()
                .zip(&fits)
                .filter_map(|(&r, f)| f.map(|v| (r, v)))
                .fold(None, |acc: Option<(f64, f64)>, (r, v)| match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((r, v)),
                });
            let mut summary = Object::new().set("kind", kind).set("channel", channel).num("t_max", t_max)?;
            if let Some((r, v)) = peak {
                summary = summary.num("peak_rate", r)?.num("peak_decay_rate", v)?;
            }
            out.json("scan.json", &summary.into_value())
        }
        "leakage" => {
            let dq = cfg.list("scan_detuning_q")?;
            let delta = cfg.list_or("scan_delta_q", vec![p.cavity_detuning_q])?;
            let cells: Vec<(f64, f64)> = delta.iter().flat_map(|&c| dq.iter().map(move |&d| (c, d))).collect();
            let rates = par_map(&cells, workers, |&(c, d)| Ok(leakage_cell(p, d, c, t_max)?))?;
            let rows = cells
                .iter()
                .zip(&rates)
                .map(|(&(c, d), cell)| {
                    Ok(vec![float(c)?, float(d)?, float(cell.rate)?, u8::from(cell.below_threshold).to_string()])
                })
                .collect::<Result<Vec<_>, AppError>>()?;
            let header = ["delta_q", "detuning_q", "rate", "below_threshold"].map(String::from);
            out.csv("scan.csv", &header, &rows)?;
            let max = rates.iter().map(|c| c.rate).fold(0.0, f64::max);
            let summary = Object::new()
                .set("kind", kind)
                .set("cells", cells.len())
                .set("below_threshold", rates.iter().filter(|c| c.below_threshold).count())
                .num("max_rate", max)?
                .num("t_max", t_max)?;
            out.json("scan.json", &summary.into_value())
        }
        other => Err(invalid(format!("scan_kind `{other}`; expected switching, confinement or leakage"))),
    }
}

/// Emits a shaped photon, then drives the empty system with either its mirror
/// image or a Gaussian while the sweep runs backwards.
pub fn capture(cfg: &RunConfig, out: &mut Outputs) -> Result<(), AppError> {
    let p = &cfg.scenario;
    if !(p.kappa_wq > 0.0) {
        return Err(invalid("capture needs kappa_wq > 0"));
    }
    let duration = cfg.float("sweep_T", 25.0)?;
    let end = single_endpoint(cfg, SweepEndpoint::Resonance)?;
    let emission = shaped_emission_linear(p, p.kappa_wq, duration, end, horizon(cfg)?)?;
    let t_end = cfg.float("capture_t_end", emission.t_end())?;
    let mode = cfg.choice("capture_mode", &["mirrored", "gaussian"], "mirrored")?;
    let result = match mode {
        "gaussian" => {
            if !(t_end > emission.sweep.end_time()) {
                return Err(invalid("capture_t_end must exceed the sweep duration"));
            }
            let d = drive(cfg)?;
            capture_run(&emission.params, &d, &emission.sweep.time_reversed(t_end), t_end)?
        }
        _ => mirrored_capture(&emission, t_end)?,
    };
    let efficiency = if result.injected > 0.0 { result.capture / result.injected } else { 0.0 };
    let summary = Object::new()
        .set("mode", mode)
        .num("capture", result.capture)?
        .num("injected", result.injected)?
        .num("efficiency", efficiency)?
        .num("t_end", t_end)?
        .set(
            "emission",
            Object::new()
                .num("p_out", emission.p_out())?
                .num("xi", emission.xi().unwrap_or(1.0))?
                .num("duration", duration)?
                .set("endpoint", endpoint_name(end)),
        );
    out.json("capture.json", &summary.into_value())
}
