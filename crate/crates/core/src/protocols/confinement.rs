use alloc::vec::Vec;

use super::ProtocolError;
use crate::analysis::{fit_exponential_rate, AnalysisError, DecayWindow};
use crate::dynamics::{minus_s_state, StaticPropagator};
use crate::math::E_INV;
use crate::model::ScenarioParams;
use crate::spectra::off_detuning_two_level;
use crate::C64;

const SAMPLE_INTERVAL: f64 = 1e-2;
const MAX_SAMPLES: usize = 1 << 16;

/// Step for fixed-detuning runs: set by the coherent rates, and small enough
/// that the fastest damping stays well inside the RK4 stability region.
fn static_dt(params: &ScenarioParams) -> f64 {
    let coherent = params
        .g_s
        .max(params.g_q)
        .max(params.kappa_sq)
        .max(params.cavity_detuning_q.abs())
        .max(params.detuning_s.abs())
        .max(params.detuning_q.abs())
        .max(0.5 * params.kappa_wq)
        .max(params.ladder_rabi.iter().copied().fold(0.0, f64::max));
    let damping = 0.5
        * (params.kappa_s)
            .max(params.gamma_s)
            .max(params.kappa_q + params.kappa_wq)
            .max(params.gamma_q);
    let mut dt = (0.03 / coherent).min(1e-3);
    if damping > 0.0 {
        dt = dt.min(0.5 / damping);
    }
    dt
}

enum Probe {
    Survival,
    Norm,
}

/// Samples `probe` from `initial` at the detunings in `params` until it drops
/// below `stop_below` or `t_max` is reached. The record thins itself by
/// halving when it would exceed `MAX_SAMPLES` points.
fn record_decay(
    params: &ScenarioParams,
    initial: &[C64],
    probe: Probe,
    t_max: f64,
    stop_below: f64,
) -> Result<(Vec<f64>, Vec<f64>), ProtocolError> {
    let dt = static_dt(params);
    let stride = libm::round(SAMPLE_INTERVAL / dt).max(1.0) as u32;
    let prop = StaticPropagator::new(params, params.detuning_s, params.detuning_q, dt, stride)?;
    let measure = |y: &[C64]| -> f64 {
        match probe {
            Probe::Survival => {
                let o: C64 = initial.iter().zip(y).map(|(r, a)| r.conj() * a).sum();
                o.norm_sqr()
            }
            Probe::Norm => y.iter().map(|a| a.norm_sqr()).sum(),
        }
    };
    let mut y = initial.to_vec();
    let mut next = y.clone();
    let mut times = alloc::vec![0.0];
    let mut values = alloc::vec![measure(&y)];
    let mut keep_every = 1u64;
    let mut k = 0u64;
    loop {
        prop.advance(&y, &mut next);
        core::mem::swap(&mut y, &mut next);
        k += 1;
        let t = k as f64 * prop.interval();
        let v = measure(&y);
        if !v.is_finite() {
            return Err(crate::dynamics::DynamicsError::NonFiniteState { t }.into());
        }
        let done = v < stop_below || t >= t_max;
        if k % keep_every == 0 || done {
            times.push(t);
            values.push(v);
            if times.len() >= MAX_SAMPLES && !done {
                let mut i = 0;
                times.retain(|_| {
                    i += 1;
                    (i - 1) % 2 == 0
                });
                let mut i = 0;
                values.retain(|_| {
                    i += 1;
                    (i - 1) % 2 == 0
                });
                keep_every *= 2;
            }
        }
        if done {
            break;
        }
    }
    Ok((times, values))
}

/// Survival `|<-s|psi(t)>|^2` with the switch held at the off detuning, until
/// it falls below `1/e` or `t_max`.
pub fn confinement_survival(params: &ScenarioParams, t_max: f64) -> Result<(Vec<f64>, Vec<f64>), ProtocolError> {
    let off = off_detuning_two_level(params)?;
    let p = params.clone().with_detunings(params.detuning_s, off);
    let y0 = minus_s_state(&p)?;
    record_decay(&p, &y0, Probe::Survival, t_max, E_INV)
}

/// Effective decay rate `r` of the confined excitation under the loss rates in
/// `params`.
pub fn confinement_run(params: &ScenarioParams, t_max: f64) -> Result<f64, ProtocolError> {
    let (t, s) = confinement_survival(params, t_max)?;
    Ok(fit_exponential_rate(&t, &s, DecayWindow::default())?)
}

/// Leakage of `|-s>` at one `(Delta_q, delta_q)` point, from the decay of the
/// probability left in the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageCell {
    pub rate: f64,
    /// The remaining probability did not decay enough to fit a rate; `rate`
    /// is then zero.
    pub below_threshold: bool,
}

pub fn leakage_cell(
    params: &ScenarioParams,
    detuning_q: f64,
    cavity_detuning_q: f64,
    t_max: f64,
) -> Result<LeakageCell, ProtocolError> {
    let mut p = params.clone().with_detunings(params.detuning_s, detuning_q);
    p.cavity_detuning_q = cavity_detuning_q;
    let y0 = minus_s_state(&p)?;
    let (t, n) = record_decay(&p, &y0, Probe::Norm, t_max, E_INV)?;
    match fit_exponential_rate(&t, &n, DecayWindow::default()) {
        Ok(rate) => Ok(LeakageCell {
            rate,
            below_threshold: false,
        }),
        Err(AnalysisError::InsufficientDecay | AnalysisError::TooFewPoints { .. }) => Ok(LeakageCell {
            rate: 0.0,
            below_threshold: true,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Leakage rates over a grid; `cells[j][i]` belongs to
/// `(detuning_q[i], cavity_detuning_q[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageMap {
    pub detuning_q: Vec<f64>,
    pub cavity_detuning_q: Vec<f64>,
    pub cells: Vec<Vec<LeakageCell>>,
}

pub fn leakage_map(
    params: &ScenarioParams,
    detuning_q: &[f64],
    cavity_detuning_q: &[f64],
    t_max: f64,
) -> Result<LeakageMap, ProtocolError> {
    let mut cells = Vec::with_capacity(cavity_detuning_q.len());
    for &c in cavity_detuning_q {
        let row = detuning_q
            .iter()
            .map(|&dq| leakage_cell(params, dq, c, t_max))
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(row);
    }
    Ok(LeakageMap {
        detuning_q: detuning_q.to_vec(),
        cavity_detuning_q: cavity_detuning_q.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::res_detuning_two_level;

    #[test]
    fn lossless_confinement_has_nothing_to_fit() {
        let p = ScenarioParams::q_switch_reference().with_kappa_wq(5.0);
        let r = confinement_run(&p, 200.0);
        assert_eq!(r, Err(ProtocolError::Analysis(AnalysisError::InsufficientDecay)));
        let (_, s) = confinement_survival(&p, 100.0).unwrap();
        assert!(s.iter().all(|&v| v >= 0.99));
    }

    #[test]
    fn cavity_loss_halves() {
        let mut p = ScenarioParams::q_switch_reference().with_kappa_wq(5.0);
        p.kappa_s = 0.1;
        let r = confinement_run(&p, 1e4).unwrap();
        assert!((r - 0.05).abs() < 0.1 * 0.05, "{r}");
    }

    #[test]
    fn decimation_keeps_span() {
        let mut p = ScenarioParams::q_switch_reference().with_kappa_wq(5.0);
        p.kappa_s = 1e-3;
        let (t, s) = confinement_survival(&p, 1500.0).unwrap();
        assert!(t.len() < MAX_SAMPLES);
        assert!((t[t.len() - 1] - 1500.0).abs() < 0.02);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(s[s.len() - 1] < 0.5);
    }

    #[test]
    fn map_row_extremes() {
        let p = ScenarioParams::q_switch_reference().with_kappa_wq(5.0);
        let res = res_detuning_two_level(&p).unwrap();
        let grid = [-20.0, -5.0, 10.0, 30.0, res, 70.0];
        let map = leakage_map(&p, &grid, &[2.0], 1e3).unwrap();
        let row = &map.cells[0];
        let rates: Vec<f64> = row.iter().map(|c| c.rate).collect();
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let max = rates.iter().copied().fold(0.0, f64::max);
        assert_eq!(rates[1], min);
        assert_eq!(rates[4], max);
        let closed = leakage_map(&ScenarioParams::q_switch_reference(), &grid, &[2.0], 50.0).unwrap();
        assert!(closed.cells[0].iter().all(|c| c.below_threshold));
    }
}
