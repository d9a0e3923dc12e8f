use super::{build_matrix, eigensystem, knob_derivative, SpectraError};
use crate::model::{ScenarioParams, SweepProfile};

/// Largest value of `|<Phi| dH/dt |Phi'>| / (E_Phi - E_Phi')^2` along a sweep,
/// with `Phi'` the nearest-in-energy neighbour of the tracked state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adiabaticity {
    pub value: f64,
    pub time: f64,
    pub knob_value: f64,
}

/// `branch` is the sorted eigenvalue index of the tracked state at `times[0]`;
/// later points follow it by maximum overlap.
pub fn adiabaticity(
    params: &ScenarioParams,
    sweep: &SweepProfile,
    times: &[f64],
    branch: usize,
) -> Result<Adiabaticity, SpectraError> {
    params.validate()?;
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || branch >= params.dim() {
        return Err(SpectraError::InvalidGrid);
    }
    let knob = sweep.knob();
    let dh = knob_derivative(params, knob);
    let mut best = Adiabaticity {
        value: 0.0,
        time: times[0],
        knob_value: sweep.value(times[0]),
    };
    let mut prev: Option<alloc::vec::Vec<f64>> = None;
    for &t in times {
        let x = sweep.value(t);
        let (ds, dq) = knob.apply(params, x);
        let es = eigensystem(&build_matrix(params, ds, dq))?;
        let k = match &prev {
            None => branch,
            Some(pv) => {
                let mut best_k = 0;
                let mut best_o = -1.0;
                for (i, v) in es.vectors.iter().enumerate() {
                    let o = pv.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs();
                    if o > best_o {
                        best_o = o;
                        best_k = i;
                    }
                }
                best_k
            }
        };
        let e = es.values[k];
        let neighbour = (0..es.dim())
            .filter(|&i| i != k)
            .min_by(|&a, &b| (es.values[a] - e).abs().total_cmp(&(es.values[b] - e).abs()));
        if let Some(n) = neighbour {
            let gap = es.values[n] - e;
            if gap.abs() < 1e-12 {
                return Err(SpectraError::DegenerateGap { time: t });
            }
            let a = (dh.sandwich(&es.vectors[k], &es.vectors[n]) * sweep.rate(t)).abs() / (gap * gap);
            if a > best.value {
                best = Adiabaticity {
                    value: a,
                    time: t,
                    knob_value: x,
                };
            }
        }
        prev = Some(es.vectors[k].clone());
    }
    Ok(best)
}
