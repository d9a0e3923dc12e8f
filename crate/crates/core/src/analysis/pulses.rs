use alloc::vec::Vec;

use super::{fit_gaussian, mode_mismatch, AnalysisError, GaussianFit};
use crate::math::{cumulative_trapezoid, interp, sqrt, trapezoid};
use crate::model::OutputRecord;

/// `P_out = ∫|f_out|^2 dt` by the trapezoid rule.
pub fn emitted_probability(record: &OutputRecord) -> f64 {
    trapezoid(&record.times, &record.intensity())
}

/// One emitted pulse: a maximal above-threshold interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub area: f64,
    pub center: f64,
}

/// Splits `|f_out|^2` into pulses where it is at least `threshold` times its
/// peak. Sub-threshold gaps shorter than one time unit do not split a pulse.
pub fn segment_pulses(record: &OutputRecord, threshold: f64) -> Vec<PulseSegment> {
    let t = &record.times;
    let y = record.intensity();
    let peak = y.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Vec::new();
    }
    let cut = threshold * peak;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < y.len() {
        if y[k] >= cut {
            let start = k;
            while k + 1 < y.len() && y[k + 1] >= cut {
                k += 1;
            }
            match runs.last_mut() {
                Some(last) if t[start] - t[last.1] < 1.0 => last.1 = k,
                _ => runs.push((start, k)),
            }
        }
        k += 1;
    }
    runs.into_iter()
        .map(|(a, b)| {
            let ts = &t[a..=b];
            let ys = &y[a..=b];
            let area = trapezoid(ts, ys);
            let ty: Vec<f64> = ts.iter().zip(ys).map(|(x, v)| x * v).collect();
            let center = if area > 0.0 { trapezoid(ts, &ty) / area } else { ts[0] };
            PulseSegment {
                t_start: ts[0],
                t_end: ts[ts.len() - 1],
                area,
                center,
            }
        })
        .collect()
}

/// Centered running mean of `y` over `window`, shrunk at the ends.
pub fn moving_average(t: &[f64], y: &[f64], window: f64) -> Vec<f64> {
    if t.is_empty() {
        return Vec::new();
    }
    let c = cumulative_trapezoid(t, y);
    let (lo, hi) = (t[0], t[t.len() - 1]);
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let a = (ti - 0.5 * window).max(lo);
            let b = (ti + 0.5 * window).min(hi);
            if b > a {
                (interp(t, &c, b) - interp(t, &c, a)) / (b - a)
            } else {
                yi
            }
        })
        .collect()
}

/// Height of the largest lobe after the main one, relative to the main peak,
/// on the intensity smoothed over `window`. Zero for a decay with no second
/// rise.
pub fn secondary_lobe_ratio(record: &OutputRecord, window: f64) -> f64 {
    let s = moving_average(&record.times, &record.intensity(), window);
    let Some((kp, &peak)) = s.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return 0.0;
    };
    if peak <= 0.0 {
        return 0.0;
    }
    let mut k = kp;
    while k + 1 < s.len() && s[k + 1] <= s[k] {
        k += 1;
    }
    s[k..].iter().copied().fold(0.0, f64::max) / peak
}

/// Moment skewness of `|f_out|^2` restricted to the span where it is at least
/// `fraction` of its peak.
pub fn main_lobe_skewness(record: &OutputRecord, fraction: f64) -> f64 {
    let y = record.intensity();
    let peak = y.iter().copied().fold(0.0, f64::max);
    let Some(first) = y.iter().position(|&v| v >= fraction * peak) else {
        return 0.0;
    };
    let last = y.iter().rposition(|&v| v >= fraction * peak).unwrap_or(first);
    let ts = &record.times[first..=last];
    let ys = &y[first..=last];
    let m0 = trapezoid(ts, ys);
    if m0 <= 0.0 {
        return 0.0;
    }
    let moment = |f: &dyn Fn(f64) -> f64| -> f64 {
        let w: Vec<f64> = ts.iter().zip(ys).map(|(&t, &v)| f(t) * v).collect();
        trapezoid(ts, &w) / m0
    };
    let mu = moment(&|t| t);
    let m2 = moment(&|t| (t - mu) * (t - mu));
    let m3 = moment(&|t| (t - mu) * (t - mu) * (t - mu));
    m3 / (m2 * sqrt(m2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseMetrics {
    pub p_out: f64,
    pub xi: f64,
    pub gaussian: GaussianFit,
    pub pulses: Vec<PulseSegment>,
}

/// `P_out`, unit-area Gaussian fit, `xi` and the pulse list (threshold
/// `1e-4` of peak).
pub fn pulse_metrics(record: &OutputRecord) -> Result<PulseMetrics, AnalysisError> {
    let gaussian = fit_gaussian(record, true)?;
    Ok(PulseMetrics {
        p_out: emitted_probability(record),
        xi: mode_mismatch(record, &gaussian),
        gaussian,
        pulses: segment_pulses(record, 1e-4),
    })
}
