use alloc::vec::Vec;

use super::AnalysisError;
use crate::math::{exp, ln, nelder_mead, sqrt, trapezoid, PI};
use crate::model::OutputRecord;

/// Gaussian intensity profile `area / (width sqrt(2 pi)) exp(-(t - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit {
    pub area: f64,
    pub center: f64,
    pub width: f64,
    /// RMS of `|f_out|^2 - |g|^2` over the record samples.
    pub residual: f64,
}

impl GaussianFit {
    pub fn intensity(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.width;
        self.area / (self.width * sqrt(2.0 * PI)) * exp(-0.5 * x * x)
    }

    /// Amplitude of the unit-area version, `|g(t)|` with `∫|g|^2 dt = 1`.
    pub fn unit_amplitude(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.width;
        exp(-0.25 * x * x) / sqrt(self.width * sqrt(2.0 * PI))
    }
}

fn rms(t: &[f64], y: &[f64], area: f64, center: f64, width: f64) -> f64 {
    let norm = area / (width * sqrt(2.0 * PI));
    let inv = 1.0 / width;
    let mut acc = 0.0;
    for (&ti, &yi) in t.iter().zip(y) {
        let x = (ti - center) * inv;
        let d = yi - norm * exp(-0.5 * x * x);
        acc += d * d;
    }
    sqrt(acc / t.len() as f64)
}

/// Fits `|f_out|^2` with a Gaussian, starting from its moments and refining
/// by simplex search on the RMS intensity error. With `unit_area` the area is
/// pinned to one.
pub fn fit_gaussian(record: &OutputRecord, unit_area: bool) -> Result<GaussianFit, AnalysisError> {
    let t = &record.times;
    let y = record.intensity();
    let p = trapezoid(t, &y);
    if !(p >= 1e-3) {
        return Err(AnalysisError::NoPulse);
    }
    let ty: Vec<f64> = t.iter().zip(&y).map(|(a, b)| a * b).collect();
    let mu = trapezoid(t, &ty) / p;
    let var_y: Vec<f64> = t.iter().zip(&y).map(|(a, b)| (a - mu) * (a - mu) * b).collect();
    let span = t[t.len() - 1] - t[0];
    let sigma = sqrt(trapezoid(t, &var_y) / p).max(1e-6 * span.max(1e-300));
    let objective = |x: &[f64]| -> f64 {
        let (area, center, log_w) = if unit_area { (1.0, x[0], x[1]) } else { (exp(x[2]), x[0], x[1]) };
        rms(t, &y, area, center, exp(log_w))
    };
    let (x0, steps): (Vec<f64>, Vec<f64>) = if unit_area {
        (alloc::vec![mu, ln(sigma)], alloc::vec![0.5 * sigma, 0.3])
    } else {
        (alloc::vec![mu, ln(sigma), ln(p)], alloc::vec![0.5 * sigma, 0.3, 0.1])
    };
    let (x, residual, converged) = nelder_mead(objective, &x0, &steps, 1e-9, 20_000);
    if !converged || !residual.is_finite() {
        return Err(AnalysisError::NonConvergence);
    }
    Ok(GaussianFit {
        area: if unit_area { 1.0 } else { exp(x[2]) },
        center: x[0],
        width: exp(x[1]),
        residual,
    })
}

/// `1 - ∫|f_out| |g| dt` with `g` the unit-area version of `fit`; `f_out` is
/// not renormalized.
pub fn mode_mismatch(record: &OutputRecord, fit: &GaussianFit) -> f64 {
    let prod: Vec<f64> = record
        .times
        .iter()
        .zip(&record.f_out)
        .map(|(&t, f)| f.norm() * fit.unit_amplitude(t))
        .collect();
    1.0 - trapezoid(&record.times, &prod)
}

/// Mismatch of the pulse shape alone: `f_out` is scaled to unit area first.
pub fn normalized_mode_mismatch(record: &OutputRecord, fit: &GaussianFit) -> f64 {
    let p = trapezoid(&record.times, &record.intensity());
    if p <= 0.0 {
        return 1.0;
    }
    1.0 - (1.0 - mode_mismatch(record, fit)) / sqrt(p)
}
