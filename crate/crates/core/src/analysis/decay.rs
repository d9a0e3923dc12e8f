use super::AnalysisError;
use crate::math::ln;

/// Samples with `lower <= y <= upper` enter the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayWindow {
    pub lower: f64,
    pub upper: f64,
}

impl Default for DecayWindow {
    fn default() -> Self {
        Self {
            lower: 0.05,
            upper: 0.95,
        }
    }
}

/// Least-squares slope of `-ln y` against `t` over the window.
pub fn fit_exponential_rate(t: &[f64], y: &[f64], window: DecayWindow) -> Result<f64, AnalysisError> {
    if t.len() != y.len() {
        return Err(AnalysisError::LengthMismatch);
    }
    if !y.iter().any(|&v| v < window.upper) {
        return Err(AnalysisError::InsufficientDecay);
    }
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0usize, 0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        if yi >= window.lower && yi <= window.upper && yi > 0.0 {
            let z = -ln(yi);
            n += 1;
            sx += ti;
            sy += z;
            sxx += ti * ti;
            sxy += ti * z;
        }
    }
    if n < 10 {
        return Err(AnalysisError::TooFewPoints { found: n });
    }
    let nf = n as f64;
    let denom = nf * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(AnalysisError::TooFewPoints { found: n });
    }
    Ok((nf * sxy - sx * sy) / denom)
}
