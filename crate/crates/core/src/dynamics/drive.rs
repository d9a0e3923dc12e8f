use alloc::vec::Vec;

use crate::math::{cos, exp, sin, sqrt, PI};
use crate::C64;

/// Waveguide input field `f_in(t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DriveField {
    #[default]
    Zero,
    /// `|f|^2` is a normal density of standard deviation `width` scaled to
    /// `|amplitude|^2`; the carrier rotates as `exp(-i detuning t)`.
    Gaussian {
        amplitude: C64,
        center: f64,
        width: f64,
        detuning: f64,
    },
    /// Samples interpolated linearly in magnitude and phase, zero outside
    /// the table.
    Table { times: Vec<f64>, values: Vec<C64> },
}

impl DriveField {
    pub fn value(&self, t: f64) -> C64 {
        match self {
            Self::Zero => C64::new(0.0, 0.0),
            Self::Gaussian {
                amplitude,
                center,
                width,
                detuning,
            } => {
                let norm = 1.0 / sqrt(sqrt(2.0 * PI) * width);
                let x = (t - center) / width;
                let env = norm * exp(-0.25 * x * x);
                let phase = -detuning * t;
                amplitude * C64::new(env * cos(phase), env * sin(phase))
            }
            Self::Table { times, values } => {
                if times.is_empty() || t < times[0] || t > times[times.len() - 1] {
                    return C64::new(0.0, 0.0);
                }
                let k = times.partition_point(|&v| v <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[k - 1], times[k]);
                if t1 == t0 {
                    return values[k];
                }
                let w = (t - t0) / (t1 - t0);
                let (a, b) = (values[k - 1], values[k]);
                if a.norm_sqr() == 0.0 || b.norm_sqr() == 0.0 {
                    return a * (1.0 - w) + b * w;
                }
                // Polar interpolation keeps |f|^2 when the carrier turns
                // noticeably between samples.
                let r = a.norm() * (1.0 - w) + b.norm() * w;
                let mut dphi = b.arg() - a.arg();
                if dphi > PI {
                    dphi -= 2.0 * PI;
                } else if dphi < -PI {
                    dphi += 2.0 * PI;
                }
                C64::from_polar(r, a.arg() + w * dphi)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Gaussian { amplitude, .. } => amplitude.norm_sqr() == 0.0,
            Self::Table { values, .. } => values.iter().all(|v| v.norm_sqr() == 0.0),
        }
    }

    /// Table drive from separate real and imaginary columns.
    pub fn from_samples(times: &[f64], re: &[f64], im: &[f64]) -> Self {
        let values = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        Self::Table {
            times: times.to_vec(),
            values,
        }
    }

    /// `|f|^2` integrated over a uniform grid; used in tests and diagnostics.
    pub fn energy(&self, t0: f64, t1: f64, n: usize) -> f64 {
        let ts: Vec<f64> = (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| self.value(t).norm_sqr()).collect();
        crate::math::trapezoid(&ts, &ys)
    }
}
