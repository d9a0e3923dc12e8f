use alloc::vec::Vec;

use crate::C64;

/// Cumulative probability lost to each incoherent channel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DissipationLedger {
    pub kappa_s: f64,
    pub kappa_q: f64,
    pub gamma_s: f64,
    pub gamma_q: f64,
}

impl DissipationLedger {
    pub fn total(&self) -> f64 {
        self.kappa_s + self.kappa_q + self.gamma_s + self.gamma_q
    }
}

/// Sampled amplitude vectors plus the probability ledger.
///
/// `norm² + emitted + dissipated.total() - injected` is conserved up to
/// integrator error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    /// One vector per sample, in [`basis`](crate::model::basis) order.
    pub amplitudes: Vec<Vec<C64>>,
    /// Cumulative `∫|f_out|² dt`.
    pub emitted: Vec<f64>,
    pub dissipated: Vec<DissipationLedger>,
    /// Cumulative `∫|f_in|² dt`.
    pub injected: Vec<f64>,
}

impl AmplitudeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norm_sqr(&self, k: usize) -> f64 {
        self.amplitudes[k].iter().map(|a| a.norm_sqr()).sum()
    }

    /// `norm² + emitted + dissipated - injected` at sample `k`.
    pub fn ledger_total(&self, k: usize) -> f64 {
        self.norm_sqr(k) + self.emitted[k] + self.dissipated[k].total() - self.injected[k]
    }

    pub fn last_amplitudes(&self) -> &[C64] {
        self.amplitudes.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Population of one basis index over time.
    pub fn population(&self, index: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a[index].norm_sqr()).collect()
    }
}

/// Waveguide input and output fields on the trajectory's time grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputRecord {
    pub times: Vec<f64>,
    pub f_in: Vec<C64>,
    pub f_out: Vec<C64>,
}

impl OutputRecord {
    pub fn intensity(&self) -> Vec<f64> {
        self.f_out.iter().map(|f| f.norm_sqr()).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples with `t` in `[t0, t1]`.
    pub fn window(&self, t0: f64, t1: f64) -> OutputRecord {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| self.times[k] >= t0 && self.times[k] <= t1).collect();
        OutputRecord {
            times: keep.iter().map(|&k| self.times[k]).collect(),
            f_in: keep.iter().map(|&k| self.f_in[k]).collect(),
            f_out: keep.iter().map(|&k| self.f_out[k]).collect(),
        }
    }
}
