use alloc::vec::Vec;

use super::DriveField;
use crate::math::sqrt;
use crate::model::{ScenarioParams, SweepProfile};
use crate::C64;

/// Number of real accumulators appended to the amplitudes during integration:
/// emitted, four dissipation channels, injected.
pub(crate) const LEDGER_SLOTS: usize = 6;

/// Precomputed right-hand side of the amplitude equations.
pub(crate) struct System<'a> {
    p: &'a ScenarioParams,
    sweep: &'a SweepProfile,
    drive: &'a DriveField,
    sqrt_kwq: f64,
    rung_shift: Vec<f64>,
}

impl<'a> System<'a> {
    pub(crate) fn new(p: &'a ScenarioParams, sweep: &'a SweepProfile, drive: &'a DriveField) -> Self {
        let rung_shift = (1..p.levels_s)
            .map(|r| if r >= 2 { p.ladder_detuning[r - 2] } else { 0.0 })
            .collect();
        Self {
            p,
            sweep,
            drive,
            sqrt_kwq: sqrt(p.kappa_wq),
            rung_shift,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.p.dim()
    }

    /// `(f_in, f_out)` for the given amplitudes.
    pub(crate) fn fields(&self, t: f64, y: &[C64]) -> (C64, C64) {
        let f_in = self.drive.value(t);
        (f_in, f_in + y[self.p.photon_q_index()] * self.sqrt_kwq)
    }

    /// Amplitude derivatives into `dy[..dim]`; returns `f_in(t)`.
    pub(crate) fn amplitudes(&self, t: f64, y: &[C64], dy: &mut [C64]) -> C64 {
        let p = self.p;
        let n = p.levels_s;
        let (cq, aq) = (n, n + 1);
        let (ds, dq) = self.sweep.knob().apply(p, self.sweep.value(t));
        let mi = C64::new(0.0, -1.0);
        dy[0] = y[0] * (-0.5 * p.kappa_s) + mi * (y[cq] * p.kappa_sq + y[1] * p.g_s);
        for r in 1..n {
            let det = ds + self.rung_shift[r - 1];
            let below = if r == 1 { y[0] * p.g_s } else { y[r - 1] * p.ladder_rabi[r - 2] };
            let above = if r + 1 < n { y[r + 1] * p.ladder_rabi[r - 1] } else { C64::new(0.0, 0.0) };
            dy[r] = y[r] * C64::new(-0.5 * p.gamma_s, -det) + mi * (below + above);
        }
        let f_in = self.drive.value(t);
        dy[cq] = y[cq] * C64::new(-0.5 * (p.kappa_q + p.kappa_wq), -p.cavity_detuning_q)
            + mi * (y[0] * p.kappa_sq + y[aq] * p.g_q)
            - f_in * self.sqrt_kwq;
        dy[aq] = y[aq] * C64::new(-0.5 * p.gamma_q, -dq) + mi * (y[cq] * p.g_q);
        f_in
    }

    /// Derivative of the augmented state (amplitudes then ledger slots).
    pub(crate) fn augmented(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let p = self.p;
        let d = self.dim();
        let n = p.levels_s;
        let f_in = self.amplitudes(t, y, dy);
        let f_out = f_in + y[n] * self.sqrt_kwq;
        let rungs: f64 = y[1..n].iter().map(|a| a.norm_sqr()).sum();
        let slots = [
            f_out.norm_sqr(),
            p.kappa_s * y[0].norm_sqr(),
            p.kappa_q * y[n].norm_sqr(),
            p.gamma_s * rungs,
            p.gamma_q * y[n + 1].norm_sqr(),
            f_in.norm_sqr(),
        ];
        for (k, v) in slots.into_iter().enumerate() {
            dy[d + k] = C64::new(v, 0.0);
        }
    }
}

/// Time derivative of the manifold amplitudes at `t`, with the swept knob read
/// from `sweep` at `t`.
pub fn derivative(
    t: f64,
    amplitudes: &[C64],
    params: &ScenarioParams,
    sweep: &SweepProfile,
    drive: &DriveField,
) -> Vec<C64> {
    let sys = System::new(params, sweep, drive);
    let mut dy = alloc::vec![C64::new(0.0, 0.0); sys.dim()];
    sys.amplitudes(t, amplitudes, &mut dy);
    dy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::build_matrix;
    use crate::Knob;

    fn state(d: usize, seed: u64) -> Vec<C64> {
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..d).map(|_| C64::new(next(), next())).collect()
    }

    #[test]
    fn zero_parameters_give_zero_derivative() {
        let p = ScenarioParams::two_level(0.0, 0.0, 0.0);
        let mut p = p;
        p.kappa_sq = 0.0;
        let s = SweepProfile::constant(Knob::DetuningQ, 0.0);
        let dy = derivative(0.3, &state(4, 1), &p, &s, &DriveField::Zero);
        assert!(dy.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn lossless_derivative_is_minus_i_h() {
        for p in [
            ScenarioParams::q_switch_reference(),
            ScenarioParams::three_level_reference(),
            ScenarioParams::four_level_reference(),
        ] {
            let s = SweepProfile::linear(Knob::DetuningS, 10.0, -12.0, 4.0);
            let t = 3.7;
            let y = state(p.dim(), 7);
            let dy = derivative(t, &y, &p, &s, &DriveField::Zero);
            let h = build_matrix(&p, s.value(t), p.detuning_q);
            for i in 0..p.dim() {
                let mut hy = C64::new(0.0, 0.0);
                for j in 0..p.dim() {
                    hy += y[j] * h.get(i, j);
                }
                assert!((dy[i] - C64::new(0.0, -1.0) * hy).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn norm_rate_is_out_coupling() {
        let p = ScenarioParams::q_switch_reference().with_kappa_wq(5.0);
        let s = SweepProfile::constant(Knob::DetuningQ, 30.0);
        let y = state(4, 3);
        let dy = derivative(0.0, &y, &p, &s, &DriveField::Zero);
        let rate: f64 = y.iter().zip(&dy).map(|(a, b)| 2.0 * (a.conj() * b).re).sum();
        assert!((rate + 5.0 * y[2].norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn drive_enters_switch_cavity_only() {
        let p = ScenarioParams::q_switch_reference().with_kappa_wq(4.0);
        let s = SweepProfile::constant(Knob::DetuningQ, 30.0);
        let y = alloc::vec![C64::new(0.0, 0.0); 4];
        let drive = DriveField::from_samples(&[0.0, 1.0], &[1.0, 1.0], &[0.0, 0.0]);
        let dy = derivative(0.5, &y, &p, &s, &drive);
        assert_eq!(dy[2], C64::new(-2.0, 0.0));
        assert_eq!(dy[0], C64::new(0.0, 0.0));
        assert_eq!(dy[3], C64::new(0.0, 0.0));
    }
}
