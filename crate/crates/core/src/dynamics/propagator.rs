use alloc::vec::Vec;

use super::DynamicsError;
use crate::model::ScenarioParams;
use crate::spectra::build_matrix;
use crate::C64;

/// Undriven evolution at fixed detunings, advanced by powers of the RK4 step
/// matrix `R(hA) = 1 + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24` with `A = -i H_eff`.
///
/// Each `advance` equals `stride` RK4 steps of size `dt` up to rounding, at the
/// cost of one matrix-vector product.
#[derive(Debug, Clone)]
pub struct StaticPropagator {
    dim: usize,
    stride_matrix: Vec<C64>,
    interval: f64,
}

impl StaticPropagator {
    pub fn new(
        params: &ScenarioParams,
        detuning_s: f64,
        detuning_q: f64,
        dt: f64,
        stride: u32,
    ) -> Result<Self, DynamicsError> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) || stride == 0 {
            return Err(DynamicsError::InvalidIntegrator("dt and stride must be positive"));
        }
        let d = params.dim();
        let h = build_matrix(params, detuning_s, detuning_q);
        let mut a = alloc::vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = C64::new(0.0, -h.get(i, j) * dt);
            }
        }
        let n = params.levels_s;
        let mut damp = |i: usize, rate: f64| a[i * d + i] -= C64::new(0.5 * rate * dt, 0.0);
        damp(0, params.kappa_s);
        for r in 1..n {
            damp(r, params.gamma_s);
        }
        damp(n, params.kappa_q + params.kappa_wq);
        damp(n + 1, params.gamma_q);

        let mut step = identity(d);
        let mut term = identity(d);
        for k in 1..=4 {
            term = matmul(&term, &a, d);
            let inv = 1.0 / (1..=k).product::<u32>() as f64;
            for (s, t) in step.iter_mut().zip(&term) {
                *s += t * inv;
            }
        }
        let mut result = identity(d);
        let mut base = step;
        let mut e = stride;
        while e > 0 {
            if e & 1 == 1 {
                result = matmul(&result, &base, d);
            }
            base = matmul(&base, &base, d);
            e >>= 1;
        }
        Ok(Self {
            dim: d,
            stride_matrix: result,
            interval: dt * stride as f64,
        })
    }

    /// Time covered by one `advance`.
    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn advance(&self, y: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for i in 0..d {
            let row = &self.stride_matrix[i * d..(i + 1) * d];
            out[i] = row.iter().zip(y).map(|(m, v)| m * v).sum();
        }
    }
}

fn identity(d: usize) -> Vec<C64> {
    let mut m = alloc::vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        m[i * d + i] = C64::new(1.0, 0.0);
    }
    m
}

fn matmul(a: &[C64], b: &[C64], d: usize) -> Vec<C64> {
    let mut c = alloc::vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                c[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    c
}
