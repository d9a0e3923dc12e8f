use alloc::vec::Vec;

use crate::model::{Knob, ScenarioParams};

/// Dense real symmetric matrix over the manifold basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl ManifoldMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: alloc::vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.data[i * self.dim + i] += v;
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `<a| M |b>`.
    pub fn sandwich(&self, a: &[f64], b: &[f64]) -> f64 {
        let mb = self.apply(b);
        a.iter().zip(&mb).map(|(x, y)| x * y).sum()
    }

    pub fn frobenius(&self) -> f64 {
        crate::math::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), dim);
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }
}

/// Hamiltonian of the closed system at the given atomic detunings (all other
/// values from `params`).
pub fn build_matrix(params: &ScenarioParams, detuning_s: f64, detuning_q: f64) -> ManifoldMatrix {
    let n = params.levels_s;
    let mut m = ManifoldMatrix::zeros(params.dim());
    fill_site_s(&mut m, params, detuning_s);
    let (pq, aq) = (params.photon_q_index(), params.atom_q_index());
    m.set_sym(0, pq, params.kappa_sq);
    m.set(pq, pq, params.cavity_detuning_q);
    m.set_sym(pq, aq, params.g_q);
    m.set(aq, aq, detuning_q);
    debug_assert_eq!(pq, n);
    m
}

fn fill_site_s(m: &mut ManifoldMatrix, params: &ScenarioParams, detuning_s: f64) {
    let n = params.levels_s;
    if n >= 2 {
        m.set_sym(0, 1, params.g_s);
    }
    for rung in 1..n {
        let shift = if rung >= 2 { params.ladder_detuning[rung - 2] } else { 0.0 };
        m.set(rung, rung, detuning_s + shift);
        if rung + 1 < n {
            m.set_sym(rung, rung + 1, params.ladder_rabi[rung - 1]);
        }
    }
}

/// Isolated storage site: photon plus ladder rungs, `levels_s` square.
pub fn site_s_block(params: &ScenarioParams, detuning_s: f64) -> ManifoldMatrix {
    let mut m = ManifoldMatrix::zeros(params.levels_s);
    fill_site_s(&mut m, params, detuning_s);
    m
}

/// Isolated switch site over `(photon q, atom q)`.
pub fn site_q_block(params: &ScenarioParams, detuning_q: f64) -> ManifoldMatrix {
    ManifoldMatrix::from_rows(&[&[params.cavity_detuning_q, params.g_q], &[params.g_q, detuning_q]])
}

/// `∂H/∂knob`: a diagonal projector on the tuned atomic levels.
pub fn knob_derivative(params: &ScenarioParams, knob: Knob) -> ManifoldMatrix {
    let mut m = ManifoldMatrix::zeros(params.dim());
    match knob {
        Knob::DetuningS => {
            for rung in 1..params.levels_s {
                m.set(rung, rung, 1.0);
            }
        }
        Knob::DetuningQ => m.set(params.atom_q_index(), params.atom_q_index(), 1.0),
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_layout() {
        let p = ScenarioParams::q_switch_reference();
        let m = build_matrix(&p, 0.0, -5.0);
        let expected = ManifoldMatrix::from_rows(&[
            &[0.0, 5.0, 1.0, 0.0],
            &[5.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 2.0, 20.0],
            &[0.0, 0.0, 20.0, -5.0],
        ]);
        assert_eq!(m, expected);
        assert_eq!(m.max_asymmetry(), 0.0);
    }

    #[test]
    fn all_zero_gives_zero_matrix() {
        let p = ScenarioParams {
            kappa_sq: 0.0,
            ..ScenarioParams::default()
        };
        let m = build_matrix(&p, 0.0, 0.0);
        assert_eq!(m.frobenius(), 0.0);
    }

    #[test]
    fn three_level_storage_block() {
        let p = ScenarioParams::three_level_reference();
        let ds = 2.5;
        let m = build_matrix(&p, ds, p.detuning_q);
        let rows = [[0.0, 1.0, 0.0], [1.0, ds, 4.94], [0.0, 4.94, ds]];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(m.get(i, j), v);
            }
        }
        // only the first rung talks to the photon
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(0, 3), 1.0);
    }

    #[test]
    fn ladder_detunings_shift_upper_rungs() {
        let mut p = ScenarioParams::four_level_reference();
        p.ladder_detuning = alloc::vec![0.5, -1.0];
        let m = build_matrix(&p, 1.0, 0.0);
        assert_eq!(m.get(1, 1), 1.0);
        assert_eq!(m.get(2, 2), 1.5);
        assert_eq!(m.get(3, 3), 0.0);
        assert_eq!(m.get(2, 3), 5.0);
    }
}
