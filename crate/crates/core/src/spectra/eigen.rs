use alloc::vec::Vec;

use super::{ManifoldMatrix, SpectraError};
use crate::math::sqrt;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order; `vectors[k]` belongs to `values[k]`.
///
/// Each vector is unit length with its largest-magnitude component positive
/// (the first such component on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `|<basis_index | vector k>|^2`.
    pub fn weight(&self, k: usize, basis_index: usize) -> f64 {
        let c = self.vectors[k][basis_index];
        c * c
    }
}

/// Cyclic Jacobi diagonalization of a real symmetric matrix.
pub fn eigensystem(m: &ManifoldMatrix) -> Result<Eigensystem, SpectraError> {
    let n = m.dim();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(SpectraError::NoConvergence);
    }
    let scale = m.frobenius();
    let tol = 1e-13 * scale;
    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = sqrt(
            (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum(),
        );
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    if !converged {
        return Err(SpectraError::NoConvergence);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i][k]).collect();
            fix_phase(&mut col);
            col
        })
        .collect();
    Ok(Eigensystem { values, vectors })
}

fn fix_phase(x: &mut [f64]) {
    let mut best = 0;
    for (i, c) in x.iter().enumerate() {
        if c.abs() > x[best].abs() + 1e-12 {
            best = i;
        }
    }
    if x[best] < 0.0 {
        x.iter_mut().for_each(|c| *c = -*c);
    }
}
