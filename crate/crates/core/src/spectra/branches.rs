use alloc::vec::Vec;

use super::{build_matrix, eigensystem, SpectraError};
use crate::math::golden_min;
use crate::model::{Knob, ScenarioParams};

/// One continued eigenbranch sampled on the table grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl Branch {
    /// `|<state | branch>|^2` at every grid point.
    pub fn overlap_curve(&self, state: &[f64]) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| {
                let d: f64 = v.iter().zip(state).map(|(a, b)| a * b).sum();
                d * d
            })
            .collect()
    }

    pub fn weight_curve(&self, basis_index: usize) -> Vec<f64> {
        self.vectors.iter().map(|v| v[basis_index] * v[basis_index]).collect()
    }
}

/// Eigenbranches continued by maximum overlap along a detuning grid. Branch `k`
/// is the `k`-th lowest eigenvalue at the first grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTable {
    pub knob: Knob,
    pub grid: Vec<f64>,
    pub branches: Vec<Branch>,
}

impl BranchTable {
    pub fn grid_index_nearest(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, g) in self.grid.iter().enumerate() {
            if (g - x).abs() < (self.grid[best] - x).abs() {
                best = i;
            }
        }
        best
    }

    /// Branch whose energy at the grid point nearest `x` is closest to `energy`.
    pub fn branch_near(&self, x: f64, energy: f64) -> usize {
        let i = self.grid_index_nearest(x);
        let mut best = 0;
        for (b, br) in self.branches.iter().enumerate() {
            if (br.energies[i] - energy).abs() < (self.branches[best].energies[i] - energy).abs() {
                best = b;
            }
        }
        best
    }

    /// Grid location and size of the smallest gap between two branches.
    pub fn min_gap(&self, a: usize, b: usize) -> (f64, f64) {
        let ea = &self.branches[a].energies;
        let eb = &self.branches[b].energies;
        let mut best = (self.grid[0], (ea[0] - eb[0]).abs());
        for i in 1..self.grid.len() {
            let g = (ea[i] - eb[i]).abs();
            if g < best.1 {
                best = (self.grid[i], g);
            }
        }
        best
    }
}

pub fn track_branches(params: &ScenarioParams, knob: Knob, grid: &[f64]) -> Result<BranchTable, SpectraError> {
    params.validate()?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SpectraError::InvalidGrid);
    }
    let d = params.dim();
    let mut branches: Vec<Branch> = (0..d)
        .map(|_| Branch {
            energies: Vec::with_capacity(grid.len()),
            vectors: Vec::with_capacity(grid.len()),
        })
        .collect();
    let mut prev: Option<Vec<Vec<f64>>> = None;
    for (index, &x) in grid.iter().enumerate() {
        let (ds, dq) = knob.apply(params, x);
        let es = eigensystem(&build_matrix(params, ds, dq))?;
        let assign: Vec<usize> = match &prev {
            None => (0..d).collect(),
            Some(pv) => continue_branches(pv, &es.vectors).ok_or(SpectraError::GridTooCoarse { index })?,
        };
        for (b, &k) in assign.iter().enumerate() {
            branches[b].energies.push(es.values[k]);
            branches[b].vectors.push(es.vectors[k].clone());
        }
        prev = Some(branches.iter().map(|br| br.vectors.last().unwrap().clone()).collect());
    }
    Ok(BranchTable {
        knob,
        grid: grid.to_vec(),
        branches,
    })
}

/// For each previous vector, the index of the new vector it overlaps most.
/// `None` if any best overlap is below one half or two branches claim the same
/// successor.
fn continue_branches(prev: &[Vec<f64>], next: &[Vec<f64>]) -> Option<Vec<usize>> {
    let d = prev.len();
    let mut taken = alloc::vec![false; d];
    let mut out = Vec::with_capacity(d);
    for p in prev {
        let mut best = (0, -1.0);
        for (k, n) in next.iter().enumerate() {
            let o: f64 = p.iter().zip(n).map(|(a, b)| a * b).sum::<f64>().abs();
            if o > best.1 {
                best = (k, o);
            }
        }
        if best.1 < 0.5 || taken[best.0] {
            return None;
        }
        taken[best.0] = true;
        out.push(best.0);
    }
    Some(out)
}

/// Minimum of the gap between the `lower`-th and `lower + 1`-th lowest
/// eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anticrossing {
    pub position: f64,
    pub gap: f64,
    pub lower_energy: f64,
    pub upper_energy: f64,
}

/// Locates an avoided crossing on `[lo, hi]` by a coarse scan followed by
/// golden-section refinement.
pub fn find_anticrossing(
    params: &ScenarioParams,
    knob: Knob,
    lower: usize,
    lo: f64,
    hi: f64,
) -> Result<Anticrossing, SpectraError> {
    params.validate()?;
    if !(hi > lo) || lower + 1 >= params.dim() {
        return Err(SpectraError::InvalidGrid);
    }
    let pair = |x: f64| -> Result<(f64, f64), SpectraError> {
        let (ds, dq) = knob.apply(params, x);
        let es = eigensystem(&build_matrix(params, ds, dq))?;
        Ok((es.values[lower], es.values[lower + 1]))
    };
    const COARSE: usize = 200;
    let step = (hi - lo) / COARSE as f64;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=COARSE {
        let x = lo + step * i as f64;
        let (a, b) = pair(x)?;
        if b - a < best.1 {
            best = (x, b - a);
        }
    }
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    let (position, _) = golden_min(a, b, 1e-10 * (1.0 + b.abs()), |x| match pair(x) {
        Ok((l, u)) => u - l,
        Err(_) => f64::INFINITY,
    });
    let (lower_energy, upper_energy) = pair(position)?;
    Ok(Anticrossing {
        position,
        gap: upper_energy - lower_energy,
        lower_energy,
        upper_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn uncoupled_branches_are_straight_lines() {
        let p = ScenarioParams::two_level(0.0, 0.0, 3.0);
        let grid = linspace(-10.0, 10.0, 41);
        let t = track_branches(&p, Knob::DetuningQ, &grid).unwrap();
        // the bare switch atom starts lowest and keeps following the knob; the
        // rest do not move
        let aq = &t.branches[0];
        for (e, x) in aq.energies.iter().zip(&grid) {
            assert!((e - x).abs() < 1e-12);
        }
        assert!(aq.weight_curve(p.atom_q_index()).iter().all(|&w| (w - 1.0).abs() < 1e-12));
        for br in &t.branches[1..] {
            assert!(br.energies.iter().all(|e| (e - br.energies[0]).abs() < 1e-12));
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let p = ScenarioParams::q_switch_reference();
        assert_eq!(track_branches(&p, Knob::DetuningQ, &[1.0]), Err(SpectraError::InvalidGrid));
        assert_eq!(
            track_branches(&p, Knob::DetuningQ, &[1.0, 1.0]),
            Err(SpectraError::InvalidGrid)
        );
    }

    #[test]
    fn coarse_grid_is_detected() {
        let p = ScenarioParams::q_switch_reference();
        let r = track_branches(&p, Knob::DetuningQ, &[-20.0, 70.0]);
        assert!(matches!(r, Err(SpectraError::GridTooCoarse { .. })));
    }

    #[test]
    fn orthonormal_and_max_overlap() {
        let p = ScenarioParams::q_switch_reference();
        let grid = linspace(-20.0, 70.0, 400);
        let t = track_branches(&p, Knob::DetuningQ, &grid).unwrap();
        let d = p.dim();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        for k in 0..grid.len() {
            for a in 0..d {
                for b in 0..d {
                    let want = if a == b { 1.0 } else { 0.0 };
                    let o = dot(&t.branches[a].vectors[k], &t.branches[b].vectors[k]);
                    assert!((o - want).abs() < 1e-10);
                }
            }
            if k + 1 < grid.len() {
                for a in 0..d {
                    let own = dot(&t.branches[a].vectors[k], &t.branches[a].vectors[k + 1]).abs();
                    for b in 0..d {
                        let other = dot(&t.branches[a].vectors[k], &t.branches[b].vectors[k + 1]).abs();
                        assert!(own >= other);
                    }
                }
            }
        }
    }
}
