use super::{eigensystem, site_q_block, site_s_block, Eigensystem, SpectraError};
use crate::math::{acos, atan2, bisect, cos, hypot, sqrt, PI};
use crate::model::ScenarioParams;

/// Lower dressed energy of a two-level storage site, `E_{-s}`.
pub fn dressed_energy_minus_s(g_s: f64, detuning_s: f64) -> f64 {
    0.5 * (detuning_s - hypot(detuning_s, 2.0 * g_s))
}

/// `(photon, atom)` amplitudes of the lower storage dressed state.
fn minus_s_vector(g_s: f64, detuning_s: f64) -> (f64, f64) {
    let e = dressed_energy_minus_s(g_s, detuning_s);
    let n = hypot(g_s, e);
    if n == 0.0 {
        // g_s = 0 and Delta_s >= 0: the bare photon is the lower level
        return (1.0, 0.0);
    }
    (g_s / n, e / n)
}

fn require_levels(params: &ScenarioParams, n: usize, what: &'static str) -> Result<(), SpectraError> {
    params.validate()?;
    if params.levels_s != n {
        return Err(SpectraError::Unsupported(what));
    }
    Ok(())
}

/// Switch detuning that puts the bare switch atom at the storage dressed
/// energy, where the switch-cavity photon amplitude of the stored state vanishes.
pub fn off_detuning_two_level(params: &ScenarioParams) -> Result<f64, SpectraError> {
    require_levels(params, 2, "off detuning closed form needs a two-level storage atom")?;
    Ok(dressed_energy_minus_s(params.g_s, params.detuning_s))
}

/// Switch detuning that brings the lower switch dressed state onto `E_{-s}`.
pub fn res_detuning_two_level(params: &ScenarioParams) -> Result<f64, SpectraError> {
    require_levels(params, 2, "resonance closed form needs a two-level storage atom")?;
    let e = dressed_energy_minus_s(params.g_s, params.detuning_s);
    let denom = params.cavity_detuning_q - e;
    if denom.abs() < 1e-9 {
        return Err(SpectraError::DegenerateDenominator);
    }
    Ok(e + params.g_q * params.g_q / denom)
}

/// Numerical off point: the switch detuning in `[lo, hi]` where the
/// eigenstate closest to `|-s>` has the smallest switch-cavity photon weight.
pub fn refine_off_detuning(params: &ScenarioParams, lo: f64, hi: f64) -> Result<f64, SpectraError> {
    require_levels(params, 2, "off detuning refinement needs a two-level storage atom")?;
    let (a, b) = minus_s_vector(params.g_s, params.detuning_s);
    let pq = params.photon_q_index();
    let score = |dq: f64| -> f64 {
        let m = super::build_matrix(params, params.detuning_s, dq);
        let Ok(es) = eigensystem(&m) else {
            return f64::INFINITY;
        };
        let mut best = (0, -1.0);
        for (k, v) in es.vectors.iter().enumerate() {
            let o = (a * v[0] + b * v[1]).abs();
            if o > best.1 {
                best = (k, o);
            }
        }
        es.weight(best.0, pq)
    };
    const COARSE: usize = 400;
    let step = (hi - lo) / COARSE as f64;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=COARSE {
        let x = lo + step * i as f64;
        let s = score(x);
        if s < best.1 {
            best = (x, s);
        }
    }
    let (x, _) = crate::math::golden_min((best.0 - step).max(lo), (best.0 + step).min(hi), 1e-10, score);
    Ok(x)
}

/// `Theta = atan2(2 g_q, Delta_q - delta_q) / 2`, in `[0, pi/2]`.
pub fn mixing_angle(g_q: f64, detuning_q: f64, cavity_detuning_q: f64) -> f64 {
    0.5 * atan2(2.0 * g_q, detuning_q - cavity_detuning_q)
}

/// Switch-site dressed branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QBranch {
    Minus,
    Plus,
}

/// Dressed states of the isolated switch site. On `(photon q, atom q)`,
/// `|+q> = (sin Theta, cos Theta)` and `|-q> = (cos Theta, -sin Theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteQDressed {
    pub minus: f64,
    pub plus: f64,
    pub theta: f64,
}

impl SiteQDressed {
    pub fn energy(&self, branch: QBranch) -> f64 {
        match branch {
            QBranch::Minus => self.minus,
            QBranch::Plus => self.plus,
        }
    }

    /// `<1_q | branch>`.
    pub fn photon_amplitude(&self, branch: QBranch) -> f64 {
        match branch {
            QBranch::Minus => crate::math::cos(self.theta),
            QBranch::Plus => crate::math::sin(self.theta),
        }
    }

    /// `(photon, atom)` amplitudes.
    pub fn vector(&self, branch: QBranch) -> (f64, f64) {
        let (s, c) = (crate::math::sin(self.theta), crate::math::cos(self.theta));
        match branch {
            QBranch::Minus => (c, -s),
            QBranch::Plus => (s, c),
        }
    }
}

pub fn site_q_dressed(params: &ScenarioParams, detuning_q: f64) -> SiteQDressed {
    let mean = 0.5 * (params.cavity_detuning_q + detuning_q);
    let r = hypot(0.5 * (detuning_q - params.cavity_detuning_q), params.g_q);
    SiteQDressed {
        minus: mean - r,
        plus: mean + r,
        theta: mixing_angle(params.g_q, detuning_q, params.cavity_detuning_q),
    }
}

/// Hopping element between `|-s>` and a switch dressed state,
/// `kappa_sq <1_s|-s> <1_q|branch>`, non-negative.
pub fn coupling_element_j(params: &ScenarioParams, detuning_q: f64, branch: QBranch) -> Result<f64, SpectraError> {
    require_levels(params, 2, "J is defined for a two-level storage atom")?;
    let (a, _) = minus_s_vector(params.g_s, params.detuning_s);
    let q = site_q_dressed(params, detuning_q);
    Ok(params.kappa_sq * (a * q.photon_amplitude(branch)).abs())
}

/// `kappa_sq |<branch| a_q^dag a_s |psi_s>|` with the switch vector taken from a
/// direct diagonalization. `psi_s` lives on the storage site block.
pub fn hopping_element(
    params: &ScenarioParams,
    psi_s: &[f64],
    detuning_q: f64,
    branch: QBranch,
) -> Result<f64, SpectraError> {
    let es = eigensystem(&site_q_block(params, detuning_q))?;
    let k = match branch {
        QBranch::Minus => 0,
        QBranch::Plus => 1,
    };
    Ok(params.kappa_sq * (psi_s[0] * es.vectors[k][0]).abs())
}

/// Isolated three-level storage energies, ascending. `u` and `v` are the two
/// branches that are atom-like for `Delta_s -> -inf`; `third` is photon-like
/// there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelEnergies {
    pub u: f64,
    pub v: f64,
    pub third: f64,
}

/// Trigonometric solution of the storage-site cubic
/// `E^3 - 2 D E^2 + (D^2 - W^2 - g^2) E + g^2 D = 0`.
pub fn dressed_energies_three_level(g_s: f64, rabi: f64, detuning_s: f64) -> ThreeLevelEnergies {
    let d = detuning_s;
    let p = sqrt(d * d + 3.0 * (g_s * g_s + rabi * rabi));
    if p == 0.0 {
        return ThreeLevelEnergies { u: 0.0, v: 0.0, third: 0.0 };
    }
    let c = -(d / (p * p * p)) * (d * d + 9.0 * (0.5 * g_s * g_s - rabi * rabi));
    let theta = acos(c.clamp(-1.0, 1.0));
    let mut e = [0.0; 3];
    for (k, slot) in e.iter_mut().enumerate() {
        *slot = (2.0 * d + 2.0 * p * cos(theta / 3.0 + 2.0 * PI * k as f64 / 3.0)) / 3.0;
    }
    e.sort_by(f64::total_cmp);
    ThreeLevelEnergies {
        u: e[0],
        v: e[1],
        third: e[2],
    }
}

pub fn site_s_eigensystem(params: &ScenarioParams, detuning_s: f64) -> Result<Eigensystem, SpectraError> {
    eigensystem(&site_s_block(params, detuning_s))
}

fn check_branch(params: &ScenarioParams, branch: usize) -> Result<(), SpectraError> {
    params.validate()?;
    if branch == 0 || branch >= params.levels_s {
        return Err(SpectraError::Unsupported("storage branch index must lie in 1..levels_s"));
    }
    Ok(())
}

/// Energy of storage branch `branch` (1-based, the `branch`-th lowest level
/// of the isolated storage site).
pub fn site_s_branch_energy(params: &ScenarioParams, detuning_s: f64, branch: usize) -> Result<f64, SpectraError> {
    check_branch(params, branch)?;
    Ok(site_s_eigensystem(params, detuning_s)?.values[branch - 1])
}

pub fn site_s_branch_vector(
    params: &ScenarioParams,
    detuning_s: f64,
    branch: usize,
) -> Result<alloc::vec::Vec<f64>, SpectraError> {
    check_branch(params, branch)?;
    Ok(site_s_eigensystem(params, detuning_s)?.vectors.swap_remove(branch - 1))
}

/// Storage detunings where one ladder branch meets the switch dressed state
/// (`resonance`) or the bare switch atom (`off`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderPoints {
    pub branch: usize,
    pub resonance: f64,
    pub off: f64,
}

pub fn ladder_points(params: &ScenarioParams, branch: usize, q_branch: QBranch) -> Result<LadderPoints, SpectraError> {
    check_branch(params, branch)?;
    let target_res = site_q_dressed(params, params.detuning_q).energy(q_branch);
    let target_off = params.detuning_q;
    Ok(LadderPoints {
        branch,
        resonance: solve_branch_energy(params, branch, target_res)?,
        off: solve_branch_energy(params, branch, target_off)?,
    })
}

/// Each storage eigenvalue is nondecreasing in `Delta_s`, so a widening
/// symmetric scan brackets the unique root when one exists.
fn solve_branch_energy(params: &ScenarioParams, branch: usize, target: f64) -> Result<f64, SpectraError> {
    let f = |ds: f64| match site_s_eigensystem(params, ds) {
        Ok(es) => es.values[branch - 1] - target,
        Err(_) => f64::NAN,
    };
    let mut half = 10.0
        + target.abs()
        + params.g_s
        + params.ladder_rabi.iter().sum::<f64>()
        + params.ladder_detuning.iter().map(|d| d.abs()).sum::<f64>();
    for _ in 0..8 {
        let (lo, hi) = (-half, half);
        let (flo, fhi) = (f(lo), f(hi));
        if !flo.is_finite() || !fhi.is_finite() {
            return Err(SpectraError::NoConvergence);
        }
        if flo.signum() != fhi.signum() || flo == 0.0 || fhi == 0.0 {
            let root = bisect(lo, hi, f).ok_or(SpectraError::NoBracket)?;
            if f(root).abs() > 1e-9 {
                return Err(SpectraError::NoConvergence);
            }
            return Ok(root);
        }
        half *= 4.0;
    }
    Err(SpectraError::NoBracket)
}

/// Storage-to-switch hopping element of a three-level ladder branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JBeta {
    /// The closed form when it agrees with `direct`, otherwise `direct`.
    pub value: f64,
    /// `None` where the closed form is 0/0.
    pub closed_form: Option<f64>,
    pub direct: f64,
    pub formula_mismatch: bool,
}

pub fn coupling_element_j_beta(
    params: &ScenarioParams,
    detuning_s: f64,
    branch: usize,
    q_branch: QBranch,
) -> Result<JBeta, SpectraError> {
    require_levels(params, 3, "J_beta is defined for a three-level storage atom")?;
    check_branch(params, branch)?;
    if params.ladder_detuning[0] != 0.0 {
        return Err(SpectraError::Unsupported("J_beta closed form assumes zero ladder detuning"));
    }
    let (g, w, d) = (params.g_s, params.ladder_rabi[0], detuning_s);
    let three = dressed_energies_three_level(g, w, d);
    let e = if branch == 1 { three.u } else { three.v };
    let tail = e * e - e * d - g * g;
    let norm = sqrt(e * e * w * w + tail * tail + g * g * w * w);
    let q = site_q_dressed(params, params.detuning_q);
    let closed_form = (norm > 1e-300).then(|| params.kappa_sq * g * w * q.photon_amplitude(q_branch).abs() / norm);
    let psi = site_s_branch_vector(params, d, branch)?;
    let direct = hopping_element(params, &psi, params.detuning_q, q_branch)?;
    let agree = closed_form.is_some_and(|c| (c - direct).abs() <= 1e-6);
    if !agree {
        log::warn!("J_beta closed form {closed_form:?} disagrees with direct element {direct}");
    }
    Ok(JBeta {
        value: if agree { closed_form.unwrap() } else { direct },
        closed_form,
        direct,
        formula_mismatch: !agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SQRT_2;
    use crate::spectra::{build_matrix, find_anticrossing};
    use crate::Knob;
    use proptest::prelude::*;

    #[test]
    fn off_and_res_reference() {
        let p = ScenarioParams::q_switch_reference();
        assert_eq!(off_detuning_two_level(&p).unwrap(), -5.0);
        let res = res_detuning_two_level(&p).unwrap();
        assert!((res - (-5.0 + 400.0 / 7.0)).abs() < 1e-12);
        assert!((res - 52.142857).abs() < 1e-6);
        let zero = ScenarioParams::two_level(0.0, 20.0, 2.0);
        assert_eq!(off_detuning_two_level(&zero).unwrap(), 0.0);
        let no_q = ScenarioParams::two_level(5.0, 0.0, 2.0);
        assert_eq!(res_detuning_two_level(&no_q).unwrap(), -5.0);
        let degenerate = ScenarioParams::two_level(5.0, 20.0, -5.0);
        assert_eq!(res_detuning_two_level(&degenerate), Err(SpectraError::DegenerateDenominator));
    }

    #[test]
    fn off_detuning_matches_overlap_maximum() {
        let p = ScenarioParams::q_switch_reference();
        let x = refine_off_detuning(&p, -20.0, 20.0).unwrap();
        assert!((x + 5.0).abs() < 1e-3, "{x}");
    }

    #[test]
    fn anticrossing_near_resonance_closed_form() {
        let p = ScenarioParams::q_switch_reference();
        let res = res_detuning_two_level(&p).unwrap();
        let ac = find_anticrossing(&p, Knob::DetuningQ, 0, res - 5.0, res + 5.0).unwrap();
        assert!((ac.position - res).abs() < 0.5, "{ac:?}");
        let j = coupling_element_j(&p, ac.position, QBranch::Minus).unwrap();
        assert!((ac.gap - 2.0 * j).abs() < 0.05 * ac.gap, "{} vs {}", ac.gap, 2.0 * j);
    }

    #[test]
    fn site_q_reference_energy() {
        let p = ScenarioParams::q_switch_reference();
        let q = site_q_dressed(&p, 52.142857);
        assert!((q.minus + 5.0).abs() < 1e-5);
        assert!((q.plus - 59.142857).abs() < 1e-5);
        let ladder = ScenarioParams::three_level_reference();
        let plus = site_q_dressed(&ladder, ladder.detuning_q).plus;
        assert!((plus - (-11.8 + sqrt(3.2 * 3.2 + 100.0))).abs() < 1e-12);
        assert!((plus + 1.300476).abs() < 1e-6);
    }

    #[test]
    fn mixing_angle_limits() {
        assert!((mixing_angle(3.0, 2.0, 2.0) - PI / 4.0).abs() < 1e-15);
        assert!(mixing_angle(1.0, 1e9, 0.0) < 1e-8);
        assert!((mixing_angle(1.0, -1e9, 0.0) - PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn j_limits() {
        let p = ScenarioParams::q_switch_reference();
        let j = coupling_element_j(&p, p.cavity_detuning_q, QBranch::Plus).unwrap();
        assert!((j - 0.5).abs() < 1e-15);
        assert!(coupling_element_j(&p, 1e9, QBranch::Plus).unwrap() < 1e-7);
        let res = res_detuning_two_level(&p).unwrap();
        let theta = 0.5 * libm::atan(40.0 / (res - 2.0));
        let plus = coupling_element_j(&p, res, QBranch::Plus).unwrap();
        assert!((plus - libm::sin(theta) / SQRT_2).abs() < 1e-14);
        assert!((plus - 0.233).abs() < 1e-3);
    }

    #[test]
    fn dressed_vectors_match_direct_diagonalization() {
        let p = ScenarioParams::q_switch_reference();
        for dq in [-30.0, -5.0, 2.0, 10.0, 52.142857] {
            let es = eigensystem(&site_q_block(&p, dq)).unwrap();
            let q = site_q_dressed(&p, dq);
            assert!((es.values[0] - q.minus).abs() < 1e-12);
            assert!((es.values[1] - q.plus).abs() < 1e-12);
            for (k, b) in [(0, QBranch::Minus), (1, QBranch::Plus)] {
                let (c, a) = q.vector(b);
                let dot = c * es.vectors[k][0] + a * es.vectors[k][1];
                assert!((dot.abs() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn three_level_special_cases() {
        let e = dressed_energies_three_level(1.0, 4.94, 0.0);
        let r = sqrt(1.0 + 4.94 * 4.94);
        assert!((e.u + r).abs() < 1e-12 && e.v.abs() < 1e-12 && (e.third - r).abs() < 1e-12);
        let e = dressed_energies_three_level(1.0, 0.0, 2.0);
        assert!((e.u - (1.0 - SQRT_2)).abs() < 1e-12);
        assert!((e.v - 2.0).abs() < 1e-12);
        assert!((e.third - (1.0 + SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn ladder_points_reference() {
        let p = ScenarioParams::three_level_reference();
        let one = ladder_points(&p, 1, QBranch::Plus).unwrap();
        let two = ladder_points(&p, 2, QBranch::Plus).unwrap();
        assert!((one.resonance - 4.0389).abs() < 1e-3, "{one:?}");
        assert!((one.off + 3.6015).abs() < 1e-3);
        assert!((two.resonance + 5.8709).abs() < 1e-3, "{two:?}");
        assert!((two.off + 13.4822).abs() < 1e-3);
    }

    #[test]
    fn ladder_points_bare_limit() {
        let p = ScenarioParams::ladder(1e-9, 10.0, -15.0, -8.6, &[0.0]);
        let pts = ladder_points(&p, 1, QBranch::Plus).unwrap();
        assert!((pts.off + 8.6).abs() < 1e-6);
    }

    #[test]
    fn four_level_points_are_ordered() {
        let p = ScenarioParams::four_level_reference();
        let pts: alloc::vec::Vec<_> = (1..=3).map(|b| ladder_points(&p, b, QBranch::Plus).unwrap()).collect();
        let want = [(-1.4996, 5.9765), (-8.5419, -0.9171), (-15.6423, -8.1918)];
        for (pt, (off, res)) in pts.iter().zip(want) {
            assert!((pt.off - off).abs() < 1e-3 && (pt.resonance - res).abs() < 1e-3, "{pt:?}");
            assert!(pt.off < pt.resonance);
        }
    }

    #[test]
    fn unreachable_target_has_no_bracket() {
        let mut p = ScenarioParams::three_level_reference();
        p.detuning_q = 500.0;
        p.cavity_detuning_q = 500.0;
        assert_eq!(ladder_points(&p, 1, QBranch::Plus), Err(SpectraError::NoBracket));
    }

    #[test]
    fn j_beta_reference_values() {
        let p = ScenarioParams::three_level_reference();
        let ju = {
            let pts = ladder_points(&p, 1, QBranch::Plus).unwrap();
            coupling_element_j_beta(&p, pts.resonance, 1, QBranch::Plus).unwrap()
        };
        let jv = {
            let pts = ladder_points(&p, 2, QBranch::Plus).unwrap();
            coupling_element_j_beta(&p, pts.resonance, 2, QBranch::Plus).unwrap()
        };
        assert!(!ju.formula_mismatch && !jv.formula_mismatch);
        assert!((ju.value - 0.289).abs() < 2e-3, "{ju:?}");
        assert!((jv.value - 0.273).abs() < 2e-3, "{jv:?}");
        assert!((ju.value - jv.value).abs() < 0.1 * ju.value);
    }

    #[test]
    fn j_beta_vanishes_without_drive() {
        let p = ScenarioParams::ladder(1.0, 10.0, -15.0, -8.6, &[0.0]);
        // with W = 0 the bare upper rung (energy Delta_s) is the middle level
        // for Delta_s = 0.5 and carries no photon
        let jb = coupling_element_j_beta(&p, 0.5, 2, QBranch::Plus).unwrap();
        assert!(jb.direct.abs() < 1e-12);
        assert!(jb.value.abs() < 1e-12);
    }

    #[test]
    fn leakage_overlap_at_off_point() {
        for gq in [10.0, 20.0, 40.0] {
            let p = ScenarioParams::two_level(5.0, gq, 2.0);
            let es = eigensystem(&build_matrix(&p, 0.0, -5.0)).unwrap();
            let k = es.values.iter().position(|e| (e + 5.0).abs() < 1e-9).unwrap();
            let leak = es.weight(k, p.atom_q_index());
            let want = 1.0 / (2.0 * gq * gq + 1.0);
            assert!((leak - want).abs() < 0.1 * want);
            assert!(es.weight(k, p.photon_q_index()) < 1e-20);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn three_level_matches_eigensolver(g in 0.0f64..10.0, w in 0.0f64..10.0, d in 0.0f64..10.0) {
            let p = ScenarioParams::ladder(g, 10.0, -15.0, -8.6, &[w]);
            let es = site_s_eigensystem(&p, d).unwrap();
            let e = dressed_energies_three_level(g, w, d);
            prop_assert!((e.u - es.values[0]).abs() < 1e-9);
            prop_assert!((e.v - es.values[1]).abs() < 1e-9);
            prop_assert!((e.third - es.values[2]).abs() < 1e-9);
        }

        #[test]
        fn j_matches_direct_element(gs in 0.1f64..10.0, gq in 0.1f64..30.0, dq in -20.0f64..20.0, x in -80.0f64..80.0) {
            let p = ScenarioParams::two_level(gs, gq, dq);
            let (a, b) = minus_s_vector(gs, 0.0);
            for br in [QBranch::Minus, QBranch::Plus] {
                let j = coupling_element_j(&p, x, br).unwrap();
                let direct = hopping_element(&p, &[a, b], x, br).unwrap();
                prop_assert!((j - direct).abs() < 1e-12);
            }
        }

        #[test]
        fn j_beta_closed_form_agrees(g in 0.2f64..5.0, w in 0.5f64..8.0, d in -20.0f64..20.0) {
            let p = ScenarioParams::ladder(g, 10.0, -15.0, -8.6, &[w]);
            for b in [1, 2] {
                let jb = coupling_element_j_beta(&p, d, b, QBranch::Plus).unwrap();
                prop_assert!(!jb.formula_mismatch, "{:?}", jb);
            }
        }
    }
}
