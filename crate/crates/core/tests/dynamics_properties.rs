use proptest::prelude::*;
use qswitch_core::dynamics::{integrate, DriveField, Integrator};
use qswitch_core::{Knob, ScenarioParams, SweepProfile, C64};

fn scenario() -> impl Strategy<Value = (ScenarioParams, SweepProfile, Vec<C64>)> {
    (
        (2usize..=4, 0.0..10.0f64, 0.0..25.0f64, -5.0..5.0f64, 0.0..8.0f64),
        prop::array::uniform4(0.0..0.5f64),
        (-15.0..15.0f64, -15.0..40.0f64, 2.0..10.0f64),
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6),
    )
        .prop_map(|((n, gs, gq, dq, kwq), loss, (a, b, t), amps)| {
            let mut p = ScenarioParams::ladder(gs, gq, dq, a, &vec![3.0; n - 2]);
            p.kappa_wq = kwq;
            p.kappa_s = loss[0];
            p.kappa_q = loss[1];
            p.gamma_s = loss[2];
            p.gamma_q = loss[3];
            let sweep = SweepProfile::linear(Knob::DetuningQ, t, a, b);
            let mut y: Vec<C64> = amps[..p.dim()].iter().map(|&(r, i)| C64::new(r, i)).collect();
            let norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-3);
            y.iter_mut().for_each(|v| *v /= norm);
            (p, sweep, y)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn ledger_is_conserved((p, sweep, y) in scenario()) {
        let integ = Integrator::rk4(&p, &sweep, 12.0);
        let (traj, rec) = integrate(&p, &sweep, &y, &DriveField::Zero, &integ).unwrap();
        let y0: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        for k in 0..traj.len() {
            prop_assert!((traj.ledger_total(k) - y0).abs() < 1e-6);
        }
        prop_assert_eq!(rec.len(), traj.len());
    }

    /// A global phase on the initial state changes no probability.
    #[test]
    fn global_phase_is_unobservable((p, sweep, y) in scenario(), phase in 0.0..6.28f64) {
        let rot = C64::from_polar(1.0, phase);
        let z: Vec<C64> = y.iter().map(|v| v * rot).collect();
        let integ = Integrator::rk4(&p, &sweep, 5.0);
        let (a, _) = integrate(&p, &sweep, &y, &DriveField::Zero, &integ).unwrap();
        let (b, _) = integrate(&p, &sweep, &z, &DriveField::Zero, &integ).unwrap();
        for i in 0..p.dim() {
            let (pa, pb) = (a.population(i), b.population(i));
            prop_assert!((pa[pa.len() - 1] - pb[pb.len() - 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_agrees_with_rk4((p, sweep, y) in scenario()) {
        let rk = Integrator::rk4(&p, &sweep, 5.0).with_sample_interval(Some(5.0));
        let dp = Integrator::adaptive(5.0, 1e-10, 1e-12).with_sample_interval(Some(5.0));
        let (a, _) = integrate(&p, &sweep, &y, &DriveField::Zero, &rk).unwrap();
        let (b, _) = integrate(&p, &sweep, &y, &DriveField::Zero, &dp).unwrap();
        let diff = a.last_amplitudes().iter().zip(b.last_amplitudes()).map(|(x, z)| (x - z).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-6, "{}", diff);
    }
}

#[test]
fn bare_cavities_exchange_the_photon() {
    // Two resonant empty-atom cavities: |C_s|^2 = cos^2(kappa_sq t).
    let p = ScenarioParams::two_level(0.0, 0.0, 0.0);
    let sweep = SweepProfile::constant(Knob::DetuningQ, 0.0);
    let mut y = vec![C64::new(0.0, 0.0); 4];
    y[0] = C64::new(1.0, 0.0);
    let integ = Integrator::rk4(&p, &sweep, 3.0);
    let (traj, _) = integrate(&p, &sweep, &y, &DriveField::Zero, &integ).unwrap();
    let photon_s = traj.population(0);
    for (k, &t) in traj.times.iter().enumerate() {
        assert!((photon_s[k] - t.cos().powi(2)).abs() < 1e-9, "t = {t}");
    }
}
