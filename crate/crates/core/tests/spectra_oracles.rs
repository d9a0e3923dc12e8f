use proptest::prelude::*;
use qswitch_core::spectra::{build_matrix, eigensystem, knob_derivative, ManifoldMatrix};
use qswitch_core::{Knob, ScenarioParams};

fn params() -> impl Strategy<Value = (ScenarioParams, f64, f64)> {
    (
        2usize..=5,
        0.0..20.0f64,
        0.0..40.0f64,
        -20.0..20.0f64,
        prop::collection::vec((0.0..10.0f64, -5.0..5.0f64), 3),
        -60.0..60.0f64,
        -60.0..60.0f64,
    )
        .prop_map(|(n, gs, gq, dq, ladder, ds, det_q)| {
            let rabi: Vec<f64> = ladder[..n - 2].iter().map(|l| l.0).collect();
            let mut p = ScenarioParams::ladder(gs, gq, dq, det_q, &rabi);
            p.ladder_detuning = ladder[..n - 2].iter().map(|l| l.1).collect();
            (p, ds, det_q)
        })
}

fn matmul(a: &ManifoldMatrix, b: &ManifoldMatrix) -> ManifoldMatrix {
    let d = a.dim();
    let mut c = ManifoldMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            c.set(i, j, (0..d).map(|k| a.get(i, k) * b.get(k, j)).sum());
        }
    }
    c
}

proptest! {
    #[test]
    fn hamiltonian_is_symmetric((p, ds, dq) in params()) {
        let h = build_matrix(&p, ds, dq);
        prop_assert_eq!(h.max_asymmetry(), 0.0);
        prop_assert_eq!(h.dim(), p.dim());
    }

    /// Power sums of the eigenvalues equal traces of matrix powers, which fixes
    /// the characteristic polynomial.
    #[test]
    fn eigenvalues_match_characteristic_polynomial((p, ds, dq) in params()) {
        let h = build_matrix(&p, ds, dq);
        let es = eigensystem(&h).unwrap();
        let scale = h.frobenius().max(1.0);
        let mut power = h.clone();
        for m in 1..=h.dim() {
            let trace: f64 = (0..h.dim()).map(|i| power.get(i, i)).sum();
            let sum: f64 = es.values.iter().map(|l| l.powi(m as i32)).sum();
            prop_assert!((trace - sum).abs() <= 1e-10 * scale.powi(m as i32), "m = {}: {} vs {}", m, trace, sum);
            power = matmul(&power, &h);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_sorted((p, ds, dq) in params()) {
        let h = build_matrix(&p, ds, dq);
        let es = eigensystem(&h).unwrap();
        prop_assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
        for (k, v) in es.vectors.iter().enumerate() {
            let hv = h.apply(v);
            let resid = hv.iter().zip(v).map(|(a, b)| (a - es.values[k] * b).abs()).fold(0.0, f64::max);
            prop_assert!(resid <= 1e-10 * h.frobenius().max(1.0));
            for w in &es.vectors[..k] {
                let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn knob_derivative_is_a_finite_difference((p, ds, dq) in params(), on_s in any::<bool>()) {
        let knob = if on_s { Knob::DetuningS } else { Knob::DetuningQ };
        let dh = knob_derivative(&p, knob);
        let (a, b) = if on_s { ((ds + 1.0, dq), (ds, dq)) } else { ((ds, dq + 1.0), (ds, dq)) };
        let (ha, hb) = (build_matrix(&p, a.0, a.1), build_matrix(&p, b.0, b.1));
        for i in 0..p.dim() {
            for j in 0..p.dim() {
                prop_assert!((ha.get(i, j) - hb.get(i, j) - dh.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
