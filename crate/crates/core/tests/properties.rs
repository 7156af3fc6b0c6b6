use ccm_beamform::array::{steering_vector, ArrayConfig};
use ccm_beamform::complexity::{complexity_counts, ComplexityRow};
use ccm_beamform::fullrank::{ccm_sg_step, cmv_sg_step};
use ccm_beamform::jio::{forward, gram_schmidt, update_t, update_w, JioState};
use ccm_beamform::linalg::orthonormality_error;
use ccm_beamform::metrics::output_sinr;
use ccm_beamform::{CMatrix, CVector, FullRankState, C64};
use proptest::prelude::*;

fn complex_vec(n: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| CVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| C64::new(a, b))))
}

fn complex_mat(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        CMatrix::from_iterator(rows, cols, v.into_iter().map(|(a, b)| C64::new(a, b)))
    })
}

/// `(T, w̄, a₀, x)` with `1 ≤ r < m ≤ 8` and unit-norm `a₀`.
fn jio_case() -> impl Strategy<Value = (CMatrix, CVector, CVector, CVector)> {
    (2usize..=8)
        .prop_flat_map(|m| (Just(m), 1..m))
        .prop_flat_map(|(m, r)| (complex_mat(m, r), complex_vec(r), complex_vec(m), complex_vec(m)))
        .prop_filter("nonzero a0", |(_, _, a0, _)| a0.norm() > 1e-3)
        .prop_map(|(t, w, a0, x)| {
            let a0 = a0.unscale(a0.norm());
            (t, w, a0, x)
        })
}

proptest! {
    #[test]
    fn steering_entries_have_unit_modulus(m in 1usize..48, theta in 0.01f64..179.99, d in 0.1f64..1.0) {
        let mut cfg = ArrayConfig::new(m, vec![90.0], 10.0).unwrap();
        cfg.d_over_lambda = d;
        let a = steering_vector(&cfg, theta).unwrap().into_inner();
        for v in a.iter() {
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(a[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn update_t_preserves_projected_constraint((t, w, a0, x) in jio_case(), mu in 0.0f64..0.1) {
        let st = JioState::from_parts(t, w, a0, mu, 0.0, false).unwrap();
        let s = forward(&st, &x).unwrap();
        let next = update_t(&st, &s);
        let drift = (next.t.ad_mul(&st.a0) - st.t.ad_mul(&st.a0)).norm();
        prop_assert!(drift <= 1e-10 * st.t.norm().max(1.0));
    }

    #[test]
    fn update_w_preserves_constraint_value((t, w, a0, x) in jio_case(), mu in 0.0f64..0.1) {
        let st = JioState::from_parts(t, w, a0, 0.0, mu, false).unwrap();
        prop_assume!(st.a_bar.norm() > 1e-6);
        let s = forward(&st, &x).unwrap();
        let next = update_w(&st, &s).unwrap();
        prop_assert!((next.constraint() - st.constraint()).norm() <= 1e-10);
    }

    #[test]
    fn gram_schmidt_orthonormalizes(t in complex_mat(10, 4)) {
        // Skip numerically near-dependent draws; those are reported as
        // degenerate by design.
        let sv = t.singular_values();
        prop_assume!(sv.min() > 1e-3 * sv.max());
        let q = gram_schmidt(&t).unwrap();
        prop_assert!(orthonormality_error(&q) < 1e-10);
    }

    #[test]
    fn full_rank_steps_keep_the_constraint(w in complex_vec(6), x in complex_vec(6), a0 in complex_vec(6), mu in 0.0f64..0.1) {
        prop_assume!(a0.norm() > 1e-3);
        let a0 = a0.unscale(a0.norm());
        let st = FullRankState::new(a0.clone(), mu).unwrap();
        let after_ccm = ccm_sg_step(&st, &x).unwrap();
        prop_assert!((after_ccm.constraint() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let arbitrary = FullRankState::with_weights(w, a0, mu).unwrap();
        let after_cmv = cmv_sg_step(&arbitrary, &x).unwrap();
        prop_assert!((after_cmv.constraint() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sinr_ignores_complex_scaling(w in complex_vec(8), re in -5.0f64..5.0, im in -5.0f64..5.0) {
        prop_assume!(w.norm() > 1e-6 && (re * re + im * im) > 1e-6);
        let cfg = ArrayConfig::new(8, vec![90.0, 50.0, 120.0], 10.0).unwrap();
        let base = output_sinr(&w, &cfg).unwrap();
        let scaled = output_sinr(&w.map(|v| v * C64::new(re, im)), &cfg).unwrap();
        prop_assert!((base - scaled).abs() < 1e-9);
    }

    #[test]
    fn ccm_rows_cost_more_than_cmv_rows(m in 1usize..200, r in 1usize..50) {
        let pair = |a: ComplexityRow, b: ComplexityRow| {
            let (a, b) = (complexity_counts(a, m, r).unwrap(), complexity_counts(b, m, r).unwrap());
            (a.additions - b.additions, a.multiplications - b.multiplications)
        };
        prop_assert_eq!(pair(ComplexityRow::FullRankCcm, ComplexityRow::FullRankCmv), (1, 2));
        prop_assert_eq!(pair(ComplexityRow::MswfCcm, ComplexityRow::MswfCmv), (1, 2));
        prop_assert_eq!(pair(ComplexityRow::JioCcm, ComplexityRow::JioCmv), (1, 3));
        prop_assert_eq!(pair(ComplexityRow::JioCcmGs, ComplexityRow::JioCmvGs), (1, 3));
    }
}
