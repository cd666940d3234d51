mod common;

use std::f64::consts::FRAC_PI_2;

use common::*;
use dr_subspace::ell2::{blockwise_dr_power, build_truncated, BlockModel};
use dr_subspace::experiments::{parse_records, write_records, BenchRecord, Criterion};
use dr_subspace::two_lines::{closed_form_dr_power, closed_form_norms, PlaneConfig};
use dr_subspace::{
    dr_operator, rate_report, LinearMap, Method, PairOperators, Quantity, RunOptions, StoppingRule,
    SubspacePair, TraceDetail,
};
use nalgebra::{DMatrix, Vector2};
use proptest::prelude::*;

fn subspace_and_point() -> impl Strategy<Value = (dr_subspace::Subspace, dr_subspace::Vector)> {
    (1usize..=8).prop_flat_map(|d| (subspace(d), vector(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_idempotent_and_orthogonal((s, x) in subspace_and_point()) {
        check_projector(&s, &x)?;
    }

    #[test]
    fn reflection_is_an_isometric_involution((s, x) in subspace_and_point()) {
        check_reflector(&s, &x)?;
    }

    #[test]
    fn projector_plus_complement_is_identity((s, _) in subspace_and_point()) {
        check_complement_sum(&s)?;
    }

    #[test]
    fn nested_subspaces_commute((u, v, x) in nested_pair()) {
        check_nested(&u, &v, &x)?;
    }

    #[test]
    fn friedrichs_cosine_is_symmetric((u, v, _) in pair_and_point()) {
        check_angle_symmetry(&u, &v)?;
    }

    #[test]
    fn friedrichs_cosine_survives_complements((u, v, _) in pair_and_point()) {
        check_complement_invariance(&u, &v)?;
    }

    #[test]
    fn friedrichs_cosine_matches_oracle((u, v, _) in pair_and_point()) {
        let c = u.principal_angles(&v).unwrap().friedrichs_cos;
        let oracle = oracle_friedrichs_cos(&u, &v);
        prop_assert!((c - oracle).abs() <= 1e-10, "{c} vs {oracle}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dr_operator_is_firmly_nonexpansive(
        (u, v, pts) in (2usize..=7).prop_flat_map(|d| (subspace(d), subspace(d), samples(d, 100)))
    ) {
        check_firm_nonexpansive(&u, &v, &pts)?;
    }

    #[test]
    fn dr_operator_structure((u, v, _) in pair_and_point()) {
        let ops = PairOperators::new(&u, &v).unwrap();
        let (t, ts) = (&ops.t, &ops.t_star);
        prop_assert!(dist(&(t * ts), &(ts * t)) <= 1e-10, "normality");
        prop_assert!(dist(&(&(t * ts) * 2.0), &(t + ts)) <= 1e-10, "2TT* = T + T*");
        let tru = t * &ops.ru;
        let sum = &(&ops.pu + &ops.pv) - &ops.id;
        prop_assert!(dist(&tru, &sum) <= 1e-10, "T R_U = P_U + P_V - I");
        prop_assert!(dist(&tru, &tru.adjoint()) <= 1e-10, "T R_U symmetric");
        let swapped = dr_operator(&v, &u).unwrap();
        let perps = dr_operator(&v.complement(), &u.complement()).unwrap();
        prop_assert!(dist(&swapped, &perps) <= 1e-10, "T_(V,U) = T_(V⊥,U⊥)");

        let rank = ops.p_fix.matrix().clone().symmetric_eigen().eigenvalues.iter().filter(|l| **l > 0.5).count();
        let cap = u.principal_angles(&v).unwrap().intersection_dim;
        let cocap = u.complement().principal_angles(&v.complement()).unwrap().intersection_dim;
        prop_assert_eq!(rank, cap + cocap);
    }

    #[test]
    fn dr_trace_respects_bounds((u, v, x0) in pair_and_point()) {
        let pair = SubspacePair::new(u.clone(), v.clone()).unwrap();
        let opts = RunOptions { cap: 100, detail: TraceDetail::Vectors };
        let trace = pair.run_dr(&x0, StoppingRule::FixedCount(30), &opts).unwrap();
        let c = trace.friedrichs_cos;
        let start = trace.steps[0].iterate_error;
        let t = dr_operator(&u, &v).unwrap();
        let mut dense = x0.clone();
        for (n, s) in trace.steps.iter().enumerate() {
            let cn = c.powi(n as i32);
            prop_assert!(s.iterate_error <= cn * start + 1e-10);
            prop_assert!(s.shadow_u_error.max(s.shadow_v_error) <= cn * x0.norm() + 1e-10);
            let delta = (s.iterate.as_ref().unwrap() - &dense).amax();
            prop_assert!(delta <= 1e-11, "composition vs dense at n = {n}: {delta:e}");
            dense = t.apply(&dense).unwrap();
        }
        for w in trace.steps.windows(2) {
            prop_assert!(w[1].shadow_v_error <= c * w[0].shadow_u_error + 1e-10, "chained bound");
        }
    }

    #[test]
    fn dr_norm_decreases_towards_zero_fixed_point((u, v, x) in pair_and_point()) {
        let pair = SubspacePair::new(u, v).unwrap();
        let x0 = &x - pair.fix_point(&x);
        let opts = RunOptions { cap: 100, detail: TraceDetail::Scalars };
        let trace = pair.run_dr(&x0, StoppingRule::FixedCount(30), &opts).unwrap();
        for w in trace.steps.windows(2) {
            prop_assert!(w[1].iterate_norm <= w[0].iterate_norm + 1e-12);
        }
    }

    #[test]
    fn map_true_error_is_monotone((u, v, x0) in pair_and_point()) {
        let pair = SubspacePair::new(u, v).unwrap();
        let opts = RunOptions { cap: 100, detail: TraceDetail::Scalars };
        let trace = pair.run_map(&x0, StoppingRule::FixedCount(30), &opts).unwrap();
        for w in trace.steps.windows(2) {
            prop_assert!(w[1].true_error <= w[0].true_error + 1e-12);
        }
    }

    #[test]
    fn rate_report_relations((u, v, _) in pair_and_point()) {
        let report = rate_report(&u, &v, 12).unwrap();
        for n in 1..=12 {
            let even = report.measured(Quantity::MapEven, n).unwrap();
            let dr = report.measured(Quantity::DrPower, n).unwrap();
            prop_assert!(even <= dr + 1e-12, "MAP {even} > DR {dr} at n = {n}");
            let tts = report.measured(Quantity::TtStarPower, n).unwrap();
            let odd = report.measured(Quantity::MapOdd, n).unwrap();
            prop_assert!((tts - odd).abs() <= 1e-9);
        }
        prop_assert!(report.max_relative_error <= 1e-6, "{}", report.max_relative_error);
        prop_assert!(report.max_small_abs_error <= 1e-9);
    }

    #[test]
    fn dr_power_log_slope_is_log_cosine((u, v, _) in pair_and_point()) {
        let report = rate_report(&u, &v, 15).unwrap();
        let c = report.c_f;
        prop_assume!(c > 0.2);
        let slope = report.log_slope(Quantity::DrPower).unwrap();
        prop_assert!((slope / c.ln() - 1.0).abs() <= 1e-6, "slope {slope}, ln c {}", c.ln());
    }

    #[test]
    fn two_lines_shadow_below_iterate(
        theta in 1e-6f64..=FRAC_PI_2,
        x in prop::array::uniform2(-10.0f64..10.0),
    ) {
        let cfg = PlaneConfig::new(theta).unwrap();
        let x = Vector2::from(x);
        for n in 0..=100 {
            let norms = closed_form_norms(&cfg, &x, n);
            prop_assert!(norms.shadow_norm <= norms.dr_norm + 1e-14);
            prop_assert!(norms.map_norm <= x.norm() + 1e-14);
        }
    }

    #[test]
    fn two_lines_closed_form_matches_dense(theta in 1e-3f64..=FRAC_PI_2, n in 0u32..=30) {
        let cfg = PlaneConfig::new(theta).unwrap();
        let (u, v) = cfg.lines();
        let dense = dr_operator(&u, &v).unwrap().pow(n);
        let closed = closed_form_dr_power(&cfg, n);
        let closed = LinearMap::new(DMatrix::from_column_slice(2, 2, closed.as_slice())).unwrap();
        prop_assert!((dense.matrix() - closed.matrix()).amax() <= 1e-12);
    }

    #[test]
    fn blocks_decouple(
        angles in prop::collection::vec(1e-3f64..(FRAC_PI_2 - 1e-3), 1..=6),
        n in 0u32..=20,
        seed in prop::collection::vec(-1.0f64..1.0, 12),
    ) {
        let model = BlockModel::from_angles(angles).unwrap();
        let (u, v) = build_truncated(&model);
        let x = dr_subspace::Vector::from_iterator(model.ambient_dim(), seed.into_iter().take(model.ambient_dim()));
        let dense = dr_operator(&u, &v).unwrap().pow(n).apply(&x).unwrap();
        let blockwise = blockwise_dr_power(&model, &x, n).unwrap();
        prop_assert!((dense - blockwise).amax() <= 1e-12);
    }

    #[test]
    fn longer_truncations_never_lower_friedrichs_cosine(
        angles in prop::collection::vec(1e-3f64..(FRAC_PI_2 - 1e-3), 2..=8)
    ) {
        let mut previous = 0.0;
        for m in 1..=angles.len() {
            let model = BlockModel::from_angles(angles[..m].to_vec()).unwrap();
            let (u, v) = build_truncated(&model);
            let c = u.principal_angles(&v).unwrap().friedrichs_cos;
            prop_assert!(c >= previous - 1e-15);
            prop_assert!((c - model.max_cos()).abs() <= 1e-12);
            previous = c;
        }
    }
}

fn record() -> impl Strategy<Value = BenchRecord> {
    (
        0usize..1000,
        0usize..100,
        prop::bool::ANY,
        prop::bool::ANY,
        1e-9f64..=FRAC_PI_2,
        0usize..1_000_000,
        0.0f64..1.0,
        prop::bool::ANY,
    )
        .prop_map(|(p, s, dr, te, angle, it, err, capped)| BenchRecord {
            pair_id: p,
            start_id: s,
            method: if dr { Method::Dr } else { Method::Map },
            criterion: if te {
                Criterion::TrueError
            } else {
                Criterion::MaxDistance
            },
            friedrichs_angle: angle,
            iterations: it,
            final_true_error: err,
            capped,
        })
}

proptest! {
    #[test]
    fn csv_round_trips(records in prop::collection::vec(record(), 0..20)) {
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let back = parse_records(buf.as_slice(), std::path::Path::new("<memory>")).unwrap();
        prop_assert_eq!(back, records);
    }
}
