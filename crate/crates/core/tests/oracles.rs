mod common;

use common::*;
use dr_subspace::experiments::{emit_csv, read_csv, run_benchmark, ExperimentConfig};
use dr_subspace::two_lines::{closed_form_norms, PlaneConfig};
use dr_subspace::{
    dr_operator, fix_projector, rate_report, LinearMap, Quantity, RunOptions, StoppingRule,
    SubspacePair, TraceDetail, Vector,
};
use nalgebra::Vector2;

#[test]
fn seeded_pairs_match_dense_friedrichs_oracle() {
    for (u, v) in seeded_pairs(21, 10) {
        let spectrum = u.principal_angles(&v).unwrap();
        let oracle = oracle_friedrichs_cos(&u, &v);
        assert!((spectrum.friedrichs_cos - oracle).abs() <= 1e-10);
        let cap = u.intersect(&v).unwrap();
        let diff = cap.projector_matrix() - oracle_intersection_projector(&u, &v);
        assert!(
            diff.amax() <= 1e-8,
            "intersection projector off by {:e}",
            diff.amax()
        );
    }
}

#[test]
fn dr_power_norms_follow_oracle_cosine() {
    for (u, v) in seeded_pairs(22, 5) {
        let c = oracle_friedrichs_cos(&u, &v);
        let report = rate_report(&u, &v, 10).unwrap();
        for n in 1..=10 {
            let measured = report.measured(Quantity::DrPower, n).unwrap();
            let expected = c.powi(n as i32);
            assert!(
                (measured - expected).abs() <= 1e-9 + 1e-6 * expected,
                "n = {n}"
            );
        }
        // Independent dense route: |T^n - P_Fix| from repeated products.
        let t = dr_operator(&u, &v).unwrap();
        let p_fix = fix_projector(&u, &v).unwrap();
        let mut power = LinearMap::identity(u.ambient_dim());
        for n in 1..=5 {
            power = &power * &t;
            let norm = (&power - &p_fix).norm();
            assert!((norm - c.powi(n)).abs() <= 1e-9, "dense n = {n}");
        }
    }
}

#[test]
fn two_lines_trace_matches_closed_forms() {
    for (num, den) in [(1, 17), (1, 3), (2, 5), (1, 2)] {
        let cfg = PlaneConfig::from_pi_fraction(num, den).unwrap();
        let (u, v) = cfg.lines();
        let pair = SubspacePair::new(u, v).unwrap();
        let x = Vector2::new(0.3, -1.7);
        let x0 = Vector::from_column_slice(x.as_slice());
        let opts = RunOptions {
            cap: 60,
            detail: TraceDetail::Scalars,
        };
        let dr = pair
            .run_dr(&x0, StoppingRule::FixedCount(60), &opts)
            .unwrap();
        let map = pair
            .run_map(&x0, StoppingRule::FixedCount(60), &opts)
            .unwrap();
        for (d, m) in dr.steps.iter().zip(&map.steps) {
            let closed = closed_form_norms(&cfg, &x, d.n as u32);
            assert!((d.iterate_norm - closed.dr_norm).abs() <= 1e-12);
            assert!((d.shadow_u_error - closed.shadow_norm).abs() <= 1e-12);
            assert!((m.iterate_norm - closed.map_norm).abs() <= 1e-12);
        }
    }
}

#[test]
fn benchmark_csv_file_round_trips() {
    let config = ExperimentConfig {
        num_pairs: 3,
        starts_per_pair: 2,
        seed: 5,
        ..ExperimentConfig::default()
    };
    let records = run_benchmark(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    emit_csv(&path, &records).unwrap();
    assert_eq!(read_csv(&path).unwrap(), records);
    let missing = read_csv(&dir.path().join("absent.csv")).unwrap_err();
    assert!(missing.to_string().contains("absent.csv"));
}
