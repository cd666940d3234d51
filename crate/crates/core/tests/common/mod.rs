//! Strategies, oracles and invariant checks shared by the integration suites.
#![allow(dead_code)]

use dr_subspace::experiments::ExperimentConfig;
use dr_subspace::subspace::ANGLE_ONE_TOL;
use dr_subspace::{dr_operator, operator_norm, LinearMap, Projector, Subspace, Vector};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = Result<(), TestCaseError>;

pub fn matrix(d: usize, k: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, d * k).prop_map(move |v| DMatrix::from_vec(d, k, v))
}

pub fn vector(d: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-10.0f64..10.0, d).prop_map(Vector::from_vec)
}

pub fn subspace(d: usize) -> impl Strategy<Value = Subspace> {
    (0..=d)
        .prop_flat_map(move |k| matrix(d, k))
        .prop_map(|m| Subspace::from_columns(&m).unwrap())
}

/// `(U, V, x)` in a common `R^d`, `2 <= d <= 7`.
pub fn pair_and_point() -> impl Strategy<Value = (Subspace, Subspace, Vector)> {
    (2usize..=7).prop_flat_map(|d| (subspace(d), subspace(d), vector(d)))
}

/// `(U, V)` with `U` spanned by random combinations of a basis of `V`.
pub fn nested_pair() -> impl Strategy<Value = (Subspace, Subspace, Vector)> {
    (2usize..=7)
        .prop_flat_map(|d| (Just(d), 1..=d))
        .prop_flat_map(|(d, kv)| (matrix(d, kv), 0..=kv, vector(d)))
        .prop_flat_map(|(gv, ku, x)| {
            let kv = gv.ncols();
            (Just(gv), matrix(kv, ku), Just(x))
        })
        .prop_map(|(gv, mix, x)| {
            let v = Subspace::from_columns(&gv).unwrap();
            let u = Subspace::from_columns(&(v.basis() * mix)).unwrap();
            (u, v, x)
        })
}

/// Intersection computed independently of the angle machinery: the null
/// space of `[Q_U, -Q_V]` mapped back through `Q_U`.
pub fn oracle_intersection_projector(u: &Subspace, v: &Subspace) -> DMatrix<f64> {
    let d = u.ambient_dim();
    let (qu, qv) = (u.basis(), v.basis());
    let (ku, kv) = (qu.ncols(), qv.ncols());
    if ku == 0 || kv == 0 {
        return DMatrix::zeros(d, d);
    }
    let stacked = DMatrix::from_fn(d, ku + kv, |i, j| {
        if j < ku {
            qu[(i, j)]
        } else {
            -qv[(i, j - ku)]
        }
    });
    // Null vectors of the stacked matrix are eigenvectors of its Gram matrix
    // with eigenvalue ~0.
    let gram = stacked.tr_mul(&stacked);
    let eig = gram.symmetric_eigen();
    let mut cols = Vec::new();
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        if *lambda < 1e-8 {
            let coeffs = eig.eigenvectors.column(k);
            let w = qu * coeffs.rows(0, ku);
            cols.push(w);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(d, d);
    }
    let w = DMatrix::from_columns(&cols);
    let q = w.qr().q();
    &q * q.transpose()
}

/// `|P_V P_U - P_{U∩V}|` with the oracle intersection, read off as the top
/// eigenvalue of the symmetric dilation `[[0, M], [M^T, 0]]`.
pub fn oracle_friedrichs_cos(u: &Subspace, v: &Subspace) -> f64 {
    let m = v.projector_matrix() * u.projector_matrix() - oracle_intersection_projector(u, v);
    let d = m.nrows();
    let dilation = DMatrix::from_fn(2 * d, 2 * d, |i, j| match (i < d, j < d) {
        (true, false) => m[(i, j - d)],
        (false, true) => m[(j, i - d)],
        _ => 0.0,
    });
    dilation.symmetric_eigen().eigenvalues.max().max(0.0)
}

pub fn seeded_pairs(seed: u64, count: usize) -> Vec<(Subspace, Subspace)> {
    let config = ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    };
    let mut rng = config.rng();
    (0..count)
        .map(|_| dr_subspace::random_subspace_pair(&config, &mut rng).unwrap())
        .collect()
}

pub fn check_projector(s: &Subspace, x: &Vector) -> Check {
    let p = s.project(x).unwrap();
    let pp = s.project(&p).unwrap();
    prop_assert!(
        (&pp - &p).amax() <= 1e-12,
        "idempotence {}",
        (&pp - &p).amax()
    );
    let r = x - &p;
    for q in s.basis().column_iter() {
        prop_assert!(r.dot(&q).abs() <= 1e-12, "residual not orthogonal");
    }
    Ok(())
}

pub fn check_reflector(s: &Subspace, x: &Vector) -> Check {
    let r = s.reflect(x).unwrap();
    prop_assert!((r.norm() - x.norm()).abs() <= 1e-12, "isometry");
    let rr = s.reflect(&r).unwrap();
    prop_assert!((&rr - x).amax() <= 1e-12, "involution");
    Ok(())
}

pub fn check_complement_sum(s: &Subspace) -> Check {
    let d = s.ambient_dim();
    let c = s.complement();
    prop_assert_eq!(c.dim(), d - s.dim());
    let sum = s.projector_matrix() + c.projector_matrix();
    let err = (sum - DMatrix::identity(d, d)).amax();
    prop_assert!(err <= 1e-12, "P + P_perp - I = {err:e}");
    Ok(())
}

/// `U ⊆ V` gives `P_V P_U x = P_{U∩V} x = P_U x`.
pub fn check_nested(u: &Subspace, v: &Subspace, x: &Vector) -> Check {
    let pu = u.project(x).unwrap();
    let pvpu = v.project(&pu).unwrap();
    let cap = u.intersect(v).unwrap();
    prop_assert_eq!(cap.dim(), u.dim());
    let pcap = cap.project(x).unwrap();
    prop_assert!((&pvpu - &pu).amax() <= 1e-12, "P_V P_U != P_U");
    prop_assert!((&pcap - &pu).amax() <= 1e-12, "P_cap != P_U");
    let pupv = u.project(&v.project(x).unwrap()).unwrap();
    prop_assert!((&pupv - &pu).amax() <= 1e-12, "P_U P_V != P_U");
    Ok(())
}

pub fn check_angle_symmetry(u: &Subspace, v: &Subspace) -> Check {
    let a = u.principal_angles(v).unwrap();
    let b = v.principal_angles(u).unwrap();
    prop_assert_eq!(a.intersection_dim, b.intersection_dim);
    prop_assert!(
        (a.friedrichs_cos - b.friedrichs_cos).abs() <= 1e-12,
        "{a:?} vs {b:?}"
    );
    prop_assert!(a.friedrichs_cos <= 1.0 - ANGLE_ONE_TOL);
    Ok(())
}

pub fn check_complement_invariance(u: &Subspace, v: &Subspace) -> Check {
    let a = u.principal_angles(v).unwrap().friedrichs_cos;
    let b = u
        .complement()
        .principal_angles(&v.complement())
        .unwrap()
        .friedrichs_cos;
    prop_assert!((a - b).abs() <= 1e-10, "c_F(U,V) = {a}, c_F(U⊥,V⊥) = {b}");
    Ok(())
}

/// `|Tx - Ty|^2 + |(I-T)x - (I-T)y|^2 <= |x - y|^2` on every sample.
pub fn check_firm_nonexpansive(u: &Subspace, v: &Subspace, samples: &[(Vector, Vector)]) -> Check {
    let t = dr_operator(u, v).unwrap();
    for (x, y) in samples {
        let (tx, ty) = (t.apply(x).unwrap(), t.apply(y).unwrap());
        let diff = x - y;
        let td = &tx - &ty;
        let lhs = td.norm_squared() + ((x - &tx) - (y - &ty)).norm_squared();
        prop_assert!(
            lhs <= diff.norm_squared() + 1e-10,
            "{lhs} > {}",
            diff.norm_squared()
        );
    }
    Ok(())
}

pub fn samples(d: usize, count: usize) -> impl Strategy<Value = Vec<(Vector, Vector)>> {
    prop::collection::vec((vector(d), vector(d)), count)
}

pub fn dist(a: &LinearMap, b: &LinearMap) -> f64 {
    operator_norm(&(a - b))
}
