//! Dense linear maps built from a pair of subspaces.
//!
//! The Douglas-Rachford operator `T = P_V(2P_U - I) + I - P_U`, its adjoint,
//! the alternating-projections map `P_V P_U` and the projector onto `Fix T`
//! are materialized as `d x d` matrices so that operator-norm identities can
//! be checked through full singular value decompositions.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg::singular_values;
use crate::subspace::{Subspace, Vector};

/// Square real matrix acting on `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::ZeroDimension);
        }
        check_dim(matrix.nrows(), matrix.ncols())?;
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    /// Orthogonal projector `P_S`.
    pub fn projector(s: &Subspace) -> Self {
        Self {
            matrix: s.projector_matrix(),
        }
    }

    /// Reflector `R_S = 2 P_S - I`.
    pub fn reflector(s: &Subspace) -> Self {
        let d = s.ambient_dim();
        Self {
            matrix: s.projector_matrix() * 2.0 - DMatrix::<f64>::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        Ok(&self.matrix * x)
    }

    /// `self ∘ other`, i.e. `other` is applied first.
    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        self * other
    }

    pub fn adjoint(&self) -> LinearMap {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn pow(&self, n: u32) -> LinearMap {
        let mut out = LinearMap::identity(self.dim());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        operator_norm(self)
    }
}

impl Mul for &LinearMap {
    type Output = LinearMap;
    fn mul(self, rhs: &LinearMap) -> LinearMap {
        LinearMap {
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Add for &LinearMap {
    type Output = LinearMap;
    fn add(self, rhs: &LinearMap) -> LinearMap {
        LinearMap {
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &LinearMap {
    type Output = LinearMap;
    fn sub(self, rhs: &LinearMap) -> LinearMap {
        LinearMap {
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul<f64> for &LinearMap {
    type Output = LinearMap;
    fn mul(self, rhs: f64) -> LinearMap {
        LinearMap {
            matrix: &self.matrix * rhs,
        }
    }
}

/// Spectral norm (largest singular value).
pub fn operator_norm(a: &LinearMap) -> f64 {
    singular_values(&a.matrix)
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `T = P_V(2P_U - I) + I - P_U`.
pub fn dr_operator(u: &Subspace, v: &Subspace) -> Result<LinearMap> {
    check_dim(u.ambient_dim(), v.ambient_dim())?;
    let pu = LinearMap::projector(u);
    let pv = LinearMap::projector(v);
    let id = LinearMap::identity(u.ambient_dim());
    let ru = &(&pu * 2.0) - &id;
    Ok(&(&(&pv * &ru) + &id) - &pu)
}

/// `T* = T_{U,V}`; the roles of the two subspaces are swapped.
pub fn dr_adjoint(u: &Subspace, v: &Subspace) -> Result<LinearMap> {
    dr_operator(v, u)
}

/// `P_V P_U`, one sweep of alternating projections.
pub fn map_operator(u: &Subspace, v: &Subspace) -> Result<LinearMap> {
    check_dim(u.ambient_dim(), v.ambient_dim())?;
    Ok(&LinearMap::projector(v) * &LinearMap::projector(u))
}

/// `P_{Fix T} = P_{U∩V} + P_{U⊥∩V⊥}`.
pub fn fix_projector(u: &Subspace, v: &Subspace) -> Result<LinearMap> {
    let cap = u.intersect(v)?;
    let cocap = u.complement().intersect(&v.complement())?;
    Ok(&LinearMap::projector(&cap) + &LinearMap::projector(&cocap))
}

/// Every dense operator associated with a subspace pair.
#[derive(Clone, Debug)]
pub struct PairOperators {
    pub pu: LinearMap,
    pub pv: LinearMap,
    pub pu_perp: LinearMap,
    pub pv_perp: LinearMap,
    pub ru: LinearMap,
    pub rv: LinearMap,
    pub p_cap: LinearMap,
    pub p_cocap: LinearMap,
    pub p_fix: LinearMap,
    pub t: LinearMap,
    pub t_star: LinearMap,
    pub id: LinearMap,
    /// `dim(U∩V)`
    pub cap_dim: usize,
    /// `dim(U⊥∩V⊥)`
    pub cocap_dim: usize,
    pub friedrichs_cos: f64,
}

impl PairOperators {
    pub fn new(u: &Subspace, v: &Subspace) -> Result<Self> {
        check_dim(u.ambient_dim(), v.ambient_dim())?;
        let d = u.ambient_dim();
        let (u_perp, v_perp) = (u.complement(), v.complement());
        let spectrum = u.principal_angles(v)?;
        let cap = u.intersect(v)?;
        let cocap = u_perp.intersect(&v_perp)?;
        let p_cap = LinearMap::projector(&cap);
        let p_cocap = LinearMap::projector(&cocap);
        Ok(Self {
            pu: LinearMap::projector(u),
            pv: LinearMap::projector(v),
            pu_perp: LinearMap::projector(&u_perp),
            pv_perp: LinearMap::projector(&v_perp),
            ru: LinearMap::reflector(u),
            rv: LinearMap::reflector(v),
            p_fix: &p_cap + &p_cocap,
            p_cap,
            p_cocap,
            t: dr_operator(u, v)?,
            t_star: dr_adjoint(u, v)?,
            id: LinearMap::identity(d),
            cap_dim: cap.dim(),
            cocap_dim: cocap.dim(),
            friedrichs_cos: spectrum.friedrichs_cos,
        })
    }

    pub fn dim(&self) -> usize {
        self.id.dim()
    }
}

/// One checked identity: `residual = ||LHS - RHS||_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub n: Option<usize>,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    fn push(&mut self, name: &'static str, n: Option<usize>, residual: f64) {
        self.checks.push(IdentityCheck { name, n, residual });
    }

    fn diff(&mut self, name: &'static str, n: Option<usize>, lhs: &LinearMap, rhs: &LinearMap) {
        self.push(name, n, operator_norm(&(lhs - rhs)));
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&IdentityCheck> {
        self.checks
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match c.n {
                Some(n) => writeln!(f, "{:<58} n={:<3} {:.3e}", c.name, n, c.residual)?,
                None => writeln!(f, "{:<58}       {:.3e}", c.name, c.residual)?,
            }
        }
        Ok(())
    }
}

/// Smallest eigenvalue deficit of `S + S^T - 2 S^T S`, which is PSD exactly
/// when the linear map `S` is firmly nonexpansive.
fn firm_nonexpansive_defect(s: &LinearMap) -> f64 {
    let m = s.matrix();
    let form = m + m.transpose() - m.transpose() * m * 2.0;
    let form = (&form + form.transpose()) * 0.5;
    let min = form
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    (-min).max(0.0)
}

fn symmetry_defect(a: &LinearMap) -> f64 {
    operator_norm(&(a - &a.adjoint()))
}

/// Evaluates the operator identity catalogue for the pair `(U, V)`.
///
/// Power identities are checked for every `n` in `1..=n_max`.
pub fn verify_identities(u: &Subspace, v: &Subspace, n_max: usize) -> Result<IdentityReport> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let ops = PairOperators::new(u, v)?;
    let PairOperators {
        pu,
        pv,
        pu_perp,
        pv_perp,
        ru,
        rv,
        p_cap,
        p_fix,
        t,
        t_star,
        id,
        ..
    } = &ops;

    let mut r = IdentityReport::default();

    // reflectors
    r.diff("R_U R_U = I", None, &(ru * ru), id);
    r.diff("R_V R_V = I", None, &(rv * rv), id);
    r.push("R_U symmetric", None, symmetry_defect(ru));
    r.diff(
        "R_U = -R_U⊥",
        None,
        ru,
        &(&LinearMap::reflector(&u.complement()) * -1.0),
    );
    r.diff(
        "R_V = -R_V⊥",
        None,
        rv,
        &(&LinearMap::reflector(&v.complement()) * -1.0),
    );

    // reformulations of T and T*
    let pvpu = pv * pu;
    let pupv = pu * pv;
    let pvp_upp = pv_perp * pu_perp;
    let pup_vpp = pu_perp * pv_perp;
    let rvru = rv * ru;
    let rurv = ru * rv;
    r.diff("T = (I + R_V R_U)/2", None, t, &(&(id + &rvru) * 0.5));
    r.diff("T = P_V R_U + I - P_U", None, t, &(&(&(pv * ru) + id) - pu));
    r.diff("T = P_V P_U + P_V⊥ P_U⊥", None, t, &(&pvpu + &pvp_upp));
    r.diff(
        "T* = P_U P_V + P_U⊥ P_V⊥",
        None,
        t_star,
        &(&pupv + &pup_vpp),
    );
    r.diff("T* = T^T", None, t_star, &t.adjoint());
    let t_perp = dr_operator(&u.complement(), &v.complement())?;
    r.diff("T_{V,U} = T_{V⊥,U⊥}", None, t, &t_perp);

    // reflector relations
    let sum = &(pu + pv) - id;
    r.diff("R_U T* = P_U + P_V - I", None, &(ru * t_star), &sum);
    r.diff("T R_U = P_U + P_V - I", None, &(t * ru), &sum);
    r.diff("T* R_V = P_U + P_V - I", None, &(t_star * rv), &sum);
    r.diff("R_V T = P_U + P_V - I", None, &(rv * t), &sum);
    r.push("T R_U symmetric", None, symmetry_defect(&(t * ru)));
    r.diff("T* (R_V R_U) = T", None, &(t_star * &rvru), t);
    r.diff("(R_V R_U) T* = T", None, &(&rvru * t_star), t);
    r.diff("T (R_U R_V) = T*", None, &(t * &rurv), t_star);
    r.diff("(R_U R_V) T = T*", None, &(&rurv * t), t_star);

    // normality and TT*
    let tts = t * t_star;
    r.diff("T T* = T* T", None, &tts, &(t_star * t));
    r.diff("2 T T* = T + T*", None, &(&tts * 2.0), &(t + t_star));
    r.push("T T* symmetric", None, symmetry_defect(&tts));
    r.push(
        "T T* firmly nonexpansive",
        None,
        firm_nonexpansive_defect(&tts),
    );
    r.push("T firmly nonexpansive", None, firm_nonexpansive_defect(t));
    r.diff(
        "T T* = P_V P_U P_V + P_V⊥ P_U⊥ P_V⊥",
        None,
        &tts,
        &(&(&pvpu * pv) + &(&pvp_upp * pv_perp)),
    );
    r.diff(
        "T T* = P_V P_U + P_U P_V - P_U - P_V + I",
        None,
        &tts,
        &(&(&(&(&pvpu + &pupv) - pu) - pv) + id),
    );
    r.diff(
        "T T* = P_U P_V P_U + P_U⊥ P_V⊥ P_U⊥",
        None,
        &tts,
        &(&(&pupv * pu) + &(&pup_vpp * pu_perp)),
    );

    // fixed point set
    r.diff("T P_Fix = P_Fix", None, &(t * p_fix), p_fix);
    r.diff("T* P_Fix = P_Fix", None, &(t_star * p_fix), p_fix);
    r.diff("T* T P_Fix = P_Fix", None, &(&(t_star * t) * p_fix), p_fix);
    r.diff("P_Fix T = P_Fix", None, &(p_fix * t), p_fix);
    r.diff("P_Fix P_Fix = P_Fix", None, &(p_fix * p_fix), p_fix);
    r.push("P_Fix symmetric", None, symmetry_defect(p_fix));
    r.diff("P_U P_Fix = P_{U∩V}", None, &(pu * p_fix), p_cap);
    r.diff("P_V P_Fix = P_{U∩V}", None, &(pv * p_fix), p_cap);
    r.diff("P_{U∩V} P_Fix = P_{U∩V}", None, &(p_cap * p_fix), p_cap);
    let kernel_dim = singular_values((t - id).matrix())
        .iter()
        .filter(|&&s| s < 1e-8)
        .count();
    r.push(
        "dim Fix T = dim(U∩V) + dim(U⊥∩V⊥)",
        None,
        kernel_dim.abs_diff(ops.cap_dim + ops.cocap_dim) as f64,
    );
    r.push(
        "||P_V P_U - P_{U∩V}|| = c_F",
        None,
        (operator_norm(&(&pvpu - p_cap)) - ops.friedrichs_cos).abs(),
    );
    r.push(
        "||P_V⊥ P_U⊥ - P_{U⊥∩V⊥}|| = c_F",
        None,
        (operator_norm(&(&pvp_upp - &ops.p_cocap)) - ops.friedrichs_cos).abs(),
    );

    // powers
    let pupvpu = &pupv * pu;
    let pvpupv = &pvpu * pv;
    let pupp = &pup_vpp * pu_perp;
    let pvpp = &pvp_upp * pv_perp;
    let tst = t_star * t;

    let mut t_pow = vec![id.clone(), t.clone()];
    let mut tts_n = id.clone();
    let mut tst_n = id.clone();
    let mut rvru_n = id.clone();
    let mut pupv_n = id.clone();
    let mut pvpu_n = id.clone();
    let mut pup_vpp_n = id.clone();
    let mut pvp_upp_n = id.clone();
    let mut pupvpu_n = id.clone();
    let mut pupp_n = id.clone();
    let mut pvpupv_n = id.clone();
    let mut pvpp_n = id.clone();
    for n in 1..=n_max {
        while t_pow.len() <= 2 * n + 1 {
            let next = &t_pow[t_pow.len() - 1] * t;
            t_pow.push(next);
        }
        tts_n = &tts_n * &tts;
        tst_n = &tst_n * &tst;
        rvru_n = &rvru_n * &rvru;
        pupv_n = &pupv_n * &pupv;
        pvpu_n = &pvpu_n * &pvpu;
        pup_vpp_n = &pup_vpp_n * &pup_vpp;
        pvp_upp_n = &pvp_upp_n * &pvp_upp;
        pupvpu_n = &pupvpu_n * &pupvpu;
        pupp_n = &pupp_n * &pupp;
        pvpupv_n = &pvpupv_n * &pvpupv;
        pvpp_n = &pvpp_n * &pvpp;
        let rvru_n1 = &rvru_n * &rvru;
        let pupv_n1 = &pupv_n * &pupv;
        let pvpu_n1 = &pvpu_n * &pvpu;
        let pup_vpp_n1 = &pup_vpp_n * &pup_vpp;
        let pvp_upp_n1 = &pvp_upp_n * &pvp_upp;
        let (t2n, t2n1) = (&t_pow[2 * n], &t_pow[2 * n + 1]);
        let k = Some(n);

        r.diff("(T T*)^n = (T* T)^n", k, &tts_n, &tst_n);
        r.diff(
            "(T T*)^n = (P_U P_V P_U)^n + (P_U⊥ P_V⊥ P_U⊥)^n",
            k,
            &tts_n,
            &(&pupvpu_n + &pupp_n),
        );
        r.diff(
            "(T T*)^n = (P_V P_U P_V)^n + (P_V⊥ P_U⊥ P_V⊥)^n",
            k,
            &tts_n,
            &(&pvpupv_n + &pvpp_n),
        );
        r.diff(
            "P_U (T T*)^n = (P_U P_V)^n P_U",
            k,
            &(pu * &tts_n),
            &(&pupv_n * pu),
        );
        r.diff(
            "(T T*)^n P_U = (P_U P_V)^n P_U",
            k,
            &(&tts_n * pu),
            &(&pupv_n * pu),
        );
        r.diff(
            "P_V (T T*)^n = (P_V P_U)^n P_V",
            k,
            &(pv * &tts_n),
            &(&pvpu_n * pv),
        );
        r.diff("T^2n = (T T*)^n (R_V R_U)^n", k, t2n, &(&tts_n * &rvru_n));
        r.diff(
            "T^(2n+1) = (T T*)^n T (R_V R_U)^n",
            k,
            t2n1,
            &(&(&tts_n * t) * &rvru_n),
        );
        r.diff(
            "T^(2n+1) = (T T*)^n T* (R_V R_U)^(n+1)",
            k,
            t2n1,
            &(&(&tts_n * t_star) * &rvru_n1),
        );
        r.diff(
            "T^2n = ((P_U P_V)^n P_U + (P_U⊥ P_V⊥)^n P_U⊥)(R_V R_U)^n",
            k,
            t2n,
            &(&(&(&pupv_n * pu) + &(&pup_vpp_n * pu_perp)) * &rvru_n),
        );
        r.diff(
            "T^2n = ((P_V P_U)^n P_V + (P_V⊥ P_U⊥)^n P_V⊥)(R_V R_U)^n",
            k,
            t2n,
            &(&(&(&pvpu_n * pv) + &(&pvp_upp_n * pv_perp)) * &rvru_n),
        );
        r.diff(
            "T^(2n+1) = ((P_U P_V)^(n+1) + (P_U⊥ P_V⊥)^(n+1))(R_V R_U)^(n+1)",
            k,
            t2n1,
            &(&(&pupv_n1 + &pup_vpp_n1) * &rvru_n1),
        );
        r.diff(
            "T^(2n+1) = ((P_V P_U)^(n+1) + (P_V⊥ P_U⊥)^(n+1))(R_V R_U)^n",
            k,
            t2n1,
            &(&(&pvpu_n1 + &pvp_upp_n1) * &rvru_n),
        );
        r.diff("P_{U∩V} T^n = P_{U∩V}", k, &(p_cap * &t_pow[n]), p_cap);
    }
    Ok(r)
}
