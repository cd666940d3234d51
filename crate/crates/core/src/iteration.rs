//! Douglas-Rachford and alternating-projections drivers.
//!
//! Both drivers work in composition form: a Douglas-Rachford step is
//! `x + P_V(2 P_U x - x) - P_U x` and an alternating-projections step is
//! `P_V P_U z`, so no `d x d` matrix is ever formed. The monitored sequence
//! is the shadow `P_U T^n x_0` for Douglas-Rachford and `(P_V P_U)^n x_0`
//! for alternating projections; stopping rules are evaluated on it after
//! every full step, starting with `n = 0`.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::subspace::{orthonormalize, AffineSubspace, AngleSpectrum, Projector, Subspace, Vector};

/// Default ceiling on the number of operator applications.
pub const DEFAULT_CAP: usize = 1_000_000;

/// Tolerance for `anchor_V - anchor_U ∈ dir U + dir V`.
pub const AFFINE_FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingRule {
    /// `d_{U∩V}(z_n) < eps`
    TrueError(f64),
    /// `max(d_U(z_n), d_V(z_n)) < eps`
    MaxDistance(f64),
    /// Exactly `N` operator applications.
    FixedCount(usize),
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::TrueError(eps) | StoppingRule::MaxDistance(eps) => {
                if eps > 0.0 && eps.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "stopping tolerance must be positive, got {eps}"
                    )))
                }
            }
            StoppingRule::FixedCount(0) => Err(Error::InvalidParameter(
                "fixed iteration count must be at least 1".into(),
            )),
            StoppingRule::FixedCount(_) => Ok(()),
        }
    }

    fn fires(&self, true_error: f64, dist_u: f64, dist_v: f64, n: usize) -> bool {
        match *self {
            StoppingRule::TrueError(eps) => true_error < eps,
            StoppingRule::MaxDistance(eps) => dist_u.max(dist_v) < eps,
            StoppingRule::FixedCount(count) => n >= count,
        }
    }
}

impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoppingRule::TrueError(eps) => write!(f, "true-error<{eps}"),
            StoppingRule::MaxDistance(eps) => write!(f, "max-distance<{eps}"),
            StoppingRule::FixedCount(n) => write!(f, "count={n}"),
        }
    }
}

/// Whether `z` satisfies an epsilon rule. `FixedCount` never fires here; the
/// driver counts steps itself.
pub fn evaluate_rule<P: Projector, Q: Projector>(
    rule: &StoppingRule,
    u: &P,
    v: &P,
    u_cap_v: &Q,
    z: &Vector,
) -> Result<bool> {
    Ok(match rule {
        StoppingRule::TrueError(eps) => u_cap_v.distance_to(z)? < *eps,
        StoppingRule::MaxDistance(eps) => u.distance_to(z)?.max(v.distance_to(z)?) < *eps,
        StoppingRule::FixedCount(_) => false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Dr,
    Map,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dr => "DR",
            Method::Map => "MAP",
        })
    }
}

/// How much of each step a trace keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TraceDetail {
    /// Scalars plus the iterate and both shadows at every step.
    Vectors,
    /// Scalars at every step.
    #[default]
    Scalars,
    /// Only the final step.
    Final,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub cap: usize,
    pub detail: TraceDetail,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            detail: TraceDetail::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    RuleSatisfied,
    CountReached,
    CapExhausted,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::RuleSatisfied => "rule satisfied",
            Termination::CountReached => "count reached",
            Termination::CapExhausted => "cap exhausted",
        })
    }
}

/// State after `n` operator applications.
///
/// `x_n` is `T^n x_0` (DR) or `(P_V P_U)^n x_0` (MAP); `z_n` is the monitored
/// point, `P_U x_n` for DR and `x_n` itself for MAP.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub iterate: Option<Vector>,
    pub shadow_u: Option<Vector>,
    pub shadow_v: Option<Vector>,
    /// `|x_n|`
    pub iterate_norm: f64,
    /// `|x_n - lim x_n|`: `P_Fix x_0` for DR, `P_{U∩V} x_0` for MAP.
    pub iterate_error: f64,
    /// `|P_U x_n - P_{U∩V} x_0|`
    pub shadow_u_error: f64,
    /// `|P_V x_n - P_{U∩V} x_0|`
    pub shadow_v_error: f64,
    /// `|z_n|`
    pub monitored_norm: f64,
    /// `d_{U∩V}(z_n)`
    pub true_error: f64,
    pub dist_u: f64,
    pub dist_v: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub method: Method,
    pub rule: StoppingRule,
    pub steps: Vec<StepRecord>,
    pub terminated_by: Termination,
    /// `P_{U∩V} x_0`, the limit of the monitored sequence.
    pub solution: Vector,
    /// `P_{Fix T} x_0`, the limit of the DR iterates.
    pub fix_point: Vector,
    pub friedrichs_cos: f64,
}

impl IterationTrace {
    /// Operator applications performed.
    pub fn iterations(&self) -> usize {
        self.last().n
    }

    pub fn last(&self) -> &StepRecord {
        self.steps
            .last()
            .expect("a trace always holds the n = 0 step")
    }

    pub fn capped(&self) -> bool {
        self.terminated_by == Termination::CapExhausted
    }
}

/// A subspace pair with the derived data every run needs.
#[derive(Clone, Debug)]
pub struct SubspacePair {
    u: Subspace,
    v: Subspace,
    cap: Subspace,
    cocap: Subspace,
    spectrum: AngleSpectrum,
}

impl SubspacePair {
    pub fn new(u: Subspace, v: Subspace) -> Result<Self> {
        check_dim(u.ambient_dim(), v.ambient_dim())?;
        let spectrum = u.principal_angles(&v)?;
        let cap = u.intersect(&v)?;
        let cocap = u.complement().intersect(&v.complement())?;
        Ok(Self {
            u,
            v,
            cap,
            cocap,
            spectrum,
        })
    }

    pub fn u(&self) -> &Subspace {
        &self.u
    }

    pub fn v(&self) -> &Subspace {
        &self.v
    }

    /// `U ∩ V`
    pub fn intersection(&self) -> &Subspace {
        &self.cap
    }

    /// `U⊥ ∩ V⊥`
    pub fn co_intersection(&self) -> &Subspace {
        &self.cocap
    }

    pub fn spectrum(&self) -> &AngleSpectrum {
        &self.spectrum
    }

    pub fn friedrichs_cos(&self) -> f64 {
        self.spectrum.friedrichs_cos
    }

    pub fn ambient_dim(&self) -> usize {
        self.u.ambient_dim()
    }

    /// `P_{Fix T} x = P_{U∩V} x + P_{U⊥∩V⊥} x`.
    pub fn fix_point(&self, x: &Vector) -> Vector {
        self.cap.nearest_point(x) + self.cocap.nearest_point(x)
    }

    /// One Douglas-Rachford step in composition form.
    pub fn dr_step(&self, x: &Vector) -> Vector {
        dr_step(&self.u, &self.v, x)
    }

    pub fn run_dr(
        &self,
        x0: &Vector,
        rule: StoppingRule,
        opts: &RunOptions,
    ) -> Result<IterationTrace> {
        self.run(Method::Dr, x0, rule, opts)
    }

    pub fn run_map(
        &self,
        x0: &Vector,
        rule: StoppingRule,
        opts: &RunOptions,
    ) -> Result<IterationTrace> {
        self.run(Method::Map, x0, rule, opts)
    }

    fn run(
        &self,
        method: Method,
        x0: &Vector,
        rule: StoppingRule,
        opts: &RunOptions,
    ) -> Result<IterationTrace> {
        check_dim(self.ambient_dim(), x0.len())?;
        let limits = Limits {
            solution: self.cap.nearest_point(x0),
            fix_point: self.fix_point(x0),
            friedrichs_cos: self.friedrichs_cos(),
        };
        drive(method, &self.u, &self.v, &self.cap, x0, limits, rule, opts)
    }
}

/// Runs `x_{n+1} = T x_n` and monitors `P_U T^n x_0`.
pub fn run_dr(
    u: &Subspace,
    v: &Subspace,
    x0: &Vector,
    rule: StoppingRule,
    opts: &RunOptions,
) -> Result<IterationTrace> {
    SubspacePair::new(u.clone(), v.clone())?.run_dr(x0, rule, opts)
}

/// Runs `z_{n+1} = P_V P_U z_n`.
pub fn run_map(
    u: &Subspace,
    v: &Subspace,
    x0: &Vector,
    rule: StoppingRule,
    opts: &RunOptions,
) -> Result<IterationTrace> {
    SubspacePair::new(u.clone(), v.clone())?.run_map(x0, rule, opts)
}

/// Douglas-Rachford for two affine subspaces with a common point.
///
/// The affine projectors `a + P_{W}(x - a)` replace the linear ones; the
/// reported `friedrichs_cos` is that of the direction subspaces.
pub fn run_dr_affine(
    ua: &AffineSubspace,
    va: &AffineSubspace,
    x0: &Vector,
    rule: StoppingRule,
    opts: &RunOptions,
) -> Result<IterationTrace> {
    let d = ua.ambient_dim();
    check_dim(d, va.ambient_dim())?;
    check_dim(d, x0.len())?;
    let (du, dv) = (ua.direction(), va.direction());

    let point = common_point(ua, va)?;
    let cap_dir = du.intersect(dv)?;
    let cocap_dir = du.complement().intersect(&dv.complement())?;
    let spectrum = du.principal_angles(dv)?;

    let shifted = x0 - &point;
    let cap = AffineSubspace::new(point.clone(), cap_dir)?;
    let limits = Limits {
        solution: cap.nearest_point(x0),
        fix_point: &point
            + (cap.direction().nearest_point(&shifted) + cocap_dir.nearest_point(&shifted)),
        friedrichs_cos: spectrum.friedrichs_cos,
    };
    drive(Method::Dr, ua, va, &cap, x0, limits, rule, opts)
}

/// A point of `Ua ∩ Va`, or `EmptyIntersection`.
pub fn common_point(ua: &AffineSubspace, va: &AffineSubspace) -> Result<Vector> {
    let d = ua.ambient_dim();
    check_dim(d, va.ambient_dim())?;
    let diff = va.anchor() - ua.anchor();
    let (qu, qv) = (ua.direction().basis(), va.direction().basis());

    let columns: Vec<Vector> = qu
        .column_iter()
        .chain(qv.column_iter())
        .map(|c| c.into_owned())
        .collect();
    let sum = orthonormalize(&columns, d)?;
    let residual = sum.distance_to(&diff)?;
    if residual > AFFINE_FEASIBILITY_TOL * diff.norm().max(1.0) {
        return Err(Error::EmptyIntersection { residual });
    }
    if columns.is_empty() {
        return Ok(ua.anchor().clone());
    }

    // aU + Qu a = aV + Qv b  <=>  [Qu, -Qv] [a; b] = aV - aU
    let (ku, kv) = (qu.ncols(), qv.ncols());
    let system = DMatrix::from_fn(d, ku + kv, |i, j| {
        if j < ku {
            qu[(i, j)]
        } else {
            -qv[(i, j - ku)]
        }
    });
    let coeffs = linalg::svd(&system).solve(&diff, 1e-12);
    let alpha = coeffs.rows(0, ku);
    Ok(ua.anchor() + qu * alpha)
}

fn dr_step<P: Projector>(u: &P, v: &P, x: &Vector) -> Vector {
    let pu_x = u.nearest_point(x);
    dr_step_from(v, x, &pu_x)
}

fn dr_step_from<P: Projector>(v: &P, x: &Vector, pu_x: &Vector) -> Vector {
    let reflected = pu_x * 2.0 - x;
    v.nearest_point(&reflected) + x - pu_x
}

struct Limits {
    solution: Vector,
    fix_point: Vector,
    friedrichs_cos: f64,
}

#[allow(clippy::too_many_arguments)]
fn drive<P: Projector, C: Projector>(
    method: Method,
    u: &P,
    v: &P,
    cap: &C,
    x0: &Vector,
    limits: Limits,
    rule: StoppingRule,
    opts: &RunOptions,
) -> Result<IterationTrace> {
    rule.validate()?;
    if opts.cap == 0 {
        return Err(Error::InvalidParameter(
            "iteration cap must be at least 1".into(),
        ));
    }
    let Limits {
        solution,
        fix_point,
        friedrichs_cos,
    } = limits;
    let limit = match method {
        Method::Dr => &fix_point,
        Method::Map => &solution,
    };

    let mut steps = Vec::new();
    let mut x = x0.clone();
    let mut n = 0usize;
    let terminated_by = loop {
        let pu_x = u.nearest_point(&x);
        let pv_x = v.nearest_point(&x);
        let (z, pu_z, pv_z) = match method {
            Method::Dr => {
                let pu_z = u.nearest_point(&pu_x);
                let pv_z = v.nearest_point(&pu_x);
                (pu_x.clone(), pu_z, pv_z)
            }
            Method::Map => (x.clone(), pu_x.clone(), pv_x.clone()),
        };
        let true_error = (&z - cap.nearest_point(&z)).norm();
        let dist_u = (&z - &pu_z).norm();
        let dist_v = (&z - &pv_z).norm();

        let keep_vectors = opts.detail == TraceDetail::Vectors;
        let record = StepRecord {
            n,
            iterate: keep_vectors.then(|| x.clone()),
            shadow_u: keep_vectors.then(|| pu_x.clone()),
            shadow_v: keep_vectors.then(|| pv_x.clone()),
            iterate_norm: x.norm(),
            iterate_error: (&x - limit).norm(),
            shadow_u_error: (&pu_x - &solution).norm(),
            shadow_v_error: (&pv_x - &solution).norm(),
            monitored_norm: z.norm(),
            true_error,
            dist_u,
            dist_v,
        };
        if opts.detail == TraceDetail::Final {
            steps.clear();
        }
        steps.push(record);

        if rule.fires(true_error, dist_u, dist_v, n) {
            break match rule {
                StoppingRule::FixedCount(_) => Termination::CountReached,
                _ => Termination::RuleSatisfied,
            };
        }
        if n >= opts.cap {
            break Termination::CapExhausted;
        }
        x = match method {
            Method::Dr => dr_step_from(v, &x, &pu_x),
            Method::Map => v.nearest_point(&pu_x),
        };
        n += 1;
    };

    Ok(IterationTrace {
        method,
        rule,
        steps,
        terminated_by,
        solution,
        fix_point,
        friedrichs_cos,
    })
}
