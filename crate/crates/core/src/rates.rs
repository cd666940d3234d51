//! Measured operator-norm decay against the exact Friedrichs-cosine rates.
//!
//! | quantity       | operator                      | rate          |
//! |----------------|-------------------------------|---------------|
//! | `DR_POWER`     | `T^n - P_Fix`                 | `c^n`         |
//! | `DR_SHADOW_U`  | `P_U T^n - P_{U∩V}`           | `c^n`         |
//! | `DR_SHADOW_V`  | `P_V T^n - P_{U∩V}`           | `c^n`         |
//! | `TTSTAR_POWER` | `(T T*)^n - P_Fix`            | `c^(2n)`      |
//! | `MAP_EVEN`     | `(P_V P_U)^n - P_{U∩V}`       | `c^(2n-1)`    |
//! | `MAP_ODD`      | `P_U (P_V P_U)^n - P_{U∩V}`   | `c^(2n)`      |

use std::fmt;

use crate::error::{Error, Result};
use crate::iteration::SubspacePair;
use crate::operators::{operator_norm, LinearMap, PairOperators};
use crate::subspace::{Subspace, Vector};

/// Largest ambient dimension accepted for dense materialization.
pub const DENSE_LIMIT: usize = 400;

/// Rows whose prediction falls below this are compared absolutely.
pub const RELATIVE_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    DrPower,
    DrShadowU,
    DrShadowV,
    TtStarPower,
    MapEven,
    MapOdd,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::DrPower,
        Quantity::DrShadowU,
        Quantity::DrShadowV,
        Quantity::TtStarPower,
        Quantity::MapEven,
        Quantity::MapOdd,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Quantity::DrPower => "DR_POWER",
            Quantity::DrShadowU => "DR_SHADOW_U",
            Quantity::DrShadowV => "DR_SHADOW_V",
            Quantity::TtStarPower => "TTSTAR_POWER",
            Quantity::MapEven => "MAP_EVEN",
            Quantity::MapOdd => "MAP_ODD",
        }
    }

    /// Exact norm at step `n >= 1` for Friedrichs cosine `c`.
    pub fn predicted(self, c: f64, n: usize) -> f64 {
        let n = n as i32;
        match self {
            Quantity::DrPower | Quantity::DrShadowU | Quantity::DrShadowV => c.powi(n),
            Quantity::TtStarPower | Quantity::MapOdd => c.powi(2 * n),
            Quantity::MapEven => c.powi(2 * n - 1),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub quantity: Quantity,
    pub measured: f64,
    pub predicted: f64,
}

impl RateRow {
    pub fn relative_error(&self) -> f64 {
        (self.measured - self.predicted).abs() / self.predicted
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub c_f: f64,
    pub rows: Vec<RateRow>,
    /// Over rows with `predicted >= RELATIVE_FLOOR`.
    pub max_relative_error: f64,
    /// Over the remaining rows, `|measured - predicted|`.
    pub max_small_abs_error: f64,
}

impl RateReport {
    pub fn series(&self, quantity: Quantity) -> impl Iterator<Item = &RateRow> {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }

    pub fn measured(&self, quantity: Quantity, n: usize) -> Option<f64> {
        self.series(quantity).find(|r| r.n == n).map(|r| r.measured)
    }

    /// Least-squares slope of `ln(measured)` against `n`, skipping rows
    /// whose measured value is below [`RELATIVE_FLOOR`].
    pub fn log_slope(&self, quantity: Quantity) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .series(quantity)
            .filter(|r| r.measured >= RELATIVE_FLOOR)
            .map(|r| (r.n as f64, r.measured.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

pub fn rate_report(u: &Subspace, v: &Subspace, n_max: usize) -> Result<RateReport> {
    rate_report_with_limit(u, v, n_max, DENSE_LIMIT)
}

/// Measures the six decay curves for `n = 1..=n_max`.
///
/// Powers are built by repeated multiplication; the limit projector is
/// subtracted once per row.
pub fn rate_report_with_limit(
    u: &Subspace,
    v: &Subspace,
    n_max: usize,
    dense_limit: usize,
) -> Result<RateReport> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if u.ambient_dim() > dense_limit {
        return Err(Error::DimensionTooLarge {
            dim: u.ambient_dim(),
            limit: dense_limit,
        });
    }
    let ops = PairOperators::new(u, v)?;
    let c = ops.friedrichs_cos;
    let tts = &ops.t * &ops.t_star;
    let map = &ops.pv * &ops.pu;

    let mut t_n = ops.id.clone();
    let mut tts_n = ops.id.clone();
    let mut map_n = ops.id.clone();
    let mut rows = Vec::with_capacity(6 * n_max);
    let dist = |a: &LinearMap, b: &LinearMap| operator_norm(&(a - b));
    for n in 1..=n_max {
        t_n = &t_n * &ops.t;
        tts_n = &tts_n * &tts;
        map_n = &map_n * &map;
        let measured = [
            (Quantity::DrPower, dist(&t_n, &ops.p_fix)),
            (Quantity::DrShadowU, dist(&(&ops.pu * &t_n), &ops.p_cap)),
            (Quantity::DrShadowV, dist(&(&ops.pv * &t_n), &ops.p_cap)),
            (Quantity::TtStarPower, dist(&tts_n, &ops.p_fix)),
            (Quantity::MapEven, dist(&map_n, &ops.p_cap)),
            (Quantity::MapOdd, dist(&(&ops.pu * &map_n), &ops.p_cap)),
        ];
        rows.extend(measured.into_iter().map(|(quantity, measured)| RateRow {
            n,
            quantity,
            measured,
            predicted: quantity.predicted(c, n),
        }));
    }

    let (mut max_rel, mut max_abs) = (0.0f64, 0.0f64);
    for r in &rows {
        if r.predicted >= RELATIVE_FLOOR {
            max_rel = max_rel.max(r.relative_error());
        } else {
            max_abs = max_abs.max((r.measured - r.predicted).abs());
        }
    }
    Ok(RateReport {
        c_f: c,
        rows,
        max_relative_error: max_rel,
        max_small_abs_error: max_abs,
    })
}

/// `min_n ( c^n |x0 - P_Fix x0| - |T^n x0 - P_Fix x0| )` over `n = 1..=n_max`.
pub fn pointwise_bound_check(u: &Subspace, v: &Subspace, x0: &Vector, n_max: usize) -> Result<f64> {
    let pair = SubspacePair::new(u.clone(), v.clone())?;
    pointwise_slack(&pair, x0, n_max)
}

pub fn pointwise_slack(pair: &SubspacePair, x0: &Vector, n_max: usize) -> Result<f64> {
    crate::error::check_dim(pair.ambient_dim(), x0.len())?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let c = pair.friedrichs_cos();
    let fix = pair.fix_point(x0);
    let start = (x0 - &fix).norm();
    let mut x = x0.clone();
    let mut worst = f64::INFINITY;
    for n in 1..=n_max {
        x = pair.dr_step(&x);
        let slack = c.powi(n as i32) * start - (&x - &fix).norm();
        worst = worst.min(slack);
    }
    Ok(worst)
}
