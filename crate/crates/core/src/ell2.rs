//! Finite truncations of a block-diagonal pair in `l^2` whose Douglas-Rachford
//! iterates converge, but with no linear rate uniform over the whole space.
//!
//! Block `k` is the two-lines pair `R e_0`, `R e_{θ_k}` acting on coordinates
//! `(x_{2k}, x_{2k+1})`. Since `θ_k -> 0`, the block cosines creep towards one
//! and every proposed rate `γ < 1` is eventually beaten by some block.
//!
//! Everything here is evaluated block by block from the closed form
//! `T^n = cos^n(θ_k) R_{nθ_k}`, so truncations with `10^5` blocks stay cheap.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, SQRT_2};
use std::io::{self, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::subspace::{Subspace, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct BlockModel {
    angles: Vec<f64>,
    canonical: bool,
}

impl BlockModel {
    /// Angles must lie strictly inside `(0, pi/2)`.
    pub fn from_angles(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one block is required".into(),
            ));
        }
        if let Some(a) = angles.iter().find(|a| !(**a > 0.0 && **a < FRAC_PI_2)) {
            return Err(Error::InvalidParameter(format!(
                "block angle {a} outside (0, pi/2)"
            )));
        }
        Ok(Self {
            angles,
            canonical: false,
        })
    }

    /// `θ_0 = pi/3`, `θ_n = pi/(4n)` for `n = 1..m`.
    pub fn canonical(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "at least one block is required".into(),
            ));
        }
        let angles = (0..m).map(canonical_angle).collect();
        Ok(Self {
            angles,
            canonical: true,
        })
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Number of blocks `M`.
    pub fn blocks(&self) -> usize {
        self.angles.len()
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn cosines(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.cos()).collect()
    }

    /// Largest block cosine, which is the Friedrichs cosine of the truncation.
    pub fn max_cos(&self) -> f64 {
        self.angles.iter().map(|a| a.cos()).fold(0.0, f64::max)
    }
}

fn canonical_angle(n: usize) -> f64 {
    if n == 0 {
        FRAC_PI_3
    } else {
        FRAC_PI_4 / n as f64
    }
}

/// `x_n = 1/(n+1)` in `R^{2m}`.
pub fn canonical_start(m: usize) -> Vector {
    Vector::from_fn(2 * m, |i, _| 1.0 / (i as f64 + 1.0))
}

/// Smallest number of canonical blocks containing one with cosine above `gamma`.
pub fn smallest_canonical_truncation(gamma: f64) -> Option<usize> {
    if gamma.is_nan() || gamma >= 1.0 {
        return None;
    }
    if FRAC_PI_3.cos() > gamma {
        return Some(1);
    }
    let mut k = ((FRAC_PI_4 / gamma.acos()).floor() as usize).max(1);
    while canonical_angle(k).cos() <= gamma {
        k += 1;
    }
    while k > 1 && canonical_angle(k - 1).cos() > gamma {
        k -= 1;
    }
    Some(k + 1)
}

/// The pair `U = R e_0 x R e_0 x ...`, `V = R e_{θ_0} x R e_{θ_1} x ...` in `R^{2M}`.
pub fn build_truncated(model: &BlockModel) -> (Subspace, Subspace) {
    let d = model.ambient_dim();
    let m = model.blocks();
    let mut qu = DMatrix::zeros(d, m);
    let mut qv = DMatrix::zeros(d, m);
    for (k, theta) in model.angles.iter().enumerate() {
        let (s, c) = theta.sin_cos();
        qu[(2 * k, k)] = 1.0;
        qv[(2 * k, k)] = c;
        qv[(2 * k + 1, k)] = s;
    }
    let u = Subspace::from_orthonormal(qu).expect("coordinate columns are orthonormal");
    let v = Subspace::from_orthonormal(qv).expect("disjoint unit columns are orthonormal");
    (u, v)
}

/// `T^n x` evaluated block by block.
pub fn blockwise_dr_power(model: &BlockModel, x: &Vector, n: u32) -> Result<Vector> {
    check_dim(model.ambient_dim(), x.len())?;
    let mut out = Vector::zeros(x.len());
    for (k, theta) in model.angles.iter().enumerate() {
        let scale = theta.cos().powi(n as i32);
        let (s, c) = (f64::from(n) * theta).sin_cos();
        let (a, b) = (x[2 * k], x[2 * k + 1]);
        out[2 * k] = scale * (c * a - s * b);
        out[2 * k + 1] = scale * (s * a + c * b);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthRow {
    pub n: usize,
    /// `|T^n x|` or `|P_U T^n x|`.
    pub norm: f64,
    /// `norm / γ^n`.
    pub scaled: f64,
    /// Analytic lower bound on `scaled`, where defined.
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthTable {
    pub gamma: f64,
    /// Witnessing block index `N`.
    pub witness: usize,
    pub witness_cos: f64,
    /// Per-step growth factor of the bound (`c_N / γ`).
    pub ratio: f64,
    pub rows: Vec<GrowthRow>,
}

impl GrowthTable {
    /// First `n` where the scaled value exceeds `threshold`.
    pub fn first_exceeding(&self, threshold: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.scaled > threshold).map(|r| r.n)
    }

    pub fn bound_first_exceeding(&self, threshold: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.bound.is_some_and(|b| b > threshold))
            .map(|r| r.n)
    }

    /// Smallest `scaled - bound` over rows carrying a bound, relative to the bound.
    pub fn min_relative_margin(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.bound.map(|b| (r.scaled - b) / b))
            .reduce(f64::min)
    }

    /// Columnar text with header `# n measured bound`; a missing bound is `nan`.
    pub fn write_columns<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# n measured bound")?;
        for r in &self.rows {
            writeln!(
                out,
                "{} {:e} {:e}",
                r.n,
                r.scaled,
                r.bound.unwrap_or(f64::NAN)
            )?;
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "gamma {gamma} outside (0, 1)"
        )))
    }
}

/// `ln sqrt(sum exp(t))` without overflow or underflow.
fn half_log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    0.5 * (top + terms.map(|t| (t - top).exp()).sum::<f64>().ln())
}

/// Tabulates `γ^{-n} |T^n x0|` for `n = 0..=n_max` next to the single-block
/// lower bound `γ^{-n} c_N^n |(x_{2N}, x_{2N+1})|`.
///
/// The witness `N` is the block with the largest cosine among those where the
/// start is nonzero.
pub fn sublinearity_certificate(
    model: &BlockModel,
    x0: &Vector,
    gamma: f64,
    n_max: usize,
) -> Result<GrowthTable> {
    check_dim(model.ambient_dim(), x0.len())?;
    check_gamma(gamma)?;
    let cosines = model.cosines();
    let block_norms: Vec<f64> = (0..model.blocks())
        .map(|k| x0[2 * k].hypot(x0[2 * k + 1]))
        .collect();
    let witness = (0..model.blocks())
        .filter(|&k| block_norms[k] > 0.0)
        .reduce(|best, k| if cosines[k] > cosines[best] { k } else { best });
    let max_cos = witness.map_or(0.0, |k| cosines[k]);
    let witness = match witness {
        Some(k) if cosines[k] > gamma => k,
        _ => {
            return Err(Error::NoWitness {
                gamma,
                max_cos,
                smallest_usable_blocks: if model.canonical {
                    smallest_canonical_truncation(gamma)
                } else {
                    None
                },
            })
        }
    };
    let log_c: Vec<f64> = cosines.iter().map(|c| c.ln()).collect();
    let log_b: Vec<f64> = block_norms.iter().map(|b| b.ln()).collect();
    let log_gamma = gamma.ln();
    let c_n = cosines[witness];
    let rows = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let nf = n as f64;
            let log_norm = half_log_sum_exp(
                log_c
                    .iter()
                    .zip(&log_b)
                    .map(|(lc, lb)| 2.0 * (nf * lc + lb)),
            );
            let bound = (nf * (log_c[witness] - log_gamma) + log_b[witness]).exp();
            GrowthRow {
                n,
                norm: log_norm.exp(),
                scaled: (log_norm - nf * log_gamma).exp(),
                bound: Some(bound),
            }
        })
        .collect();
    Ok(GrowthTable {
        gamma,
        witness,
        witness_cos: c_n,
        ratio: c_n / gamma,
        rows,
    })
}

/// Tabulates `γ^{-n} |P_U T^n x|` on the canonical instance with its
/// canonical start, for `n = 0..=n_max`.
///
/// `N` is the first `n >= 1` with `c_n > γ` and `δ = c_N / γ`; block
/// cosines increase from there on, so `δ <= c_n / γ` for every `n >= N`.
/// The bound `δ^n / (2^{3/2} (n+1)(2n+1))` is reported for `N <= n < M`,
/// the steps whose matching block is present in the truncation.
pub fn shadow_sublinearity(model: &BlockModel, gamma: f64, n_max: usize) -> Result<GrowthTable> {
    if !model.canonical {
        return Err(Error::InvalidParameter(
            "the shadow certificate needs the canonical block model".into(),
        ));
    }
    check_gamma(gamma)?;
    let m = model.blocks();
    let witness = (1..m).find(|&n| canonical_angle(n).cos() > gamma);
    let witness = match witness {
        Some(n) => n,
        None => {
            return Err(Error::NoWitness {
                gamma,
                max_cos: model.cosines()[1..].iter().copied().fold(0.0, f64::max),
                smallest_usable_blocks: smallest_canonical_truncation(gamma).map(|k| k.max(2)),
            })
        }
    };
    let c_n = canonical_angle(witness).cos();
    let delta = c_n / gamma;
    let x = canonical_start(m);
    let log_gamma = gamma.ln();
    let log_c: Vec<f64> = model.angles.iter().map(|a| a.cos().ln()).collect();
    let rows = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let nf = n as f64;
            let log_norm = half_log_sum_exp(model.angles.iter().enumerate().map(|(k, theta)| {
                let (s, c) = (nf * theta).sin_cos();
                let first = (c * x[2 * k] - s * x[2 * k + 1]).abs();
                2.0 * (nf * log_c[k] + first.ln())
            }));
            let bound = (n >= witness && n < m).then(|| {
                let denom = 2.0 * SQRT_2 * (nf + 1.0) * (2.0 * nf + 1.0);
                (nf * delta.ln() - denom.ln()).exp()
            });
            GrowthRow {
                n,
                norm: log_norm.exp(),
                scaled: (log_norm - nf * log_gamma).exp(),
                bound,
            }
        })
        .collect();
    Ok(GrowthTable {
        gamma,
        witness,
        witness_cos: c_n,
        ratio: delta,
        rows,
    })
}
