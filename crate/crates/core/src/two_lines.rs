//! Closed forms for two lines through the origin of `R^2`.
//!
//! With `U = R e_0` and `V = R e_θ`, the Douglas-Rachford operator is the
//! scaled rotation `cos(θ) R_θ`, so `T^n = cos^n(θ) R_{nθ}` and
//!
//! ```text
//! |T^n x|         = cos^n(θ) |x|
//! |P_U T^n x|     = cos^n(θ) |cos(nθ) x1 - sin(nθ) x2|
//! |(P_V P_U)^n x| = cos^(2n-1)(θ) |x1|        (n >= 1)
//! ```
//!
//! These serve as an exact oracle for the general machinery and generate the
//! comparison curves and surfaces.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::{self, Write};

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::subspace::{Subspace, Vector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneConfig {
    theta: f64,
}

impl PlaneConfig {
    /// `theta` must lie in `(0, pi/2]`.
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta <= FRAC_PI_2 {
            Ok(Self { theta })
        } else {
            Err(Error::InvalidParameter(format!(
                "angle {theta} outside (0, pi/2]"
            )))
        }
    }

    /// `theta = pi * num / den`.
    pub fn from_pi_fraction(num: u32, den: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Self::new(std::f64::consts::PI * f64::from(num) / f64::from(den))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `(R e_0, R e_θ)` as general subspaces.
    pub fn lines(&self) -> (Subspace, Subspace) {
        let u = Subspace::line(&Vector::from_vec(vec![1.0, 0.0])).expect("unit vector");
        let v = Subspace::line(&Vector::from_vec(vec![self.theta.cos(), self.theta.sin()]))
            .expect("unit vector");
        (u, v)
    }
}

/// Counter-clockwise rotation by `theta`.
pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// `T^n = cos^n(θ) R_{nθ}`.
pub fn closed_form_dr_power(cfg: &PlaneConfig, n: u32) -> Matrix2<f64> {
    let theta = cfg.theta;
    rotation(f64::from(n) * theta) * theta.cos().powi(n as i32)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineNorms {
    /// `|T^n x|`
    pub dr_norm: f64,
    /// `|P_U T^n x|`
    pub shadow_norm: f64,
    /// `|(P_V P_U)^n x|`
    pub map_norm: f64,
}

pub fn closed_form_norms(cfg: &PlaneConfig, x: &Vector2<f64>, n: u32) -> LineNorms {
    norms_at(cfg.theta, x, n)
}

/// Closed forms for any `theta` in `[0, pi/2]`; `theta = 0` is `U = V`.
fn norms_at(theta: f64, x: &Vector2<f64>, n: u32) -> LineNorms {
    let c = theta.cos();
    let cn = c.powi(n as i32);
    let nt = f64::from(n) * theta;
    let map_norm = if n == 0 {
        x.norm()
    } else {
        c.powi(2 * n as i32 - 1) * x[0].abs()
    };
    LineNorms {
        dr_norm: cn * x.norm(),
        shadow_norm: cn * (nt.cos() * x[0] - nt.sin() * x[1]).abs(),
        map_norm,
    }
}

/// The three curves for `n = 0..=n_max`.
pub fn figure_curves(cfg: &PlaneConfig, x: &Vector2<f64>, n_max: u32) -> Vec<(u32, LineNorms)> {
    (0..=n_max)
        .map(|n| (n, closed_form_norms(cfg, x, n)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceQuantity {
    Dr,
    Map,
    Shadow,
}

impl SurfaceQuantity {
    fn pick(self, norms: &LineNorms) -> f64 {
        match self {
            SurfaceQuantity::Dr => norms.dr_norm,
            SurfaceQuantity::Map => norms.map_norm,
            SurfaceQuantity::Shadow => norms.shadow_norm,
        }
    }
}

impl fmt::Display for SurfaceQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurfaceQuantity::Dr => "DR",
            SurfaceQuantity::Map => "MAP",
            SurfaceQuantity::Shadow => "SHADOW",
        })
    }
}

/// `theta(t) = (pi/2) t^3`, stretching the small-angle end of `[0, 1]`.
pub fn surface_angle(t: f64) -> f64 {
    FRAC_PI_2 * t.powi(3)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub t: f64,
    pub n: u32,
    pub value: f64,
}

/// Evaluates `quantity` at `x = e_0` over the grid, `t`-major.
pub fn figure_surface(
    t_grid: &[f64],
    n_grid: &[u32],
    quantity: SurfaceQuantity,
) -> Result<Vec<SurfacePoint>> {
    if t_grid.is_empty() || n_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "surface grids must be nonempty".into(),
        ));
    }
    if let Some(t) = t_grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidParameter(format!(
            "grid parameter {t} outside [0, 1]"
        )));
    }
    let e0 = Vector2::new(1.0, 0.0);
    Ok(t_grid
        .iter()
        .flat_map(|&t| {
            n_grid.iter().map(move |&n| SurfacePoint {
                t,
                n,
                value: quantity.pick(&norms_at(surface_angle(t), &e0, n)),
            })
        })
        .collect())
}

/// Columnar text: `# quantity theta_param n value` header, one point per line.
pub fn write_surface<W: Write>(
    out: &mut W,
    quantity: SurfaceQuantity,
    points: &[SurfacePoint],
) -> io::Result<()> {
    writeln!(out, "# quantity theta_param n value")?;
    for p in points {
        writeln!(out, "{} {} {} {:e}", quantity, p.t, p.n, p.value)?;
    }
    Ok(())
}
