//! One-sided Jacobi SVD.
//!
//! nalgebra 0.35's bidiagonal SVD can return wrong singular triplets at its
//! default tolerance when singular values repeat, which is the normal case for
//! `Q_U^T Q_V` of intersecting subspaces. Jacobi rotations are slower but
//! accurate to working precision relative to each singular value, and the
//! matrices here are at most a few hundred columns wide.

use nalgebra::{DMatrix, DVector};

const MAX_SWEEPS: usize = 100;

/// Thin SVD `A = U diag(s) V^T` with `r = min(m, n)` columns in `U` and `V`,
/// singular values in descending order.
///
/// Left vectors of zero singular values are zero columns.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    /// Minimum-norm least-squares solution, discarding singular values at or
    /// below `rcond * s_max`.
    pub fn solve(&self, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
        let cut = rcond * self.singular_values.iter().copied().fold(0.0, f64::max);
        let mut coeffs = self.u.tr_mul(b);
        for (c, s) in coeffs.iter_mut().zip(self.singular_values.iter()) {
            *c = if *s > cut { *c / s } else { 0.0 };
        }
        &self.v * coeffs
    }
}

pub fn svd(a: &DMatrix<f64>) -> Svd {
    if a.nrows() < a.ncols() {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                if rotate(w.as_mut_slice(), m, p, q, v.as_mut_slice(), n) {
                    rotated = true;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::zeros(m, n);
    let mut vs = DMatrix::zeros(n, n);
    let mut s = DVector::zeros(n);
    for (k, &j) in order.iter().enumerate() {
        s[k] = norms[j];
        if norms[j] > 0.0 {
            u.set_column(k, &(w.column(j) / norms[j]));
        }
        vs.set_column(k, &v.column(j));
    }
    Svd {
        u,
        singular_values: s,
        v: vs,
    }
}

/// Singular values only, descending.
pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    svd(a).singular_values
}

/// Orthogonalizes columns `p < q` of the column-major `w` (height `m`) and
/// applies the same rotation to `v` (height `n`). Returns whether it rotated.
fn rotate(w: &mut [f64], m: usize, p: usize, q: usize, v: &mut [f64], n: usize) -> bool {
    let (head, tail) = w.split_at_mut(q * m);
    let (wp, wq) = (&mut head[p * m..(p + 1) * m], &mut tail[..m]);
    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
    for (a, b) in wp.iter().zip(wq.iter()) {
        alpha += a * a;
        beta += b * b;
        gamma += a * b;
    }
    if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
        return false;
    }
    let zeta = (beta - alpha) / (2.0 * gamma);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    let apply = |x: &mut [f64], y: &mut [f64]| {
        for (a, b) in x.iter_mut().zip(y.iter_mut()) {
            let (xa, yb) = (*a, *b);
            *a = c * xa - s * yb;
            *b = s * xa + c * yb;
        }
    };
    apply(wp, wq);
    let (head, tail) = v.split_at_mut(q * n);
    apply(&mut head[p * n..(p + 1) * n], &mut tail[..n]);
    true
}
