//! Finite-dimensional subspace algebra.
//!
//! A [`Subspace`] is stored as a `d x k` matrix with orthonormal columns.
//! Projection is `Q (Q^T x)`, so every operation here costs `O(dk)` per
//! vector; dense `d x d` projector matrices are only built on request.
//!
//! Principal angles come from the singular values of `Q_U^T Q_V`. The same
//! factorization yields the intersection `U ∩ V` (singular vectors whose
//! cosine is within [`ANGLE_ONE_TOL`] of one) and the Friedrichs cosine
//! (the next singular value, or zero when none remains).

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// Coordinates of a point in the ambient space `R^d`.
pub type Vector = DVector<f64>;

/// Maximum entry of `|Q^T Q - I|` accepted for an orthonormal basis.
pub const ORTHO_TOL: f64 = 1e-10;

/// A principal cosine at or above `1 - ANGLE_ONE_TOL` marks a direction of `U ∩ V`.
pub const ANGLE_ONE_TOL: f64 = 1e-8;

/// Rank threshold used by [`orthonormalize`]: `d * eps * (largest column norm)`.
pub fn rank_tol(ambient_dim: usize, largest_norm: f64) -> f64 {
    ambient_dim as f64 * f64::EPSILON * largest_norm
}

/// Anything with a nearest-point map in `R^d`.
pub trait Projector {
    fn ambient_dim(&self) -> usize;

    /// Nearest point to `x`. The caller guarantees `x.len() == ambient_dim()`.
    fn nearest_point(&self, x: &Vector) -> Vector;

    fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim(), x.len())?;
        Ok(self.nearest_point(x))
    }

    /// Euclidean distance from `x` to the set.
    fn distance_to(&self, x: &Vector) -> Result<f64> {
        check_dim(self.ambient_dim(), x.len())?;
        Ok((x - self.nearest_point(x)).norm())
    }
}

/// Columns of a `d x k` matrix that are orthonormal to [`ORTHO_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    columns: DMatrix<f64>,
}

impl OrthonormalBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let deviation = orthonormality_deviation(&columns);
        if deviation > ORTHO_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }
}

/// Max entry of `|Q^T Q - I|`; zero for an empty basis.
pub fn orthonormality_deviation(q: &DMatrix<f64>) -> f64 {
    let k = q.ncols();
    if k == 0 {
        return 0.0;
    }
    let gram = q.tr_mul(q) - DMatrix::<f64>::identity(k, k);
    gram.amax()
}

/// A linear subspace of `R^d` with an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: OrthonormalBasis,
}

impl Subspace {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(columns: DMatrix<f64>) -> Result<Self> {
        let ambient_dim = columns.nrows();
        if ambient_dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            ambient_dim,
            basis: OrthonormalBasis::new(columns)?,
        })
    }

    /// Span of arbitrary (possibly dependent) columns.
    pub fn from_columns(columns: &DMatrix<f64>) -> Result<Self> {
        let ambient_dim = columns.nrows();
        if ambient_dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            ambient_dim,
            basis: OrthonormalBasis {
                columns: pivoted_gram_schmidt(&empty(ambient_dim), columns, None),
            },
        })
    }

    /// The trivial subspace `{0}`.
    pub fn trivial(ambient_dim: usize) -> Result<Self> {
        Self::from_orthonormal(empty(ambient_dim))
    }

    /// The whole space `R^d`.
    pub fn full(ambient_dim: usize) -> Result<Self> {
        Self::from_orthonormal(DMatrix::identity(ambient_dim, ambient_dim))
    }

    /// `R * direction`.
    pub fn line(direction: &Vector) -> Result<Self> {
        orthonormalize(std::slice::from_ref(direction), direction.len())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rank()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        self.basis.columns()
    }

    pub fn orthonormal_basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    /// Dense `d x d` projector `Q Q^T`.
    pub fn projector_matrix(&self) -> DMatrix<f64> {
        let q = self.basis();
        q * q.transpose()
    }

    /// `2 P_S x - x`.
    pub fn reflect(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim, x.len())?;
        Ok(self.nearest_point(x) * 2.0 - x)
    }

    /// Orthogonal complement; dimension `d - k`.
    pub fn complement(&self) -> Subspace {
        let d = self.ambient_dim;
        let k = self.dim();
        let columns = pivoted_gram_schmidt(self.basis(), &DMatrix::identity(d, d), Some(d - k));
        Subspace {
            ambient_dim: d,
            basis: OrthonormalBasis { columns },
        }
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        Ok(angle_decomposition(self, other)?.1)
    }

    pub fn principal_angles(&self, other: &Subspace) -> Result<AngleSpectrum> {
        Ok(angle_decomposition(self, other)?.0)
    }

    /// True when `x` is within `tol * max(1, |x|)` of the subspace.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.ambient_dim && (x - self.nearest_point(x)).norm() <= tol * x.norm().max(1.0)
    }
}

impl Projector for Subspace {
    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn nearest_point(&self, x: &Vector) -> Vector {
        let q = self.basis();
        if q.ncols() == 0 {
            return Vector::zeros(x.len());
        }
        q * q.tr_mul(x)
    }
}

/// `anchor + direction`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    anchor: Vector,
    direction: Subspace,
}

impl AffineSubspace {
    pub fn new(anchor: Vector, direction: Subspace) -> Result<Self> {
        check_dim(direction.ambient_dim(), anchor.len())?;
        Ok(Self { anchor, direction })
    }

    pub fn linear(direction: Subspace) -> Self {
        let anchor = Vector::zeros(direction.ambient_dim());
        Self { anchor, direction }
    }

    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn direction(&self) -> &Subspace {
        &self.direction
    }

    pub fn reflect(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim(), x.len())?;
        Ok(self.nearest_point(x) * 2.0 - x)
    }
}

impl Projector for AffineSubspace {
    fn ambient_dim(&self) -> usize {
        self.direction.ambient_dim()
    }

    fn nearest_point(&self, x: &Vector) -> Vector {
        &self.anchor + self.direction.nearest_point(&(x - &self.anchor))
    }
}

/// Principal cosines of a pair of subspaces, largest first.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleSpectrum {
    pub cosines: Vec<f64>,
    pub intersection_dim: usize,
    pub friedrichs_cos: f64,
}

impl AngleSpectrum {
    /// Friedrichs angle in radians, in `(0, pi/2]`.
    pub fn friedrichs_angle(&self) -> f64 {
        self.friedrichs_cos.acos()
    }
}

/// Orthonormal basis for the span of `spanning`, rank cut at [`rank_tol`].
pub fn orthonormalize(spanning: &[Vector], ambient_dim: usize) -> Result<Subspace> {
    if ambient_dim == 0 {
        return Err(Error::ZeroDimension);
    }
    for v in spanning {
        check_dim(ambient_dim, v.len())?;
    }
    let columns = DMatrix::from_fn(ambient_dim, spanning.len(), |i, j| spanning[j][i]);
    Subspace::from_columns(&columns)
}

fn empty(d: usize) -> DMatrix<f64> {
    DMatrix::zeros(d, 0)
}

/// Column-pivoted modified Gram-Schmidt with reorthogonalization.
///
/// Extends the orthonormal `prefix` by directions drawn from `candidates`,
/// always taking the candidate with the largest residual norm next. Stops when
/// that norm drops to [`rank_tol`] or `limit` new columns have been produced.
/// Returns only the new columns.
fn pivoted_gram_schmidt(
    prefix: &DMatrix<f64>,
    candidates: &DMatrix<f64>,
    limit: Option<usize>,
) -> DMatrix<f64> {
    let d = candidates.nrows();
    let largest = candidates
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let tol = rank_tol(d, largest);
    let max_new = limit.unwrap_or(usize::MAX).min(d - prefix.ncols().min(d));

    let mut work = candidates.clone();
    if prefix.ncols() > 0 {
        for _ in 0..2 {
            work -= prefix * prefix.tr_mul(&work);
        }
    }

    let mut active: Vec<usize> = (0..work.ncols()).collect();
    let mut chosen: Vec<Vector> = Vec::new();
    while chosen.len() < max_new && !active.is_empty() {
        let (slot, norm) = active
            .iter()
            .enumerate()
            .map(|(slot, &j)| (slot, work.column(j).norm()))
            .fold(
                (0, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if norm <= tol {
            break;
        }
        let j = active.swap_remove(slot);
        let mut q: Vector = work.column(j) / norm;
        // second pass against everything accepted so far
        if prefix.ncols() > 0 {
            q -= prefix * prefix.tr_mul(&q);
        }
        for c in &chosen {
            q.axpy(-c.dot(&q), c, 1.0);
        }
        let n = q.norm();
        if n == 0.0 {
            continue;
        }
        q /= n;
        for &i in &active {
            let mut col = work.column_mut(i);
            let coef = q.dot(&col);
            col.axpy(-coef, &q, 1.0);
        }
        chosen.push(q);
    }
    if chosen.is_empty() {
        return empty(d);
    }
    DMatrix::from_columns(&chosen)
}

/// One SVD of `Q_U^T Q_V` gives both the angle spectrum and `U ∩ V`.
pub(crate) fn angle_decomposition(u: &Subspace, v: &Subspace) -> Result<(AngleSpectrum, Subspace)> {
    check_dim(u.ambient_dim(), v.ambient_dim())?;
    let d = u.ambient_dim();
    if u.dim() == 0 || v.dim() == 0 {
        let spectrum = AngleSpectrum {
            cosines: Vec::new(),
            intersection_dim: 0,
            friedrichs_cos: 0.0,
        };
        return Ok((spectrum, Subspace::trivial(d)?));
    }

    let cross = u.basis().tr_mul(v.basis());
    let svd = linalg::svd(&cross);
    let left = &svd.u;
    let cosines: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect();

    let intersection_dim = cosines
        .iter()
        .take_while(|&&c| c >= 1.0 - ANGLE_ONE_TOL)
        .count();
    let friedrichs_cos = cosines.get(intersection_dim).copied().unwrap_or(0.0);

    let directions: Vec<Vector> = (0..intersection_dim)
        .map(|i| u.basis() * left.column(i))
        .collect();
    let intersection = orthonormalize(&directions, d)?;

    Ok((
        AngleSpectrum {
            cosines,
            intersection_dim,
            friedrichs_cos,
        },
        intersection,
    ))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    use super::*;

    fn e(d: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(d);
        v[i] = 1.0;
        v
    }

    fn line_at(theta: f64) -> Subspace {
        Subspace::line(&dvector![theta.cos(), theta.sin()]).unwrap()
    }

    #[test]
    fn collinear_input_has_rank_one() {
        let s = orthonormalize(&[dvector![1.0, 0.0], dvector![2.0, 0.0]], 2).unwrap();
        assert_eq!(s.dim(), 1);
        assert_abs_diff_eq!(s.basis()[(0, 0)].abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_input_is_trivial() {
        let s = orthonormalize(&[], 3).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.ambient_dim(), 3);
    }

    /// Rank by exact row reduction over rationals-as-integers.
    fn integer_rank(rows: &[[i64; 3]]) -> usize {
        let mut m: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        let mut rank = 0;
        for col in 0..3 {
            let Some(p) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(rank, p);
            for r in 0..m.len() {
                if r != rank && m[r][col] != 0 {
                    let (a, b) = (m[rank][col], m[r][col]);
                    let pivot = m[rank].clone();
                    for (x, p) in m[r].iter_mut().zip(pivot) {
                        *x = *x * a - p * b;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn dependent_triple_has_rank_two() {
        let raw = [[1, 1, 0], [0, 1, 1], [1, 0, -1]];
        assert_eq!(integer_rank(&raw), 2);
        let vs: Vec<Vector> = raw
            .iter()
            .map(|r| Vector::from_iterator(3, r.iter().map(|&x| x as f64)))
            .collect();
        let s = orthonormalize(&vs, 3).unwrap();
        assert_eq!(s.dim(), 2);
        for v in &vs {
            assert!(s.contains(v, 1e-12));
        }
    }

    #[test]
    fn mismatched_vectors_are_rejected() {
        let err = orthonormalize(&[dvector![1.0, 0.0], dvector![1.0, 0.0, 0.0]], 2).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                found: 3
            }
        ));
        assert!(matches!(orthonormalize(&[], 0), Err(Error::ZeroDimension)));
    }

    #[test]
    fn reorthonormalizing_is_idempotent() {
        let vs = vec![dvector![1.0, 2.0, 3.0, 4.0], dvector![0.5, -1.0, 2.0, 0.0]];
        let s = orthonormalize(&vs, 4).unwrap();
        let cols: Vec<Vector> = s.basis().column_iter().map(|c| c.into_owned()).collect();
        let again = orthonormalize(&cols, 4).unwrap();
        assert_eq!(again.dim(), 2);
        let diff = s.projector_matrix() - again.projector_matrix();
        assert!(diff.amax() <= ORTHO_TOL);
    }

    #[test]
    fn project_examples() {
        let x_axis = Subspace::line(&e(2, 0)).unwrap();
        let p = x_axis.project(&dvector![3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(p, dvector![3.0, 0.0], epsilon = 1e-15);

        let zero = Subspace::trivial(2).unwrap();
        assert_eq!(zero.project(&dvector![3.0, 4.0]).unwrap(), Vector::zeros(2));

        let p = line_at(PI / 3.0).project(&dvector![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p, dvector![0.25, 3f64.sqrt() / 4.0], epsilon = 1e-15);

        assert!(matches!(
            x_axis.project(&dvector![1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reflect_examples() {
        let x = dvector![3.0, 4.0];
        let x_axis = Subspace::line(&e(2, 0)).unwrap();
        assert_abs_diff_eq!(
            x_axis.reflect(&x).unwrap(),
            dvector![3.0, -4.0],
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            Subspace::full(2).unwrap().reflect(&x).unwrap(),
            x,
            epsilon = 1e-15
        );
        assert_eq!(Subspace::trivial(2).unwrap().reflect(&x).unwrap(), -x);
    }

    #[test]
    fn complement_examples() {
        let c = Subspace::line(&e(2, 0)).unwrap().complement();
        assert_eq!(c.dim(), 1);
        assert_abs_diff_eq!(c.basis()[(0, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.basis()[(1, 0)].abs(), 1.0, epsilon = 1e-15);

        let full = Subspace::trivial(3).unwrap().complement();
        assert_eq!(full.dim(), 3);

        let s = orthonormalize(
            &[
                dvector![0.3, -1.2, 0.7, 2.0, 0.1],
                dvector![1.1, 0.4, -0.5, 0.2, 0.9],
            ],
            5,
        )
        .unwrap();
        let sc = s.complement();
        assert_eq!(sc.dim(), 3);
        let sum = s.projector_matrix() + sc.projector_matrix() - DMatrix::identity(5, 5);
        assert!(sum.amax() <= 1e-12);
        assert!(s.basis().tr_mul(sc.basis()).amax() <= ORTHO_TOL);
        let back = sc.complement();
        assert!((back.projector_matrix() - s.projector_matrix()).amax() <= 1e-12);
    }

    #[test]
    fn intersect_examples() {
        let (u, v) = (line_at(0.0), line_at(0.4));
        assert_eq!(u.intersect(&v).unwrap().dim(), 0);

        let w = orthonormalize(&[dvector![1.0, 2.0, 0.0], dvector![0.0, 1.0, 1.0]], 3).unwrap();
        let ww = w.intersect(&w).unwrap();
        assert_eq!(ww.dim(), 2);
        assert!((ww.projector_matrix() - w.projector_matrix()).amax() <= 1e-12);

        let u = orthonormalize(&[e(4, 1), e(4, 2)], 4).unwrap();
        let v = orthonormalize(&[e(4, 2), e(4, 3)], 4).unwrap();
        let i = u.intersect(&v).unwrap();
        assert_eq!(i.dim(), 1);
        assert_abs_diff_eq!(i.basis()[(2, 0)].abs(), 1.0, epsilon = 1e-14);

        assert!(matches!(
            u.intersect(&line_at(0.1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn two_lines_friedrichs_cosine() {
        let theta = PI / 17.0;
        let angles = line_at(0.0).principal_angles(&line_at(theta)).unwrap();
        assert_eq!(angles.intersection_dim, 0);
        assert_abs_diff_eq!(angles.friedrichs_cos, theta.cos(), epsilon = 1e-15);
    }

    #[test]
    fn nested_subspaces_have_zero_friedrichs_cosine() {
        let u = orthonormalize(&[e(3, 0)], 3).unwrap();
        let v = orthonormalize(&[e(3, 0), dvector![0.0, 1.0, 1.0]], 3).unwrap();
        let angles = u.principal_angles(&v).unwrap();
        assert_eq!(angles.intersection_dim, 1);
        assert_eq!(angles.friedrichs_cos, 0.0);
        assert_abs_diff_eq!(angles.friedrichs_angle(), PI / 2.0);
    }

    #[test]
    fn trivial_subspace_spectrum_is_empty() {
        let angles = Subspace::trivial(3)
            .unwrap()
            .principal_angles(&Subspace::full(3).unwrap())
            .unwrap();
        assert!(angles.cosines.is_empty());
        assert_eq!(angles.friedrichs_cos, 0.0);
    }

    #[test]
    fn distance_examples() {
        let x_axis = Subspace::line(&e(2, 0)).unwrap();
        assert_abs_diff_eq!(x_axis.distance_to(&dvector![3.0, 4.0]).unwrap(), 4.0);
        assert_eq!(x_axis.distance_to(&dvector![-2.0, 0.0]).unwrap(), 0.0);
        let shifted = AffineSubspace::new(dvector![1.0, 1.0], x_axis).unwrap();
        assert_abs_diff_eq!(shifted.distance_to(&dvector![0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn zero_ambient_dimension_rejected() {
        assert!(matches!(Subspace::trivial(0), Err(Error::ZeroDimension)));
        assert!(matches!(
            Subspace::from_orthonormal(DMatrix::from_element(2, 1, 1.0)),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
