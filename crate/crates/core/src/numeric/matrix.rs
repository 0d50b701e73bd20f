//! Dense square complex matrices: the concrete representation of an algebra element.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ProjError, Result};

pub type Vector = DVector<Complex64>;

/// Singular values at or below this floor are exact zeros in the eyes of
/// every rank and support computation.
pub(crate) fn noise_floor(largest: f64, dim: usize) -> f64 {
    256.0 * f64::EPSILON * (dim.max(1) as f64) * largest.max(1.0)
}

#[derive(Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorMatrix{}", self.0)
    }
}

impl OperatorMatrix {
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(ProjError::DimensionMismatch { expected: inner.nrows(), found: inner.ncols() });
        }
        Ok(OperatorMatrix(inner))
    }

    pub(crate) fn from_inner(inner: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        OperatorMatrix(inner)
    }

    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        OperatorMatrix(DMatrix::from_fn(dim, dim, f))
    }

    /// Real matrix from row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(ProjError::DimensionMismatch { expected: dim, found: row.len() });
            }
        }
        Ok(Self::from_fn(dim, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    /// `v w*`.
    pub fn outer(v: &Vector, w: &Vector) -> Self {
        OperatorMatrix(v * w.adjoint())
    }

    /// Orthogonal projection onto the span of a single nonzero vector.
    pub fn rank_one_projection(v: &Vector) -> Self {
        let n2 = v.norm_squared();
        OperatorMatrix(v * v.adjoint() / Complex64::new(n2, 0.0))
    }

    /// Projection onto the span of the columns of an isometry (orthonormal columns).
    pub fn range_projection(columns: &DMatrix<Complex64>) -> Self {
        OperatorMatrix(columns * columns.adjoint())
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[OperatorMatrix]) -> Self {
        let dim: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut out = DMatrix::zeros(dim, dim);
        let mut offset = 0;
        for b in blocks {
            let n = b.dim();
            out.view_mut((offset, offset), (n, n)).copy_from(&b.0);
            offset += n;
        }
        OperatorMatrix(out)
    }

    pub fn block(&self, offset: usize, size: usize) -> OperatorMatrix {
        OperatorMatrix(self.0.view((offset, offset), (size, size)).into_owned())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix(self.0.adjoint())
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        Self::identity(self.dim()) - self
    }

    pub fn scale(&self, s: f64) -> Self {
        OperatorMatrix(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        OperatorMatrix(&self.0 * s)
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.0 * v
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `(S + S*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        OperatorMatrix((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut sv = super::solve::singular_values(&self.0);
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// `||self - other||`.
    pub fn distance(&self, other: &OperatorMatrix) -> f64 {
        (self - other).norm()
    }

    /// Number of singular values above the numerical noise floor.
    pub fn rank(&self) -> usize {
        let sv = self.singular_values();
        let floor = noise_floor(sv.first().copied().unwrap_or(0.0), self.dim());
        sv.iter().filter(|&&s| s > floor).count()
    }

    pub fn self_adjoint_residual(&self) -> f64 {
        (self - &self.adjoint()).norm()
    }

    pub fn idempotent_residual(&self) -> f64 {
        (&(self * self) - self).norm()
    }

    /// `max(||P - P*||, ||P^2 - P||)`.
    pub fn projection_residual(&self) -> f64 {
        self.self_adjoint_residual().max(self.idempotent_residual())
    }

    /// `||U U* U - U||`.
    pub fn partial_isometry_residual(&self) -> f64 {
        (&(&(self * &self.adjoint()) * self) - self).norm()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_residual() <= tol
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.projection_residual() <= tol
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        self.idempotent_residual() <= tol
    }

    pub fn is_partial_isometry(&self, tol: f64) -> bool {
        self.partial_isometry_residual() <= tol
    }

    /// Eigenvalues of a general (not necessarily normal) matrix via the complex Schur form.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        super::solve::schur_eigenvalues(&self.0)
    }

    pub(crate) fn require_self_adjoint(&self, tol: f64) -> Result<()> {
        let residual = self.self_adjoint_residual();
        if residual > tol {
            return Err(ProjError::NotSelfAdjoint { residual });
        }
        Ok(())
    }

    pub(crate) fn require_projection(&self, tol: f64) -> Result<()> {
        let residual = self.projection_residual();
        if residual > tol {
            return Err(ProjError::NotProjection { residual });
        }
        Ok(())
    }

    pub fn require_partial_isometry(&self, tol: f64) -> Result<()> {
        let residual = self.partial_isometry_residual();
        if residual > tol {
            return Err(ProjError::NotPartialIsometry { residual });
        }
        Ok(())
    }

    pub(crate) fn require_same_dim(&self, other: &OperatorMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(ProjError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from(self)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                OperatorMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $trait<OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: OperatorMatrix) -> OperatorMatrix {
                OperatorMatrix(self.0 $op rhs.0)
            }
        }
        impl $trait<&OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                OperatorMatrix(self.0 $op &rhs.0)
            }
        }
        impl $trait<OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: OperatorMatrix) -> OperatorMatrix {
                OperatorMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-&self.0)
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-self.0)
    }
}

/// Wire format: `{"dim": n, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&OperatorMatrix> for MatrixJson {
    fn from(m: &OperatorMatrix) -> Self {
        let n = m.dim();
        let re = (0..n).map(|i| (0..n).map(|j| m.0[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m.0[(i, j)].im).collect()).collect();
        MatrixJson { dim: n, re, im }
    }
}

impl TryFrom<&MatrixJson> for OperatorMatrix {
    type Error = ProjError;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        let n = j.dim;
        if n == 0 {
            return Err(ProjError::Format("matrix dimension must be positive".into()));
        }
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !rows_ok(&j.re) || !rows_ok(&j.im) {
            return Err(ProjError::Format(format!("expected {n}x{n} arrays for re and im")));
        }
        Ok(OperatorMatrix::from_fn(n, |r, c| Complex64::new(j.re[r][c], j.im[r][c])))
    }
}

impl TryFrom<MatrixJson> for OperatorMatrix {
    type Error = ProjError;

    fn try_from(j: MatrixJson) -> Result<Self> {
        OperatorMatrix::try_from(&j)
    }
}

impl Serialize for OperatorMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(deserializer)?;
        OperatorMatrix::try_from(&j).map_err(serde::de::Error::custom)
    }
}

/// Operator norm. Free-function form of [`OperatorMatrix::norm`].
pub fn operator_norm(t: &OperatorMatrix) -> f64 {
    t.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        assert!((operator_norm(&OperatorMatrix::identity(5)) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&OperatorMatrix::from_real_diagonal(&[2.0, -3.0])) - 3.0).abs() < 1e-14);
        let t = OperatorMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert!((operator_norm(&t) - 2.0).abs() < 1e-14);
        assert_eq!(operator_norm(&OperatorMatrix::zeros(3)), 0.0);
    }

    #[test]
    fn predicates() {
        let p = OperatorMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(p.is_projection(1e-12));
        let i = OperatorMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(i.is_idempotent(1e-12));
        assert!(!i.is_projection(1e-3));
        let u = OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(u.is_partial_isometry(1e-12));
        assert_eq!(u.rank(), 1);
    }

    #[test]
    fn json_round_trip_and_rejects_ragged() {
        let m = OperatorMatrix::from_fn(3, |i, j| Complex64::new(i as f64, j as f64 - 1.0));
        let s = serde_json::to_string(&m).unwrap();
        let back: OperatorMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
        let bad = r#"{"dim":2,"re":[[1,0]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<OperatorMatrix>(bad).is_err());
    }

    #[test]
    fn direct_sum_and_block() {
        let a = OperatorMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = OperatorMatrix::from_real_diagonal(&[3.0]);
        let s = OperatorMatrix::direct_sum(&[a.clone(), b.clone()]);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.block(0, 2), a);
        assert_eq!(s.block(2, 1), b);
    }
}
