//! Hermitian eigendecomposition, eigenvalue clustering and the spectrum of a projection pair.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::OperatorMatrix;
use super::tolerance::Tolerances;
use crate::error::{ProjError, Result};

/// `S = V diag(λ) V*` with `λ` ascending and `V` unitary.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: OperatorMatrix,
}

/// A maximal run of sorted eigenvalues whose consecutive gaps are within the clustering width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    /// Mean of the merged eigenvalues.
    pub value: f64,
    pub start: usize,
    pub end: usize,
}

impl Cluster {
    pub fn multiplicity(&self) -> usize {
        self.end - self.start
    }
}

pub fn hermitian_eig(s: &OperatorMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    s.require_self_adjoint(tol.eq)?;
    Ok(hermitian_eig_unchecked(s))
}

/// Eigendecomposition of the Hermitian part, skipping the self-adjointness check.
pub(crate) fn hermitian_eig_unchecked(s: &OperatorMatrix) -> SpectralDecomposition {
    let n = s.dim();
    if n == 0 {
        return SpectralDecomposition { eigenvalues: Vec::new(), eigenvectors: OperatorMatrix::zeros(0) };
    }
    let (values, vectors) = super::solve::symmetric_eigen(s.hermitian_part().inner());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let v = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    SpectralDecomposition { eigenvalues, eigenvectors: OperatorMatrix::from_inner(v) }
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn clusters(&self, width: f64) -> Vec<Cluster> {
        cluster_sorted(&self.eigenvalues, width)
    }

    /// `V diag(λ) V*`.
    pub fn reconstruct(&self) -> OperatorMatrix {
        self.map_values(|_, x| x)
    }

    fn map_values(&self, f: impl Fn(usize, f64) -> f64) -> OperatorMatrix {
        let n = self.dim();
        let v = self.eigenvectors.inner();
        let mut scaled = v.clone();
        for c in 0..n {
            let w = Complex64::new(f(c, self.eigenvalues[c]), 0.0);
            for r in 0..n {
                scaled[(r, c)] *= w;
            }
        }
        OperatorMatrix::from_inner(scaled * v.adjoint())
    }

    /// `f(S)`, with `f` evaluated once per cluster at the cluster mean.
    pub fn apply<F>(&self, width: f64, f: F) -> Result<OperatorMatrix>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let clusters = self.clusters(width);
        let mut values = vec![0.0; self.dim()];
        for c in &clusters {
            let y = f(c.value)?;
            for v in values.iter_mut().take(c.end).skip(c.start) {
                *v = y;
            }
        }
        Ok(self.map_values(|i, _| values[i]))
    }

    /// Spectral projection onto the clusters whose mean satisfies `keep`.
    pub fn projection_where(&self, width: f64, keep: impl Fn(f64) -> bool) -> OperatorMatrix {
        let clusters = self.clusters(width);
        let mut values = vec![0.0; self.dim()];
        for c in &clusters {
            if keep(c.value) {
                for v in values.iter_mut().take(c.end).skip(c.start) {
                    *v = 1.0;
                }
            }
        }
        self.map_values(|i, _| values[i])
    }

    /// Columns of `V` belonging to clusters whose mean satisfies `keep`.
    pub fn eigenvectors_where(&self, width: f64, keep: impl Fn(f64) -> bool) -> DMatrix<Complex64> {
        let cols: Vec<usize> =
            self.clusters(width).iter().filter(|c| keep(c.value)).flat_map(|c| c.start..c.end).collect();
        let v = self.eigenvectors.inner();
        DMatrix::from_fn(self.dim(), cols.len(), |r, c| v[(r, cols[c])])
    }
}

pub(crate) fn cluster_sorted(values: &[f64], width: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > width {
            if i > start {
                let mean = values[start..i].iter().sum::<f64>() / (i - start) as f64;
                out.push(Cluster { value: mean, start, end: i });
            }
            start = i;
        }
    }
    out
}

/// Clustered values of an arbitrary list of reals, deduplicated.
pub fn cluster_values(values: &[f64], width: f64) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cluster_sorted(&v, width).into_iter().map(|c| c.value).collect()
}

/// Pin values within `width` of 0 or 1 to the endpoint and clamp into `[0, 1]`.
pub(crate) fn snap_unit(x: f64, width: f64) -> f64 {
    if x <= width {
        0.0
    } else if x >= 1.0 - width {
        1.0
    } else {
        x
    }
}

/// `σ(PQ)` as a set, read off the clustered spectrum of `PQP`.
pub fn spectrum_of_pair(p: &OperatorMatrix, q: &OperatorMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    p.require_same_dim(q)?;
    p.require_projection(tol.eq)?;
    q.require_projection(tol.eq)?;
    Ok(pair_spectrum_unchecked(p, q, tol))
}

pub(crate) fn pair_spectrum_unchecked(p: &OperatorMatrix, q: &OperatorMatrix, tol: &Tolerances) -> Vec<f64> {
    let pqp = p * q * p;
    let eig = hermitian_eig_unchecked(&pqp);
    let mut out: Vec<f64> = eig.clusters(tol.cluster).iter().map(|c| snap_unit(c.value, tol.cluster)).collect();
    out.dedup_by(|a, b| (*a - *b).abs() <= tol.cluster);
    out
}

/// Symmetric Hausdorff distance between finite sets of reals. Empty vs empty is 0.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter().map(|u| y.iter().map(|v| (u - v).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Symmetric Hausdorff distance between finite sets of complex numbers.
pub fn hausdorff_complex(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter().map(|u| y.iter().map(|v| (u - v).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

pub fn require_finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ProjError::Format(format!("{what} is not finite")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn diagonal_input_sorted() {
        let s = OperatorMatrix::from_real_diagonal(&[3.0, 1.0]);
        let e = hermitian_eig(&s, &tol()).unwrap();
        assert_eq!(e.eigenvalues.len(), 2);
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 3.0).abs() < 1e-14);
        // eigenvector for 1 is e_2 up to phase
        let v = e.eigenvectors.inner();
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((v[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let e = hermitian_eig(&OperatorMatrix::zeros(4), &tol()).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 4]);
    }

    #[test]
    fn half_ones() {
        let s = OperatorMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let e = hermitian_eig(&s, &tol()).unwrap();
        assert!(e.eigenvalues[0].abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let v = e.eigenvectors.inner();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[(0, 1)].norm() - r).abs() < 1e-14 && (v[(1, 1)].norm() - r).abs() < 1e-14);
        assert!((v[(0, 1)] - v[(1, 1)]).norm() < 1e-14);
        assert!(e.reconstruct().distance(&s) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let s = OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&s, &tol()), Err(ProjError::NotSelfAdjoint { .. })));
    }

    #[test]
    fn clustering_merges_close_values() {
        let c = cluster_sorted(&[0.0, 1e-9, 0.5, 0.5 + 5e-8, 1.0], 1e-7);
        assert_eq!(c.len(), 3);
        assert_eq!(c[1].multiplicity(), 2);
    }

    #[test]
    fn pair_spectrum_basic() {
        let i = OperatorMatrix::identity(3);
        assert_eq!(spectrum_of_pair(&i, &i, &tol()).unwrap(), vec![1.0]);
        let p = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
        let q = OperatorMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(spectrum_of_pair(&p, &q, &tol()).unwrap(), vec![0.0]);
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff(&[0.0, 0.5], &[0.0, 0.5]), 0.0);
        assert!((hausdorff(&[0.0, 0.5], &[0.0]) - 0.5).abs() < 1e-15);
        assert!((hausdorff(&[0.1], &[0.0, 0.3]) - 0.2).abs() < 1e-15);
    }
}
