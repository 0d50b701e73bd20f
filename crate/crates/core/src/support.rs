//! Support projections, quasi-inverses, spectral projections, functional calculus and polar
//! decomposition of well-supported operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ProjError, Result};
use crate::numeric::matrix::noise_floor;
use crate::numeric::spectral::{cluster_sorted, hermitian_eig, hermitian_eig_unchecked, SpectralDecomposition};
use crate::numeric::{OperatorMatrix, Tolerances};

/// A real function evaluated pointwise on a finite spectrum.
pub trait SpectralFunction {
    fn eval(&self, x: f64) -> Result<f64>;
}

impl<F: Fn(f64) -> f64> SpectralFunction for F {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok(self(x))
    }
}

#[derive(Debug, Clone)]
pub struct PolarParts {
    pub u: OperatorMatrix,
    pub abs_t: OperatorMatrix,
}

/// Thin SVD restricted to the singular values above the noise floor.
struct ThinSvd {
    u: DMatrix<Complex64>,
    sigma: Vec<f64>,
    v: DMatrix<Complex64>,
}

/// Singular triples from the eigenpairs `(σ, (u; v)/√2)` of `[[0, T], [T*, 0]]`.
fn thin_svd(t: &OperatorMatrix) -> ThinSvd {
    let n = t.dim();
    if n == 0 {
        return ThinSvd { u: DMatrix::zeros(0, 0), sigma: vec![], v: DMatrix::zeros(0, 0) };
    }
    let mut dilation = DMatrix::zeros(2 * n, 2 * n);
    dilation.view_mut((0, n), (n, n)).copy_from(t.inner());
    dilation.view_mut((n, 0), (n, n)).copy_from(&t.inner().adjoint());
    let eig = hermitian_eig_unchecked(&OperatorMatrix::from_inner(dilation));
    let largest = eig.eigenvalues.last().copied().unwrap_or(0.0);
    let floor = noise_floor(largest, n);
    let keep: Vec<usize> = (0..2 * n).rev().filter(|&i| eig.eigenvalues[i] > floor).collect();
    let sigma = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    let x = eig.eigenvectors.inner();
    let root2 = Complex64::new(std::f64::consts::SQRT_2, 0.0);
    let ur = DMatrix::from_fn(n, keep.len(), |r, c| x[(r, keep[c])] * root2);
    let vr = DMatrix::from_fn(n, keep.len(), |r, c| x[(n + r, keep[c])] * root2);
    ThinSvd { u: ur, sigma, v: vr }
}

fn scale_columns(m: &DMatrix<Complex64>, s: &[f64]) -> DMatrix<Complex64> {
    let mut out = m.clone();
    for (c, &w) in s.iter().enumerate() {
        out.column_mut(c).scale_mut(w);
    }
    out
}

/// `(min σ(TT*) \ {0} > τ_wellsup, min σ(TT*) \ {0})`; the zero operator reports `(true, ∞)`.
pub fn is_well_supported(t: &OperatorMatrix, tol: &Tolerances) -> (bool, f64) {
    let gap = thin_svd(t).sigma.iter().map(|s| s * s).fold(f64::INFINITY, f64::min);
    (gap > tol.wellsup, gap)
}

fn require_well_supported(t: &OperatorMatrix, tol: &Tolerances) -> Result<ThinSvd> {
    let svd = thin_svd(t);
    let gap = svd.sigma.iter().map(|s| s * s).fold(f64::INFINITY, f64::min);
    if gap > tol.wellsup {
        Ok(svd)
    } else {
        Err(ProjError::NumericallyDegenerate { gap })
    }
}

/// `[T]`, the projection onto the range of `T`.
pub fn left_support(t: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    let svd = require_well_supported(t, tol)?;
    Ok(OperatorMatrix::range_projection(&svd.u))
}

/// `[T*]`.
pub fn right_support(t: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    let svd = require_well_supported(t, tol)?;
    Ok(OperatorMatrix::range_projection(&svd.v))
}

/// Moore-Penrose inverse `T* (TT*)⁻¹`.
pub fn quasi_inverse(t: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    let svd = require_well_supported(t, tol)?;
    let inv: Vec<f64> = svd.sigma.iter().map(|s| 1.0 / s).collect();
    Ok(OperatorMatrix::from_inner(scale_columns(&svd.v, &inv) * svd.u.adjoint()))
}

pub fn polar(t: &OperatorMatrix, tol: &Tolerances) -> Result<PolarParts> {
    let svd = require_well_supported(t, tol)?;
    let u = OperatorMatrix::from_inner(&svd.u * svd.v.adjoint());
    let abs_t = OperatorMatrix::from_inner(scale_columns(&svd.v, &svd.sigma) * svd.v.adjoint());
    Ok(PolarParts { u, abs_t })
}

fn check_threshold(eig: &SpectralDecomposition, t: f64, tol: &Tolerances) -> Result<()> {
    for c in eig.clusters(tol.cluster) {
        let lo = eig.eigenvalues[c.start];
        let hi = eig.eigenvalues[c.end - 1];
        if t >= lo - tol.cluster && t <= hi + tol.cluster {
            return Err(ProjError::AmbiguousThreshold { threshold: t, eigenvalue: c.value });
        }
    }
    Ok(())
}

/// `E⊥_S(t)`: spectral projection of `S` for `(t, ∞)`, or `[t, ∞)` when `strict`.
///
/// Both variants coincide once `t` is known to sit in a spectral gap, which is enforced.
pub fn spectral_projection_above(s: &OperatorMatrix, t: f64, strict: bool, tol: &Tolerances) -> Result<OperatorMatrix> {
    let eig = hermitian_eig(s, tol)?;
    check_threshold(&eig, t, tol)?;
    Ok(if strict {
        eig.projection_where(tol.cluster, |x| x >= t)
    } else {
        eig.projection_where(tol.cluster, |x| x > t)
    })
}

/// Midpoint of the widest sub-interval of `(lo, hi)` free of the given spectral points.
pub fn gap_threshold(points: &[f64], lo: f64, hi: f64) -> f64 {
    let mut inside: Vec<f64> = points.iter().cloned().filter(|&x| x > lo && x < hi).collect();
    inside.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut edges = vec![lo];
    edges.extend(inside);
    edges.push(hi);
    let (mut best, mut width) = ((lo + hi) / 2.0, -1.0);
    for w in edges.windows(2) {
        if w[1] - w[0] > width {
            width = w[1] - w[0];
            best = (w[0] + w[1]) / 2.0;
        }
    }
    best
}

/// Spectral projection of `S` above a threshold snapped into the widest gap of `(lo, hi)`.
///
/// Any projection `P` returned satisfies `E⊥_S(hi) ≤ P ≤ E⊥_S(lo)`.
pub fn projection_in_gap(s: &OperatorMatrix, lo: f64, hi: f64, tol: &Tolerances) -> Result<OperatorMatrix> {
    let eig = hermitian_eig(s, tol)?;
    let values: Vec<f64> = eig.clusters(tol.cluster).iter().map(|c| c.value).collect();
    let t = gap_threshold(&values, lo, hi);
    Ok(eig.projection_where(tol.cluster, |x| x > t))
}

/// `f(S)` by pointwise evaluation on the clustered spectrum.
pub fn apply_function<F: SpectralFunction + ?Sized>(
    s: &OperatorMatrix,
    f: &F,
    tol: &Tolerances,
) -> Result<OperatorMatrix> {
    let eig = hermitian_eig(s, tol)?;
    eig.apply(tol.cluster, |x| f.eval(x))
}

/// Clustered spectrum of a self-adjoint matrix as a set.
pub fn spectrum(s: &OperatorMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let eig = hermitian_eig(s, tol)?;
    Ok(cluster_sorted(&eig.eigenvalues, tol.cluster).iter().map(|c| c.value).collect())
}
