//! Iteration-capped wrappers around the nalgebra decompositions. On non-convergence the input is
//! conjugated by a fixed unitary and the solve is retried with a looser deflation threshold.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

const ATTEMPTS: usize = 4;

fn cap(n: usize) -> usize {
    200 * n + 2000
}

/// `F·diag(e^{i·a·k²})` with `F` the unitary DFT; the identity for `a = 0`.
fn conjugator(n: usize, attempt: usize) -> DMatrix<Complex64> {
    if attempt == 0 {
        return DMatrix::identity(n, n);
    }
    let scale = 1.0 / (n as f64).sqrt();
    let a = attempt as f64 - 1.0;
    DMatrix::from_fn(n, n, |r, c| {
        let angle = -2.0 * std::f64::consts::PI * (r * c) as f64 / n as f64 + a * (c * c) as f64 / n as f64;
        Complex64::from_polar(scale, angle)
    })
}

/// Deflation threshold of the given attempt: `ε, 16ε, 256ε, …`.
fn threshold(attempt: usize) -> f64 {
    f64::EPSILON * 16f64.powi(attempt as i32)
}

fn retry<T>(
    m: &DMatrix<Complex64>,
    solve: impl Fn(DMatrix<Complex64>, f64, usize) -> Option<T>,
    fix: impl Fn(T, &DMatrix<Complex64>) -> T,
) -> T {
    let n = m.nrows();
    for attempt in 0..ATTEMPTS {
        let w = conjugator(n, attempt);
        let conj = if attempt == 0 { m.clone() } else { w.adjoint() * m * &w };
        if let Some(out) = solve(conj, threshold(attempt), cap(n)) {
            return fix(out, &w);
        }
    }
    panic!("{n}x{n} decomposition failed to converge after {ATTEMPTS} conjugated attempts")
}

/// Eigenvalues (unsorted) and eigenvectors of a Hermitian matrix.
pub(crate) fn symmetric_eigen(m: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    retry(
        m,
        |x, eps, k| SymmetricEigen::try_new(x, eps, k).map(|e| (e.eigenvalues, e.eigenvectors)),
        |(vals, vecs), w| (vals, w * vecs),
    )
}

pub(crate) fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    retry(
        m,
        |x, eps, k| SVD::try_new(x, false, false, eps, k).map(|s| s.singular_values.iter().copied().collect()),
        |v, _| v,
    )
}

/// Diagonal of the complex Schur form.
pub(crate) fn schur_eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    retry(m, |x, eps, k| Schur::try_new(x, eps, k).map(|s| s.unpack().1.diagonal().iter().copied().collect()), |v, _| v)
}
