//! Fixture generators shared by the suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::calculus::ScalarFunction;
use crate::error::Result;
use crate::numeric::fixtures::{gaussian_matrix, haar_unitary, pair_from_angles_with, random_angles};
use crate::numeric::spectral::{hermitian_eig_unchecked, snap_unit};
use crate::numeric::{OperatorMatrix, Tolerances};

/// Angles stay this far inside `(0, π/2)` so that no spectral point sits near 0 or 1.
pub(crate) const ANGLE_LO: f64 = 0.15;
pub(crate) const ANGLE_HI: f64 = 1.42;

pub(crate) fn dim(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi.max(lo))
}

/// Which trivial summands a pair fixture may contain.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Extras {
    /// `P = 1, Q = 0`.
    pub p: bool,
    /// `P = 0, Q = 1`.
    pub q: bool,
    pub kernel: bool,
    /// `P = Q = 1`.
    pub both: bool,
}

impl Extras {
    pub const ALL: Extras = Extras { p: true, q: true, kernel: true, both: true };
    /// Summands compatible with `‖P − Q‖ < 1`.
    pub const CLOSE: Extras = Extras { p: false, q: false, kernel: true, both: true };
}

/// Random pair in generic position plus random trivial summands, total dimension at most
/// `max(budget, 2·min_angles)`.
pub(crate) fn pair(
    rng: &mut impl Rng,
    budget: usize,
    extras: Extras,
    min_angles: usize,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let budget = budget.max(2 * min_angles).max(1);
    let max_angles = (budget / 2).max(min_angles);
    let a = rng.random_range(min_angles..=max_angles);
    let mut left = budget - 2 * a;
    let mut take = |allowed: bool, rng: &mut dyn rand::RngCore| -> usize {
        if !allowed || left == 0 {
            return 0;
        }
        let k = rng.random_range(0..=left.min(2));
        left -= k;
        k
    };
    let ep = take(extras.p, rng);
    let eq = take(extras.q, rng);
    let eb = take(extras.both, rng);
    let mut ek = take(extras.kernel, rng);
    if a == 0 && ep + eq + eb + ek == 0 {
        ek = 1;
    }
    let angles = random_angles(a, ANGLE_LO, ANGLE_HI, rng);
    pair_from_angles_with(&angles, ep, eq, ek, eb, rng)
}

/// Columns spanning the range of a projection.
pub(crate) fn range_basis(p: &OperatorMatrix) -> DMatrix<Complex64> {
    hermitian_eig_unchecked(p).eigenvectors_where(0.0, |x| x > 0.5)
}

/// Projection onto a random `k`-dimensional subspace of the range of `p`.
pub(crate) fn sub_projection(p: &OperatorMatrix, k: usize, rng: &mut impl Rng) -> OperatorMatrix {
    let basis = range_basis(p);
    let m = basis.ncols();
    let w = haar_unitary(m, rng);
    let cols = basis * w.inner().columns(0, k.min(m));
    OperatorMatrix::range_projection(&cols)
}

/// `exp(iηH)` for a random Hermitian `H` of norm 1 supported on `support` (or everywhere).
pub(crate) fn unitary_near(n: usize, eta: f64, support: Option<&OperatorMatrix>, rng: &mut impl Rng) -> OperatorMatrix {
    let g = OperatorMatrix::from_inner(gaussian_matrix(n, n, rng)).hermitian_part();
    let h = match support {
        Some(e) => (e * &g * e).hermitian_part(),
        None => g,
    };
    let scale = h.norm().max(1e-300);
    let eig = hermitian_eig_unchecked(&h);
    let v = eig.eigenvectors.inner();
    let mut scaled = v.clone();
    for (c, &l) in eig.eigenvalues.iter().enumerate() {
        let z = Complex64::from_polar(1.0, eta * l / scale);
        scaled.column_mut(c).iter_mut().for_each(|x| *x *= z);
    }
    OperatorMatrix::from_inner(scaled * v.adjoint())
}

/// Partial isometry from the range of `from` onto the range of `to` (equal ranks), with a random
/// unitary in between.
pub(crate) fn basis_map(from: &OperatorMatrix, to: &OperatorMatrix, rng: &mut impl Rng) -> OperatorMatrix {
    let a = range_basis(from);
    let b = range_basis(to);
    let w = haar_unitary(a.ncols(), rng);
    OperatorMatrix::from_inner(b * w.inner() * a.adjoint())
}

/// `f(S)` evaluated on the eigenvalues of `S` after pinning values within the clustering width to
/// 0 and 1, independently of the clustering used by the library.
pub(crate) fn oracle_apply(s: &OperatorMatrix, f: impl Fn(f64) -> f64, tol: &Tolerances) -> OperatorMatrix {
    let eig = hermitian_eig_unchecked(s);
    let v = eig.eigenvectors.inner();
    let mut scaled = v.clone();
    for (c, &l) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(c).scale_mut(f(snap_unit(l, tol.cluster)));
    }
    OperatorMatrix::from_inner(scaled * v.adjoint())
}

/// Random admissible function on `[0, 1]`: piecewise linear, χ-type, cap or constant level.
/// With `fix_one`, `f(1) = 1`.
pub(crate) fn function(rng: &mut impl Rng, fix_one: bool) -> Result<ScalarFunction> {
    let end = |rng: &mut dyn rand::RngCore| {
        if fix_one {
            1.0
        } else {
            rng.random_range(0.0..=1.0)
        }
    };
    match rng.random_range(0..4) {
        0 | 1 => {
            let jump = rng.random_range(0..2) == 1;
            let k = rng.random_range(0..4);
            let mut xs: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let y0 = if jump { rng.random_range(0.0..=1.0) } else { 0.0 };
            let mut bp = vec![(0.0, y0)];
            bp.extend(xs.into_iter().map(|x| (x, rng.random_range(0.0..=1.0))));
            bp.push((1.0, end(rng)));
            ScalarFunction::new(bp, jump)
        }
        2 if !fix_one => ScalarFunction::cap(rng.random_range(0.05..0.95)),
        _ => ScalarFunction::constant(end(rng)),
    }
}

/// Piecewise-linear function equal to the identity near 0 and 1.
pub(crate) fn smooth_function(rng: &mut impl Rng) -> Result<ScalarFunction> {
    let mid = [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
    ScalarFunction::new(vec![(0.0, 0.0), (0.05, 0.05), (0.4, mid[0]), (0.6, mid[1]), (0.95, 0.95), (1.0, 1.0)], false)
}
