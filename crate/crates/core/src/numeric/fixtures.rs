//! Seeded random fixtures: Haar unitaries, projections with prescribed principal angles,
//! and well-conditioned random operators.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{OperatorMatrix, Vector};
use crate::error::{ProjError, Result};

pub type FixtureRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Generator for one trial of one named check, independent of evaluation order.
pub fn trial_rng(seed: u64, check: &str, trial: usize) -> FixtureRng {
    let s = splitmix(splitmix(seed ^ hash_str(check)) ^ trial as u64);
    ChaCha8Rng::seed_from_u64(s)
}

pub fn seeded_rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| complex_gaussian(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / Complex64::new(n, 0.0);
        }
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of `diag(R)` removed.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> OperatorMatrix {
    if dim == 0 {
        return OperatorMatrix::zeros(0);
    }
    let qr = gaussian_matrix(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    OperatorMatrix::from_inner(q)
}

/// `dim × k` matrix with orthonormal columns spanning a uniformly random subspace.
pub fn random_isometry(dim: usize, k: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let u = haar_unitary(dim, rng);
    u.inner().columns(0, k).into_owned()
}

pub fn random_projection(dim: usize, rank: usize, rng: &mut impl Rng) -> OperatorMatrix {
    OperatorMatrix::range_projection(&random_isometry(dim, rank, rng))
}

/// Projection of uniformly random rank in `0..=dim`.
pub fn random_projection_any_rank(dim: usize, rng: &mut impl Rng) -> OperatorMatrix {
    let rank = rng.random_range(0..=dim);
    random_projection(dim, rank, rng)
}

/// `W diag(σ) V*` with `rank` singular values drawn from `[lo, hi]` and the rest exactly zero.
pub fn random_operator(dim: usize, rank: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> OperatorMatrix {
    let w = haar_unitary(dim, rng);
    let v = haar_unitary(dim, rng);
    let sigma: Vec<f64> = (0..dim).map(|i| if i < rank { rng.random_range(lo..=hi) } else { 0.0 }).collect();
    let d = OperatorMatrix::from_real_diagonal(&sigma);
    &w * &d * v.adjoint()
}

/// Random self-adjoint matrix with prescribed eigenvalues.
pub fn random_self_adjoint(eigenvalues: &[f64], rng: &mut impl Rng) -> OperatorMatrix {
    let u = haar_unitary(eigenvalues.len(), rng);
    &u * OperatorMatrix::from_real_diagonal(eigenvalues) * u.adjoint()
}

/// Two-projection normal form before conjugation.
///
/// Each angle contributes a 2×2 block `P = e₁e₁*`, `Q = uu*` with `u = (cos θ, sin θ)`.
pub fn pair_normal_form(
    angles: &[f64],
    extra_p: usize,
    extra_q: usize,
    extra_kernel: usize,
    extra_both: usize,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    for &a in angles {
        if !(a > 0.0 && a < FRAC_PI_2) {
            return Err(ProjError::InvalidAngle { angle: a });
        }
    }
    let mut ps = Vec::new();
    let mut qs = Vec::new();
    for &a in angles {
        let (s, c) = a.sin_cos();
        ps.push(OperatorMatrix::from_real_diagonal(&[1.0, 0.0]));
        qs.push(OperatorMatrix::from_real_rows(&[&[c * c, c * s], &[c * s, s * s]])?);
    }
    let diag = |pv: f64, qv: f64, n: usize, ps: &mut Vec<OperatorMatrix>, qs: &mut Vec<OperatorMatrix>| {
        if n > 0 {
            ps.push(OperatorMatrix::from_real_diagonal(&vec![pv; n]));
            qs.push(OperatorMatrix::from_real_diagonal(&vec![qv; n]));
        }
    };
    diag(1.0, 0.0, extra_p, &mut ps, &mut qs);
    diag(0.0, 1.0, extra_q, &mut ps, &mut qs);
    diag(0.0, 0.0, extra_kernel, &mut ps, &mut qs);
    diag(1.0, 1.0, extra_both, &mut ps, &mut qs);
    Ok((OperatorMatrix::direct_sum(&ps), OperatorMatrix::direct_sum(&qs)))
}

/// Projections with `σ(PQP) \ {0,1} = {cos² θᵢ}`, conjugated by a seeded Haar unitary.
pub fn pair_from_angles(
    angles: &[f64],
    extra_p: usize,
    extra_q: usize,
    extra_kernel: usize,
    seed: u64,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let mut rng = seeded_rng(seed);
    pair_from_angles_with(angles, extra_p, extra_q, extra_kernel, 0, &mut rng)
}

pub fn pair_from_angles_with(
    angles: &[f64],
    extra_p: usize,
    extra_q: usize,
    extra_kernel: usize,
    extra_both: usize,
    rng: &mut impl Rng,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (p, q) = pair_normal_form(angles, extra_p, extra_q, extra_kernel, extra_both)?;
    let u = haar_unitary(p.dim(), rng);
    let conj = |m: &OperatorMatrix| &u * m * u.adjoint();
    Ok((conj(&p), conj(&q)))
}

/// Random angles in `[lo, hi] ⊂ (0, π/2)`.
pub fn random_angles(count: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(lo..=hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::spectral::spectrum_of_pair;
    use crate::numeric::Tolerances;

    #[test]
    fn haar_is_unitary() {
        let mut rng = seeded_rng(3);
        let u = haar_unitary(6, &mut rng);
        assert!((u.adjoint() * &u).distance(&OperatorMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn angles_quarter_pi() {
        let (p, q) = pair_from_angles(&[std::f64::consts::FRAC_PI_4], 0, 0, 0, 7).unwrap();
        assert_eq!(p.dim(), 2);
        let s = spectrum_of_pair(&p, &q, &Tolerances::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.5).abs() < 1e-12);
        assert!(((&p * &q).norm() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_extras() {
        let (p, q) = pair_from_angles(&[], 1, 1, 0, 11).unwrap();
        assert!((&p * &q).norm() < 1e-12);
        assert!(((&p - &q).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_angles() {
        use std::f64::consts::PI;
        let (p, q) = pair_from_angles(&[PI / 6.0, PI / 3.0], 0, 0, 0, 1).unwrap();
        let s = spectrum_of_pair(&p, &q, &Tolerances::default()).unwrap();
        let inner: Vec<f64> = s.into_iter().filter(|&x| x > 0.0 && x < 1.0).collect();
        assert!((inner[0] - 0.25).abs() < 1e-12 && (inner[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_angle() {
        assert!(matches!(pair_from_angles(&[0.0], 0, 0, 0, 1), Err(ProjError::InvalidAngle { .. })));
        assert!(matches!(pair_from_angles(&[FRAC_PI_2], 0, 0, 0, 1), Err(ProjError::InvalidAngle { .. })));
    }

    #[test]
    fn trial_rng_depends_on_all_inputs() {
        let a: u64 = trial_rng(1, "x", 0).random();
        let b: u64 = trial_rng(1, "x", 1).random();
        let c: u64 = trial_rng(1, "y", 0).random();
        let d: u64 = trial_rng(1, "x", 0).random();
        assert!(a != b && a != c && a == d);
    }
}
