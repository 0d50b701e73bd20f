use rand::Rng;

use super::gen::{self, pair, sub_projection, Extras};
use super::{capped, check, excess, flag, Bound, Check, Ctx};
use crate::block::{BlockAlgebra, BlockElement, QuotientMap};
use crate::error::{ProjError, Result};
use crate::geometry::mvn_partial_isometry;
use crate::lifting::{
    approximate_norm_lift, close_gap, lift_idempotent, lift_partial_isometry, lift_partial_isometry_spectrum,
    lift_projection_norm, lift_projection_spectrum, lift_triple_special, LiftOutcome,
};
use crate::numeric::fixtures::{
    gaussian_matrix, haar_unitary, pair_from_angles_with, random_angles, random_operator, random_projection_any_rank,
    FixtureRng,
};
use crate::numeric::{hausdorff, OperatorMatrix};
use crate::support::quasi_inverse;

const MAX_ITERS: usize = 200;
const NORM_TRIALS: usize = 200;
const ISOMETRY_TRIALS: usize = 100;

pub(crate) fn checks() -> Vec<Check> {
    vec![
        check("quot:hom", Bound::Eq(1.0), homomorphism),
        capped("thm:5.3", Bound::Eq(10.0), NORM_TRIALS, norm_lift),
        capped("thm:5.3:analytic", Bound::Eq(10.0), 1, norm_lift_analytic),
        capped("sec:5:approx", Bound::Eq(10.0), NORM_TRIALS, approximate),
        capped("thm:5.4", Bound::Spec, NORM_TRIALS, spectrum_distance),
        capped("thm:5.4:image", Bound::Eq(10.0), NORM_TRIALS, spectrum_image),
        capped("thm:5.4:remark", Bound::Spec, NORM_TRIALS, spectrum_remark),
        capped("thm:5.4:step", Bound::Eq(10.0), NORM_TRIALS, gap_step),
        capped("cor:5.5", Bound::Spec, NORM_TRIALS, idempotent_distance),
        capped("cor:5.5:image", Bound::Eq(10.0), NORM_TRIALS, idempotent_image),
        capped("thm:5.6", Bound::Eq(10.0), ISOMETRY_TRIALS, isometry_square),
        capped("cor:5.7", Bound::Spec, ISOMETRY_TRIALS, isometry_spectrum),
        capped("cor:5.7:image", Bound::Eq(10.0), ISOMETRY_TRIALS, isometry_spectrum_image),
        capped("sec:5:triple", Bound::Eq(10.0), NORM_TRIALS, triple),
    ]
}

/// Keeps a random nonempty subset of the blocks, usually a proper one.
fn quotient(alg: &BlockAlgebra, rng: &mut FixtureRng) -> Result<QuotientMap> {
    let m = alg.blocks().len();
    let mut kept: Vec<usize> = (0..m).filter(|_| rng.random_range(0..3) == 0).collect();
    if kept.is_empty() {
        kept.push(rng.random_range(0..m));
    }
    QuotientMap::new(alg, kept)
}

fn homomorphism(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let m = rng.random_range(1..=3);
    let dims: Vec<usize> = (0..m).map(|_| rng.random_range(1..=(ctx.dim_max / m).max(1))).collect();
    let alg = BlockAlgebra::new(dims.clone())?;
    let pi = quotient(&alg, rng)?;
    let mut element = || -> Result<BlockElement> {
        BlockElement::new(&alg, dims.iter().map(|&d| OperatorMatrix::from_inner(gaussian_matrix(d, d, rng))).collect())
    };
    let (t, s) = (element()?, element()?);
    let (pt, ps) = (pi.apply(&t)?, pi.apply(&s)?);
    let r = [
        pi.apply(&t.mul(&s)?)?.distance(&pt.mul(&ps)?),
        pi.apply(&t.adjoint())?.distance(&pt.adjoint()),
        pi.apply(&t.add(&s)?)?.distance(&pt.add(&ps)?),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// Projections `R`, `Q` in a random block algebra with `‖QR‖ < 1`, and a quotient.
fn norm_fixture(ctx: &Ctx, rng: &mut FixtureRng) -> Result<(QuotientMap, BlockElement, BlockElement)> {
    let m = rng.random_range(2..=3);
    let budget = (ctx.dim_max / m).max(2);
    let extras = Extras { both: false, ..Extras::ALL };
    let pairs: Vec<(OperatorMatrix, OperatorMatrix)> =
        (0..m).map(|_| pair(rng, budget, extras, 0)).collect::<Result<_>>()?;
    let alg = BlockAlgebra::new(pairs.iter().map(|p| p.0.dim()).collect())?;
    let r = BlockElement::new(&alg, pairs.iter().map(|p| p.0.clone()).collect())?;
    let q = BlockElement::new(&alg, pairs.iter().map(|p| p.1.clone()).collect())?;
    Ok((quotient(&alg, rng)?, r, q))
}

fn image_error(pi: &QuotientMap, a: &BlockElement, b: &BlockElement) -> Result<f64> {
    Ok(pi.apply(a)?.distance(&pi.apply(b)?))
}

fn norm_lift(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (pi, r, q) = norm_fixture(ctx, rng)?;
    let p = lift_projection_norm(&pi, &r, &q, &ctx.tol)?;
    let target = pi.apply(&p)?.mul(&pi.apply(&q)?)?.norm();
    let res = [(p.mul(&q)?.norm() - target).abs(), image_error(&pi, &p, &r)?, p.projection_residual()];
    Ok(res.into_iter().fold(0.0, f64::max))
}

fn line(theta: f64) -> Result<OperatorMatrix> {
    let (s, c) = theta.sin_cos();
    OperatorMatrix::from_real_rows(&[&[c * c, c * s], &[c * s, s * s]])
}

/// `M₂ ⊕ M₂` keeping the second block, `R` at angle π/6 and π/4 from `Q = e₁e₁*`: `‖PQ‖² = ½`.
fn norm_lift_analytic(ctx: &Ctx, _: &mut FixtureRng) -> Result<f64> {
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
    let alg = BlockAlgebra::new(vec![2, 2])?;
    let pi = QuotientMap::new(&alg, vec![1])?;
    let e1 = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
    let r = BlockElement::new(&alg, vec![line(FRAC_PI_6)?, line(FRAC_PI_4)?])?;
    let q = BlockElement::new(&alg, vec![e1.clone(), e1])?;
    let p = lift_projection_norm(&pi, &r, &q, &ctx.tol)?;
    Ok((p.mul(&q)?.norm().powi(2) - 0.5).abs())
}

fn approximate(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (pi, r, q) = norm_fixture(ctx, rng)?;
    let lam = pi.apply(&q)?.mul(&pi.apply(&r)?)?.norm().powi(2);
    let eps = rng.random_range(0.05..0.9) * (1.0 - lam);
    let p = approximate_norm_lift(&pi, &r, &q, eps, &ctx.tol)?;
    let exact = lift_projection_norm(&pi, &r, &q, &ctx.tol)?;
    let res = [
        excess(p.mul(&q)?.norm().powi(2), lam + eps),
        excess(exact.mul(&q)?.norm().powi(2), lam),
        image_error(&pi, &p, &r)?,
        p.projection_residual(),
    ];
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Dropped block with at most three angles (so at most three strays in any gap), kept block
/// with at least one angle so that `π(R) ≠ 1`.
fn spectrum_fixture(ctx: &Ctx, rng: &mut FixtureRng) -> Result<(QuotientMap, BlockElement, BlockElement)> {
    let half = (ctx.dim_max / 2).max(2);
    let strays = rng.random_range(0..=3usize).min(half / 2);
    let angles = random_angles(strays, gen::ANGLE_LO, gen::ANGLE_HI, rng);
    let left = half - 2 * strays;
    let extras: Vec<usize> = (0..4).map(|_| rng.random_range(0..=left.min(1))).collect();
    let (dr, dq) = if strays + extras.iter().sum::<usize>() == 0 {
        pair_from_angles_with(&[], 0, 0, 1, 0, rng)?
    } else {
        pair_from_angles_with(&angles, extras[0], extras[1], extras[2], extras[3], rng)?
    };
    let (kr, kq) = pair(rng, half, Extras::ALL, 1)?;
    let alg = BlockAlgebra::new(vec![dr.dim(), kr.dim()])?;
    let pi = QuotientMap::new(&alg, vec![1])?;
    Ok((pi, BlockElement::new(&alg, vec![dr, kr])?, BlockElement::new(&alg, vec![dq, kq])?))
}

fn converged(out: LiftOutcome) -> Result<LiftOutcome> {
    if out.stalled {
        return Err(ProjError::Stalled { distance: out.distance, iterations: out.iterations });
    }
    Ok(out)
}

fn spectrum_lift(ctx: &Ctx, rng: &mut FixtureRng) -> Result<(QuotientMap, BlockElement, BlockElement, LiftOutcome)> {
    let (pi, r, q) = spectrum_fixture(ctx, rng)?;
    let out = converged(lift_projection_spectrum(&pi, &r, &q, MAX_ITERS, ctx.tau_spec, &ctx.tol)?)?;
    Ok((pi, r, q, out))
}

fn spectrum_distance(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (_, _, _, out) = spectrum_lift(ctx, rng)?;
    Ok(out.distance)
}

fn spectrum_image(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (pi, r, _, out) = spectrum_lift(ctx, rng)?;
    Ok(image_error(&pi, &out.element, &r)?.max(out.element.projection_residual()))
}

fn below_one(v: Vec<f64>, w: f64) -> Vec<f64> {
    v.into_iter().filter(|&x| x < 1.0 - w).collect()
}

fn spectrum_remark(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (pi, _, q, out) = spectrum_lift(ctx, rng)?;
    let w = ctx.tol.cluster;
    let qc = q.complement();
    let a = below_one(out.element.pair_spectrum(&qc, &ctx.tol)?, w);
    let b = below_one(pi.apply(&out.element)?.pair_spectrum(&pi.apply(&qc)?, &ctx.tol)?, w);
    Ok(if a.is_empty() && b.is_empty() { 0.0 } else { hausdorff(&a, &b) })
}

fn angle_of(x: f64) -> f64 {
    x.sqrt().acos()
}

/// Kept spectrum `{s, t}`, dropped block with one to three points strictly inside `(s, t)`:
/// one step clears the gap within the step bound.
fn gap_step(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let s = rng.random_range(0.05..0.45);
    let t = rng.random_range(s + 0.2..0.95);
    let k = rng.random_range(1..=3);
    let inner: Vec<f64> = (0..k).map(|_| angle_of(rng.random_range(s + 0.1 * (t - s)..t - 0.1 * (t - s)))).collect();
    let (dr, dq) = pair_from_angles_with(&inner, 0, 0, rng.random_range(0..=1), 0, rng)?;
    let (kr, kq) = pair_from_angles_with(&[angle_of(s), angle_of(t)], 0, 0, rng.random_range(0..=1), 0, rng)?;
    let alg = BlockAlgebra::new(vec![dr.dim(), kr.dim()])?;
    let pi = QuotientMap::new(&alg, vec![1])?;
    let pn = BlockElement::new(&alg, vec![dr, kr])?;
    let q = BlockElement::new(&alg, vec![dq, kq])?;
    let next = close_gap(&pi, &pn, &q, s, t, (t - s) / 8.0, &ctx.tol)?;
    let w = ctx.tol.cluster;
    let left = next.pair_spectrum(&q, &ctx.tol)?.into_iter().filter(|&x| x > s + w && x < t - w).count();
    let bound = 2.0 * (((1.0 - s) * t).sqrt() - (s * (1.0 - t)).sqrt());
    let res =
        [excess(next.distance(&pn), bound), image_error(&pi, &next, &pn)?, next.projection_residual(), flag(left == 0)];
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Idempotent `S·diag(1,…,1,0,…)·S⁻¹` with at least one zero in the kept block, junk elsewhere.
fn idempotent_lift(ctx: &Ctx, rng: &mut FixtureRng) -> Result<(QuotientMap, OperatorMatrix, LiftOutcome)> {
    let half = (ctx.dim_max / 2).max(2);
    let n = rng.random_range(2..=half);
    let k = rng.random_range(0..n);
    let s = random_operator(n, n, 0.5, 2.0, rng);
    let diag: Vec<f64> = (0..n).map(|j| if j < k { 1.0 } else { 0.0 }).collect();
    let i = &s * OperatorMatrix::from_real_diagonal(&diag) * quasi_inverse(&s, &ctx.tol)?;
    let d = rng.random_range(1..=half);
    let junk = OperatorMatrix::from_inner(gaussian_matrix(d, d, rng));
    let alg = BlockAlgebra::new(vec![d, n])?;
    let pi = QuotientMap::new(&alg, vec![1])?;
    let t = BlockElement::new(&alg, vec![junk, i.clone()])?;
    let out = converged(lift_idempotent(&pi, &t, MAX_ITERS, ctx.tau_spec, &ctx.tol)?)?;
    Ok((pi, i, out))
}

fn idempotent_distance(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    Ok(idempotent_lift(ctx, rng)?.2.distance)
}

fn idempotent_image(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (pi, i, out) = idempotent_lift(ctx, rng)?;
    let image = pi.apply(&out.element)?;
    Ok(image.block(0).distance(&i).max(out.element.idempotent_residual()))
}

fn nilpotent() -> Result<OperatorMatrix> {
    OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

fn conjugate(u: &OperatorMatrix, rng: &mut FixtureRng) -> OperatorMatrix {
    let w = haar_unitary(u.dim(), rng);
    &w * u * w.adjoint()
}

/// Two-block element: junk in the dropped block, `u` in the kept one.
fn with_junk(u: &OperatorMatrix, ctx: &Ctx, rng: &mut FixtureRng) -> Result<(QuotientMap, BlockElement)> {
    let d = rng.random_range(1..=(ctx.dim_max / 2).max(1));
    let junk = OperatorMatrix::from_inner(gaussian_matrix(d, d, rng));
    let alg = BlockAlgebra::new(vec![d, u.dim()])?;
    Ok((QuotientMap::new(&alg, vec![1])?, BlockElement::new(&alg, vec![junk, u.clone()])?))
}

fn isometry_square(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let half = (ctx.dim_max / 2).max(2);
    let n = rng.random_range(2..=half);
    let u = match rng.random_range(0..4) {
        0 => haar_unitary(n, rng) * random_projection_any_rank(n, rng),
        1 => {
            let (p, q) = pair(rng, half, Extras::CLOSE, 0)?;
            mvn_partial_isometry(&p, &q, &ctx.tol)?
        }
        2 => conjugate(&OperatorMatrix::direct_sum(&[nilpotent()?, OperatorMatrix::zeros(n - 2)]), rng),
        _ => haar_unitary(n, rng),
    };
    let (pi, t) = with_junk(&u, ctx, rng)?;
    let big = lift_partial_isometry(&pi, &t, &ctx.tol)?;
    let res = [
        ((big.mul(&big)?).norm() - (&u * &u).norm()).abs(),
        pi.apply(&big)?.block(0).distance(&u),
        big.partial_isometry_residual(),
    ];
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// `u = u₊ ⊕ u₀ ⊕ 0` with `u₊` a positive-case isometry and `u₀² = 0`, conjugated.
fn positive_case(ctx: &Ctx, rng: &mut FixtureRng) -> Result<(QuotientMap, OperatorMatrix, LiftOutcome)> {
    let half = (ctx.dim_max / 2).max(3);
    let nil = rng.random_range(0..=((half - 1) / 4).min(1));
    let (p, q) = pair(rng, half - 1 - 2 * nil, Extras::CLOSE, 1)?;
    let mut blocks = vec![mvn_partial_isometry(&p, &q, &ctx.tol)?];
    for _ in 0..nil {
        blocks.push(nilpotent()?);
    }
    blocks.push(OperatorMatrix::zeros(1));
    let u = conjugate(&OperatorMatrix::direct_sum(&blocks), rng);
    let (pi, t) = with_junk(&u, ctx, rng)?;
    let out = converged(lift_partial_isometry_spectrum(&pi, &t, MAX_ITERS, ctx.tau_spec, &ctx.tol)?)?;
    Ok((pi, u, out))
}

fn isometry_spectrum(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    Ok(positive_case(ctx, rng)?.2.distance)
}

fn isometry_spectrum_image(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (pi, u, out) = positive_case(ctx, rng)?;
    Ok(pi.apply(&out.element)?.block(0).distance(&u).max(out.element.partial_isometry_residual()))
}

/// Kept block: `p` spanned by `e_i`, `q` by `cos θᵢ e_i + sin θᵢ f_i` and some `g_j`, `r` inside
/// `span(g, h)` with `h` orthogonal to everything else; then `pr = 0 = pqr`.
fn triple(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let a = rng.random_range(1..=2);
    let b = rng.random_range(0..=2);
    let c = rng.random_range(1..=2);
    let angles = random_angles(a, gen::ANGLE_LO, gen::ANGLE_HI, rng);
    let (p2, q2) = pair_from_angles_with(&angles, 0, 0, 0, 0, rng)?;
    let n = 2 * a + b + c;
    let pad = |m: &OperatorMatrix| OperatorMatrix::direct_sum(&[m.clone(), OperatorMatrix::zeros(b + c)]);
    let diag = |from: usize, to: usize| {
        OperatorMatrix::from_real_diagonal(
            &(0..n).map(|i| if i >= from && i < to { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
        )
    };
    let kp = pad(&p2);
    let kq = pad(&q2) + diag(2 * a, 2 * a + b);
    let kr = sub_projection(&diag(2 * a, n), rng.random_range(1..=c), rng);
    let w = haar_unitary(n, rng);
    let conj = |m: &OperatorMatrix| (&w * m * w.adjoint()).hermitian_part();
    let d = rng.random_range(1..=(ctx.dim_max / 2).max(1));
    let alg = BlockAlgebra::new(vec![d, n])?;
    let pi = QuotientMap::new(&alg, vec![1])?;
    let mut element = |k: OperatorMatrix| BlockElement::new(&alg, vec![random_projection_any_rank(d, rng), conj(&k)]);
    let (p0, q0, r0) = (element(kp)?, element(kq)?, element(kr)?);
    let out = lift_triple_special(&pi, &p0, &q0, &r0, &ctx.tol)?;
    let mut res = vec![out.p.mul(&out.q)?.mul(&out.r)?.norm(), out.p.mul(&out.r)?.norm()];
    for (x, x0) in [(&out.p, &p0), (&out.q, &q0), (&out.r, &r0)] {
        res.push(x.projection_residual());
        res.push(image_error(&pi, x, x0)?);
    }
    Ok(res.into_iter().fold(0.0, f64::max))
}
