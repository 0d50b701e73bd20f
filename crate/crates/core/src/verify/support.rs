use rand::Rng;

use super::gen::dim;
use super::{check, flag, Bound, Check, Ctx};
use crate::error::Result;
use crate::numeric::fixtures::{gaussian_matrix, random_operator, random_self_adjoint, FixtureRng};
use crate::numeric::spectral::hermitian_eig_unchecked;
use crate::numeric::OperatorMatrix;
use crate::support::{
    apply_function, gap_threshold, left_support, polar, quasi_inverse, right_support, spectral_projection_above,
};

pub(crate) fn checks() -> Vec<Check> {
    vec![
        check("cor:2.3:sqrt", Bound::Eq(10.0), intertwine_sqrt),
        check("cor:2.3:square", Bound::Eq(10.0), intertwine_square),
        check("cor:2.3:chi", Bound::Eq(10.0), intertwine_chi),
        check("prop:2.2", Bound::Eq(10.0), spectral_range),
        check("eq:qinv", Bound::Eq(10.0), qinv_iff),
        check("eq:tinv-norm", Bound::Eq(10.0), tinv_norm),
        check("qinv:laws", Bound::Eq(10.0), qinv_laws),
        check("qinv:involution", Bound::Eq(10.0), qinv_involution),
        check("sec:2.1:polar", Bound::Eq(10.0), polar_parts),
        check("sec:2.1:functional", Bound::Eq(10.0), functional_calculus),
    ]
}

/// Operator with singular values in `[0.3, 2]`, possibly rank-deficient.
fn operator(ctx: &Ctx, rng: &mut FixtureRng) -> OperatorMatrix {
    let n = dim(rng, 1, ctx.dim_max);
    let rank = rng.random_range(1..=n);
    random_operator(n, rank, 0.3, 2.0, rng)
}

fn intertwine(ctx: &Ctx, rng: &mut FixtureRng, g: fn(f64) -> f64) -> Result<f64> {
    let t = operator(ctx, rng);
    let left = &t * apply_function(&(t.adjoint() * &t).hermitian_part(), &g, &ctx.tol)?;
    let right = apply_function(&(&t * t.adjoint()).hermitian_part(), &g, &ctx.tol)? * &t;
    Ok(left.distance(&right))
}

fn intertwine_sqrt(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    intertwine(ctx, rng, |x| x.max(0.0).sqrt())
}

fn intertwine_square(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    intertwine(ctx, rng, |x| x * x)
}

/// Threshold in the widest gap of `σ(T*T)` above 0.
fn gap_above_zero(t: &OperatorMatrix) -> f64 {
    let tt = (t.adjoint() * t).hermitian_part();
    let eig = hermitian_eig_unchecked(&tt);
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0);
    gap_threshold(&eig.eigenvalues, 0.0, top + 1.0)
}

fn intertwine_chi(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let t = operator(ctx, rng);
    let tau = gap_above_zero(&t);
    let e = spectral_projection_above(&(t.adjoint() * &t).hermitian_part(), tau, false, &ctx.tol)?;
    let f = spectral_projection_above(&(&t * t.adjoint()).hermitian_part(), tau, false, &ctx.tol)?;
    Ok((&t * e).distance(&(f * &t)))
}

fn spectral_range(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let t = operator(ctx, rng);
    let tau = gap_above_zero(&t);
    let e = spectral_projection_above(&(t.adjoint() * &t).hermitian_part(), tau, false, &ctx.tol)?;
    let f = spectral_projection_above(&(&t * t.adjoint()).hermitian_part(), tau, false, &ctx.tol)?;
    if e.norm() < 0.5 {
        return Ok(f.norm());
    }
    Ok(f.distance(&left_support(&(&t * e), &ctx.tol)?))
}

/// `TS = [T]` iff `[T*]S = T⁻¹`, checked on a kernel-side perturbation (both hold) and a
/// range-side one (both fail).
fn qinv_iff(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let t = operator(ctx, rng);
    let n = t.dim();
    let tol = &ctx.tol;
    let (ti, lt, rt) = (quasi_inverse(&t, tol)?, left_support(&t, tol)?, right_support(&t, tol)?);
    let x = OperatorMatrix::from_inner(gaussian_matrix(n, n, rng));
    let good = &ti + rt.complement() * &x;
    let a = (&t * &good).distance(&lt);
    let b = (&rt * &good).distance(&ti);
    let mut worst = a.max(b);
    if rt.rank() < n || lt.rank() < n {
        let bad = &ti + &rt * &x;
        let fa = (&t * &bad).distance(&lt) <= 10.0 * tol.eq;
        let fb = (&rt * &bad).distance(&ti) <= 10.0 * tol.eq;
        worst = worst.max(flag(fa == fb));
    }
    Ok(worst)
}

fn tinv_norm(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let t = operator(ctx, rng);
    let ti = quasi_inverse(&t, &ctx.tol)?;
    let floor = 1e-6;
    let gap = t.singular_values().into_iter().filter(|&s| s > floor).map(|s| s * s).fold(f64::INFINITY, f64::min);
    Ok((ti.norm().powi(2) * gap - 1.0).abs())
}

fn qinv_laws(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let t = operator(ctx, rng);
    let tol = &ctx.tol;
    let ti = quasi_inverse(&t, tol)?;
    let (lt, rt) = (left_support(&t, tol)?, right_support(&t, tol)?);
    let r = [
        (&t * &ti).distance(&lt),
        (&ti * &t).distance(&rt),
        (&t * &ti * &t).distance(&t),
        (&ti * &t * &ti).distance(&ti),
        (&ti * &lt).distance(&ti).max((&rt * &ti).distance(&ti)),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

fn qinv_involution(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let t = operator(ctx, rng);
    Ok(quasi_inverse(&quasi_inverse(&t, &ctx.tol)?, &ctx.tol)?.distance(&t))
}

fn polar_parts(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let t = operator(ctx, rng);
    let p = polar(&t, &ctx.tol)?;
    let r = [
        (&p.u * &p.abs_t).distance(&t),
        p.u.partial_isometry_residual(),
        (p.u.adjoint() * &p.u).distance(&right_support(&t, &ctx.tol)?),
        (&p.abs_t * &p.abs_t).distance(&(t.adjoint() * &t)),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// Polynomial functions agree with matrix arithmetic.
fn functional_calculus(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let n = dim(rng, 1, ctx.dim_max);
    let eigs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
    let s = random_self_adjoint(&eigs, rng);
    let cube = apply_function(&s, &|x: f64| x * x * x - 2.0 * x, &ctx.tol)?;
    Ok(cube.distance(&(&s * &s * &s - s.scale(2.0))))
}
