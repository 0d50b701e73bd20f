use rand::Rng;

use super::gen::{self, oracle_apply, pair, unitary_near, Extras};
use super::{check, excess, flag, Bound, Check, Ctx};
use crate::calculus::{
    b_fg, calculus_spectrum, pc_build, pc_constant, pc_projection_distance, pc_unitary_distance, ScalarFunction,
};
use crate::error::Result;
use crate::numeric::fixtures::FixtureRng;
use crate::numeric::OperatorMatrix;
use crate::support::SpectralFunction;

pub(crate) fn checks() -> Vec<Check> {
    vec![
        check("eq:QPQ", Bound::Eq(10.0), qpq),
        check("sec:3:initial", Bound::Eq(10.0), initial),
        check("sec:3:rank", Bound::Abs(0.0), rank),
        check("eq:PR-dist", Bound::Eq(10.0), pr_dist),
        check("eq:afg", Bound::Eq(10.0), afg),
        check("eq:cfg", Bound::Eq(10.0), cfg),
        check("eq:bfg", Bound::Eq(10.0), bfg),
        check("sec:3:continuity", Bound::Eq(10.0), continuity),
        check("sec:3:constant", Bound::Eq(10.0), constant),
    ]
}

/// `(Q, R)` together with admissible functions: when `f(1) ≠ 1` is allowed, `σ(QR)` avoids 1.
struct Fixture {
    q: OperatorMatrix,
    r: OperatorMatrix,
    f: ScalarFunction,
    g: ScalarFunction,
}

fn fixture(ctx: &Ctx, rng: &mut FixtureRng) -> Result<Fixture> {
    let fix_one = rng.random::<bool>();
    let extras = Extras { both: fix_one, ..Extras::ALL };
    let (r, q) = pair(rng, ctx.dim_max, extras, 0)?;
    let f = gen::function(rng, fix_one)?;
    let g = gen::function(rng, fix_one)?;
    Ok(Fixture { q, r, f, g })
}

fn eval(f: &ScalarFunction, s: f64) -> f64 {
    f.eval(s).unwrap_or(f64::NAN)
}

fn qpq(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = fixture(ctx, rng)?;
    let p = pc_build(&x.q, &x.r, &x.f, &ctx.tol)?.p;
    let want = oracle_apply(&(&x.q * &x.r * &x.q).hermitian_part(), |s| eval(&x.f, s), &ctx.tol);
    Ok((&x.q * &p * &x.q).distance(&want))
}

fn initial(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = fixture(ctx, rng)?;
    let out = pc_build(&x.q, &x.r, &x.f, &ctx.tol)?;
    let r = [
        (out.u.adjoint() * &out.u).distance(&x.r),
        (&out.u * out.u.adjoint()).distance(&out.p),
        out.p.projection_residual(),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

fn rank(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = fixture(ctx, rng)?;
    let p = pc_build(&x.q, &x.r, &x.f, &ctx.tol)?.p;
    Ok(flag(p.rank() == x.r.rank()))
}

fn pr_dist(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = fixture(ctx, rng)?;
    let p = pc_build(&x.q, &x.r, &x.f, &ctx.tol)?.p;
    let formula = calculus_spectrum(&x.q, &x.r, &ctx.tol)?
        .into_iter()
        .map(|s| {
            let fs = eval(&x.f, s);
            (((1.0 - fs) * s).sqrt() - (fs * (1.0 - s)).sqrt()).abs()
        })
        .fold(0.0, f64::max);
    Ok((p.distance(&x.r) - formula).abs())
}

fn afg(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = fixture(ctx, rng)?;
    let uf = pc_build(&x.q, &x.r, &x.f, &ctx.tol)?.u;
    let ug = pc_build(&x.q, &x.r, &x.g, &ctx.tol)?.u;
    Ok((pc_unitary_distance(&x.q, &x.r, &x.f, &x.g, &ctx.tol)? - uf.distance(&ug)).abs())
}

fn cfg(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = fixture(ctx, rng)?;
    let pf = pc_build(&x.q, &x.r, &x.f, &ctx.tol)?.p;
    let pg = pc_build(&x.q, &x.r, &x.g, &ctx.tol)?.p;
    let d = pc_projection_distance(&x.q, &x.r, &x.f, &x.g, &ctx.tol)?;
    let swapped = pc_projection_distance(&x.q, &x.r, &x.g, &x.f, &ctx.tol)?;
    Ok((d - pf.distance(&pg)).abs().max((d - swapped).abs()))
}

fn bfg(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = fixture(ctx, rng)?;
    let uf = pc_build(&x.q, &x.r, &x.f, &ctx.tol)?.u;
    let ug = pc_build(&x.q, &x.r, &x.g, &ctx.tol)?.u;
    let rqr = (&x.r * &x.q * &x.r).hermitian_part();
    let b = oracle_apply(&rqr, |s| b_fg(eval(&x.f, s), eval(&x.g, s)), &ctx.tol);
    Ok((uf.adjoint() * ug).distance(&(b * &x.r)))
}

/// Rotating `R` by `ε` along a fixed direction moves `P` monotonically less as `ε` shrinks,
/// and roughly linearly.
fn continuity(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (r, q) = pair(rng, ctx.dim_max, Extras::ALL, 0)?;
    let f = gen::smooth_function(rng)?;
    let base = pc_build(&q, &r, &f, &ctx.tol)?.p;
    let direction = rng.clone();
    let d: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .into_iter()
        .map(|eps| {
            let w = unitary_near(r.dim(), eps, None, &mut direction.clone());
            let moved = (&w * &r * w.adjoint()).hermitian_part();
            Ok(pc_build(&q, &moved, &f, &ctx.tol)?.p.distance(&base))
        })
        .collect::<Result<_>>()?;
    Ok(excess(d[1], d[0]).max(excess(d[2], d[1])).max(excess(d[2], 0.2 * d[1])))
}

fn constant(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let t: f64 = if rng.random_range(0..4) == 0 { 1.0 } else { rng.random_range(0.0..1.0) };
    let extras = Extras { p: false, both: t == 1.0, ..Extras::ALL };
    let (r, q) = pair(rng, ctx.dim_max, extras, 0)?;
    let p = pc_constant(&q, &r, t, &ctx.tol)?.p;
    Ok((&p * &q * &p).distance(&p.scale(t)))
}
