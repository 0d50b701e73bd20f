use num_complex::Complex64;
use rand::Rng;

use super::gen::{dim, unitary_near};
use super::{capped, check, excess, flag, Bound, Check, Ctx};
use crate::block::BlockAlgebra;
use crate::error::Result;
use crate::numeric::fixtures::{random_projection, random_unit_vector, FixtureRng};
use crate::numeric::{OperatorMatrix, Vector};
use crate::states::{
    cross_residual, excise, excision_step, random_basis, sandwich_baseline, transitivity_multi, transitivity_units,
    MatrixUnitSystem, PureState,
};

const EXCISION_TRIALS: usize = 200;

pub(crate) fn checks() -> Vec<Check> {
    vec![
        capped("thm:6.4", Bound::Eq(100.0), EXCISION_TRIALS, excision),
        capped("thm:6.4:state", Bound::Eq(10.0), EXCISION_TRIALS, excision_state),
        capped("thm:6.4:rank", Bound::Abs(0.0), EXCISION_TRIALS, excision_rank),
        capped("thm:6.4:step", Bound::Eq(100.0), EXCISION_TRIALS, step),
        capped("thm:AAP:7eps", Bound::Eq(10.0), EXCISION_TRIALS, baseline),
        check("cor:6.7:laws", Bound::Eq(10.0), |c, r| Ok(system(c, r)?.law_residual())),
        check("cor:6.7:basis", Bound::Eq(10.0), |c, r| Ok(system(c, r)?.basis_residual())),
        check("cor:6.7:initial", Bound::Eq(10.0), |c, r| Ok(system(c, r)?.initial_residual())),
        check("cor:6.7:excision", Bound::Eq(100.0), |c, r| Ok(system(c, r)?.excision_residual())),
        check("cor:6.7:faithful", Bound::Abs(0.0), faithful),
        capped("cor:6.7:hand", Bound::Abs(1e-9), 1, hand),
        check("cor:6.8", Bound::Eq(10.0), multi),
    ]
}

struct Excision {
    q: OperatorMatrix,
    v: Vector,
    rank: usize,
    p: OperatorMatrix,
}

/// `Q` with room for a rank-`k` excision on both sides, `k ≤ dim/2`.
fn excision_fixture(ctx: &Ctx, rng: &mut FixtureRng) -> Result<Excision> {
    let n = dim(rng, 2, ctx.dim_max);
    let k = rng.random_range(1..=n / 2);
    let q = random_projection(n, rng.random_range(k..=n - k), rng);
    let v = random_unit_vector(n, rng);
    let p = excise(&q, &PureState::new(v.clone(), &ctx.tol)?, k, &ctx.tol)?;
    Ok(Excision { q, v, rank: k, p })
}

fn expectation(q: &OperatorMatrix, v: &Vector) -> f64 {
    v.dotc(&q.apply(v)).re
}

fn excision(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = excision_fixture(ctx, rng)?;
    let lam = expectation(&x.q, &x.v);
    Ok((&x.p * &x.q * &x.p - x.p.scale(lam)).norm())
}

fn excision_state(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = excision_fixture(ctx, rng)?;
    Ok((x.p.apply(&x.v) - &x.v).norm().max(x.p.projection_residual()))
}

fn excision_rank(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let x = excision_fixture(ctx, rng)?;
    Ok(flag(x.p.rank() == x.rank))
}

/// `Pₙ` and a nearby `R` (a rotation of another excising projection by a unitary commuting
/// with `Q`) both excise at the same level; one step lands on an excising projection containing
/// `R` within the step bound.
fn step(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let tol = &ctx.tol;
    let n = dim(rng, 6, ctx.dim_max);
    let k1 = rng.random_range(1..=n / 4);
    let k2 = rng.random_range(1..=n / 4);
    let q = random_projection(n, rng.random_range(k1 + k2..=n - k1 - k2), rng);
    let phi = PureState::new(random_unit_vector(n, rng), tol)?;
    let lam = phi.expectation(&q);
    let pn = excise(&q, &phi, k1, tol)?;
    let other = excise(&q, &phi, k2, tol)?;
    let eta = rng.random_range(0.01..0.3);
    let w = unitary_near(n, eta, Some(&q), rng) * unitary_near(n, eta, Some(&q.complement()), rng);
    let r = (&w * other * w.adjoint()).hermitian_part();
    let out = excision_step(&q, &pn, &r, lam, tol)?;
    let p = &out.p;
    let res = [
        (p * &q * p - p.scale(lam)).norm(),
        p.projection_residual(),
        (p * &r).distance(&r),
        excess(p.distance(&pn), out.step_bound + 10.0 * tol.eq),
    ];
    Ok(res.into_iter().fold(0.0, f64::max))
}

fn baseline(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let eps = if rng.random::<bool>() { 0.1 } else { 0.01 };
    let n = dim(rng, 2, ctx.dim_max);
    let k = rng.random_range(1..=n / 2);
    let q = random_projection(n, rng.random_range(k..=n - k), rng);
    let v = random_unit_vector(n, rng);
    let out = sandwich_baseline(&q, &PureState::new(v.clone(), &ctx.tol)?, eps, k, rng, &ctx.tol)?;
    let res = [
        excess(out.residual_r_prime, 7.0 * eps),
        excess(out.residual_r, eps),
        (out.r_prime.apply(&v) - &v).norm(),
        out.r_prime.projection_residual(),
    ];
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// `n ≤ 5` units in `M_N`, fat when there is room for it half the time.
fn system(ctx: &Ctx, rng: &mut FixtureRng) -> Result<MatrixUnitSystem> {
    let n = rng.random_range(1..=5usize.min(ctx.dim_max));
    let big_n = dim(rng, n.max(2), ctx.dim_max);
    let fat = big_n >= 2 * n && rng.random::<bool>();
    let basis = random_basis(big_n, n, rng);
    transitivity_units(big_n, &basis, fat, &ctx.tol)
}

fn faithful(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let s = system(ctx, rng)?;
    Ok(flag(s.faithful_rank(&ctx.tol) == s.n() * s.n()))
}

/// `M₃` with the first two standard basis vectors: `U₁ = e₁e₂*`, `U₂ = e₂e₂*`.
fn hand(ctx: &Ctx, _: &mut FixtureRng) -> Result<f64> {
    let e = |i: usize| Vector::from_fn(3, |r, _| if r == i { Complex64::from(1.0) } else { Complex64::from(0.0) });
    let s = transitivity_units(3, &[e(0), e(1)], false, &ctx.tol)?;
    Ok(s.units[0]
        .distance(&OperatorMatrix::outer(&e(0), &e(1)))
        .max(s.units[1].distance(&OperatorMatrix::outer(&e(1), &e(1)))))
}

fn multi(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let m = rng.random_range(2..=3);
    let dims: Vec<usize> = (0..m).map(|_| rng.random_range(1..=(ctx.dim_max / m).max(1))).collect();
    let alg = BlockAlgebra::new(dims.clone())?;
    let bases: Vec<Vec<Vector>> = dims.iter().map(|&d| random_basis(d, rng.random_range(0..=d.min(5)), rng)).collect();
    let systems = transitivity_multi(&alg, &bases, false, &ctx.tol)?;
    let laws = systems.iter().map(|s| s.law_residual().max(s.basis_residual())).fold(0.0, f64::max);
    Ok(cross_residual(&systems).max(laws))
}
