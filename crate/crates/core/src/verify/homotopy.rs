use rand::Rng;

use super::gen::{basis_map, dim, pair, Extras, ANGLE_HI, ANGLE_LO};
use super::{capped, check, excess, Bound, Check, Ctx};
use crate::error::Result;
use crate::homotopy::{homotopy_close, homotopy_mvn, homotopy_orthogonal_mvn, HomotopyPath};
use crate::numeric::fixtures::{haar_unitary, pair_from_angles_with, random_angles, FixtureRng};
use crate::numeric::OperatorMatrix;

const REFINE_TRIALS: usize = 50;

pub(crate) fn checks() -> Vec<Check> {
    vec![
        check("thm:4.1:endpoints", Bound::Eq(10.0), |c, r| endpoints(c, r, Kind::Close)),
        check("thm:4.1:projection", Bound::Eq(10.0), |c, r| projection(c, r, Kind::Close)),
        check("thm:4.1:mesh", Bound::Eq(10.0), |c, r| mesh(c, r, Kind::Close)),
        capped("thm:4.1:refine", Bound::Eq(10.0), REFINE_TRIALS, |c, r| refine(c, r, Kind::Close)),
        check("thm:4.2:orthogonal:endpoints", Bound::Eq(10.0), |c, r| endpoints(c, r, Kind::Orthogonal)),
        check("thm:4.2:orthogonal:projection", Bound::Eq(10.0), |c, r| projection(c, r, Kind::Orthogonal)),
        check("thm:4.2:orthogonal:mesh", Bound::Eq(10.0), |c, r| mesh(c, r, Kind::Orthogonal)),
        capped("thm:4.2:orthogonal:refine", Bound::Eq(10.0), REFINE_TRIALS, |c, r| refine(c, r, Kind::Orthogonal)),
        check("thm:4.2:endpoints", Bound::Eq(10.0), |c, r| endpoints(c, r, Kind::General)),
        check("thm:4.2:projection", Bound::Eq(10.0), |c, r| projection(c, r, Kind::General)),
        check("thm:4.2:mesh", Bound::Eq(10.0), |c, r| mesh(c, r, Kind::General)),
        capped("thm:4.2:refine", Bound::Eq(10.0), REFINE_TRIALS, |c, r| refine(c, r, Kind::General)),
        check("thm:4.2:midpoint", Bound::Eq(10.0), midpoint),
    ]
}

#[derive(Clone, Copy)]
enum Kind {
    Close,
    Orthogonal,
    General,
}

enum Input {
    Pair(OperatorMatrix, OperatorMatrix),
    Isometry(OperatorMatrix),
}

fn input(ctx: &Ctx, rng: &mut FixtureRng, kind: Kind) -> Result<Input> {
    Ok(match kind {
        Kind::Close => {
            let (r, q) = pair(rng, ctx.dim_max, Extras::CLOSE, 0)?;
            Input::Pair(q, r)
        }
        Kind::Orthogonal => {
            let n = dim(rng, 2, ctx.dim_max);
            let k = rng.random_range(1..=n / 2);
            let w = haar_unitary(n, rng);
            let cols = |a: usize| OperatorMatrix::range_projection(&w.inner().columns(a, k).into_owned());
            let (q, r) = (cols(0), cols(k));
            Input::Isometry(basis_map(&q, &r, rng))
        }
        Kind::General => {
            let budget = ctx.dim_max.max(2);
            let a = rng.random_range(1..=budget / 2);
            let left = budget - 2 * a;
            let e = rng.random_range(0..=left / 2);
            let ek = rng.random_range(0..=left - 2 * e);
            let angles = random_angles(a, ANGLE_LO, ANGLE_HI, rng);
            let (q, r) = pair_from_angles_with(&angles, e, e, ek, 0, rng)?;
            Input::Isometry(basis_map(&q, &r, rng))
        }
    })
}

fn path(x: &Input, kind: Kind, n: usize, ctx: &Ctx) -> Result<HomotopyPath> {
    match (x, kind) {
        (Input::Pair(q, r), _) => homotopy_close(q, r, n, &ctx.tol),
        (Input::Isometry(u), Kind::Orthogonal) => homotopy_orthogonal_mvn(u, n, &ctx.tol),
        (Input::Isometry(u), _) => homotopy_mvn(u, n, &ctx.tol),
    }
}

fn sampled(ctx: &Ctx, rng: &mut FixtureRng, kind: Kind) -> Result<HomotopyPath> {
    let x = input(ctx, rng, kind)?;
    let n = rng.random_range(2..=20);
    path(&x, kind, n, ctx)
}

fn endpoints(ctx: &Ctx, rng: &mut FixtureRng, kind: Kind) -> Result<f64> {
    Ok(sampled(ctx, rng, kind)?.endpoint_error())
}

fn projection(ctx: &Ctx, rng: &mut FixtureRng, kind: Kind) -> Result<f64> {
    Ok(sampled(ctx, rng, kind)?.max_projection_residual())
}

fn mesh(ctx: &Ctx, rng: &mut FixtureRng, kind: Kind) -> Result<f64> {
    let p = sampled(ctx, rng, kind)?;
    Ok(excess(p.max_step_distance(), p.mesh_bound))
}

/// Doubling the number of samples at least halves the largest adjacent distance.
fn refine(ctx: &Ctx, rng: &mut FixtureRng, kind: Kind) -> Result<f64> {
    let x = input(ctx, rng, kind)?;
    let n = rng.random_range(3..=10);
    let coarse = path(&x, kind, n, ctx)?.max_step_distance();
    let fine = path(&x, kind, 2 * n, ctx)?.max_step_distance();
    Ok(excess(fine, coarse / 2.0))
}

/// The general path passes through a projection `P` with `QPQ = 0` halfway.
fn midpoint(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let Input::Isometry(u) = input(ctx, rng, Kind::General)? else { unreachable!() };
    let n = rng.random_range(2..=20);
    let p = homotopy_mvn(&u, n, &ctx.tol)?;
    let q = u.adjoint() * &u;
    Ok((&q * &p.steps[n - 1] * &q).norm())
}
