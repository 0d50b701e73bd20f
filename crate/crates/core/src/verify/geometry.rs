use rand::Rng;

use super::gen::{self, dim, oracle_apply, pair, sub_projection, unitary_near, Extras};
use super::{check, excess, flag, Bound, Check, Ctx};
use crate::error::Result;
use crate::geometry::{
    idempotent_to_pair, mvn_partial_isometry, pair_report, pair_to_idempotent, split_partial_isometry, sup_join,
    upq_equivalences,
};
use crate::numeric::fixtures::{
    haar_unitary, pair_from_angles_with, random_angles, random_operator, random_projection, random_projection_any_rank,
    FixtureRng,
};
use crate::numeric::spectral::hermitian_eig_unchecked;
use crate::numeric::{hausdorff, spectrum_of_pair, OperatorMatrix};
use crate::support::{left_support, quasi_inverse, right_support};

pub(crate) fn checks() -> Vec<Check> {
    vec![
        check("sec:2.2:st-ts", Bound::Cluster, nonzero_spectra),
        check("sec:2.2:norm-diff", Bound::Eq(1.0), norm_diff),
        check("sec:2.2:complement-spectrum", Bound::Cluster, complement_spectrum),
        check("fixture:angles", Bound::Cluster, angles_round_trip),
        check("eq:q-minus-pq", Bound::Eq(10.0), q_minus_pq),
        check("eq:idnorm", Bound::Eq(10.0), idnorm),
        check("eq:idPveeQ", Bound::Eq(10.0), id_join),
        check("lem:2.8", Bound::Eq(10.0), product_support_lipschitz),
        check("lem:2.9", Bound::Eq(10.0), join_lipschitz),
        check("eq:pr-qr", Bound::Eq(1.0), pr_qr),
        check("eq:split", Bound::Eq(10.0), split),
        check("eq:bigeq", Bound::Eq(1.0), bigeq),
        check("prop:2.4", Bound::Eq(10.0), join_laws),
        check("prop:2.5", Bound::Eq(10.0), idempotent_pairs),
        check("prop:2.6", Bound::Eq(10.0), upq),
        check("prop:2.7", Bound::Eq(10.0), mvn_unique),
        check("sec:2.5:split", Bound::Eq(10.0), isometry_split),
        check("sec:2.2:report", Bound::Eq(10.0), report),
    ]
}

fn random_pair(ctx: &Ctx, rng: &mut FixtureRng) -> (OperatorMatrix, OperatorMatrix) {
    let n = dim(rng, 1, ctx.dim_max);
    (random_projection_any_rank(n, rng), random_projection_any_rank(n, rng))
}

fn nonzero(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().filter(|&x| x > 0.0).collect()
}

fn nonzero_spectra(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = random_pair(ctx, rng);
    let a = nonzero(spectrum_of_pair(&p, &q, &ctx.tol)?);
    let b = nonzero(spectrum_of_pair(&q, &p, &ctx.tol)?);
    Ok(if a.is_empty() && b.is_empty() { 0.0 } else { hausdorff(&a, &b) })
}

fn norm_diff(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = random_pair(ctx, rng);
    let direct = (&p - &q).norm();
    let split = (&p * q.complement()).norm().max((p.complement() * &q).norm());
    Ok((direct - split).abs())
}

fn open_unit(v: Vec<f64>, w: f64) -> Vec<f64> {
    v.into_iter().filter(|&x| x > w && x < 1.0 - w).collect()
}

fn complement_spectrum(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras::ALL, 0)?;
    let w = ctx.tol.cluster;
    let a = open_unit(spectrum_of_pair(&p, &q, &ctx.tol)?, w);
    let b: Vec<f64> = open_unit(spectrum_of_pair(&p, &q.complement(), &ctx.tol)?, w).iter().map(|s| 1.0 - s).collect();
    Ok(if a.is_empty() && b.is_empty() { 0.0 } else { hausdorff(&a, &b) })
}

/// The eigenvalues of `PQP` strictly inside `(0, 1)` are exactly the requested `cos²θ`, with
/// multiplicity.
fn angles_round_trip(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let a = rng.random_range(1..=(ctx.dim_max / 2).max(1));
    let angles = random_angles(a, gen::ANGLE_LO, gen::ANGLE_HI, rng);
    let left = ctx.dim_max.saturating_sub(2 * a);
    let extras: Vec<usize> = (0..4).map(|_| rng.random_range(0..=left.min(1))).collect();
    let (p, q) = pair_from_angles_with(&angles, extras[0], extras[1], extras[2], extras[3], rng)?;
    let w = ctx.tol.cluster;
    let inside = open_unit(hermitian_eig_unchecked(&(&p * &q * &p)).eigenvalues, w);
    let mut want: Vec<f64> = angles.iter().map(|t| t.cos().powi(2)).collect();
    want.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if inside.len() != want.len() {
        return Ok(1.0);
    }
    Ok(inside.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

fn q_minus_pq(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras { q: false, ..Extras::ALL }, 0)?;
    let ppq = (p.complement() * &q).norm();
    let pq = left_support(&(&p * &q), &ctx.tol)?;
    let a = ((&q - &pq).norm() - ppq).abs();
    let b = (&p - &pq + &q).projection_residual();
    Ok(a.max(b))
}

fn idnorm(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras { both: false, ..Extras::ALL }, 1)?;
    let npq = (&p * &q).norm();
    let inv = quasi_inverse(&(p.complement() * &q), &ctx.tol)?;
    Ok((inv.norm() - 1.0 / (1.0 - npq * npq).sqrt()).abs())
}

fn id_join(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras { both: false, ..Extras::ALL }, 0)?;
    let tol = &ctx.tol;
    let sum = quasi_inverse(&(p.complement() * &q), tol)? + quasi_inverse(&(q.complement() * &p), tol)?;
    Ok(sum.distance(&sup_join(&p, &q, tol)?))
}

/// Small unitary conjugate of `q`, moving it by at most `scale·(1 − margin)`.
fn perturb(q: &OperatorMatrix, margin: f64, rng: &mut FixtureRng) -> OperatorMatrix {
    let eta = rng.random_range(0.0..=0.2) * (1.0 - margin);
    let w = unitary_near(q.dim(), eta, None, rng);
    (&w * q * w.adjoint()).hermitian_part()
}

fn product_support_lipschitz(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras { q: false, ..Extras::ALL }, 0)?;
    let r = perturb(&q, (p.complement() * &q).norm(), rng);
    let m = (p.complement() * &q).norm().max((p.complement() * &r).norm());
    let tol = &ctx.tol;
    let lhs = left_support(&(&p * &q), tol)?.distance(&left_support(&(&p * &r), tol)?);
    Ok(excess(lhs, q.distance(&r) / (1.0 - m * m).sqrt()))
}

fn join_lipschitz(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras { both: false, ..Extras::ALL }, 0)?;
    let r = perturb(&q, (&p * &q).norm(), rng);
    let m = (&p * &q).norm().max((&p * &r).norm());
    let tol = &ctx.tol;
    let lhs = sup_join(&p, &q, tol)?.distance(&sup_join(&p, &r, tol)?);
    Ok(excess(lhs, q.distance(&r) / (1.0 - m * m).sqrt()))
}

fn pr_qr(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let n = dim(rng, 1, ctx.dim_max);
    let p = random_projection(n, rng.random_range(1..=n), rng);
    let q = random_projection_any_rank(n, rng);
    let r = sub_projection(&p, rng.random_range(0..=p.rank()), rng);
    let lhs = ((&p - &r) * &q * &r).norm();
    Ok(excess(lhs, (&p * &q).norm().powi(2) + (&p * q.complement()).norm().powi(2) - 1.0))
}

/// Odd trials use an excising `P` (all angles equal), where the left side vanishes.
fn split(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let tol = &ctx.tol;
    let exact = rng.random::<bool>();
    let (p, q) = if exact {
        let a = rng.random_range(1..=(ctx.dim_max / 2).max(1));
        let theta = rng.random_range(gen::ANGLE_LO..=gen::ANGLE_HI);
        let left = ctx.dim_max.saturating_sub(2 * a);
        pair_from_angles_with(&vec![theta; a], 0, rng.random_range(0..=left.min(2)), 0, 0, rng)?
    } else {
        pair(rng, ctx.dim_max, Extras { q: true, kernel: true, ..Extras::default() }, 1)?
    };
    let r = sub_projection(&p, rng.random_range(0..=p.rank()), rng);
    let join = sup_join(&r, &left_support(&(&q * &r), tol)?, tol)?;
    let lhs = ((&p - &r) * join).norm();
    if exact {
        return Ok(lhs);
    }
    let a = (&p * &q).norm().powi(2);
    let b = (&p * q.complement()).norm().powi(2);
    Ok(excess(lhs, (a + b - 1.0) / ((1.0 - b) * (1.0 - a)).sqrt()))
}

fn bigeq(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let n = dim(rng, 3, ctx.dim_max);
    let k1 = rng.random_range(1..=(n - 1) / 2);
    let k2 = rng.random_range(1..=(n - k1 - 1).min(k1 + 1));
    let u = haar_unitary(n, rng);
    let cols = |a: usize, b: usize| OperatorMatrix::range_projection(&u.inner().columns(a, b - a).into_owned());
    let plus = cols(0, k1);
    let minus = cols(k1, k1 + k2);
    let extra = cols(k1 + k2, k1 + k2 + rng.random_range(0..=n - k1 - k2));
    let both = &plus + &minus;
    let j = rng.random_range(1..=k1);
    let r = if rng.random::<bool>() {
        let w = unitary_near(n, rng.random_range(0.0..0.4), Some(&both), rng);
        (&w * sub_projection(&plus, j, rng) * w.adjoint()).hermitian_part()
    } else {
        sub_projection(&both, rng.random_range(1..=k1 + k2), rng)
    };
    let w = unitary_near(n, rng.random_range(0.0..0.6), None, rng);
    let q = (&w * (&plus + &extra) * w.adjoint()).hermitian_part();
    let (qp, qm) = ((&q * &plus).norm(), (&q * &minus).norm());
    if !(qm < qp) {
        return Ok(0.0);
    }
    let lhs = (plus.complement() * &r).norm().powi(2);
    let mirror = (&minus * &r).norm().powi(2);
    let num = qp * qp + (q.complement() * &r).norm().powi(2) + (&plus * q.complement() * &minus).norm() - 1.0;
    Ok(excess(lhs, num / (qp * qp - qm * qm)).max((lhs - mirror).abs()))
}

fn join_laws(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras { both: false, ..Extras::ALL }, 0)?;
    let j = sup_join(&p, &q, &ctx.tol)?;
    let r = [
        j.projection_residual(),
        (&j * &p).distance(&p),
        (&j * &q).distance(&q),
        flag(j.rank() == p.rank() + q.rank()),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// `I = S·diag(1,…,1,0,…,0)·S⁻¹` maps to `([I*], [I])` and back.
fn idempotent_pairs(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let tol = &ctx.tol;
    let n = dim(rng, 1, ctx.dim_max);
    let k = rng.random_range(0..=n);
    let s = random_operator(n, n, 0.5, 2.0, rng);
    let diag: Vec<f64> = (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
    let i = &s * OperatorMatrix::from_real_diagonal(&diag) * quasi_inverse(&s, tol)?;
    let (p, q) = idempotent_to_pair(&i, tol)?;
    let r = [
        pair_to_idempotent(&p, &q, tol)?.distance(&i),
        p.distance(&right_support(&i, tol)?),
        q.distance(&left_support(&i, tol)?),
        flag((&p - &q).norm() < 1.0),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// Partial isometry with `U*U²` self-adjoint: positive, negative, nilpotent or a mixture.
fn signed_isometry(ctx: &Ctx, rng: &mut FixtureRng) -> Result<OperatorMatrix> {
    let budget = ctx.dim_max;
    let close = |rng: &mut FixtureRng, b: usize| -> Result<OperatorMatrix> {
        let (p, q) = pair(rng, b, Extras::CLOSE, 0)?;
        mvn_partial_isometry(&p, &q, &ctx.tol)
    };
    let nilpotent = OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])?;
    Ok(match rng.random_range(0..4) {
        0 => close(rng, budget)?,
        1 => -close(rng, budget)?,
        2 => {
            let u = OperatorMatrix::direct_sum(&[nilpotent, OperatorMatrix::zeros(budget.saturating_sub(2))]);
            let w = haar_unitary(u.dim(), rng);
            &w * u * w.adjoint()
        }
        _ => {
            let u = OperatorMatrix::direct_sum(&[close(rng, budget.saturating_sub(2).max(1))?, nilpotent]);
            let w = haar_unitary(u.dim(), rng);
            &w * u * w.adjoint()
        }
    })
}

fn upq(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let u = signed_isometry(ctx, rng)?;
    let rep = upq_equivalences(&u, &ctx.tol)?;
    Ok(flag(rep.consistent()).max((rep.norm_u_minus_ustar - rep.norm_p_minus_q).abs()))
}

/// `U_{QP}` agrees with `QP(PQP)^{-1/2}` and has the three defining properties.
fn mvn_unique(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras::CLOSE, 0)?;
    let u = mvn_partial_isometry(&p, &q, &ctx.tol)?;
    let h = oracle_apply(&(&p * &q * &p).hermitian_part(), |s| if s > 0.0 { 1.0 / s.sqrt() } else { 0.0 }, &ctx.tol);
    let v = &q * &p * h;
    let w = v.adjoint() * &v * &v;
    let lowest = hermitian_eig_unchecked(&w.hermitian_part()).eigenvalues.first().copied().unwrap_or(0.0);
    let r = [
        u.distance(&v),
        (v.adjoint() * &v).distance(&p),
        (&v * v.adjoint()).distance(&q),
        w.self_adjoint_residual(),
        (-lowest).max(0.0),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

fn isometry_split(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let third = (ctx.dim_max / 3).max(1);
    let mvn = |rng: &mut FixtureRng| -> Result<OperatorMatrix> {
        let (p, q) = pair(rng, third, Extras::CLOSE, 0)?;
        mvn_partial_isometry(&p, &q, &ctx.tol)
    };
    let plus = mvn(rng)?;
    let minus = mvn(rng)?;
    let nil = if rng.random::<bool>() {
        OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])?
    } else {
        OperatorMatrix::zeros(0)
    };
    let z = |m: &OperatorMatrix| OperatorMatrix::zeros(m.dim());
    let w = haar_unitary(plus.dim() + minus.dim() + nil.dim(), rng);
    let conj = |blocks: &[OperatorMatrix]| &w * OperatorMatrix::direct_sum(blocks) * w.adjoint();
    let u = conj(&[plus.clone(), -&minus, nil.clone()]);
    let s = split_partial_isometry(&u, &ctx.tol)?;
    let ranges = |x: &OperatorMatrix| -> Result<OperatorMatrix> {
        crate::geometry::span_join(&(x * x.adjoint()), &(x.adjoint() * x), &ctx.tol)
    };
    let (rp, rm, r0) = (ranges(&s.u_plus)?, ranges(&s.u_minus)?, ranges(&s.u_zero)?);
    let r = [
        s.reconstruct().distance(&u),
        s.u_plus.distance(&conj(&[plus.clone(), z(&minus), z(&nil)])),
        s.u_minus.distance(&conj(&[z(&plus), minus.clone(), z(&nil)])),
        s.u_zero.distance(&conj(&[z(&plus), z(&minus), nil.clone()])),
        (&rp * &rm).norm().max((&rp * &r0).norm()).max((&rm * &r0).norm()),
    ];
    Ok(r.into_iter().fold(0.0, f64::max))
}

fn report(ctx: &Ctx, rng: &mut FixtureRng) -> Result<f64> {
    let (p, q) = pair(rng, ctx.dim_max, Extras::ALL, 0)?;
    let rep = pair_report(&p, &q, &ctx.tol)?;
    let a = (rep.norm_pq - (&p * &q).norm()).abs();
    let b = (rep.norm_diff - rep.norm_p_qperp.max(rep.norm_pperp_q)).abs();
    let c = if rep.norm_diff < 1.0 - ctx.tol.cluster { (rep.norm_p_qperp - rep.norm_pperp_q).abs() } else { 0.0 };
    Ok(a.max(b).max(c))
}
