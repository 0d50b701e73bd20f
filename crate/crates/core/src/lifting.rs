//! Lifting projections, idempotents and partial isometries through a block-dropping quotient
//! while preserving norms and spectra.
//!
//! Operations that lift a target element take a source preimage `T` (any element with
//! `π(T)` equal to the target value) so that the dropped blocks carry arbitrary data.

use serde::Serialize;

use crate::block::{sandwich_unchecked, BlockElement, QuotientMap};
use crate::calculus::{pc_build, ScalarFunction};
use crate::error::{ProjError, Result};
use crate::geometry::{span_join, split_partial_isometry};
use crate::numeric::spectral::{cluster_values, hausdorff, hausdorff_complex, hermitian_eig};
use crate::numeric::Tolerances;
use crate::support::{gap_threshold, is_well_supported, left_support, polar, quasi_inverse};

/// Result of an iterative lift. `stalled` is set when `distance` exceeds the requested tolerance.
#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub element: BlockElement,
    pub distance: f64,
    pub iterations: usize,
    pub stalled: bool,
}

impl LiftOutcome {
    pub fn into_result(self) -> Result<BlockElement> {
        if self.stalled {
            return Err(ProjError::Stalled { distance: self.distance, iterations: self.iterations });
        }
        Ok(self.element)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftSummary {
    pub distance: f64,
    pub iterations: usize,
    pub stalled: bool,
}

impl From<&LiftOutcome> for LiftSummary {
    fn from(o: &LiftOutcome) -> Self {
        LiftSummary { distance: o.distance, iterations: o.iterations, stalled: o.stalled }
    }
}

fn blockwise_pc(q: &BlockElement, r: &BlockElement, f: &ScalarFunction, tol: &Tolerances) -> Result<BlockElement> {
    q.try_zip(r, |qk, rk| Ok(pc_build(qk, rk, f, tol)?.p))
}

fn supports(t: &BlockElement, tol: &Tolerances) -> Result<BlockElement> {
    t.try_map(|_, b| left_support(b, tol))
}

fn polar_parts(t: &BlockElement, tol: &Tolerances) -> Result<BlockElement> {
    t.try_map(|_, b| Ok(polar(b, tol)?.u))
}

fn hermitian(t: &BlockElement) -> BlockElement {
    t.map(|b| b.hermitian_part())
}

/// `P` with `π(P) = π(R)` and `‖PQ‖ = ‖π(PQ)‖`, as `P_{Q,R,f}` with `f(s) = min(s, ‖π(QR)‖²)`.
pub fn lift_projection_norm(
    pi: &QuotientMap,
    r: &BlockElement,
    q: &BlockElement,
    tol: &Tolerances,
) -> Result<BlockElement> {
    r.require_projection(tol)?;
    q.require_projection(tol)?;
    let norm = q.mul(r)?.norm();
    if norm >= 1.0 - tol.cluster {
        return Err(ProjError::NormTooLarge { norm });
    }
    let level = pi.apply(q)?.mul(&pi.apply(r)?)?.norm().powi(2).min(1.0);
    blockwise_pc(q, r, &ScalarFunction::cap(level)?, tol)
}

/// Sandwich-only baseline: `P` with `π(P) = π(R)` and `‖PQ‖² ≤ ‖π(QR)‖² + ε`.
pub fn approximate_norm_lift(
    pi: &QuotientMap,
    r: &BlockElement,
    q: &BlockElement,
    eps: f64,
    tol: &Tolerances,
) -> Result<BlockElement> {
    r.require_projection(tol)?;
    q.require_projection(tol)?;
    let lam = pi.apply(q)?.mul(&pi.apply(r)?)?.norm().powi(2);
    let lo = 1.0 - lam - eps;
    if !(eps > 0.0 && lo > 0.0) {
        return Err(ProjError::BadInterval { t: lo, s: 1.0 - lam - eps / 2.0 });
    }
    let s = hermitian(&r.mul(&q.complement())?.mul(r)?);
    sandwich_unchecked(&s, lo, 1.0 - lam - eps / 2.0, tol)
}

/// The quantity bounding `‖(P−R)(R∨[QR])‖`; nonpositive numerators are reported as 0.
fn split_bound(p: &BlockElement, q: &BlockElement) -> Result<f64> {
    let a = p.mul(q)?.norm().powi(2);
    let b = p.mul(&q.complement())?.norm().powi(2);
    let num = a + b - 1.0;
    if num <= 0.0 {
        return Ok(0.0);
    }
    let den = ((1.0 - a) * (1.0 - b)).max(0.0).sqrt();
    Ok(if den == 0.0 { f64::INFINITY } else { num / den })
}

fn raise_to(t: f64) -> Result<ScalarFunction> {
    if t >= 1.0 {
        return Ok(ScalarFunction::chi());
    }
    ScalarFunction::new(vec![(0.0, t), (t, t), (1.0, 1.0)], true)
}

fn stray_in(points: &[f64], s: f64, t: f64, width: f64) -> Option<f64> {
    points.iter().copied().find(|&x| x > s + width && x < t - width)
}

/// One recursion step: pushes the part of `σ(PₙQPₙ)` inside `(s, t)` out to `s` and `t`
/// without changing `π(Pₙ)`. Requires `(s, t)` to be free of `σ(π(PₙQ))`.
pub fn close_gap(
    pi: &QuotientMap,
    pn: &BlockElement,
    q: &BlockElement,
    s: f64,
    t: f64,
    delta: f64,
    tol: &Tolerances,
) -> Result<BlockElement> {
    pn.require_projection(tol)?;
    q.require_projection(tol)?;
    if !(0.0 <= s && s < t && t <= 1.0) || !(delta > 0.0 && delta < (t - s) / 4.0) {
        return Err(ProjError::BadInterval { t: s, s: t });
    }
    let quotient = pi.apply(pn)?.pair_spectrum(&pi.apply(q)?, tol)?;
    if let Some(point) = stray_in(&quotient, s, t, tol.cluster) {
        return Err(ProjError::GapNotClean { s, t, point });
    }

    let m = hermitian(&pn.mul(q)?.mul(pn)?);
    let eigs = m.blocks().iter().map(|b| hermitian_eig(b, tol)).collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = eigs.iter().flat_map(|e| e.clusters(tol.cluster).into_iter().map(|c| c.value)).collect();
    let above = |thr: f64| -> Result<BlockElement> {
        BlockElement::new(pn.algebra(), eigs.iter().map(|e| e.projection_where(tol.cluster, |x| x > thr)).collect())
    };

    let r = (s + t) / 2.0;
    let mut d = delta;
    let mut bound = f64::INFINITY;
    for _ in 0..=30 {
        let e_plus = above(gap_threshold(&values, r + d, r + 2.0 * d))?;
        let e = above(gap_threshold(&values, r - d, r + d))?;
        let e_minus = above(gap_threshold(&values, r - 2.0 * d, r - d))?;
        let band = e_minus.sub(&e_plus)?;
        bound = split_bound(&band, q)?;
        if bound >= 0.5 {
            d /= 2.0;
            continue;
        }
        let low = e.sub(&e_plus)?;
        let join = low.try_zip(q, |l, qk| span_join(l, &(qk * l * qk), tol))?;
        let s_proj = supports(&join.complement().mul(&band.sub(&low)?)?, tol)?;
        let t_proj = s_proj.try_zip(&pn.sub(&e_minus)?, |a, b| span_join(a, b, tol))?;
        let lower = blockwise_pc(q, &t_proj, &ScalarFunction::cap(s)?, tol)?;
        let upper = blockwise_pc(q, &e, &raise_to(t)?, tol)?;
        return Ok(hermitian(&lower.add(&upper)?));
    }
    Err(ProjError::DegenerateSplit { bound })
}

/// `P − E` where `E` is the spectral projection of `PXP` for eigenvalues clustered at 1;
/// with `X = Q` this is `[PQ⊥]`.
fn drop_unit_part(p: &BlockElement, x: &BlockElement, tol: &Tolerances) -> Result<BlockElement> {
    let pxp = hermitian(&p.mul(x)?.mul(p)?);
    let ones =
        pxp.try_map(|_, b| Ok(hermitian_eig(b, tol)?.projection_where(tol.cluster, |v| v > 1.0 - tol.cluster)))?;
    Ok(hermitian(&p.sub(&ones)?))
}

/// `P` with `π(P) = π(R)` and `σ(PQ) = σ(π(PQ))`, by running [`close_gap`] over the gaps of the
/// quotient spectrum (widest first) and then removing spurious eigenvalues at 1.
pub fn lift_projection_spectrum(
    pi: &QuotientMap,
    r: &BlockElement,
    q: &BlockElement,
    max_iters: usize,
    tau_spec: f64,
    tol: &Tolerances,
) -> Result<LiftOutcome> {
    r.require_projection(tol)?;
    q.require_projection(tol)?;
    let (pr, pq) = (pi.apply(r)?, pi.apply(q)?);
    if pr.is_identity(10.0 * tol.eq) {
        return Err(ProjError::Inadmissible("the image of R is the identity".into()));
    }
    let target = pr.pair_spectrum(&pq, tol)?;
    let mut points = target.clone();
    points.extend([0.0, 1.0]);
    let points = cluster_values(&points, tol.cluster);
    let mut gaps: Vec<(f64, f64)> =
        points.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b - a > 2.0 * tol.cluster).collect();
    gaps.sort_by(|x, y| (y.1 - y.0).total_cmp(&(x.1 - x.0)));

    let mut p = r.clone();
    let mut iterations = 0;
    while iterations < max_iters {
        let current = p.pair_spectrum(q, tol)?;
        let Some(&(a, b)) = gaps.iter().find(|(a, b)| stray_in(&current, *a, *b, tol.cluster).is_some()) else {
            break;
        };
        p = close_gap(pi, &p, q, a, b, (b - a) / 8.0, tol)?;
        iterations += 1;
    }

    if target.last().is_none_or(|&x| x < 1.0 - tol.cluster) {
        p = drop_unit_part(&p, q, tol)?;
    }
    let pq_perp = pr.pair_spectrum(&pq.complement(), tol)?;
    if pq_perp.last().is_none_or(|&x| x < 1.0 - tol.cluster) {
        p = drop_unit_part(&p, &q.complement(), tol)?;
    }

    let distance = hausdorff(&p.pair_spectrum(q, tol)?, &target);
    Ok(LiftOutcome { element: p, distance, iterations, stalled: distance > tau_spec })
}

fn hermitian_spectrum(t: &BlockElement, tol: &Tolerances) -> Result<Vec<f64>> {
    let mut all = Vec::new();
    for b in t.blocks() {
        all.extend(hermitian_eig(&b.hermitian_part(), tol)?.eigenvalues);
    }
    all.sort_by(f64::total_cmp);
    Ok(cluster_values(&all, tol.cluster))
}

/// Idempotent `I` with `π(I) = π(T)` and `σ(I*I) = σ(π(I)*π(I))`, given any preimage `T` of an
/// idempotent: `I = (PQ)⁻¹` for `Q = [T]` and `P` the spectrum lift of `[T*]`.
pub fn lift_idempotent(
    pi: &QuotientMap,
    t: &BlockElement,
    max_iters: usize,
    tau_spec: f64,
    tol: &Tolerances,
) -> Result<LiftOutcome> {
    let i = pi.apply(t)?;
    let residual = i.idempotent_residual();
    if residual > tol.eq {
        return Err(ProjError::NotIdempotent { residual });
    }
    let q = supports(t, tol)?;
    let r = supports(&t.adjoint(), tol)?;
    let lifted = lift_projection_spectrum(pi, &r, &q, max_iters, tau_spec, tol)?;
    let big_i = lifted.element.mul(&q)?.try_map(|_, b| quasi_inverse(b, tol))?;
    let target = hermitian_spectrum(&i.adjoint().mul(&i)?, tol)?;
    let got = hermitian_spectrum(&big_i.adjoint().mul(&big_i)?, tol)?;
    let distance = hausdorff(&got, &target);
    Ok(LiftOutcome {
        element: big_i,
        distance,
        iterations: lifted.iterations,
        stalled: lifted.stalled || distance > tau_spec,
    })
}

fn require_target_partial_isometry(u: &BlockElement, tol: &Tolerances) -> Result<()> {
    let residual = u.partial_isometry_residual();
    if residual > tol.eq {
        return Err(ProjError::NotPartialIsometry { residual });
    }
    Ok(())
}

/// Partial isometry `U` with `π(U) = π(T)` and `‖U²‖ = ‖π(T)²‖`, given any preimage `T` of a
/// partial isometry.
pub fn lift_partial_isometry(pi: &QuotientMap, t: &BlockElement, tol: &Tolerances) -> Result<BlockElement> {
    let u = pi.apply(t)?;
    require_target_partial_isometry(&u, tol)?;
    let p = sandwich_unchecked(&hermitian(&t.adjoint().mul(t)?), 1.0 / 3.0, 2.0 / 3.0, tol)?;
    let u_tp = polar_parts(&t.mul(&p)?, tol)?;
    let q = hermitian(&u_tp.mul(&u_tp.adjoint())?);

    let lam = u.mul(&u)?.norm().powi(2);
    let mut r = if lam < 1.0 - tol.cluster {
        let eps = (1.0 - lam) / 2.0;
        let x = hermitian(&q.mul(&p.complement())?.mul(&q)?);
        let r1 = sandwich_unchecked(&x, 1.0 - lam - eps, 1.0 - lam - eps / 2.0, tol)?;
        lift_projection_norm(pi, &r1, &p, tol)?
    } else {
        q.clone()
    };
    if q.complement().mul(&r)?.norm() >= 1.0 - tol.cluster {
        r = sandwich_unchecked(&hermitian(&r.mul(&q)?.mul(&r)?), 1.0 / 3.0, 2.0 / 3.0, tol)?;
    }
    polar_parts(&r.mul(&q)?, tol)?.mul(&u_tp)
}

/// Partial isometry `U` with `π(U) = π(T)` and `σ(U) = σ(π(T))`, for `u = π(T)` with `u*u²`
/// positive and well-supported.
pub fn lift_partial_isometry_spectrum(
    pi: &QuotientMap,
    t: &BlockElement,
    max_iters: usize,
    tau_spec: f64,
    tol: &Tolerances,
) -> Result<LiftOutcome> {
    let u = pi.apply(t)?;
    require_target_partial_isometry(&u, tol)?;
    if u.is_identity(10.0 * tol.eq) {
        return Err(ProjError::Inadmissible("u is the identity".into()));
    }
    let mut u_zero = Vec::new();
    let mut p_plus = Vec::new();
    let mut q_plus = Vec::new();
    for b in u.blocks() {
        let split = split_partial_isometry(b, tol).map_err(|e| ProjError::NotPositiveCase(e.to_string()))?;
        let neg = split.u_minus.norm();
        if neg > tol.eq {
            return Err(ProjError::NotPositiveCase(format!("u*u² has a negative part of norm {neg:.3e}")));
        }
        let w = b.adjoint() * b * b;
        let (ok, gap) = is_well_supported(&w, tol);
        if !ok {
            return Err(ProjError::NotPositiveCase(format!("u*u² is not well-supported (gap {gap:.3e})")));
        }
        q_plus.push((&split.u_plus * split.u_plus.adjoint()).hermitian_part());
        u_zero.push(split.u_zero);
        p_plus.push(split.p_plus);
    }
    let target = pi.target();
    let (u_zero, p_plus, q_plus) =
        (BlockElement::new(target, u_zero)?, BlockElement::new(target, p_plus)?, BlockElement::new(target, q_plus)?);

    let big_u0 = lift_partial_isometry(pi, &pi.preimage_with(&u_zero, t)?, tol)?;
    let f = big_u0.try_zip(&big_u0.adjoint(), |a, b| span_join(&(a * b), &(b * a), tol))?;
    let fp = f.complement();
    let squeeze = |z: &BlockElement| -> Result<BlockElement> {
        sandwich_unchecked(&hermitian(&fp.mul(z)?.mul(&fp)?), 1.0 / 3.0, 2.0 / 3.0, tol)
    };
    let p_src = squeeze(&pi.preimage_with(&p_plus, &hermitian(&t.adjoint().mul(t)?))?)?;
    let q_src = squeeze(&pi.preimage_with(&q_plus, &hermitian(&t.mul(&t.adjoint())?))?)?;

    let lifted = lift_projection_spectrum(pi, &p_src, &q_src, max_iters, tau_spec, tol)?;
    let u_qp = polar_parts(&q_src.mul(&lifted.element)?, tol)?;
    let big_u = big_u0.add(&u_qp)?;
    let distance = hausdorff_complex(&big_u.eigenvalues(), &u.eigenvalues());
    Ok(LiftOutcome {
        element: big_u,
        distance,
        iterations: lifted.iterations,
        stalled: lifted.stalled || distance > tau_spec,
    })
}

#[derive(Debug, Clone)]
pub struct TripleLift {
    pub p: BlockElement,
    pub q: BlockElement,
    pub r: BlockElement,
}

/// Lifts `p, q, r` with `pqr = 0 = pr`, `‖pq‖ < 1`, `‖pq⊥‖ < 1` to projections with the same
/// relations, splitting along `S = P ∨ [QP]`. Inputs are preimage projections.
pub fn lift_triple_special(
    pi: &QuotientMap,
    p0: &BlockElement,
    q0: &BlockElement,
    r0: &BlockElement,
    tol: &Tolerances,
) -> Result<TripleLift> {
    for x in [p0, q0, r0] {
        x.require_projection(tol)?;
    }
    let (p, q, r) = (pi.apply(p0)?, pi.apply(q0)?, pi.apply(r0)?);
    let residual = p.mul(&q)?.mul(&r)?.norm().max(p.mul(&r)?.norm());
    if residual > 10.0 * tol.eq {
        return Err(ProjError::Inadmissible(format!("pqr and pr must vanish (residual {residual:.3e})")));
    }
    for norm in [p.mul(&q)?.norm(), p.mul(&q.complement())?.norm()] {
        if norm >= 1.0 - tol.cluster {
            return Err(ProjError::NormTooLarge { norm });
        }
    }
    let s = p0.try_zip(q0, |pk, qk| span_join(pk, &(qk * pk * qk), tol))?;
    let sp = s.complement();
    let cut = |c: &BlockElement, x: &BlockElement| -> Result<BlockElement> {
        sandwich_unchecked(&hermitian(&c.mul(x)?.mul(c)?), 1.0 / 3.0, 2.0 / 3.0, tol)
    };
    let q_in = cut(&s, q0)?;
    let q_out = cut(&sp, q0)?;
    Ok(TripleLift { p: cut(&s, p0)?, q: q_in.add(&q_out)?, r: cut(&sp, r0)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockAlgebra;
    use crate::numeric::fixtures::{pair_from_angles_with, random_projection, seeded_rng};
    use crate::numeric::OperatorMatrix;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn m(rows: &[&[f64]]) -> OperatorMatrix {
        OperatorMatrix::from_real_rows(rows).unwrap()
    }

    fn line(theta: f64) -> OperatorMatrix {
        let (s, c) = theta.sin_cos();
        m(&[&[c * c, c * s], &[c * s, s * s]])
    }

    fn e1() -> OperatorMatrix {
        OperatorMatrix::from_real_diagonal(&[1.0, 0.0])
    }

    fn two_block() -> (QuotientMap, BlockElement, BlockElement) {
        let alg = BlockAlgebra::new(vec![2, 2]).unwrap();
        let pi = QuotientMap::new(&alg, vec![1]).unwrap();
        let r = BlockElement::new(&alg, vec![line(FRAC_PI_6), line(FRAC_PI_4)]).unwrap();
        let q = BlockElement::new(&alg, vec![e1(), e1()]).unwrap();
        (pi, r, q)
    }

    #[test]
    fn norm_lift_two_block() {
        let (pi, r, q) = two_block();
        let p = lift_projection_norm(&pi, &r, &q, &tol()).unwrap();
        assert!((p.mul(&q).unwrap().norm().powi(2) - 0.5).abs() < 1e-10);
        assert!(pi.apply(&p).unwrap().distance(&pi.apply(&r).unwrap()) < 1e-10);
        assert!(p.projection_residual() < 1e-10);

        let all = QuotientMap::new(r.algebra(), vec![0, 1]).unwrap();
        assert!(lift_projection_norm(&all, &r, &q, &tol()).unwrap().distance(&r) < 1e-10);

        let orth = BlockElement::new(r.algebra(), vec![line(FRAC_PI_6), line(std::f64::consts::FRAC_PI_2)]).unwrap();
        let p = lift_projection_norm(&pi, &orth, &q, &tol()).unwrap();
        assert!(p.mul(&q).unwrap().norm() < 1e-10);

        assert!(matches!(lift_projection_norm(&pi, &q, &q, &tol()), Err(ProjError::NormTooLarge { .. })));
    }

    #[test]
    fn approximate_lift_meets_its_bound() {
        let (pi, r, q) = two_block();
        for eps in [0.1, 0.3] {
            let p = approximate_norm_lift(&pi, &r, &q, eps, &tol()).unwrap();
            assert!(p.mul(&q).unwrap().norm().powi(2) <= 0.5 + eps + 1e-10);
            assert!(pi.apply(&p).unwrap().distance(&pi.apply(&r).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn close_gap_pushes_midpoint() {
        // dropped block eigenvalue at 1/2, kept block eigenvalues 1/4 and 3/4
        let alg = BlockAlgebra::new(vec![2, 4]).unwrap();
        let pi = QuotientMap::new(&alg, vec![1]).unwrap();
        let kept_p = OperatorMatrix::direct_sum(&[line(FRAC_PI_6), line(FRAC_PI_3)]);
        let kept_q = OperatorMatrix::direct_sum(&[e1(), e1()]);
        let pn = BlockElement::new(&alg, vec![line(FRAC_PI_4), kept_p]).unwrap();
        let q = BlockElement::new(&alg, vec![e1(), kept_q]).unwrap();
        let next = close_gap(&pi, &pn, &q, 0.25, 0.75, 0.05, &tol()).unwrap();
        let spec = next.pair_spectrum(&q, &tol()).unwrap();
        assert!(spec.iter().all(|&x| !(x > 0.26 && x < 0.74)), "{spec:?}");
        assert!(pi.apply(&next).unwrap().distance(&pi.apply(&pn).unwrap()) < 1e-10);
        let bound = 2.0 * ((0.75f64 * 0.75).sqrt() - (0.25f64 * 0.25).sqrt());
        assert!(next.distance(&pn) <= bound + 1e-10);

        let same = close_gap(&pi, &next, &q, 0.25, 0.75, 0.05, &tol()).unwrap();
        assert!(same.distance(&next) < 1e-10);
        assert!(matches!(close_gap(&pi, &pn, &q, 0.25, 0.75, 0.2, &tol()), Err(ProjError::BadInterval { .. })));
        assert!(matches!(close_gap(&pi, &pn, &q, 0.2, 0.8, 0.05, &tol()), Err(ProjError::GapNotClean { .. })));
    }

    #[test]
    fn spectrum_lift_two_block() {
        let (pi, r, q) = two_block();
        let out = lift_projection_spectrum(&pi, &r, &q, 200, 1e-4, &tol()).unwrap();
        assert!(!out.stalled);
        let spec = out.element.pair_spectrum(&q, &tol()).unwrap();
        assert_eq!(spec.len(), 2);
        assert!(spec[0].abs() < 1e-9 && (spec[1] - 0.5).abs() < 1e-9);
        assert!(pi.apply(&out.element).unwrap().distance(&pi.apply(&r).unwrap()) < 1e-9);

        let all = QuotientMap::new(r.algebra(), vec![0, 1]).unwrap();
        let out = lift_projection_spectrum(&all, &r, &q, 200, 1e-4, &tol()).unwrap();
        assert!(out.element.distance(&r) < 1e-10 && out.distance < 1e-12 && out.iterations == 0);

        let zero = BlockElement::zeros(r.algebra());
        let out = lift_projection_spectrum(&pi, &r, &zero, 200, 1e-4, &tol()).unwrap();
        assert_eq!(out.element.pair_spectrum(&zero, &tol()).unwrap(), vec![0.0]);

        let id = BlockElement::identity(r.algebra());
        assert!(lift_projection_spectrum(&pi, &id, &q, 200, 1e-4, &tol()).is_err());
    }

    #[test]
    fn spectrum_lift_random_strays() {
        let mut rng = seeded_rng(7);
        for _ in 0..10 {
            let (dp, dq) = pair_from_angles_with(&[0.3, 0.7, 1.1], 1, 1, 1, 1, &mut rng).unwrap();
            let (kp, kq) = pair_from_angles_with(&[0.5, 1.2], 1, 0, 1, 0, &mut rng).unwrap();
            let alg = BlockAlgebra::new(vec![dp.dim(), kp.dim()]).unwrap();
            let pi = QuotientMap::new(&alg, vec![1]).unwrap();
            let r = BlockElement::new(&alg, vec![dp, kp]).unwrap();
            let q = BlockElement::new(&alg, vec![dq, kq]).unwrap();
            let out = lift_projection_spectrum(&pi, &r, &q, 200, 1e-4, &tol()).unwrap();
            assert!(!out.stalled, "distance {}", out.distance);
            assert!(out.element.projection_residual() < 1e-8);
            assert!(pi.apply(&out.element).unwrap().distance(&pi.apply(&r).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn idempotent_lift() {
        let alg = BlockAlgebra::new(vec![3, 2]).unwrap();
        let pi = QuotientMap::new(&alg, vec![1]).unwrap();
        let mut rng = seeded_rng(3);
        let junk = random_projection(3, 2, &mut rng) + OperatorMatrix::from_real_diagonal(&[0.3, -0.2, 0.5]);
        let i = m(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let t = BlockElement::new(&alg, vec![junk.clone(), i.clone()]).unwrap();
        let out = lift_idempotent(&pi, &t, 200, 1e-4, &tol()).unwrap();
        assert!(!out.stalled);
        assert!(out.element.idempotent_residual() < 1e-8);
        assert!(pi.apply(&out.element).unwrap().block(0).distance(&i) < 1e-8);
        assert!((out.element.norm() - 2f64.sqrt()).abs() < 1e-8);

        let zero = BlockElement::new(&alg, vec![junk, OperatorMatrix::zeros(2)]).unwrap();
        let out = lift_idempotent(&pi, &zero, 200, 1e-4, &tol()).unwrap();
        assert!(out.element.block(1).norm() < 1e-12);
    }

    #[test]
    fn partial_isometry_lifts() {
        let alg = BlockAlgebra::new(vec![3, 2]).unwrap();
        let pi = QuotientMap::new(&alg, vec![1]).unwrap();
        let junk = m(&[&[0.9, 0.2, 0.0], &[0.1, 0.1, 0.7], &[0.3, 0.6, 0.2]]);
        let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let t = BlockElement::new(&alg, vec![junk.clone(), nil.clone()]).unwrap();
        let big_u = lift_partial_isometry(&pi, &t, &tol()).unwrap();
        assert!(big_u.partial_isometry_residual() < 1e-8);
        assert!(big_u.mul(&big_u).unwrap().norm() < 1e-8);
        assert!(pi.apply(&big_u).unwrap().block(0).distance(&nil) < 1e-8);

        let rot = m(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let t = BlockElement::new(&alg, vec![junk.clone(), rot]).unwrap();
        let big_u = lift_partial_isometry(&pi, &t, &tol()).unwrap();
        assert!((big_u.mul(&big_u).unwrap().norm() - 1.0).abs() < 1e-8);

        let all = QuotientMap::new(&alg, vec![0, 1]).unwrap();
        let w = BlockElement::new(&alg, vec![OperatorMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]), nil]).unwrap();
        assert!(lift_partial_isometry(&all, &w, &tol()).unwrap().distance(&w) < 1e-8);
    }

    #[test]
    fn partial_isometry_spectrum_lift() {
        let alg = BlockAlgebra::new(vec![4, 4]).unwrap();
        let pi = QuotientMap::new(&alg, vec![1]).unwrap();
        let junk = OperatorMatrix::from_fn(4, |i, j| num_complex::Complex64::new(((i * 3 + j) % 5) as f64 / 5.0, 0.0));
        let (s, c) = FRAC_PI_4.sin_cos();
        let u_plus = m(&[&[c, 0.0], &[s, 0.0]]);
        let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let u = OperatorMatrix::direct_sum(&[u_plus, nil]);
        let t = BlockElement::new(&alg, vec![junk, u.clone()]).unwrap();
        let out = lift_partial_isometry_spectrum(&pi, &t, 200, 1e-4, &tol()).unwrap();
        assert!(!out.stalled, "distance {}", out.distance);
        assert!(out.element.partial_isometry_residual() < 1e-8);
        assert!(pi.apply(&out.element).unwrap().block(0).distance(&u) < 1e-8);
        assert!(out.element.eigenvalues().iter().any(|z| (z.re - c).abs() < 1e-6 && z.im.abs() < 1e-6));

        let flip = OperatorMatrix::from_real_diagonal(&[-1.0, 0.0, 0.0, 0.0]);
        let neg = BlockElement::new(&alg, vec![OperatorMatrix::zeros(4), flip]).unwrap();
        assert!(matches!(
            lift_partial_isometry_spectrum(&pi, &neg, 200, 1e-4, &tol()),
            Err(ProjError::NotPositiveCase(_))
        ));
    }

    #[test]
    fn triple_special() {
        let alg = BlockAlgebra::new(vec![4, 4]).unwrap();
        let pi = QuotientMap::new(&alg, vec![1]).unwrap();
        let mut rng = seeded_rng(11);
        let kp = OperatorMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]);
        let (s, c) = FRAC_PI_3.sin_cos();
        let kq = OperatorMatrix::direct_sum(&[
            m(&[&[c * c, c * s], &[c * s, s * s]]),
            OperatorMatrix::from_real_diagonal(&[1.0, 0.0]),
        ]);
        let kr = OperatorMatrix::from_real_diagonal(&[0.0, 0.0, 0.0, 1.0]);
        let p0 = BlockElement::new(&alg, vec![random_projection(4, 2, &mut rng), kp]).unwrap();
        let q0 = BlockElement::new(&alg, vec![random_projection(4, 2, &mut rng), kq]).unwrap();
        let r0 = BlockElement::new(&alg, vec![random_projection(4, 2, &mut rng), kr]).unwrap();
        let out = lift_triple_special(&pi, &p0, &q0, &r0, &tol()).unwrap();
        for (x, x0) in [(&out.p, &p0), (&out.q, &q0), (&out.r, &r0)] {
            assert!(x.projection_residual() < 1e-8);
            assert!(pi.apply(x).unwrap().distance(&pi.apply(x0).unwrap()) < 1e-8);
        }
        assert!(out.p.mul(&out.q).unwrap().mul(&out.r).unwrap().norm() < 1e-8);
        assert!(out.p.mul(&out.r).unwrap().norm() < 1e-8);
    }
}
