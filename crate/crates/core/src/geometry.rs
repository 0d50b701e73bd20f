//! Two-projection geometry: norm identities, joins, the idempotent bijection and
//! Murray-von Neumann partial isometries.

use serde::Serialize;

use crate::error::{ProjError, Result};
use crate::numeric::spectral::{hermitian_eig, pair_spectrum_unchecked};
use crate::numeric::{OperatorMatrix, Tolerances};
use crate::support::{is_well_supported, left_support, polar, quasi_inverse};

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub spectrum: Vec<f64>,
    pub norm_pq: f64,
    pub norm_p_qperp: f64,
    pub norm_pperp_q: f64,
    pub norm_diff: f64,
    /// `||PQ|| < 1`, so `P ∨ Q` exists.
    pub has_join: bool,
    /// `||P⊥Q|| < 1`, so `PQ` is well-supported.
    pub pq_well_supported: bool,
    /// `||PQ⊥|| < 1`, so `[PQ] = P`.
    pub pq_support_is_p: bool,
}

pub fn pair_report(p: &OperatorMatrix, q: &OperatorMatrix, tol: &Tolerances) -> Result<PairReport> {
    p.require_same_dim(q)?;
    p.require_projection(tol.eq)?;
    q.require_projection(tol.eq)?;
    let margin = 1.0 - tol.cluster;
    let norm_pq = (p * q).norm();
    let norm_p_qperp = (p * q.complement()).norm();
    let norm_pperp_q = (p.complement() * q).norm();
    Ok(PairReport {
        spectrum: pair_spectrum_unchecked(p, q, tol),
        norm_pq,
        norm_p_qperp,
        norm_pperp_q,
        norm_diff: (p - q).norm(),
        has_join: norm_pq < margin,
        pq_well_supported: norm_pperp_q < margin,
        pq_support_is_p: norm_p_qperp < margin,
    })
}

fn check_pair(p: &OperatorMatrix, q: &OperatorMatrix, tol: &Tolerances) -> Result<()> {
    p.require_same_dim(q)?;
    p.require_projection(tol.eq)?;
    q.require_projection(tol.eq)
}

/// `P ∨ Q = [1 − P⊥Q⊥P⊥]`, the projection onto `R(P) + R(Q)`.
pub fn sup_join(p: &OperatorMatrix, q: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    check_pair(p, q, tol)?;
    let norm = (p * q).norm();
    if norm >= 1.0 - tol.cluster {
        return Err(ProjError::JoinUndefined { norm });
    }
    let pp = p.complement();
    let s = OperatorMatrix::identity(p.dim()) - &pp * q.complement() * &pp;
    // nonzero spectrum of s lies in [1 - ||PQ||², 1]
    let eig = hermitian_eig(&s.hermitian_part(), tol)?;
    let cut = (1.0 - norm * norm) / 2.0;
    Ok(eig.projection_where(tol.cluster, |x| x > cut))
}

/// Projection onto the span of the ranges of two positive operators, `[A + B]`.
pub fn span_join(a: &OperatorMatrix, b: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    left_support(&(a + b), tol)
}

/// `[PQ]`.
pub fn product_support(p: &OperatorMatrix, q: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    left_support(&(p * q), tol)
}

/// `Q = [I]`, `P = [I*]`, the unique pair with `I = (PQ)⁻¹`. Returned as `(P, Q)`.
pub fn idempotent_to_pair(i: &OperatorMatrix, tol: &Tolerances) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let residual = i.idempotent_residual();
    if residual > tol.eq {
        return Err(ProjError::NotIdempotent { residual });
    }
    let q = left_support(i, tol)?;
    let p = left_support(&i.adjoint(), tol)?;
    Ok((p, q))
}

/// `(PQ)⁻¹`, an idempotent with range `R(P)` and kernel `R(Q)⊥`.
pub fn pair_to_idempotent(p: &OperatorMatrix, q: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    check_pair(p, q, tol)?;
    let norm = (p - q).norm();
    if norm >= 1.0 - tol.cluster {
        return Err(ProjError::PairTooFar { norm });
    }
    quasi_inverse(&(p * q), tol)
}

/// `U_{QP}`: the partial isometry with `U*U = P`, `UU* = Q` and `U*U²` positive.
pub fn mvn_partial_isometry(p: &OperatorMatrix, q: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    check_pair(p, q, tol)?;
    let norm = (p - q).norm();
    if norm >= 1.0 - tol.cluster {
        return Err(ProjError::PairTooFar { norm });
    }
    Ok(polar(&(q * p), tol)?.u)
}

fn require_commutator(u: &OperatorMatrix, tol: &Tolerances) -> Result<OperatorMatrix> {
    u.require_partial_isometry(tol.eq)?;
    let w = u.adjoint() * u * u;
    let residual = w.self_adjoint_residual();
    if residual > tol.eq {
        return Err(ProjError::CommutatorTooLarge { residual });
    }
    Ok(w.hermitian_part())
}

#[derive(Debug, Clone, Serialize)]
pub struct UpqReport {
    pub norm_p_minus_q: f64,
    pub norm_u_minus_ustar: f64,
    pub p_q_close: bool,
    pub u_ustar_close: bool,
    pub square_supported_on_q: bool,
}

impl UpqReport {
    /// The three conditions agree.
    pub fn consistent(&self) -> bool {
        self.p_q_close == self.u_ustar_close && self.u_ustar_close == self.square_supported_on_q
    }
}

/// Evaluates the three equivalent conditions on a partial isometry with `U*U²` self-adjoint.
pub fn upq_equivalences(u: &OperatorMatrix, tol: &Tolerances) -> Result<UpqReport> {
    require_commutator(u, tol)?;
    let p = u.adjoint() * u;
    let q = u * u.adjoint();
    let margin = 1.0 - tol.cluster;
    let norm_p_minus_q = (&p - &q).norm();
    let norm_u_minus_ustar = (u - u.adjoint()).norm();
    let u2 = u * u;
    let square_supported_on_q = match is_well_supported(&u2, tol) {
        (true, _) => left_support(&u2, tol).map(|s| s.distance(&q) <= 10.0 * tol.eq).unwrap_or(false),
        _ => false,
    };
    Ok(UpqReport {
        norm_p_minus_q,
        norm_u_minus_ustar,
        p_q_close: norm_p_minus_q < margin,
        u_ustar_close: norm_u_minus_ustar < margin,
        square_supported_on_q,
    })
}

#[derive(Debug, Clone)]
pub struct IsometrySplit {
    pub u_plus: OperatorMatrix,
    pub u_minus: OperatorMatrix,
    pub u_zero: OperatorMatrix,
    pub p_plus: OperatorMatrix,
    pub p_minus: OperatorMatrix,
    pub p_zero: OperatorMatrix,
}

impl IsometrySplit {
    pub fn reconstruct(&self) -> OperatorMatrix {
        &self.u_plus - &self.u_minus + &self.u_zero
    }
}

/// `U = U₊ − U₋ + U₀` along the sign of `U*U²`.
pub fn split_partial_isometry(u: &OperatorMatrix, tol: &Tolerances) -> Result<IsometrySplit> {
    let w = require_commutator(u, tol)?;
    let eig = hermitian_eig(&w, tol)?;
    let p_plus = eig.projection_where(tol.cluster, |x| x > tol.cluster);
    let p_minus = eig.projection_where(tol.cluster, |x| x < -tol.cluster);
    let p_zero = u.adjoint() * u - &p_plus - &p_minus;
    Ok(IsometrySplit { u_plus: u * &p_plus, u_minus: -(u * &p_minus), u_zero: u * &p_zero, p_plus, p_minus, p_zero })
}

#[cfg(test)]
mod tests {
    use super::*;
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

    #[test]
    fn report_examples() {
        let p = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
        let r = pair_report(&p, &p, &tol()).unwrap();
        assert_eq!(r.norm_diff, 0.0);
        assert_eq!(r.spectrum, vec![0.0, 1.0]);
        let q = OperatorMatrix::from_real_diagonal(&[0.0, 1.0]);
        let r = pair_report(&p, &q, &tol()).unwrap();
        assert!(r.norm_pq < 1e-15 && (r.norm_diff - 1.0).abs() < 1e-15);
        let r = pair_report(&p, &line(FRAC_PI_4), &tol()).unwrap();
        let h = 0.5f64.sqrt();
        assert!((r.norm_pq - h).abs() < 1e-12 && (r.norm_diff - h).abs() < 1e-12);
    }

    #[test]
    fn join_examples() {
        let p = OperatorMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]);
        let q = OperatorMatrix::from_real_diagonal(&[0.0, 1.0, 0.0]);
        assert!(sup_join(&p, &q, &tol()).unwrap().distance(&(&p + &q)) < 1e-12);
        assert!(sup_join(&p, &OperatorMatrix::zeros(3), &tol()).unwrap().distance(&p) < 1e-12);
        let e1 = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
        let j = sup_join(&e1, &line(FRAC_PI_3), &tol()).unwrap();
        assert!(j.distance(&OperatorMatrix::identity(2)) < 1e-12);
        assert!(matches!(sup_join(&e1, &e1, &tol()), Err(ProjError::JoinUndefined { .. })));
    }

    #[test]
    fn idempotent_examples() {
        let i = m(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let (p, q) = idempotent_to_pair(&i, &tol()).unwrap();
        assert!(q.distance(&OperatorMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-12);
        assert!(p.distance(&m(&[&[0.5, 0.5], &[0.5, 0.5]])) < 1e-12);
        let back = pair_to_idempotent(&p, &q, &tol()).unwrap();
        assert!(back.distance(&i) < 1e-12);
        let z = idempotent_to_pair(&OperatorMatrix::zeros(2), &tol()).unwrap();
        assert_eq!(z.0.norm() + z.1.norm(), 0.0);
        assert!(matches!(
            idempotent_to_pair(&m(&[&[2.0, 0.0], &[0.0, 0.0]]), &tol()),
            Err(ProjError::NotIdempotent { .. })
        ));
        let e = pair_to_idempotent(&line(FRAC_PI_4), &OperatorMatrix::from_real_diagonal(&[1.0, 0.0]), &tol()).unwrap();
        assert!((e.norm() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mvn_examples() {
        let p = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(mvn_partial_isometry(&p, &p, &tol()).unwrap().distance(&p) < 1e-12);
        let (s, c) = FRAC_PI_6.sin_cos();
        let u = mvn_partial_isometry(&p, &line(FRAC_PI_6), &tol()).unwrap();
        assert!(u.distance(&m(&[&[c, 0.0], &[s, 0.0]])) < 1e-12);
        let q = OperatorMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert!(matches!(mvn_partial_isometry(&p, &q, &tol()), Err(ProjError::PairTooFar { .. })));
    }

    #[test]
    fn upq_examples() {
        let p = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
        let r = upq_equivalences(&p, &tol()).unwrap();
        assert!(r.consistent() && r.p_q_close && r.norm_u_minus_ustar == 0.0);
        let n = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = upq_equivalences(&n, &tol()).unwrap();
        assert!(r.consistent() && !r.p_q_close);
        let u = mvn_partial_isometry(&p, &line(FRAC_PI_4), &tol()).unwrap();
        let r = upq_equivalences(&u, &tol()).unwrap();
        assert!(r.consistent() && r.p_q_close);
        assert!((r.norm_u_minus_ustar - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn split_examples() {
        let p = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
        let u = mvn_partial_isometry(&p, &line(FRAC_PI_4), &tol()).unwrap();
        let s = split_partial_isometry(&u, &tol()).unwrap();
        assert!(s.u_plus.distance(&u) < 1e-12 && s.u_minus.norm() < 1e-12 && s.u_zero.norm() < 1e-12);
        let n = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let s = split_partial_isometry(&n, &tol()).unwrap();
        assert!(s.u_zero.distance(&n) < 1e-12 && s.u_plus.norm() < 1e-12);
        let d = OperatorMatrix::direct_sum(&[u.clone(), n.clone()]);
        let s = split_partial_isometry(&d, &tol()).unwrap();
        assert!(s.u_plus.distance(&OperatorMatrix::direct_sum(&[u, OperatorMatrix::zeros(2)])) < 1e-12);
        assert!(s.u_zero.distance(&OperatorMatrix::direct_sum(&[OperatorMatrix::zeros(2), n])) < 1e-12);
        assert!(s.reconstruct().distance(&d) < 1e-12);
        let neg = m(&[&[-1.0, 0.0], &[0.0, 0.0]]);
        let s = split_partial_isometry(&neg, &tol()).unwrap();
        assert!(s.u_minus.distance(&p) < 1e-12);
    }
}
