//! Sampled projection homotopies.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{build_with, c_fg, PairSpectrum};
use crate::error::{ProjError, Result};
use crate::numeric::spectral::hermitian_eig;
use crate::numeric::{OperatorMatrix, Tolerances};

#[derive(Debug, Clone, Serialize)]
pub struct HomotopyPath {
    pub parameters: Vec<f64>,
    pub steps: Vec<OperatorMatrix>,
    #[serde(skip)]
    pub start: OperatorMatrix,
    #[serde(skip)]
    pub end: OperatorMatrix,
    /// Closed-form bound on the distance between adjacent steps.
    pub mesh_bound: f64,
}

impl HomotopyPath {
    pub fn max_step_distance(&self) -> f64 {
        self.steps.windows(2).map(|w| w[0].distance(&w[1])).fold(0.0, f64::max)
    }

    pub fn max_projection_residual(&self) -> f64 {
        self.steps.iter().map(|p| p.projection_residual()).fold(0.0, f64::max)
    }

    pub fn endpoint_error(&self) -> f64 {
        match (self.steps.first(), self.steps.last()) {
            (Some(a), Some(b)) => a.distance(&self.start).max(b.distance(&self.end)),
            _ => f64::INFINITY,
        }
    }

    fn reversed(mut self) -> Self {
        self.steps.reverse();
        self.parameters = self.parameters.iter().rev().map(|t| 1.0 - t).collect();
        std::mem::swap(&mut self.start, &mut self.end);
        self
    }
}

/// How `f_t` moves from the identity to its target on `σ(QR)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `f_t(s) = sin²((1−t)·asin√s + t·asin√f₁(s))`: adjacent steps are exactly
    /// `sin(Δt·|asin√f₁(s) − asin√s|)` apart.
    #[default]
    Geodesic,
    /// `f_t = (1−t)·id + t·f₁`.
    Linear,
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn interpolate(schedule: Schedule, s: f64, target: f64, t: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    match schedule {
        Schedule::Linear => (1.0 - t) * s + t * target,
        Schedule::Geodesic => {
            let a = s.sqrt().asin();
            let b = target.sqrt().asin();
            ((1.0 - t) * a + t * b).sin().powi(2)
        }
    }
}

fn calculus_path(
    q: &OperatorMatrix,
    r: &OperatorMatrix,
    target: impl Fn(f64) -> f64,
    end: OperatorMatrix,
    n_steps: usize,
    schedule: Schedule,
    tol: &Tolerances,
) -> Result<(HomotopyPath, OperatorMatrix)> {
    let spec = PairSpectrum::new(q, r, tol);
    let params = grid(n_steps);
    let mut steps = Vec::with_capacity(n_steps);
    let mut last_u = OperatorMatrix::zeros(q.dim());
    for &t in &params {
        let res = build_with(q, r, &spec, &|s: f64| interpolate(schedule, s, target(s), t), tol)?;
        steps.push(res.p);
        last_u = res.u;
    }
    let values = spec.values();
    let mut mesh = 0.0f64;
    for w in params.windows(2) {
        for &s in &values {
            let a = interpolate(schedule, s, target(s), w[0]);
            let b = interpolate(schedule, s, target(s), w[1]);
            mesh = mesh.max(c_fg(a, b).abs());
        }
    }
    let path = HomotopyPath { parameters: params, steps, start: r.clone(), end, mesh_bound: mesh };
    Ok((path, last_u))
}

fn check_steps(n_steps: usize) -> Result<()> {
    if n_steps < 2 {
        return Err(ProjError::Format(format!("need at least 2 steps, got {n_steps}")));
    }
    Ok(())
}

/// Path from `R` to `Q` through `P_{Q,R,f_t}`, `f_t` running from the identity to `χ`.
pub fn homotopy_close(
    q: &OperatorMatrix,
    r: &OperatorMatrix,
    n_steps: usize,
    tol: &Tolerances,
) -> Result<HomotopyPath> {
    homotopy_close_with(q, r, n_steps, Schedule::default(), tol)
}

pub fn homotopy_close_with(
    q: &OperatorMatrix,
    r: &OperatorMatrix,
    n_steps: usize,
    schedule: Schedule,
    tol: &Tolerances,
) -> Result<HomotopyPath> {
    check_steps(n_steps)?;
    q.require_same_dim(r)?;
    q.require_projection(tol.eq)?;
    r.require_projection(tol.eq)?;
    let norm = (q - r).norm();
    if norm >= 1.0 - tol.cluster {
        return Err(ProjError::PairTooFar { norm });
    }
    let (path, _) = calculus_path(q, r, |s| if s > 0.0 { 1.0 } else { 0.0 }, q.clone(), n_steps, schedule, tol)?;
    Ok(path)
}

/// Path from `Q = U*U` to `R = UU*` through `S_t R S_t*`, `S_t = R' − e^{iπt} Q'`, for `QR = 0`.
pub fn homotopy_orthogonal_mvn(u: &OperatorMatrix, n_steps: usize, tol: &Tolerances) -> Result<HomotopyPath> {
    check_steps(n_steps)?;
    u.require_partial_isometry(tol.eq)?;
    let q = (u.adjoint() * u).hermitian_part();
    let r = (u * u.adjoint()).hermitian_part();
    let norm = (&q * &r).norm();
    if norm > tol.eq {
        return Err(ProjError::NotOrthogonal { norm });
    }
    let s = u + u.adjoint();
    let eig = hermitian_eig(&s.hermitian_part(), tol)?;
    let r_prime = eig.projection_where(tol.cluster, |x| x > 0.5);
    let q_prime = eig.projection_where(tol.cluster, |x| x < -0.5);
    let params = grid(n_steps);
    let steps: Vec<OperatorMatrix> = params
        .iter()
        .map(|&t| {
            let st = &r_prime - q_prime.scale_complex(Complex64::from_polar(1.0, PI * t));
            (&st * &r * st.adjoint()).hermitian_part()
        })
        .collect();
    let h = 1.0 / (n_steps - 1) as f64;
    let mesh_bound = if r.norm() > 0.0 { (FRAC_PI_2 * h).sin() } else { 0.0 };
    Ok(HomotopyPath { parameters: params, steps, start: q, end: r, mesh_bound })
}

/// Path from `R = UU*` to `Q = U*U` for `||QR|| < 1`: first `P_{Q,R,f_t}` with `f_t → 0`,
/// reaching `P` with `QPQ = 0`, then the orthogonal rotation from `P` to `Q`.
pub fn homotopy_mvn(u: &OperatorMatrix, n_steps: usize, tol: &Tolerances) -> Result<HomotopyPath> {
    homotopy_mvn_with(u, n_steps, Schedule::default(), tol)
}

pub fn homotopy_mvn_with(
    u: &OperatorMatrix,
    n_steps: usize,
    schedule: Schedule,
    tol: &Tolerances,
) -> Result<HomotopyPath> {
    check_steps(n_steps)?;
    u.require_partial_isometry(tol.eq)?;
    let q = (u.adjoint() * u).hermitian_part();
    let r = (u * u.adjoint()).hermitian_part();
    let norm = (&q * &r).norm();
    if norm >= 1.0 - tol.cluster {
        return Err(ProjError::NormTooLarge { norm });
    }
    if norm <= tol.eq {
        return Ok(homotopy_orthogonal_mvn(u, n_steps, tol)?.reversed());
    }
    let (phase1, w) = calculus_path(&q, &r, |_| 0.0, OperatorMatrix::zeros(q.dim()), n_steps, schedule, tol)?;
    let p1 = phase1.steps.last().expect("n_steps >= 2").clone();
    let qpq = (&q * &p1 * &q).norm();
    if qpq > 10.0 * tol.eq {
        return Err(ProjError::NotOrthogonal { norm: qpq });
    }
    // W: R → P₁ and U: Q → R compose to V: Q → P₁
    let v = &w * u;
    let phase2 = homotopy_orthogonal_mvn(&v, n_steps, &Tolerances { eq: 10.0 * tol.eq, ..*tol })?.reversed();
    let mut parameters: Vec<f64> = phase1.parameters.iter().map(|t| t / 2.0).collect();
    let mut steps = phase1.steps;
    parameters.extend(phase2.parameters.iter().skip(1).map(|t| 0.5 + t / 2.0));
    steps.extend(phase2.steps.into_iter().skip(1));
    Ok(HomotopyPath { parameters, steps, start: r, end: q, mesh_bound: phase1.mesh_bound.max(phase2.mesh_bound) })
}
