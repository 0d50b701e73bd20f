//! Thin adapters: run one construction and report its post-condition residuals.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use projcalc_core::block::BlockElement;
use projcalc_core::calculus::{calculus_apply, pc_build, CalculusResult};
use projcalc_core::geometry::{pair_report, PairReport};
use projcalc_core::homotopy::{homotopy_close, homotopy_mvn, homotopy_orthogonal_mvn, HomotopyPath};
use projcalc_core::lifting::{
    lift_idempotent, lift_partial_isometry, lift_partial_isometry_spectrum, lift_projection_norm,
    lift_projection_spectrum, LiftOutcome, LiftSummary,
};
use projcalc_core::numeric::fixtures::{pair_from_angles, seeded_rng};
use projcalc_core::numeric::{hausdorff, hausdorff_complex, MatrixJson, Vector};
use projcalc_core::states::{excise as excise_op, random_basis, transitivity_units};
use projcalc_core::{OperatorMatrix, ProjError, Result, Tolerances};
use serde::{Deserialize, Serialize};

use crate::input;
use crate::{HomotopyKind, LiftKind};

type Residuals = BTreeMap<&'static str, f64>;

fn residuals<const N: usize>(items: [(&'static str, f64); N]) -> Residuals {
    items.into_iter().collect()
}

#[derive(Serialize)]
pub struct PairOutput {
    pub p: OperatorMatrix,
    pub q: OperatorMatrix,
    /// `σ(PQ) ∩ (0, 1)`, i.e. the squared cosines of the angles.
    pub spectrum: Vec<f64>,
    pub report: PairReport,
}

pub fn pair(
    angles: &[f64],
    extra_p: usize,
    extra_q: usize,
    extra_kernel: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<PairOutput> {
    let (p, q) = pair_from_angles(angles, extra_p, extra_q, extra_kernel, seed)?;
    let report = pair_report(&p, &q, tol)?;
    let spectrum = report.spectrum.iter().copied().filter(|&x| x > 0.0 && x < 1.0).collect();
    Ok(PairOutput { p, q, spectrum, report })
}

#[derive(Serialize)]
pub struct PcOutput {
    #[serde(flatten)]
    pub result: CalculusResult,
    pub residuals: Residuals,
}

pub fn pc(q: &Path, r: &Path, function: &str, tol: &Tolerances) -> Result<PcOutput> {
    let (q, r) = (input::matrix(q)?, input::matrix(r)?);
    let f = input::function(function)?;
    let result = pc_build(&q, &r, &f, tol)?;
    let fqrq = calculus_apply(&(&q * &r * &q).hermitian_part(), &f, tol)?;
    let p = &result.p;
    let residuals = residuals([
        ("qpq", (&q * p * &q).distance(&fqrq)),
        ("projection", p.projection_residual()),
        ("partial_isometry", result.u.partial_isometry_residual()),
        ("initial", (result.u.adjoint() * &result.u).distance(&r)),
    ]);
    Ok(PcOutput { result, residuals })
}

#[derive(Serialize)]
pub struct HomotopyOutput {
    #[serde(flatten)]
    pub path: HomotopyPath,
    pub residuals: Residuals,
}

fn required(path: Option<&PathBuf>, flag: &str) -> Result<OperatorMatrix> {
    input::matrix(path.ok_or_else(|| ProjError::Format(format!("--{flag} is required for this kind")))?)
}

pub fn homotopy(
    kind: HomotopyKind,
    q: Option<&PathBuf>,
    r: Option<&PathBuf>,
    u: Option<&PathBuf>,
    steps: usize,
    tol: &Tolerances,
) -> Result<HomotopyOutput> {
    let path = match kind {
        HomotopyKind::Close => homotopy_close(&required(q, "q")?, &required(r, "r")?, steps, tol)?,
        HomotopyKind::Mvn => homotopy_mvn(&required(u, "u")?, steps, tol)?,
        HomotopyKind::Orthogonal => homotopy_orthogonal_mvn(&required(u, "u")?, steps, tol)?,
    };
    let residuals = residuals([
        ("endpoint", path.endpoint_error()),
        ("projection", path.max_projection_residual()),
        ("max_step", path.max_step_distance()),
    ]);
    Ok(HomotopyOutput { path, residuals })
}

#[derive(Deserialize)]
struct LiftInput {
    r: Option<MatrixJson>,
    q: Option<MatrixJson>,
    t: Option<MatrixJson>,
}

#[derive(Serialize)]
pub struct LiftOutput {
    /// The lift, as a block-diagonal matrix.
    pub element: OperatorMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftSummary>,
    pub quantities: Residuals,
    pub residuals: Residuals,
}

fn outcome(o: LiftOutcome) -> Result<(BlockElement, LiftSummary)> {
    let summary = LiftSummary::from(&o);
    Ok((o.into_result()?, summary))
}

pub fn lift(
    kind: LiftKind,
    algebra: &Path,
    map: &Path,
    input_path: &Path,
    max_iters: usize,
    tau_spec: f64,
    tol: &Tolerances,
) -> Result<LiftOutput> {
    let alg = input::algebra(algebra)?;
    let pi = input::quotient(&alg, map)?;
    let raw: LiftInput = input::json(input_path)?;
    let field = |m: Option<MatrixJson>, name: &str| -> Result<BlockElement> {
        let m = m.ok_or_else(|| ProjError::Format(format!("input needs field \"{name}\"")))?;
        input::element(&alg, &OperatorMatrix::try_from(&m)?, tol)
    };
    let image = |a: &BlockElement, b: &BlockElement| -> Result<f64> { Ok(pi.apply(a)?.distance(&pi.apply(b)?)) };
    let (element, lift, quantities, residuals) = match kind {
        LiftKind::Norm | LiftKind::Spectrum => {
            let (r, q) = (field(raw.r, "r")?, field(raw.q, "q")?);
            let (p, lift) = match kind {
                LiftKind::Norm => (lift_projection_norm(&pi, &r, &q, tol)?, None),
                _ => {
                    let (p, s) = outcome(lift_projection_spectrum(&pi, &r, &q, max_iters, tau_spec, tol)?)?;
                    (p, Some(s))
                }
            };
            let norm = p.mul(&q)?.norm();
            let target = pi.apply(&p)?.mul(&pi.apply(&q)?)?.norm();
            let spectrum = p.pair_spectrum(&q, tol)?;
            let target_spectrum = pi.apply(&p)?.pair_spectrum(&pi.apply(&q)?, tol)?;
            let quantities = residuals([
                ("norm_pq", norm),
                ("norm_pq_squared", norm * norm),
                ("quotient_norm_pq", target),
                ("hausdorff", hausdorff(&spectrum, &target_spectrum)),
            ]);
            let res = residuals([
                ("image", image(&p, &r)?),
                ("projection", p.projection_residual()),
                ("norm", (norm - target).abs()),
            ]);
            (p, lift, quantities, res)
        }
        LiftKind::Idempotent => {
            let t = field(raw.t, "t")?;
            let (i, s) = outcome(lift_idempotent(&pi, &t, max_iters, tau_spec, tol)?)?;
            let ii = i.adjoint().mul(&i)?;
            let dist = hausdorff(&eigen_real(&ii), &eigen_real(&pi.apply(&ii)?));
            let res = residuals([("image", image(&i, &t)?), ("idempotent", i.idempotent_residual())]);
            (i, Some(s), residuals([("hausdorff", dist)]), res)
        }
        LiftKind::Isometry | LiftKind::IsometrySpectrum => {
            let t = field(raw.t, "t")?;
            let (u, lift) = match kind {
                LiftKind::Isometry => (lift_partial_isometry(&pi, &t, tol)?, None),
                _ => {
                    let (u, s) = outcome(lift_partial_isometry_spectrum(&pi, &t, max_iters, tau_spec, tol)?)?;
                    (u, Some(s))
                }
            };
            let square = u.mul(&u)?.norm();
            let target = pi.apply(&u)?.mul(&pi.apply(&u)?)?.norm();
            let dist = hausdorff_complex(&u.eigenvalues(), &pi.apply(&u)?.eigenvalues());
            let quantities = residuals([("norm_u2", square), ("quotient_norm_u2", target), ("hausdorff", dist)]);
            let res = residuals([
                ("image", image(&u, &t)?),
                ("partial_isometry", u.partial_isometry_residual()),
                ("square", (square - target).abs()),
            ]);
            (u, lift, quantities, res)
        }
    };
    Ok(LiftOutput { element: element.to_matrix(), lift, quantities, residuals })
}

fn eigen_real(x: &BlockElement) -> Vec<f64> {
    x.eigenvalues().iter().map(|z| z.re).collect()
}

#[derive(Serialize)]
pub struct ExciseOutput {
    pub p: OperatorMatrix,
    pub lambda: f64,
    pub rank: usize,
    pub residuals: Residuals,
}

pub fn excise(q: &Path, state: &Path, rank: usize, tol: &Tolerances) -> Result<ExciseOutput> {
    let q = input::matrix(q)?;
    let phi = input::state(state, tol)?;
    let p = excise_op(&q, &phi, rank, tol)?;
    let lambda = phi.expectation(&q);
    let v = phi.vector();
    let residuals = residuals([
        ("excision", (&p * &q * &p - p.scale(lambda)).norm()),
        ("state", (p.apply(v) - v).norm()),
        ("projection", p.projection_residual()),
    ]);
    Ok(ExciseOutput { rank: p.rank(), p, lambda, residuals })
}

#[derive(Serialize)]
pub struct TransitivityOutput {
    pub units: Vec<OperatorMatrix>,
    pub faithful_rank: usize,
    pub residuals: Residuals,
}

fn standard_basis(big_n: usize, n: usize) -> Vec<Vector> {
    (0..n).map(|i| Vector::from_fn(big_n, |r, _| Complex64::from(if r == i { 1.0 } else { 0.0 }))).collect()
}

pub fn transitivity(
    n: usize,
    big_n: usize,
    fat: bool,
    standard: bool,
    seed: u64,
    tol: &Tolerances,
) -> Result<TransitivityOutput> {
    if n > big_n {
        return Err(ProjError::DimensionTooSmall { required: n, available: big_n });
    }
    let basis = if standard { standard_basis(big_n, n) } else { random_basis(big_n, n, &mut seeded_rng(seed)) };
    let s = transitivity_units(big_n, &basis, fat, tol)?;
    let residuals = residuals([
        ("laws", s.law_residual()),
        ("basis", s.basis_residual()),
        ("initial", s.initial_residual()),
        ("excision", s.excision_residual()),
    ]);
    Ok(TransitivityOutput { faithful_rank: s.faithful_rank(tol), units: s.units, residuals })
}
