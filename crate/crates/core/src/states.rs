//! Exact excision of vector states on projections, and matrix units realizing `B(K)` inside
//! a matrix algebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block::{sandwich_unchecked, BlockAlgebra, BlockElement};
use crate::calculus::pc_constant;
use crate::error::{ProjError, Result};
use crate::geometry::span_join;
use crate::numeric::fixtures::{gaussian_matrix, random_unit_vector};
use crate::numeric::spectral::hermitian_eig;
use crate::numeric::{OperatorMatrix, Tolerances, Vector};
use crate::support::left_support;

/// The vector state `T ↦ ⟨Tv, v⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: Vector,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl PureState {
    pub fn new(vector: Vector, tol: &Tolerances) -> Result<Self> {
        let residual = (vector.norm() - 1.0).abs();
        if residual > tol.eq {
            return Err(ProjError::BasisNotOrthonormal { residual });
        }
        Ok(PureState { vector })
    }

    pub fn vector(&self) -> &Vector {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn evaluate(&self, t: &OperatorMatrix) -> Complex64 {
        self.vector.dotc(&t.apply(&self.vector))
    }

    /// `φ(Q)` for a self-adjoint `Q`.
    pub fn expectation(&self, t: &OperatorMatrix) -> f64 {
        self.evaluate(t).re
    }

    pub fn from_json(json: &str, tol: &Tolerances) -> Result<Self> {
        let raw: StateJson = serde_json::from_str(json).map_err(|e| ProjError::Format(e.to_string()))?;
        if raw.re.len() != raw.im.len() {
            return Err(ProjError::Format("re and im lengths differ".into()));
        }
        let v = Vector::from_iterator(raw.re.len(), raw.re.iter().zip(&raw.im).map(|(&a, &b)| Complex64::new(a, b)));
        PureState::new(v, tol)
    }

    pub fn to_json(&self) -> String {
        let raw = StateJson {
            re: self.vector.iter().map(|z| z.re).collect(),
            im: self.vector.iter().map(|z| z.im).collect(),
        };
        serde_json::to_string(&raw).expect("plain numeric data")
    }
}

fn excision_residual(p: &OperatorMatrix, q: &OperatorMatrix, lambda: f64) -> f64 {
    (p * q * p - p.scale(lambda)).norm()
}

fn degenerate(e: ProjError) -> ProjError {
    match e {
        ProjError::NumericallyDegenerate { gap } => ProjError::DegenerateSplit { bound: gap },
        ProjError::Inadmissible(_) => ProjError::DegenerateSplit { bound: 1.0 },
        other => other,
    }
}

#[derive(Debug, Clone)]
pub struct ExcisionStep {
    pub p: OperatorMatrix,
    /// `‖[PₙR] − R‖ + ‖S − (Pₙ − [PₙR])‖ + ‖S − P_{Q,S,λ}‖`, which bounds `‖Pₙ − Pₙ₊₁‖`.
    pub step_bound: f64,
}

/// `Pₙ₊₁ = R + P_{Q,S,λ}` with `S = [(R ∨ [QR])⊥(Pₙ − [PₙR])]`, for `Pₙ` and `R` both
/// satisfying `XQX = λX`.
pub fn excision_step(
    q: &OperatorMatrix,
    pn: &OperatorMatrix,
    rnext: &OperatorMatrix,
    lambda: f64,
    tol: &Tolerances,
) -> Result<ExcisionStep> {
    for x in [q, pn, rnext] {
        x.require_projection(tol.eq)?;
    }
    q.require_same_dim(pn)?;
    q.require_same_dim(rnext)?;
    let residual = excision_residual(pn, q, lambda).max(excision_residual(rnext, q, lambda));
    if residual > 10.0 * tol.eq || !(0.0..=1.0).contains(&lambda) {
        return Err(ProjError::NotExcising { residual });
    }
    let overlap = left_support(&(pn * rnext), tol).map_err(degenerate)?;
    let join = span_join(rnext, &(q * rnext * q), tol).map_err(degenerate)?;
    let rest = pn - &overlap;
    let s = left_support(&(join.complement() * &rest), tol).map_err(degenerate)?;
    let added = pc_constant(q, &s, lambda, tol).map_err(degenerate)?.p;
    let p = (rnext + &added).hermitian_part();
    let residual = excision_residual(&p, q, lambda).max(p.projection_residual());
    if residual > 100.0 * tol.eq {
        return Err(ProjError::DegenerateSplit { bound: residual });
    }
    let step_bound = overlap.distance(rnext) + s.distance(&rest) + s.distance(&added);
    Ok(ExcisionStep { p, step_bound })
}

/// First eigenvector of `E` for the eigenvalue 1, if `E` is nonzero.
fn unit_vector_in(e: &OperatorMatrix, tol: &Tolerances) -> Result<Option<Vector>> {
    let eig = hermitian_eig(&e.hermitian_part(), tol)?;
    let cols = eig.eigenvectors_where(tol.cluster, |x| x > 0.5);
    Ok((cols.ncols() > 0).then(|| cols.column(cols.ncols() - 1).into_owned()))
}

/// Projection onto `Q ∩ (Qv)⊥`, which is orthogonal to `v`.
fn within_minus(q: &OperatorMatrix, v: &Vector) -> OperatorMatrix {
    let w = q.apply(v);
    let n2 = w.norm_squared();
    if n2 == 0.0 {
        return q.clone();
    }
    q - OperatorMatrix::outer(&w, &w).scale(1.0 / n2)
}

/// Grows `vv*` by excision steps inside `ambient` (a projection commuting with `Q` and fixing
/// `v`) until `rank` is reached or no room is left.
fn excise_greedy(
    q: &OperatorMatrix,
    v: &Vector,
    rank: usize,
    ambient: &OperatorMatrix,
    tol: &Tolerances,
) -> Result<OperatorMatrix> {
    let lambda = v.dotc(&q.apply(v)).re.clamp(0.0, 1.0);
    let mut p = OperatorMatrix::rank_one_projection(v);
    if lambda > 1.0 - tol.cluster || lambda < tol.cluster {
        let side = if lambda > 0.5 { q.clone() } else { q.complement() };
        let mut room = within_minus(&(ambient * &side * ambient).hermitian_part(), v);
        while p.rank() < rank {
            let Some(w) = unit_vector_in(&room, tol)? else {
                break;
            };
            p = p + OperatorMatrix::rank_one_projection(&w);
            room = within_minus(&room, &w);
        }
        return Ok(p.hermitian_part());
    }
    let (sa, sb) = (lambda.sqrt(), (1.0 - lambda).sqrt());
    while p.rank() < rank {
        let used = span_join(&p, &(q * &p * q), tol)?;
        let free = (ambient - ambient * &used * ambient).hermitian_part();
        let Some(a) = unit_vector_in(&(q * &free * q), tol)? else {
            break;
        };
        let Some(b) = unit_vector_in(&(q.complement() * &free * q.complement()), tol)? else {
            break;
        };
        let w = a * Complex64::from(sa) + b * Complex64::from(sb);
        p = excision_step(q, &p, &OperatorMatrix::rank_one_projection(&w), lambda, tol)?.p;
    }
    Ok(p)
}

/// Projection `P` of the given rank with `Pv = v` and `PQP = φ(Q)P`.
pub fn excise(q: &OperatorMatrix, phi: &PureState, target_rank: usize, tol: &Tolerances) -> Result<OperatorMatrix> {
    q.require_projection(tol.eq)?;
    if q.dim() != phi.dim() {
        return Err(ProjError::DimensionMismatch { expected: q.dim(), found: phi.dim() });
    }
    if target_rank == 0 {
        return Err(ProjError::RankUnachievable { requested: 0, available: 1 });
    }
    let p = excise_greedy(q, &phi.vector, target_rank, &OperatorMatrix::identity(q.dim()), tol)?;
    let available = p.rank();
    if available < target_rank {
        return Err(ProjError::RankUnachievable { requested: target_rank, available });
    }
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct SandwichBaseline {
    /// Positive contraction with `Rv = v` and `‖RQR − φ(Q)R‖ ≤ ε`.
    pub r: OperatorMatrix,
    /// Projection with `E⊥_R(1−ε) ≤ R' ≤ E⊥_R(1−2ε)`.
    pub r_prime: OperatorMatrix,
    pub residual_r: f64,
    pub residual_r_prime: f64,
}

/// The approximate route: a positive contraction `R` almost excising `φ` on `Q`, then a
/// projection sandwiched between its spectral projections at `1−ε` and `1−2ε`.
pub fn sandwich_baseline(
    q: &OperatorMatrix,
    phi: &PureState,
    eps: f64,
    rank: usize,
    rng: &mut impl Rng,
    tol: &Tolerances,
) -> Result<SandwichBaseline> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(ProjError::BadInterval { t: 1.0 - 2.0 * eps, s: 1.0 - eps });
    }
    let v = phi.vector();
    let lambda = phi.expectation(q);
    let p = excise(q, phi, rank, tol)?;
    let n = q.dim();

    // R₀ = vv* + Σ (1 − θⱼ) pⱼpⱼ* with θⱼ near 0 or near 1
    let rest = (&p - OperatorMatrix::rank_one_projection(v)).hermitian_part();
    let eig = hermitian_eig(&rest, tol)?;
    let cols = eig.eigenvectors_where(tol.cluster, |x| x > 0.5);
    let mut r0 = OperatorMatrix::rank_one_projection(v);
    for c in 0..cols.ncols() {
        let theta: f64 = if rng.random::<bool>() {
            rng.random_range(0.0..eps / 2.0)
        } else {
            rng.random_range(1.0 - eps / 2.0..=1.0)
        };
        let pc = OperatorMatrix::rank_one_projection(&cols.column(c).into_owned());
        r0 = r0 + pc.scale(1.0 - theta);
    }

    // W = exp(iηH) with Hv = 0
    let g = OperatorMatrix::new(gaussian_matrix(n, n, rng))?;
    let fix = OperatorMatrix::rank_one_projection(v).complement();
    let h = (&fix * g.hermitian_part() * &fix).hermitian_part();
    let h_eig = hermitian_eig(&h, tol)?;
    let mut eta = 1.0;
    for _ in 0..60 {
        let vecs = h_eig.eigenvectors.inner();
        let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            h_eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, eta * l)),
        ));
        let w = OperatorMatrix::new(vecs * phases * vecs.adjoint())?;
        let r = (&w * &r0 * w.adjoint()).hermitian_part();
        let residual_r = (&r * q * &r - r.scale(lambda)).norm();
        if residual_r <= eps {
            let alg = BlockAlgebra::new(vec![n])?;
            let r_elem = BlockElement::new(&alg, vec![r.clone()])?;
            let r_prime = sandwich_unchecked(&r_elem, 1.0 - 2.0 * eps, 1.0 - eps, tol)?.block(0).clone();
            let residual_r_prime = excision_residual(&r_prime, q, lambda);
            return Ok(SandwichBaseline { r, r_prime, residual_r, residual_r_prime });
        }
        eta /= 2.0;
    }
    Err(ProjError::NotExcising { residual: f64::INFINITY })
}

/// Partial isometries `U₁, …, Uₙ` with common initial projection and `Uₘeₗ = δ_{l,n}eₘ`.
#[derive(Debug, Clone)]
pub struct MatrixUnitSystem {
    pub units: Vec<OperatorMatrix>,
    pub basis: Vec<Vector>,
    /// The projections `Q₁, …, Qₙ` and `P₁, …, Pₙ₋₁` of the recursion.
    pub q: Vec<OperatorMatrix>,
    pub p: Vec<OperatorMatrix>,
}

impl MatrixUnitSystem {
    pub fn n(&self) -> usize {
        self.units.len()
    }

    /// `E_{ij} = UᵢUⱼ*`.
    pub fn unit(&self, i: usize, j: usize) -> OperatorMatrix {
        &self.units[i] * self.units[j].adjoint()
    }

    /// `max ‖E_{ij}E_{kl} − δ_{jk}E_{il}‖`.
    pub fn law_residual(&self) -> f64 {
        let n = self.n();
        let e: Vec<Vec<OperatorMatrix>> = (0..n).map(|i| (0..n).map(|j| self.unit(i, j)).collect()).collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let prod = &e[i][j] * &e[k][l];
                        let r = if j == k { prod.distance(&e[i][l]) } else { prod.norm() };
                        worst = worst.max(r);
                    }
                }
            }
        }
        worst
    }

    /// `max ‖Uₘ*Uₘ − Uₙ*Uₙ‖`.
    pub fn initial_residual(&self) -> f64 {
        let Some(last) = self.units.last() else {
            return 0.0;
        };
        let base = last.adjoint() * last;
        self.units.iter().map(|u| (u.adjoint() * u).distance(&base)).fold(0.0, f64::max)
    }

    /// `max ‖Uₘeₗ − δ_{l,n}eₘ‖`.
    pub fn basis_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for (m, u) in self.units.iter().enumerate() {
            for (l, e) in self.basis.iter().enumerate() {
                let want = if l == n - 1 { self.basis[m].clone() } else { Vector::zeros(e.len()) };
                worst = worst.max((u.apply(e) - want).norm());
            }
        }
        worst
    }

    /// `max ‖PₘQₘPₘ − ½Pₘ‖`.
    pub fn excision_residual(&self) -> f64 {
        self.p.iter().zip(&self.q).map(|(p, q)| excision_residual(p, q, 0.5)).fold(0.0, f64::max)
    }

    /// Rank of `E_{ij} ↦ (⟨E_{ij}e_l, e_k⟩)_{kl}` as a linear map into `n×n` matrices.
    pub fn faithful_rank(&self, tol: &Tolerances) -> usize {
        let n = self.n();
        let mut rows = DMatrix::<Complex64>::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let e = self.unit(i, j);
                for k in 0..n {
                    for l in 0..n {
                        rows[(i * n + j, k * n + l)] = self.basis[k].dotc(&e.apply(&self.basis[l]));
                    }
                }
            }
        }
        rows.singular_values().iter().filter(|&&s| s > tol.cluster).count()
    }
}

fn check_basis(basis: &[Vector], dim: usize, tol: &Tolerances) -> Result<()> {
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        if a.len() != dim {
            return Err(ProjError::DimensionMismatch { expected: dim, found: a.len() });
        }
        for (j, b) in basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dotc(b) - Complex64::from(want)).norm());
        }
    }
    if worst > tol.eq {
        return Err(ProjError::BasisNotOrthonormal { residual: worst });
    }
    Ok(())
}

/// Orthonormal vectors spanning the complement of `span(basis)`.
fn complement_vectors(basis: &[Vector], dim: usize, tol: &Tolerances) -> Result<Vec<Vector>> {
    let mut k = OperatorMatrix::identity(dim);
    for e in basis {
        k = k - OperatorMatrix::rank_one_projection(e);
    }
    let eig = hermitian_eig(&k.hermitian_part(), tol)?;
    let cols = eig.eigenvectors_where(tol.cluster, |x| x > 0.5);
    Ok((0..cols.ncols()).map(|c| cols.column(c).into_owned()).collect())
}

fn projection_onto(vectors: &[&Vector], dim: usize) -> OperatorMatrix {
    vectors.iter().fold(OperatorMatrix::zeros(dim), |acc, v| acc + OperatorMatrix::rank_one_projection(v))
}

/// Matrix units on `span(basis)` inside `M_N`. With `fat`, each `Qₘ` and `Pₘ` also carries a
/// direction outside `K` (when `N − n` leaves room), and `Pₘ` comes from excision.
pub fn transitivity_units(big_n: usize, basis: &[Vector], fat: bool, tol: &Tolerances) -> Result<MatrixUnitSystem> {
    let n = basis.len();
    if n == 0 || n > big_n || (fat && big_n < 2 * n) {
        return Err(ProjError::DimensionTooSmall { required: if fat { 2 * n } else { n.max(1) }, available: big_n });
    }
    check_basis(basis, big_n, tol)?;
    let outside = if fat { complement_vectors(basis, big_n, tol)? } else { Vec::new() };
    let alg = BlockAlgebra::new(vec![big_n])?;
    let sandwich = |t: &OperatorMatrix| -> Result<OperatorMatrix> {
        let s = BlockElement::new(&alg, vec![(t.adjoint() * t).hermitian_part()])?;
        Ok(sandwich_unchecked(&s, 1.0 / 3.0, 2.0 / 3.0, tol)?.block(0).clone())
    };

    let mut qs = Vec::with_capacity(n);
    let mut ps = Vec::with_capacity(n.saturating_sub(1));
    let mut extra = outside.iter();
    let first: Vec<&Vector> = std::iter::once(&basis[0]).chain(extra.next()).collect();
    qs.push(sandwich(&projection_onto(&first, big_n))?);
    let mut used = OperatorMatrix::zeros(big_n);
    for m in 0..n - 1 {
        let f = (&basis[m] + &basis[m + 1]) * Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        let qm = qs[m].clone();
        let pm = if fat {
            let vecs: Vec<&Vector> = [&basis[m], &basis[m + 1]].into_iter().chain(extra.next()).collect();
            let t = projection_onto(&vecs, big_n) * used.complement();
            let r = sandwich(&t)?;
            let ambient = span_join(&r, &(&qm * &r * &qm), tol)?;
            excise_greedy(&qm, &f, 2, &ambient, tol)?
        } else {
            OperatorMatrix::rank_one_projection(&f)
        };
        used = used + &qm;
        qs.push(left_support(&(qm.complement() * &pm), tol)?);
        ps.push(pm);
    }

    let mut units = vec![OperatorMatrix::zeros(big_n); n];
    units[n - 1] = qs[n - 1].clone();
    for m in (0..n - 1).rev() {
        units[m] = (&qs[m] * &ps[m] * &units[m + 1]).scale(2.0);
    }
    Ok(MatrixUnitSystem { units, basis: basis.to_vec(), q: qs, p: ps })
}

/// One matrix-unit system per block, each embedded in the full block algebra so that units from
/// different blocks multiply to zero. An empty basis yields an empty system.
pub fn transitivity_multi(
    algebra: &BlockAlgebra,
    bases: &[Vec<Vector>],
    fat: bool,
    tol: &Tolerances,
) -> Result<Vec<MatrixUnitSystem>> {
    if bases.len() != algebra.blocks().len() {
        return Err(ProjError::AlgebraMismatch(format!("{} bases for {} blocks", bases.len(), algebra.blocks().len())));
    }
    let offsets = algebra.offsets();
    let total = algebra.total_dim();
    let embed_vec = |k: usize, v: &Vector| -> Vector {
        let mut out = Vector::zeros(total);
        out.rows_mut(offsets[k], v.len()).copy_from(v);
        out
    };
    let embed = |k: usize, m: &OperatorMatrix| -> OperatorMatrix {
        let blocks: Vec<OperatorMatrix> = algebra
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, &d)| if j == k { m.clone() } else { OperatorMatrix::zeros(d) })
            .collect();
        OperatorMatrix::direct_sum(&blocks)
    };
    let mut out = Vec::with_capacity(bases.len());
    for (k, basis) in bases.iter().enumerate() {
        if basis.is_empty() {
            out.push(MatrixUnitSystem { units: vec![], basis: vec![], q: vec![], p: vec![] });
            continue;
        }
        let sys = transitivity_units(algebra.blocks()[k], basis, fat, tol)?;
        out.push(MatrixUnitSystem {
            units: sys.units.iter().map(|u| embed(k, u)).collect(),
            basis: sys.basis.iter().map(|v| embed_vec(k, v)).collect(),
            q: sys.q.iter().map(|u| embed(k, u)).collect(),
            p: sys.p.iter().map(|u| embed(k, u)).collect(),
        });
    }
    Ok(out)
}

/// `max ‖UV‖` over units `U`, `V` from different systems.
pub fn cross_residual(systems: &[MatrixUnitSystem]) -> f64 {
    let mut worst = 0.0f64;
    for (a, sa) in systems.iter().enumerate() {
        for (b, sb) in systems.iter().enumerate() {
            if a == b {
                continue;
            }
            for u in &sa.units {
                for v in &sb.units {
                    worst = worst.max((u * v).norm()).max((u * v.adjoint()).norm());
                }
            }
        }
    }
    worst
}

/// Random orthonormal family of `n` vectors in `C^dim`.
pub fn random_basis(dim: usize, n: usize, rng: &mut impl Rng) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(n);
    while out.len() < n {
        let mut v = random_unit_vector(dim, rng);
        for e in &out {
            let c = e.dotc(&v);
            v -= e * c;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v / Complex64::from(norm));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fixtures::{random_projection, seeded_rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(dim: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(dim);
        v[i] = Complex64::from(1.0);
        v
    }

    fn real(xs: &[f64]) -> Vector {
        Vector::from_iterator(xs.len(), xs.iter().map(|&x| Complex64::from(x)))
    }

    #[test]
    fn step_examples() {
        let q = OperatorMatrix::from_real_diagonal(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w1 = real(&[h, 0.0, 0.0, h, 0.0, 0.0]);
        let w2 = real(&[0.0, h, 0.0, 0.0, h, 0.0]);
        let r = OperatorMatrix::rank_one_projection(&w1) + OperatorMatrix::rank_one_projection(&w2);

        let same = excision_step(&q, &r, &OperatorMatrix::rank_one_projection(&w1), 0.5, &tol()).unwrap();
        assert!(same.p.distance(&r) < 1e-10);
        let fresh = excision_step(&q, &OperatorMatrix::zeros(6), &r, 0.5, &tol()).unwrap();
        assert!(fresh.p.distance(&r) < 1e-10);

        let (s, c) = 0.1f64.sin_cos();
        let tilted = real(&[c * h, 0.0, s * h, h, 0.0, 0.0]);
        let pn = OperatorMatrix::rank_one_projection(&tilted);
        let step = excision_step(&q, &pn, &r, 0.5, &tol()).unwrap();
        assert_eq!(step.p.rank(), 2);
        assert!(excision_residual(&step.p, &q, 0.5) < 1e-6);
        assert!(step.p.distance(&pn) <= step.step_bound + 1e-9);

        let bad = OperatorMatrix::rank_one_projection(&e(6, 0));
        assert!(matches!(excision_step(&q, &bad, &r, 0.5, &tol()), Err(ProjError::NotExcising { .. })));
    }

    #[test]
    fn excise_examples() {
        let q = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = PureState::new(real(&[h, h]), &tol()).unwrap();
        let p = excise(&q, &phi, 1, &tol()).unwrap();
        assert!(p.distance(&OperatorMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()) < 1e-12);
        assert!(matches!(excise(&q, &phi, 2, &tol()), Err(ProjError::RankUnachievable { .. })));

        let inside = PureState::new(e(2, 0), &tol()).unwrap();
        assert!(excise(&q, &inside, 1, &tol()).unwrap().distance(&q) < 1e-12);

        let mut rng = seeded_rng(5);
        let q6 = random_projection(6, 3, &mut rng);
        let phi = PureState::new(random_unit_vector(6, &mut rng), &tol()).unwrap();
        let lambda = phi.expectation(&q6);
        let p = excise(&q6, &phi, 3, &tol()).unwrap();
        assert_eq!(p.rank(), 3);
        assert!(excision_residual(&p, &q6, lambda) < 1e-6);
        assert!((p.apply(phi.vector()) - phi.vector()).norm() < 1e-7);
    }

    #[test]
    fn baseline_within_seven_eps() {
        let mut rng = seeded_rng(9);
        for eps in [0.1, 0.01] {
            let q = random_projection(8, 4, &mut rng);
            let phi = PureState::new(random_unit_vector(8, &mut rng), &tol()).unwrap();
            let b = sandwich_baseline(&q, &phi, eps, 3, &mut rng, &tol()).unwrap();
            assert!(b.residual_r <= eps);
            assert!(b.residual_r_prime <= 7.0 * eps);
            assert!((b.r_prime.apply(phi.vector()) - phi.vector()).norm() < 1e-7);
        }
    }

    #[test]
    fn hand_recursion() {
        let basis = vec![e(3, 0), e(3, 1)];
        let sys = transitivity_units(3, &basis, false, &tol()).unwrap();
        let u1 = OperatorMatrix::outer(&e(3, 0), &e(3, 1));
        let u2 = OperatorMatrix::outer(&e(3, 1), &e(3, 1));
        assert!(sys.units[0].distance(&u1) < 1e-12);
        assert!(sys.units[1].distance(&u2) < 1e-12);

        let basis: Vec<Vector> = (0..4).map(|i| e(4, i)).collect();
        let sys = transitivity_units(4, &basis, false, &tol()).unwrap();
        for m in 0..4 {
            assert!(sys.units[m].distance(&OperatorMatrix::outer(&e(4, m), &e(4, 3))) < 1e-12);
        }

        let sys = transitivity_units(3, &[e(3, 0)], false, &tol()).unwrap();
        assert!(sys.units[0].distance(&OperatorMatrix::rank_one_projection(&e(3, 0))) < 1e-12);
        assert!(matches!(
            transitivity_units(2, &[e(2, 0), e(2, 0)], false, &tol()),
            Err(ProjError::BasisNotOrthonormal { .. })
        ));
        assert!(matches!(
            transitivity_units(
                3,
                &basis[..2].iter().map(|v| v.rows(0, 3).into_owned()).collect::<Vec<_>>(),
                true,
                &tol()
            ),
            Err(ProjError::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn random_and_fat_systems() {
        let mut rng = seeded_rng(21);
        for fat in [false, true] {
            for n in 2..=5 {
                let basis = random_basis(2 * n + 1, n, &mut rng);
                let sys = transitivity_units(2 * n + 1, &basis, fat, &tol()).unwrap();
                assert!(sys.law_residual() < 1e-7, "fat={fat} n={n} {}", sys.law_residual());
                assert!(sys.basis_residual() < 1e-7);
                assert!(sys.initial_residual() < 1e-7);
                assert!(sys.excision_residual() < 1e-6);
                assert_eq!(sys.faithful_rank(&tol()), n * n);
                if fat {
                    assert!(sys.q[0].rank() > 1);
                }
            }
        }
    }

    #[test]
    fn multi_block() {
        let alg = BlockAlgebra::new(vec![3, 3]).unwrap();
        let bases = vec![vec![e(3, 0), e(3, 1)], vec![e(3, 1), e(3, 2)]];
        let systems = transitivity_multi(&alg, &bases, false, &tol()).unwrap();
        assert_eq!(systems.len(), 2);
        assert!(systems.iter().all(|s| s.law_residual() < 1e-10));
        assert!(cross_residual(&systems) < 1e-10);
        let with_empty = transitivity_multi(&alg, &[vec![e(3, 0)], vec![]], false, &tol()).unwrap();
        assert_eq!(with_empty[1].n(), 0);
    }

    #[test]
    fn state_json_round_trip() {
        let phi = PureState::new(real(&[0.6, 0.8]), &tol()).unwrap();
        let back = PureState::from_json(&phi.to_json(), &tol()).unwrap();
        assert_eq!(back, phi);
        assert!(PureState::from_json(r#"{"re":[1.0,1.0],"im":[0.0,0.0]}"#, &tol()).is_err());
    }
}
