//! Finite-dimensional C*-algebras `M_{n₁} ⊕ … ⊕ M_{n_k}` and block-dropping quotients.

use serde::{Deserialize, Serialize};

use crate::error::{ProjError, Result};
use crate::numeric::spectral::{cluster_values, hermitian_eig};
use crate::numeric::{OperatorMatrix, Tolerances};
use crate::support::gap_threshold;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockAlgebra {
    blocks: Vec<usize>,
}

impl BlockAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(ProjError::AlgebraMismatch("block list must be nonempty with positive sizes".into()));
        }
        Ok(BlockAlgebra { blocks })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect()
    }
}

/// A block-diagonal element, stored block by block so every operation is exactly blockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockElement {
    algebra: BlockAlgebra,
    blocks: Vec<OperatorMatrix>,
}

impl BlockElement {
    pub fn new(algebra: &BlockAlgebra, blocks: Vec<OperatorMatrix>) -> Result<Self> {
        let dims: Vec<usize> = blocks.iter().map(|b| b.dim()).collect();
        if dims != algebra.blocks {
            return Err(ProjError::AlgebraMismatch(format!("block sizes {dims:?} do not match {:?}", algebra.blocks)));
        }
        Ok(BlockElement { algebra: algebra.clone(), blocks })
    }

    /// Reads a block-diagonal matrix; entries off the diagonal blocks must be within `τ_eq`.
    pub fn from_matrix(algebra: &BlockAlgebra, m: &OperatorMatrix, tol: &Tolerances) -> Result<Self> {
        if m.dim() != algebra.total_dim() {
            return Err(ProjError::DimensionMismatch { expected: algebra.total_dim(), found: m.dim() });
        }
        let mut owner = Vec::with_capacity(m.dim());
        for (k, &n) in algebra.blocks.iter().enumerate() {
            owner.extend(std::iter::repeat_n(k, n));
        }
        let mut worst = 0.0f64;
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                if owner[i] != owner[j] {
                    worst = worst.max(m.get(i, j).norm());
                }
            }
        }
        if worst > tol.eq {
            return Err(ProjError::AlgebraMismatch(format!("off-block entry of size {worst:.3e}")));
        }
        let blocks = algebra.offsets().iter().zip(&algebra.blocks).map(|(&o, &n)| m.block(o, n)).collect();
        Ok(BlockElement { algebra: algebra.clone(), blocks })
    }

    pub fn zeros(algebra: &BlockAlgebra) -> Self {
        BlockElement {
            algebra: algebra.clone(),
            blocks: algebra.blocks.iter().map(|&n| OperatorMatrix::zeros(n)).collect(),
        }
    }

    pub fn identity(algebra: &BlockAlgebra) -> Self {
        BlockElement {
            algebra: algebra.clone(),
            blocks: algebra.blocks.iter().map(|&n| OperatorMatrix::identity(n)).collect(),
        }
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[OperatorMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &OperatorMatrix {
        &self.blocks[k]
    }

    pub fn to_matrix(&self) -> OperatorMatrix {
        OperatorMatrix::direct_sum(&self.blocks)
    }

    pub fn map(&self, f: impl Fn(&OperatorMatrix) -> OperatorMatrix) -> Self {
        BlockElement { algebra: self.algebra.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(usize, &OperatorMatrix) -> Result<OperatorMatrix>) -> Result<Self> {
        let blocks = self.blocks.iter().enumerate().map(|(k, b)| f(k, b)).collect::<Result<_>>()?;
        Ok(BlockElement { algebra: self.algebra.clone(), blocks })
    }

    pub fn zip(
        &self,
        other: &BlockElement,
        f: impl Fn(&OperatorMatrix, &OperatorMatrix) -> OperatorMatrix,
    ) -> Result<Self> {
        self.require_same_algebra(other)?;
        Ok(BlockElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn try_zip(
        &self,
        other: &BlockElement,
        f: impl Fn(&OperatorMatrix, &OperatorMatrix) -> Result<OperatorMatrix>,
    ) -> Result<Self> {
        self.require_same_algebra(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect::<Result<_>>()?;
        Ok(BlockElement { algebra: self.algebra.clone(), blocks })
    }

    pub fn require_same_algebra(&self, other: &BlockElement) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(ProjError::AlgebraMismatch(format!("{:?} vs {:?}", self.algebra.blocks, other.algebra.blocks)));
        }
        Ok(())
    }

    pub fn mul(&self, other: &BlockElement) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &BlockElement) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &BlockElement) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn adjoint(&self) -> Self {
        self.map(|b| b.adjoint())
    }

    pub fn complement(&self) -> Self {
        self.map(|b| b.complement())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|b| b.scale(s))
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &BlockElement) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    pub fn projection_residual(&self) -> f64 {
        self.blocks.iter().map(|b| b.projection_residual()).fold(0.0, f64::max)
    }

    pub fn partial_isometry_residual(&self) -> f64 {
        self.blocks.iter().map(|b| b.partial_isometry_residual()).fold(0.0, f64::max)
    }

    pub fn idempotent_residual(&self) -> f64 {
        self.blocks.iter().map(|b| b.idempotent_residual()).fold(0.0, f64::max)
    }

    pub fn require_projection(&self, tol: &Tolerances) -> Result<()> {
        self.blocks.iter().try_for_each(|b| b.require_projection(tol.eq))
    }

    pub fn require_self_adjoint(&self, tol: &Tolerances) -> Result<()> {
        self.blocks.iter().try_for_each(|b| b.require_self_adjoint(tol.eq))
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| b.distance(&OperatorMatrix::identity(b.dim())) <= tol)
    }

    /// `σ(PQ)` as a clustered set, the union over blocks of `σ(P_k Q_k P_k)`.
    pub fn pair_spectrum(&self, q: &BlockElement, tol: &Tolerances) -> Result<Vec<f64>> {
        self.require_same_algebra(q)?;
        let mut all = Vec::new();
        for (p, qk) in self.blocks.iter().zip(&q.blocks) {
            all.extend(crate::numeric::spectral::spectrum_of_pair(p, qk, tol)?);
        }
        Ok(cluster_values(&all, tol.cluster))
    }

    /// Eigenvalues of the element as a general matrix, block by block.
    pub fn eigenvalues(&self) -> Vec<num_complex::Complex64> {
        self.blocks.iter().flat_map(|b| b.eigenvalues()).collect()
    }
}

/// Surjection onto the blocks listed in `kept` (target block `j` is source block `kept[j]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientMap {
    source: BlockAlgebra,
    target: BlockAlgebra,
    kept: Vec<usize>,
}

impl QuotientMap {
    pub fn new(source: &BlockAlgebra, kept: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; source.blocks.len()];
        for &k in &kept {
            if k >= seen.len() || seen[k] {
                return Err(ProjError::AlgebraMismatch(format!("invalid kept block list {kept:?}")));
            }
            seen[k] = true;
        }
        let target = BlockAlgebra::new(kept.iter().map(|&k| source.blocks[k]).collect())?;
        Ok(QuotientMap { source: source.clone(), target, kept })
    }

    pub fn source(&self) -> &BlockAlgebra {
        &self.source
    }

    pub fn target(&self) -> &BlockAlgebra {
        &self.target
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn is_injective(&self) -> bool {
        self.kept.len() == self.source.blocks.len()
    }

    pub fn is_kept(&self, source_block: usize) -> bool {
        self.kept.contains(&source_block)
    }

    pub fn apply(&self, t: &BlockElement) -> Result<BlockElement> {
        if t.algebra != self.source {
            return Err(ProjError::AlgebraMismatch("element is not in the source algebra".into()));
        }
        Ok(BlockElement {
            algebra: self.target.clone(),
            blocks: self.kept.iter().map(|&k| t.blocks[k].clone()).collect(),
        })
    }

    /// Source element agreeing with `t` on kept blocks and with `rest` elsewhere.
    pub fn preimage_with(&self, t: &BlockElement, rest: &BlockElement) -> Result<BlockElement> {
        if t.algebra != self.target || rest.algebra != self.source {
            return Err(ProjError::AlgebraMismatch("preimage arguments in the wrong algebras".into()));
        }
        let mut blocks = rest.blocks.clone();
        for (j, &k) in self.kept.iter().enumerate() {
            blocks[k] = t.blocks[j].clone();
        }
        Ok(BlockElement { algebra: self.source.clone(), blocks })
    }

    /// Preimage that vanishes on dropped blocks.
    pub fn zero_section(&self, t: &BlockElement) -> Result<BlockElement> {
        self.preimage_with(t, &BlockElement::zeros(&self.source))
    }
}

#[derive(Deserialize)]
struct QuotientJson {
    kept: Vec<usize>,
}

impl QuotientMap {
    /// Reads `{"kept": [...]}` against a known source algebra.
    pub fn from_json(source: &BlockAlgebra, json: &str) -> Result<Self> {
        let raw: QuotientJson = serde_json::from_str(json).map_err(|e| ProjError::Format(e.to_string()))?;
        QuotientMap::new(source, raw.kept)
    }
}

/// Projection `P` with `E⊥_S(hi) ≤ P ≤ E⊥_S(lo)`, using one threshold for all blocks placed in
/// the widest spectral gap of `(lo, hi)`.
pub(crate) fn sandwich_unchecked(s: &BlockElement, lo: f64, hi: f64, tol: &Tolerances) -> Result<BlockElement> {
    let eigs = s.blocks.iter().map(|b| hermitian_eig(b, tol)).collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = eigs.iter().flat_map(|e| e.clusters(tol.cluster).into_iter().map(|c| c.value)).collect();
    let t = gap_threshold(&values, lo, hi);
    Ok(BlockElement {
        algebra: s.algebra.clone(),
        blocks: eigs.iter().map(|e| e.projection_where(tol.cluster, |x| x > t)).collect(),
    })
}

/// A projection between the spectral projections `E⊥_S(s) ≤ P ≤ E⊥_S(t)`, for `s > t > 0`.
pub fn spectral_sandwich(s: &BlockElement, t: f64, s_hi: f64, tol: &Tolerances) -> Result<BlockElement> {
    s.require_self_adjoint(tol)?;
    if !(s_hi > t && t > 0.0) {
        return Err(ProjError::BadInterval { t, s: s_hi });
    }
    sandwich_unchecked(&s.map(|b| b.hermitian_part()), t, s_hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn alg() -> BlockAlgebra {
        BlockAlgebra::new(vec![2, 2]).unwrap()
    }

    fn m(rows: &[&[f64]]) -> OperatorMatrix {
        OperatorMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn keeps_selected_block() {
        let x = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let y = m(&[&[5.0, 6.0], &[7.0, 8.0]]);
        let t = BlockElement::new(&alg(), vec![x.clone(), y]).unwrap();
        let pi = QuotientMap::new(&alg(), vec![0]).unwrap();
        assert_eq!(pi.apply(&t).unwrap().block(0), &x);
        let all = QuotientMap::new(&alg(), vec![0, 1]).unwrap();
        assert_eq!(all.apply(&t).unwrap().blocks(), t.blocks());
        assert!(all.is_injective());
        assert_eq!(pi.apply(&t.adjoint()).unwrap(), pi.apply(&t).unwrap().adjoint());
    }

    #[test]
    fn rejects_bad_maps_and_matrices() {
        assert!(QuotientMap::new(&alg(), vec![0, 0]).is_err());
        assert!(QuotientMap::new(&alg(), vec![2]).is_err());
        let full = OperatorMatrix::from_fn(4, |_, _| num_complex::Complex64::new(1.0, 0.0));
        assert!(matches!(BlockElement::from_matrix(&alg(), &full, &tol()), Err(ProjError::AlgebraMismatch(_))));
        let d = OperatorMatrix::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let e = BlockElement::from_matrix(&alg(), &d, &tol()).unwrap();
        assert_eq!(e.to_matrix(), d);
        let pi = QuotientMap::from_json(&alg(), r#"{"kept":[1]}"#).unwrap();
        assert_eq!(pi.kept(), &[1]);
    }

    #[test]
    fn sandwich_examples() {
        let p = BlockElement::new(&alg(), vec![m(&[&[0.5, 0.5], &[0.5, 0.5]]), OperatorMatrix::identity(2)]).unwrap();
        assert!(spectral_sandwich(&p, 1.0 / 3.0, 2.0 / 3.0, &tol()).unwrap().distance(&p) < 1e-12);
        let s =
            BlockElement::new(&alg(), vec![OperatorMatrix::from_real_diagonal(&[0.1, 0.9]), OperatorMatrix::zeros(2)])
                .unwrap();
        let e = spectral_sandwich(&s, 0.3, 0.7, &tol()).unwrap();
        assert!(e.block(0).distance(&OperatorMatrix::from_real_diagonal(&[0.0, 1.0])) < 1e-12);
        assert!(matches!(spectral_sandwich(&s, 0.7, 0.3, &tol()), Err(ProjError::BadInterval { .. })));
        assert!(matches!(spectral_sandwich(&s, 0.0, 0.3, &tol()), Err(ProjError::BadInterval { .. })));
        // an eigenvalue inside the interval may land on either side; both satisfy the sandwich
        let mid =
            BlockElement::new(&alg(), vec![OperatorMatrix::from_real_diagonal(&[0.5, 0.9]), OperatorMatrix::zeros(2)])
                .unwrap();
        let e = spectral_sandwich(&mid, 0.3, 0.7, &tol()).unwrap();
        let lo = OperatorMatrix::from_real_diagonal(&[0.0, 1.0]);
        let b = e.block(0);
        assert!((b * &lo).distance(&lo) < 1e-12 && (OperatorMatrix::identity(2) * b).distance(b) < 1e-12);
    }
}
