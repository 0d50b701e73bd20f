use std::path::Path;

use projcalc_core::block::{BlockAlgebra, BlockElement, QuotientMap};
use projcalc_core::calculus::ScalarFunction;
use projcalc_core::states::PureState;
use projcalc_core::{OperatorMatrix, ProjError, Result, Tolerances};
use serde::de::DeserializeOwned;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| ProjError::Format(format!("{}: {e}", path.display())))
}

pub fn json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| ProjError::Format(format!("{}: {e}", path.display())))
}

pub fn matrix(path: &Path) -> Result<OperatorMatrix> {
    json(path)
}

/// A shorthand name, or a path to `{"breakpoints": [[x, y], ...], "jump_at_zero": bool}`.
pub fn function(spec: &str) -> Result<ScalarFunction> {
    match spec.parse::<ScalarFunction>() {
        Ok(f) => Ok(f),
        Err(_) if Path::new(spec).is_file() => json(Path::new(spec)),
        Err(e) => Err(e),
    }
}

pub fn algebra(path: &Path) -> Result<BlockAlgebra> {
    let raw: BlockAlgebra = json(path)?;
    BlockAlgebra::new(raw.blocks().to_vec())
}

pub fn quotient(source: &BlockAlgebra, path: &Path) -> Result<QuotientMap> {
    QuotientMap::from_json(source, &read(path)?)
}

pub fn element(algebra: &BlockAlgebra, m: &OperatorMatrix, tol: &Tolerances) -> Result<BlockElement> {
    BlockElement::from_matrix(algebra, m, tol)
}

pub fn state(path: &Path, tol: &Tolerances) -> Result<PureState> {
    PureState::from_json(&read(path)?, tol)
}
