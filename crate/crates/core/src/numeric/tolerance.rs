use serde::{Deserialize, Serialize};

use crate::error::{ProjError, Result};

/// The three thresholds every predicate and spectral computation is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Residual tolerance for exact identities.
    pub eq: f64,
    /// Eigenvalues closer than this merge into one spectral point.
    pub cluster: f64,
    /// Smallest admissible nonzero eigenvalue of `TT*`.
    pub wellsup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eq: 1e-8, cluster: 1e-7, wellsup: 1e-9 }
    }
}

impl Tolerances {
    pub fn new(eq: f64, cluster: f64, wellsup: f64) -> Result<Self> {
        let t = Tolerances { eq, cluster, wellsup };
        t.validate()?;
        Ok(t)
    }

    /// Default policy with the identity tolerance replaced.
    pub fn with_eq(eq: f64) -> Result<Self> {
        let t = Tolerances { eq, ..Tolerances::default() };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eq > 0.0 && self.eq < 1e-3) {
            return Err(ProjError::InvalidTolerance(format!("eq = {} must lie in (0, 1e-3)", self.eq)));
        }
        if !(self.wellsup > 0.0 && self.wellsup < self.cluster && self.cluster < 1e-3) {
            return Err(ProjError::InvalidTolerance(format!(
                "need 0 < wellsup ({}) < cluster ({}) < 1e-3",
                self.wellsup, self.cluster
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert!(Tolerances::default().validate().is_ok());
    }

    #[test]
    fn ordering_enforced() {
        assert!(Tolerances::new(1e-8, 1e-9, 1e-7).is_err());
        assert!(Tolerances::new(1e-2, 1e-7, 1e-9).is_err());
        assert!(Tolerances::new(1e-8, 1e-2, 1e-9).is_err());
        assert!(Tolerances::with_eq(1e-10).is_ok());
    }
}
