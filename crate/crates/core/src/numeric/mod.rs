pub mod fixtures;
pub mod matrix;
mod solve;
pub mod spectral;
pub mod tolerance;

pub use matrix::{operator_norm, MatrixJson, OperatorMatrix, Vector};
pub use spectral::{hausdorff, hausdorff_complex, hermitian_eig, spectrum_of_pair, Cluster, SpectralDecomposition};
pub use tolerance::Tolerances;
