pub mod block;
pub mod calculus;
pub mod error;
pub mod geometry;
pub mod homotopy;
pub mod lifting;
pub mod numeric;
pub mod states;
pub mod support;
pub mod verify;

pub use error::{ProjError, Result};
pub use numeric::{OperatorMatrix, Tolerances};
