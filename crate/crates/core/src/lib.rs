//! Envelopes of subspaces of finite-dimensional weighted Lebesgue spaces
//! ℓ_p^n(μ): closure operators, signed-permutation isometries, ergodic
//! projections, minimal projections and projection constants.

pub mod cli;
pub mod complement;
pub mod ergodic;
pub mod error;
pub mod isometry;
mod linalg;
pub mod lpspace;
pub mod partition;
pub mod random;
pub mod report;
pub mod subspace;
pub mod suites;

pub use error::{Error, Result};
pub use linalg::{matrix_from_rows, matrix_rows};
pub use lpspace::Space;
pub use partition::Partition;
pub use subspace::Subspace;
