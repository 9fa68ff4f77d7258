mod crossing;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod maslov;
pub mod random;
pub mod specflow;
pub mod path;
mod serde_matrix;
pub mod suite;
pub mod symplectic;

pub use error::{Error, Result};
