//! Waveguide QED with atomic mirrors.

pub mod collective;
pub mod correlations;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod spectral;
pub mod subspace;

pub use error::{Error, Result};
