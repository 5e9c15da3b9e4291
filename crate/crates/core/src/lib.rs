//! Generalized Hartree-Fock and Bogoliubov-Hartree-Fock for finite-mode
//! fermion systems, with an exact Fock-space oracle.

pub mod bhf;
pub mod cli;
pub mod error;
pub mod hf;
pub mod linalg;
pub mod model;
pub mod models;
pub mod oracle;
pub mod quasifree;
pub mod rdm_checks;
pub mod tensor;

pub use error::{Error, Result};
pub use model::{ModeLabels, Model, Spin};
pub use tensor::TwoBodyTensor;
