//! Exact second-quantized representation on the `2^M`-dimensional Fock space.
//!
//! This is the ground truth the mean-field solvers are tested against:
//! CAR matrices, Hamiltonian assembly, exact (sector) ground energies,
//! reduced density matrices and entropies.

mod entropy;
mod fock;
mod hamiltonian;
mod rdm;

pub use entropy::{entropies, relative_entropy, von_neumann};
pub use fock::{
    apply_string, build_car, string_expectation, CarOperators, FockBasis, Ladder, SignedMap,
    SparseOperator, DEFAULT_MODE_CAP,
};
pub use hamiltonian::{
    assemble_hamiltonian, first_quantized_sector_matrix, full_spectrum, gibbs_state, ground_energy,
    log_partition, second_quantize_one_body, GroundState, Provenance, SecondQuantizedOperator,
};
pub use rdm::{
    b, b_dag, energy_from_rdms, generalized_one_rdm, generalized_two_rdm, npoint_expectation,
    one_rdm, pairing_matrix, reduced_density_matrices, two_rdm, FockDensityMatrix, Rdms,
};

#[cfg(test)]
mod tests;
