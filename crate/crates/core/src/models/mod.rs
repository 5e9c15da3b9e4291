//! Concrete model builders, symmetry-restricted solves and the
//! preserved/broken classifier.

mod bcs;
mod hubbard;
mod symmetry;

pub use bcs::{
    bcs_minimize, build_bcs, random_bcs_state, BcsEnergy, BcsInteraction, BcsModel, BcsOptions,
    BcsReport, BcsSpec, BcsState, DirectTerm, Dispersion,
};
pub use hubbard::{build_hubbard, HubbardSpec};
pub use symmetry::{
    check_symmetries, classify_symmetry, magnetization_profile, restricted_solve,
    MagnetizationProfile, MeanField, RestrictedReport, SolvedEnergy, SymmetryCheck, SymmetryFlags,
    SymmetrySet, SymmetryStatus, SymmetryVerdict, FOCK_CHECK_MODES,
};
