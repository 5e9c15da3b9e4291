//! Bogoliubov-Hartree-Fock over generalized 1-pdms: the pairing-augmented
//! energy, its effective BdG Hamiltonian, positive-temperature fixed points,
//! the pressure functional and zero-temperature solvers.

mod descent;
mod spin_half;
mod thermal;

pub use descent::{pure_quasifree_search, PureSearchReport};
pub use spin_half::{attractive_spin_half_solve, SpinHalfProblem, SpinHalfReport};
pub use thermal::{
    bhf_solve_zero_t, fermi_gpdm, finite_temperature_fixed_point, pressure, BhfOptions, BhfReport,
    LadderStep, PressureReport, TemperatureSchedule, ThermalState, PRESSURE_ORACLE_MODES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hf::fock_operator;
use crate::hf::hf_energy;
use crate::linalg::{hermitian_part, CMat, ZERO};
use crate::model::Model;
use crate::quasifree::GOnePdm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhfEnergyBreakdown {
    pub one_body: f64,
    pub direct: f64,
    /// Enters the total with a minus sign.
    pub exchange: f64,
    /// `½ Σ V_ijkl conj(α_ij) α_kl`.
    pub pairing: f64,
    pub mu_term: f64,
    pub total: f64,
}

fn check_shape(gpdm: &GOnePdm, model: &Model) -> Result<()> {
    if gpdm.modes() != model.modes() {
        return Err(Error::Shape(format!(
            "1-gpdm has {} modes, model has {}",
            gpdm.modes(),
            model.modes()
        )));
    }
    Ok(())
}

/// `½ Σ V_ijkl conj(α_ij) α_kl`.
pub fn pairing_energy(alpha: &CMat, model: &Model) -> f64 {
    let mut p = ZERO;
    for ((i, j, k, l), v) in model.v.iter() {
        p += v * alpha[(i, j)].conj() * alpha[(k, l)];
    }
    0.5 * p.re
}

/// Energy of the quasifree state with 1-gpdm `Γ`:
/// `E_HF(γ) + ½ Σ V_ijkl conj(α_ij) α_kl`.
pub fn bhf_energy(gpdm: &GOnePdm, model: &Model) -> Result<BhfEnergyBreakdown> {
    check_shape(gpdm, model)?;
    let hf = hf_energy(&gpdm.gamma(), model)?;
    let pairing = pairing_energy(&gpdm.alpha(), model);
    Ok(BhfEnergyBreakdown {
        one_body: hf.one_body,
        direct: hf.direct,
        exchange: hf.exchange,
        pairing,
        mu_term: hf.mu_term,
        total: hf.total + pairing,
    })
}

/// Pairing field `Δ_ij = Σ V_ijkl α_kl`; antisymmetric when `α` is.
pub fn pairing_field(alpha: &CMat, model: &Model) -> CMat {
    let m = model.modes();
    let mut delta = CMat::zeros(m, m);
    for ((i, j, k, l), v) in model.v.iter() {
        delta[(i, j)] += v * alpha[(k, l)];
    }
    delta
}

/// `h_BHF[Γ] = [[F, Δ], [Δ†, −F^T]]` with `F` the Fock operator. It is
/// `J`-odd and `d/dt E_BHF(Γ + tδ) = ½ Tr[h_BHF δ]` for `J`-compatible `δ`.
pub fn bhf_effective(gpdm: &GOnePdm, model: &Model) -> Result<CMat> {
    check_shape(gpdm, model)?;
    let m = model.modes();
    let f = fock_operator(&gpdm.gamma(), model)?;
    let delta = pairing_field(&gpdm.alpha(), model);
    let mut h = CMat::zeros(2 * m, 2 * m);
    h.view_mut((0, 0), (m, m)).copy_from(&f);
    h.view_mut((m, m), (m, m)).copy_from(&(-f.transpose()));
    h.view_mut((0, m), (m, m)).copy_from(&delta);
    h.view_mut((m, 0), (m, m)).copy_from(&delta.adjoint());
    Ok(hermitian_part(&h))
}

/// `Γ̂ = ½(Γ + SΓS)` with `S = diag(1, −1)`: drops the pairing block.
pub fn kill_pairing(gpdm: &GOnePdm) -> GOnePdm {
    gpdm.without_pairing()
}

#[cfg(test)]
mod tests;
