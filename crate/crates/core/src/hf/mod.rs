//! Hartree-Fock over one-particle density matrices: the energy functional,
//! its gradient, aufbau SCF, the relaxed (mixed-state) problem and
//! occupation rounding.

pub(crate) mod relaxed;
mod rounding;
mod scf;

pub use relaxed::{project_spectrahedron, relaxed_solve, RelaxedReport};
pub use rounding::{occupation_rounding, RoundingReport};
pub use scf::{
    aufbau_projection, hf_grand_canonical, scf_solve, scf_solve_from, Aufbau, Damping, HfReport,
    ScfOptions, ScfStep, TieBreak,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, trace, trace_product, CMat, ZERO};
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfEnergyBreakdown {
    /// `Tr[hγ]`.
    pub one_body: f64,
    /// `½ Σ V_ijkl γ_ki γ_lj`.
    pub direct: f64,
    /// `½ Σ V_ijkl γ_li γ_kj`, entering the total with a minus sign.
    pub exchange: f64,
    /// `−μ Tr γ`.
    pub mu_term: f64,
    pub total: f64,
}

fn check_shape(gamma: &CMat, model: &Model) -> Result<()> {
    let m = model.modes();
    if gamma.shape() != (m, m) {
        return Err(Error::Shape(format!(
            "1-pdm is {:?}, model has {m} modes",
            gamma.shape()
        )));
    }
    Ok(())
}

/// Direct and exchange sums `(½ Σ V γ_ki γ_lj, ½ Σ V γ_li γ_kj)`.
pub(crate) fn interaction_terms(gamma: &CMat, model: &Model) -> (f64, f64) {
    let mut d = ZERO;
    let mut x = ZERO;
    for ((i, j, k, l), v) in model.v.iter() {
        d += v * gamma[(k, i)] * gamma[(l, j)];
        x += v * gamma[(l, i)] * gamma[(k, j)];
    }
    (0.5 * d.re, 0.5 * x.re)
}

/// `E_HF(γ) = Tr[h_μ γ] + ½ Tr[V (1 − Ex)(γ ⊗ γ)]`.
pub fn hf_energy(gamma: &CMat, model: &Model) -> Result<HfEnergyBreakdown> {
    check_shape(gamma, model)?;
    let one_body = trace_product(&model.h, gamma).re;
    let mu_term = -model.mu * trace(gamma).re;
    let (direct, exchange) = interaction_terms(gamma, model);
    Ok(HfEnergyBreakdown {
        one_body,
        direct,
        exchange,
        mu_term,
        total: one_body + direct - exchange + mu_term,
    })
}

/// Direct (Hartree) and exchange (Fock) potentials `(J, K)`:
/// `J_ik = Σ V_ijkl γ_lj`, `K_il = Σ V_ijkl γ_kj`.
pub fn mean_field_potentials(gamma: &CMat, model: &Model) -> (CMat, CMat) {
    let m = model.modes();
    let mut j = CMat::zeros(m, m);
    let mut k = CMat::zeros(m, m);
    for ((a, b, c, d), v) in model.v.iter() {
        j[(a, c)] += v * gamma[(d, b)];
        k[(a, d)] += v * gamma[(c, b)];
    }
    (j, k)
}

/// `h_HF[γ] = h_μ + J(γ) − K(γ)`, the gradient of [`hf_energy`]:
/// `d/dt E_HF(γ + tδ) = Tr[h_HF δ]`.
pub fn fock_operator(gamma: &CMat, model: &Model) -> Result<CMat> {
    check_shape(gamma, model)?;
    let (j, k) = mean_field_potentials(gamma, model);
    Ok(hermitian_part(&(model.h_mu() + j - k)))
}

#[cfg(test)]
mod tests;
