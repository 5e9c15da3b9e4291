use super::{block_diagonalize, GOnePdm};
use crate::error::{Error, Result};
use crate::linalg::{c, entropy_term, identity, HermEig};
use crate::oracle::{generalized_one_rdm, CarOperators, FockBasis, FockDensityMatrix};

/// A quasifree state: its generalized 1-pdm and, when small enough, the
/// Fock-space density matrix realizing it.
#[derive(Debug, Clone)]
pub struct QuasifreeSpec {
    pub gpdm: GOnePdm,
    pub realization: Option<FockDensityMatrix>,
}

/// The quasifree density matrix with generalized 1-pdm `Γ`.
///
/// With `W†ΓW = diag(λ, 1 − λ)` and quasiparticle operators
/// `d†_ℓ = A*(W e_ℓ)`, the state is `Π_ℓ [λ_ℓ n_ℓ + (1 − λ_ℓ)(1 − n_ℓ)]`,
/// `n_ℓ = d†_ℓ d_ℓ`.
pub fn realize_quasifree(gpdm: &GOnePdm) -> Result<FockDensityMatrix> {
    let m = gpdm.modes();
    let basis = FockBasis::new(m)?;
    let bd = block_diagonalize(gpdm)?;
    let car = CarOperators::new(basis);
    let d = basis.dim();
    let one = identity(d);
    let mut rho = identity(d);
    for (l, &lam) in bd.lambda.iter().enumerate() {
        let creator = car.field(&bd.map.orbital(l));
        let n = &creator * creator.adjoint();
        let factor = if lam == 1.0 {
            n
        } else if lam == 0.0 {
            &one - n
        } else {
            &n * c(lam) + (&one - &n) * c(1.0 - lam)
        };
        rho *= factor;
    }
    let rho = crate::linalg::hermitian_part(&rho);
    FockDensityMatrix::new(basis, rho)
}

/// `q(ρ)`: the quasifree state with the same generalized 1-pdm as `ρ`.
pub fn quasifree_reduction(rho: &FockDensityMatrix) -> Result<QuasifreeSpec> {
    if !rho.is_even() {
        return Err(Error::Domain(
            "quasifree reduction needs an even state".into(),
        ));
    }
    let gpdm = GOnePdm::from_matrix(generalized_one_rdm(rho))?.symmetrized();
    let realization = realize_quasifree(&gpdm)?;
    Ok(QuasifreeSpec {
        gpdm,
        realization: Some(realization),
    })
}

/// `S⁽¹⁾[Γ] = −Tr Γ ln Γ` over `C^{2M}`.
pub fn quasifree_entropy(gpdm: &GOnePdm) -> f64 {
    HermEig::new(gpdm.matrix())
        .values
        .iter()
        .map(|&x| entropy_term(x))
        .sum()
}
