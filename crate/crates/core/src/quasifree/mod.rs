//! One-particle density matrices, generalized 1-pdms on `h ⊕ h`, Bogoliubov
//! maps, quasifree states and Wick's theorem.
//!
//! The antiunitary `j` is entrywise complex conjugation, so on `C^{2M}` the
//! involution is `J(f ⊕ g) = ḡ ⊕ f̄`. For a matrix `A` on `C^{2M}`, `J A J`
//! is [`j_conj`].

mod bogoliubov;
mod phase_average;
mod realize;
mod wick;

pub use bogoliubov::{
    bdg_diagonalize, block_diagonalize, j_adapted_eigenbasis, random_bogoliubov, random_gpdm,
    BlockDiagonalization, BogoliubovMap, JEigenbasis,
};
pub use phase_average::{mixing_vectors, phase_average, phase_average_state, PhaseAverageStats};
pub use realize::{quasifree_entropy, quasifree_reduction, realize_quasifree, QuasifreeSpec};
pub use wick::{
    is_quasifree, pfaffian_expectation, two_point, wick_expectation, wick_residual,
    QUASIFREE_THRESHOLD,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    c, conj, frobenius, hermiticity_residual, identity, trace, CMat, CVec, HermEig,
};

/// `J A J` for a matrix on `C^{2M}`: swap the halves and conjugate.
pub fn j_conj(a: &CMat) -> CMat {
    let n = a.nrows();
    let m = n / 2;
    let p = |x: usize| if x < m { x + m } else { x - m };
    CMat::from_fn(n, a.ncols(), |r, s| a[(p(r), p(s))].conj())
}

/// `J F` for a generalized orbital.
pub fn j_vec(f: &CVec) -> CVec {
    let m = f.len() / 2;
    CVec::from_fn(2 * m, |a, _| {
        if a < m {
            f[a + m].conj()
        } else {
            f[a - m].conj()
        }
    })
}

/// A one-particle density matrix `0 ⪯ γ ⪯ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePdm {
    gamma: CMat,
}

const PDM_TOL: f64 = 1e-8;

impl OnePdm {
    pub fn new(gamma: CMat) -> Result<Self> {
        if !gamma.is_square() {
            return Err(Error::Shape("1-pdm must be square".into()));
        }
        let herm = hermiticity_residual(&gamma);
        if herm > PDM_TOL {
            return Err(Error::Validation(format!(
                "1-pdm not Hermitian ({herm:.3e})"
            )));
        }
        let eig = HermEig::new(&gamma);
        if eig.min() < -PDM_TOL || eig.max() > 1.0 + PDM_TOL {
            return Err(Error::Validation(format!(
                "1-pdm spectrum [{:.3e}, {:.3e}] leaves [0, 1]",
                eig.min(),
                eig.max()
            )));
        }
        Ok(Self { gamma })
    }

    /// Projection onto the span of the given orthonormal orbitals.
    pub fn from_orbitals(orbitals: &[CVec], modes: usize) -> Self {
        let mut g = CMat::zeros(modes, modes);
        for f in orbitals {
            g += f * f.adjoint();
        }
        Self { gamma: g }
    }

    pub fn matrix(&self) -> &CMat {
        &self.gamma
    }

    pub fn into_matrix(self) -> CMat {
        self.gamma
    }

    pub fn modes(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.gamma).re
    }

    /// Eigenvalues ascending.
    pub fn occupations(&self) -> Vec<f64> {
        HermEig::new(&self.gamma).values
    }

    /// `‖γ² − γ‖_F`.
    pub fn idempotency_residual(&self) -> f64 {
        frobenius(&(&self.gamma * &self.gamma - &self.gamma))
    }
}

/// A generalized one-particle density matrix on `C^{2M}`,
/// `Γ = [[γ, α], [α†, 1 − γ̄]]`.
///
/// The full matrix is stored so that invalid inputs can be represented and
/// diagnosed by [`validate_gpdm`].
#[derive(Debug, Clone, PartialEq)]
pub struct GOnePdm {
    matrix: CMat,
}

impl GOnePdm {
    pub fn from_blocks(gamma: &CMat, alpha: &CMat) -> Self {
        let m = gamma.nrows();
        let mut g = CMat::zeros(2 * m, 2 * m);
        g.view_mut((0, 0), (m, m)).copy_from(gamma);
        g.view_mut((0, m), (m, m)).copy_from(alpha);
        g.view_mut((m, 0), (m, m)).copy_from(&alpha.adjoint());
        g.view_mut((m, m), (m, m))
            .copy_from(&(identity(m) - conj(gamma)));
        Self { matrix: g }
    }

    pub fn from_matrix(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() % 2 == 1 {
            return Err(Error::Shape(format!(
                "generalized 1-pdm must be 2M x 2M, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    /// Number-conserving `Γ = γ ⊕ (1 − γ̄)`.
    pub fn from_one_pdm(gamma: &CMat) -> Self {
        let m = gamma.nrows();
        Self::from_blocks(gamma, &CMat::zeros(m, m))
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn gamma(&self) -> CMat {
        let m = self.modes();
        self.matrix.view((0, 0), (m, m)).into_owned()
    }

    pub fn alpha(&self) -> CMat {
        let m = self.modes();
        self.matrix.view((0, m), (m, m)).into_owned()
    }

    /// `½(Γ + SΓS)` with `S = 1 ⊕ −1`: keeps `γ`, drops `α`.
    pub fn without_pairing(&self) -> Self {
        Self::from_blocks(&self.gamma(), &CMat::zeros(self.modes(), self.modes()))
    }

    /// `‖Γ² − Γ‖_F`.
    pub fn idempotency_residual(&self) -> f64 {
        frobenius(&(&self.matrix * &self.matrix - &self.matrix))
    }

    pub fn particle_number(&self) -> f64 {
        trace(&self.gamma()).re
    }

    pub fn map(&self, f: impl FnOnce(&CMat) -> CMat) -> Self {
        Self {
            matrix: f(&self.matrix),
        }
    }

    /// Symmetrize into the valid set: Hermitian part, then `½(Γ + 1 − JΓJ)`.
    pub fn symmetrized(&self) -> Self {
        let n = self.matrix.nrows();
        let h = crate::linalg::hermitian_part(&self.matrix);
        let sym = (&h + identity(n) - j_conj(&h)) * c(0.5);
        Self { matrix: sym }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GpdmDiagnostics {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub hermiticity: f64,
    pub j_symmetry: f64,
    pub pairing_antisymmetry: f64,
    pub violations: Vec<String>,
}

impl GpdmDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const GPDM_TOL: f64 = 1e-8;

/// Structured validity report; never fails on mere invalidity.
pub fn validate_gpdm(gpdm: &GOnePdm) -> GpdmDiagnostics {
    let g = gpdm.matrix();
    let n = g.nrows();
    let eig = HermEig::new(g);
    let hermiticity = hermiticity_residual(g);
    let j_symmetry = frobenius(&(j_conj(g) - (identity(n) - g)));
    let alpha = gpdm.alpha();
    let pairing_antisymmetry = frobenius(&(&alpha + alpha.transpose()));
    let mut violations = Vec::new();
    if hermiticity > GPDM_TOL {
        violations.push(format!("hermiticity residual {hermiticity:.3e}"));
    }
    if eig.min() < -GPDM_TOL {
        violations.push(format!("negative eigenvalue {:.3e}", eig.min()));
    }
    if eig.max() > 1.0 + GPDM_TOL {
        violations.push(format!("eigenvalue {:.6} above 1", eig.max()));
    }
    if pairing_antisymmetry > GPDM_TOL {
        violations.push(format!(
            "pairing antisymmetry ‖α + αᵀ‖ = {pairing_antisymmetry:.3e}"
        ));
    }
    if j_symmetry > GPDM_TOL {
        violations.push(format!("J-symmetry ‖JΓJ − (1 − Γ)‖ = {j_symmetry:.3e}"));
    }
    GpdmDiagnostics {
        min_eigenvalue: eig.min(),
        max_eigenvalue: eig.max(),
        hermiticity,
        j_symmetry,
        pairing_antisymmetry,
        violations,
    }
}

#[cfg(test)]
mod tests;
