use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, random_gaussian, trace, CMat, CVec, HermEig, C64, ZERO};
use crate::model::Model;

use super::fock::{string_expectation, CarOperators, FockBasis, Ladder};

/// A density matrix on the full Fock space.
#[derive(Debug, Clone)]
pub struct FockDensityMatrix {
    basis: FockBasis,
    matrix: CMat,
    is_even: bool,
    is_number_conserving: bool,
}

const DM_TOL: f64 = 1e-9;

impl FockDensityMatrix {
    pub fn new(basis: FockBasis, matrix: CMat) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "density matrix must be {d}x{d}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = frobenius(&(&matrix - matrix.adjoint()));
        if herm > DM_TOL {
            return Err(Error::Validation(format!(
                "density matrix not Hermitian ({herm:.3e})"
            )));
        }
        let tr = trace(&matrix);
        if (tr - c(1.0)).norm() > DM_TOL {
            return Err(Error::Validation(format!("density matrix trace {tr} != 1")));
        }
        let min = HermEig::new(&matrix).min();
        if min < -DM_TOL {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        let mut is_even = true;
        let mut is_number_conserving = true;
        for r in 0..d {
            for col in 0..d {
                if matrix[(r, col)].norm() > 1e-12 {
                    let (nr, nc) = (r.count_ones(), col.count_ones());
                    if nr != nc {
                        is_number_conserving = false;
                    }
                    if (nr + nc) % 2 == 1 {
                        is_even = false;
                    }
                }
            }
        }
        Ok(Self {
            basis,
            matrix,
            is_even,
            is_number_conserving,
        })
    }

    pub fn pure(basis: FockBasis, psi: &CVec) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        let v = psi / c(n);
        Self::new(basis, &v * v.adjoint())
    }

    pub fn vacuum(basis: FockBasis) -> Self {
        let mut m = CMat::zeros(basis.dim(), basis.dim());
        m[(0, 0)] = c(1.0);
        Self::new(basis, m).expect("vacuum is a valid state")
    }

    pub fn maximally_mixed(basis: FockBasis) -> Self {
        let d = basis.dim();
        Self::new(basis, CMat::identity(d, d) * c(1.0 / d as f64)).expect("valid state")
    }

    /// Random even (parity-preserving) mixed state of rank `rank`.
    pub fn random_even<R: Rng + ?Sized>(basis: FockBasis, rank: usize, rng: &mut R) -> Self {
        let d = basis.dim();
        let mut g = random_gaussian(d, rank, rng);
        for r in 0..d {
            for k in 0..rank {
                // column k lives in the parity sector k % 2
                if (r.count_ones() as usize + k) % 2 == 1 {
                    g[(r, k)] = ZERO;
                }
            }
        }
        let rho = &g * g.adjoint();
        let t = trace(&rho).re;
        Self::new(basis, rho / c(t)).expect("valid state")
    }

    /// Random particle-number-conserving mixed state.
    pub fn random_number_conserving<R: Rng + ?Sized>(
        basis: FockBasis,
        rank: usize,
        rng: &mut R,
    ) -> Self {
        let d = basis.dim();
        let m = basis.modes();
        let mut g = random_gaussian(d, rank, rng);
        for r in 0..d {
            for k in 0..rank {
                if r.count_ones() as usize != k % (m + 1) {
                    g[(r, k)] = ZERO;
                }
            }
        }
        let rho = &g * g.adjoint();
        let t = trace(&rho).re;
        Self::new(basis, rho / c(t)).expect("valid state")
    }

    /// Random state supported on the `n`-particle sector.
    pub fn random_n_particle<R: Rng + ?Sized>(
        basis: FockBasis,
        n: usize,
        rank: usize,
        rng: &mut R,
    ) -> Self {
        let d = basis.dim();
        let mut g = random_gaussian(d, rank, rng);
        for r in 0..d {
            if r.count_ones() as usize != n {
                for k in 0..rank {
                    g[(r, k)] = ZERO;
                }
            }
        }
        let rho = &g * g.adjoint();
        let t = trace(&rho).re;
        Self::new(basis, rho / c(t)).expect("valid state")
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn is_even(&self) -> bool {
        self.is_even
    }

    pub fn is_number_conserving(&self) -> bool {
        self.is_number_conserving
    }

    pub fn expect(&self, ops: &[Ladder]) -> C64 {
        string_expectation(&self.matrix, ops)
    }

    /// `⟨N̂⟩` and `⟨N̂²⟩`.
    pub fn number_moments(&self) -> (f64, f64) {
        let mut n1 = 0.0;
        let mut n2 = 0.0;
        for s in 0..self.basis.dim() {
            let p = self.matrix[(s, s)].re;
            let n = s.count_ones() as f64;
            n1 += p * n;
            n2 += p * n * n;
        }
        (n1, n2)
    }

    /// If the state lives in a single particle-number sector, that number.
    pub fn fixed_particle_number(&self) -> Option<usize> {
        let mut found = None;
        for s in 0..self.basis.dim() {
            if self.matrix[(s, s)].re > 1e-12 {
                let n = s.count_ones() as usize;
                match found {
                    None => found = Some(n),
                    Some(m) if m != n => return None,
                    _ => {}
                }
            }
        }
        if self.is_number_conserving {
            found
        } else {
            None
        }
    }
}

/// Self-dual ladder operators `b†_a = A*(e_a)`: `c†_a` for `a < M`,
/// `c_{a-M}` otherwise.
#[inline]
pub fn b_dag(a: usize, m: usize) -> Ladder {
    if a < m {
        Ladder::create(a)
    } else {
        Ladder::annihilate(a - m)
    }
}

#[inline]
pub fn b(a: usize, m: usize) -> Ladder {
    b_dag(a, m).adjoint()
}

/// Reduced density matrices of a Fock-space state.
///
/// * `gamma1[i, j] = Tr ρ c†_j c_i`
/// * `gamma2[(i,j), (k,l)] = Tr ρ c†_k c†_l c_j c_i` (pair index `i·M + j`)
/// * `alpha[i, j] = Tr ρ c_j c_i`
/// * `gamma_gen[a, b] = Tr ρ b†_b b_a` on `C^{2M}`
/// * `gamma_gen2[(a,b), (c,d)] = Tr ρ b†_c b†_d b_b b_a`
#[derive(Debug, Clone)]
pub struct Rdms {
    pub gamma1: CMat,
    pub gamma2: CMat,
    pub alpha: CMat,
    pub gamma_gen: CMat,
    pub gamma_gen2: CMat,
}

pub fn one_rdm(rho: &FockDensityMatrix) -> CMat {
    let m = rho.basis.modes();
    CMat::from_fn(m, m, |i, j| {
        rho.expect(&[Ladder::create(j), Ladder::annihilate(i)])
    })
}

pub fn pairing_matrix(rho: &FockDensityMatrix) -> CMat {
    let m = rho.basis.modes();
    CMat::from_fn(m, m, |i, j| {
        rho.expect(&[Ladder::annihilate(j), Ladder::annihilate(i)])
    })
}

pub fn two_rdm(rho: &FockDensityMatrix) -> CMat {
    let m = rho.basis.modes();
    let d = m * m;
    CMat::from_fn(d, d, |r, s| {
        let (i, j, k, l) = (r / m, r % m, s / m, s % m);
        rho.expect(&[
            Ladder::create(k),
            Ladder::create(l),
            Ladder::annihilate(j),
            Ladder::annihilate(i),
        ])
    })
}

/// Generalized one-particle density matrix, computed entry by entry from the
/// self-dual fields (not assembled from the blocks).
pub fn generalized_one_rdm(rho: &FockDensityMatrix) -> CMat {
    let m = rho.basis.modes();
    CMat::from_fn(2 * m, 2 * m, |a, bb| rho.expect(&[b_dag(bb, m), b(a, m)]))
}

pub fn generalized_two_rdm(rho: &FockDensityMatrix) -> CMat {
    let m = rho.basis.modes();
    let n = 2 * m;
    CMat::from_fn(n * n, n * n, |r, s| {
        let (a, bb, cc, d) = (r / n, r % n, s / n, s % n);
        rho.expect(&[b_dag(cc, m), b_dag(d, m), b(bb, m), b(a, m)])
    })
}

pub fn reduced_density_matrices(rho: &FockDensityMatrix) -> Rdms {
    Rdms {
        gamma1: one_rdm(rho),
        gamma2: two_rdm(rho),
        alpha: pairing_matrix(rho),
        gamma_gen: generalized_one_rdm(rho),
        gamma_gen2: generalized_two_rdm(rho),
    }
}

/// `Tr[h_μ γ⁽¹⁾] + ½ Tr[V γ⁽²⁾]`.
pub fn energy_from_rdms(gamma1: &CMat, gamma2: &CMat, model: &Model) -> Result<f64> {
    let m = model.modes();
    if gamma1.shape() != (m, m) || gamma2.shape() != (m * m, m * m) {
        return Err(Error::Shape(format!(
            "expected γ1 {m}x{m} and γ2 {0}x{0}, got {1:?} and {2:?}",
            m * m,
            gamma1.shape(),
            gamma2.shape()
        )));
    }
    let one = crate::linalg::trace_product(&model.h_mu(), gamma1);
    let mut two = ZERO;
    for ((i, j, k, l), v) in model.v.iter() {
        two += v * gamma2[(k * m + l, i * m + j)];
    }
    Ok((one + two * 0.5).re)
}

/// `Tr[ρ A*(F₁) ⋯ A*(F_n)]` by explicit matrix products.
pub fn npoint_expectation(rho: &FockDensityMatrix, car: &CarOperators, orbitals: &[CVec]) -> C64 {
    let d = rho.basis.dim();
    let mut prod = CMat::identity(d, d);
    for f in orbitals {
        prod *= car.field(f);
    }
    crate::linalg::trace_product(&rho.matrix, &prod)
}
