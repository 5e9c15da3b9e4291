//! Sparse two-body interaction tensors.
//!
//! Entries are `V_{ijkl} = ⟨e_i ⊗ e_j | V (e_k ⊗ e_l)⟩`; the second-quantized
//! interaction is `½ Σ V_{ijkl} c†_i c†_j c_l c_k`.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_part, random_gaussian, CMat, HermEig, C64, ZERO};

pub type Index4 = (usize, usize, usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyTensor {
    modes: usize,
    entries: BTreeMap<Index4, C64>,
}

impl TwoBodyTensor {
    pub fn zeros(modes: usize) -> Self {
        Self {
            modes,
            entries: BTreeMap::new(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Accumulate `value` into `V_{ijkl}`.
    pub fn add(&mut self, i: usize, j: usize, k: usize, l: usize, value: C64) {
        let m = self.modes;
        assert!(
            i < m && j < m && k < m && l < m,
            "tensor index out of range"
        );
        if value == ZERO {
            return;
        }
        let e = self.entries.entry((i, j, k, l)).or_insert(ZERO);
        *e += value;
        if e.norm() == 0.0 {
            self.entries.remove(&(i, j, k, l));
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.entries.get(&(i, j, k, l)).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Index4, C64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zeros(self.modes);
        for ((i, j, k, l), v) in self.iter() {
            out.add(i, j, k, l, v * factor);
        }
        out
    }

    /// Density-density interaction `½ Σ_{i,j} w(i,j) n_i n_j`-type kernel with
    /// `V_{ijij} = w(i, j)`; `w` must be symmetric for the tensor to validate.
    pub fn density_density(modes: usize, w: impl Fn(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(modes);
        for i in 0..modes {
            for j in 0..modes {
                let x = w(i, j);
                if x != 0.0 {
                    t.add(i, j, i, j, c(x));
                }
            }
        }
        t
    }

    /// Worst violation of `V_{ijkl} = conj(V_{klij})` and `V_{ijkl} = V_{jilk}`.
    pub fn symmetry_residual(&self) -> (f64, Option<(Index4, &'static str)>) {
        let mut worst = 0.0;
        let mut at = None;
        for ((i, j, k, l), v) in self.iter() {
            let herm = (v - self.get(k, l, i, j).conj()).norm();
            if herm > worst {
                worst = herm;
                at = Some(((i, j, k, l), "hermiticity V_ijkl = conj(V_klij)"));
            }
            let swap = (v - self.get(j, i, l, k)).norm();
            if swap > worst {
                worst = swap;
                at = Some(((i, j, k, l), "pair exchange V_ijkl = V_jilk"));
            }
        }
        (worst, at)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let (worst, at) = self.symmetry_residual();
        if worst > tol {
            let ((i, j, k, l), which) = at.expect("violation location");
            return Err(Error::Validation(format!(
                "two-body tensor violates {which}: worst entry ({i},{j},{k},{l}) off by {worst:.3e}"
            )));
        }
        Ok(())
    }

    /// Average over the symmetry images so that `validate` passes exactly.
    pub fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.modes);
        for ((i, j, k, l), v) in self.iter() {
            let q = v * 0.25;
            out.add(i, j, k, l, q);
            out.add(j, i, l, k, q);
            out.add(k, l, i, j, q.conj());
            out.add(l, k, j, i, q.conj());
        }
        out
    }

    /// Dense `M² × M²` matrix with row `i·M + j` and column `k·M + l`.
    pub fn to_matrix(&self) -> CMat {
        let m = self.modes;
        let mut out = CMat::zeros(m * m, m * m);
        for ((i, j, k, l), v) in self.iter() {
            out[(i * m + j, k * m + l)] = v;
        }
        out
    }

    pub fn from_matrix(modes: usize, mat: &CMat) -> Result<Self> {
        let d = modes * modes;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Shape(format!(
                "expected a {d}x{d} pair-space matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let mut t = Self::zeros(modes);
        for r in 0..d {
            for s in 0..d {
                let v = mat[(r, s)];
                if v.norm() > 1e-15 {
                    t.add(r / modes, r % modes, s / modes, s % modes, v);
                }
            }
        }
        Ok(t)
    }

    /// True when every entry is of the form `V_{ijij}`, i.e. the pair-space
    /// matrix is diagonal.
    pub fn is_pair_diagonal(&self) -> bool {
        self.iter().all(|((i, j, k, l), _)| i == k && j == l)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.iter().all(|(_, v)| v.im.abs() <= tol)
    }

    /// Smallest eigenvalue of the pair-space matrix.
    pub fn min_pair_eigenvalue(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if self.is_pair_diagonal() {
            let m = self.modes;
            let mut min = f64::INFINITY;
            for i in 0..m {
                for j in 0..m {
                    min = min.min(self.get(i, j, i, j).re);
                }
            }
            return min;
        }
        HermEig::new(&self.to_matrix()).min()
    }

    /// Repulsive means the pair-space matrix is positive semidefinite.
    pub fn is_repulsive(&self) -> bool {
        self.min_pair_eigenvalue() >= -1e-10
    }

    /// Random positive semidefinite interaction of pair-space rank `rank`.
    pub fn random_repulsive<R: Rng + ?Sized>(modes: usize, rank: usize, rng: &mut R) -> Self {
        let d = modes * modes;
        let b = random_gaussian(d, rank, rng);
        let psd = &b * b.adjoint();
        let ex = exchange_matrix(modes);
        let sym = (&psd + &ex * &psd * &ex).scale(0.5 / rank as f64);
        Self::from_matrix(modes, &sym).expect("shape").symmetrized()
    }

    /// Random indefinite Hermitian interaction with the pair-exchange symmetry.
    pub fn random_indefinite<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Self {
        let d = modes * modes;
        let a = hermitian_part(&random_gaussian(d, d, rng));
        let ex = exchange_matrix(modes);
        let sym = (&a + &ex * &a * &ex).scale(0.5);
        Self::from_matrix(modes, &sym).expect("shape").symmetrized()
    }
}

/// The swap `e_i ⊗ e_j ↦ e_j ⊗ e_i` on the pair space.
pub fn exchange_matrix(modes: usize) -> CMat {
    let d = modes * modes;
    let mut ex = CMat::zeros(d, d);
    for i in 0..modes {
        for j in 0..modes {
            ex[(j * modes + i, i * modes + j)] = c(1.0);
        }
    }
    ex
}
