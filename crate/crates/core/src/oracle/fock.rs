//! Occupation-number basis, ladder operators and sparse Fock-space operators.
//!
//! Basis state `ν` is the integer whose bit `j` is the occupation of mode `j`,
//! and `|ν⟩ = c†_{j1} c†_{j2} ⋯ c†_{jN} Ω` with `j1 < j2 < ⋯ < jN`. Hence
//! `c†_j |ν⟩ = (-1)^{#{i < j occupied}} |ν + e_j⟩`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, C64, ZERO};

pub const DEFAULT_MODE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    modes: usize,
}

impl FockBasis {
    pub fn new(modes: usize) -> Result<Self> {
        Self::with_cap(modes, DEFAULT_MODE_CAP)
    }

    pub fn with_cap(modes: usize, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Domain("a Fock space needs at least one mode".into()));
        }
        if modes > cap {
            return Err(Error::resource(modes, cap));
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1usize << self.modes
    }

    /// Basis states with exactly `n` particles, in ascending integer order.
    pub fn sector(&self, n: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|s| s.count_ones() as usize == n)
            .collect()
    }

    pub fn particle_number(state: usize) -> usize {
        state.count_ones() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }

    pub fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }

    /// Apply to a basis state; `None` when the result vanishes.
    #[inline]
    pub fn apply(self, state: usize) -> Option<(usize, f64)> {
        let bit = 1usize << self.mode;
        let occupied = state & bit != 0;
        if occupied == self.dagger {
            return None;
        }
        let below = (state & (bit - 1)).count_ones();
        let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
        Some((state ^ bit, sign))
    }
}

/// Apply an operator product `ops[0] ops[1] ⋯ ops[n-1]` to a basis state
/// (rightmost factor acts first).
#[inline]
pub fn apply_string(ops: &[Ladder], state: usize) -> Option<(usize, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let (t, sg) = op.apply(s)?;
        s = t;
        sign *= sg;
    }
    Some((s, sign))
}

/// `Tr[ρ · ops]` for a dense density matrix and a ladder-operator string.
pub fn string_expectation(rho: &CMat, ops: &[Ladder]) -> C64 {
    let mut acc = ZERO;
    for col in 0..rho.nrows() {
        if let Some((row, sign)) = apply_string(ops, col) {
            acc += rho[(col, row)] * sign;
        }
    }
    acc
}

/// A ladder operator stored as a signed column map (each column has at most
/// one nonzero entry, equal to ±1).
#[derive(Debug, Clone)]
pub struct SignedMap {
    target: Vec<Option<(usize, f64)>>,
}

impl SignedMap {
    pub fn from_ladder(basis: &FockBasis, op: Ladder) -> Self {
        Self {
            target: (0..basis.dim()).map(|s| op.apply(s)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim(), self.dim());
        for (col, t) in self.target.iter().enumerate() {
            if let Some((row, sign)) = *t {
                m[(row, col)] = c(sign);
            }
        }
        m
    }

    pub fn to_sparse(&self) -> SparseOperator {
        let mut op = SparseOperator::zeros(self.dim());
        for (col, t) in self.target.iter().enumerate() {
            if let Some((row, sign)) = *t {
                op.add(row, col, c(sign));
            }
        }
        op
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        let mut out = CVec::zeros(self.dim());
        for (col, t) in self.target.iter().enumerate() {
            if let Some((row, sign)) = *t {
                out[row] += v[col] * sign;
            }
        }
        out
    }
}

/// Creation and annihilation operators of every mode.
#[derive(Debug, Clone)]
pub struct CarOperators {
    basis: FockBasis,
    annihilators: Vec<SignedMap>,
    creators: Vec<SignedMap>,
}

impl CarOperators {
    pub fn new(basis: FockBasis) -> Self {
        let m = basis.modes();
        Self {
            annihilators: (0..m)
                .map(|j| SignedMap::from_ladder(&basis, Ladder::annihilate(j)))
                .collect(),
            creators: (0..m)
                .map(|j| SignedMap::from_ladder(&basis, Ladder::create(j)))
                .collect(),
            basis,
        }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn c(&self, mode: usize) -> &SignedMap {
        &self.annihilators[mode]
    }

    pub fn cdag(&self, mode: usize) -> &SignedMap {
        &self.creators[mode]
    }

    /// Dense `c†(f) = Σ f_k c†_k`.
    pub fn creation_of(&self, f: &CVec) -> CMat {
        let mut out = CMat::zeros(self.basis.dim(), self.basis.dim());
        for k in 0..self.basis.modes() {
            if f[k] != ZERO {
                for (col, t) in self.creators[k].target.iter().enumerate() {
                    if let Some((row, sign)) = *t {
                        out[(row, col)] += f[k] * sign;
                    }
                }
            }
        }
        out
    }

    /// Dense self-dual field `A*(F) = Σ F_k c†_k + F_{M+k} c_k` for
    /// `F ∈ C^{2M}`.
    pub fn field(&self, f: &CVec) -> CMat {
        let m = self.basis.modes();
        assert_eq!(f.len(), 2 * m, "generalized orbital must have length 2M");
        let mut out = CMat::zeros(self.basis.dim(), self.basis.dim());
        for k in 0..m {
            for (coef, map) in [(f[k], &self.creators[k]), (f[m + k], &self.annihilators[k])] {
                if coef == ZERO {
                    continue;
                }
                for (col, t) in map.target.iter().enumerate() {
                    if let Some((row, sign)) = *t {
                        out[(row, col)] += coef * sign;
                    }
                }
            }
        }
        out
    }
}

/// Build the CAR matrices for `modes` modes.
pub fn build_car(modes: usize) -> Result<CarOperators> {
    Ok(CarOperators::new(FockBasis::new(modes)?))
}

/// Row-major sparse matrix on Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<BTreeMap<usize, C64>>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![BTreeMap::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&mut self, row: usize, col: usize, value: C64) {
        *self.rows[row].entry(col).or_insert(ZERO) += value;
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.rows[row].get(&col).copied().unwrap_or(ZERO)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(&c, &v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn matvec(&self, v: &CVec) -> CVec {
        CVec::from_fn(self.dim, |r, _| {
            self.rows[r].iter().map(|(&c, &x)| x * v[c]).sum()
        })
    }

    pub fn product(&self, other: &SparseOperator) -> SparseOperator {
        let mut out = SparseOperator::zeros(self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for (&k, &a) in row {
                for (&col, &b) in &other.rows[k] {
                    out.add(r, col, a * b);
                }
            }
        }
        out
    }

    /// Largest entry of `[A, B]`.
    pub fn commutator_residual(&self, other: &SparseOperator) -> f64 {
        let ab = self.product(other);
        let ba = other.product(self);
        ab.iter()
            .map(|(r, c, v)| (v - ba.get(r, c)).norm())
            .chain(ba.iter().map(|(r, c, v)| (v - ab.get(r, c)).norm()))
            .fold(0.0, f64::max)
    }

    /// Dense block `⟨s_a | O | s_b⟩` over the listed basis states.
    pub fn restrict(&self, states: &[usize]) -> CMat {
        let mut pos = vec![usize::MAX; self.dim];
        for (i, &s) in states.iter().enumerate() {
            pos[s] = i;
        }
        let mut out = CMat::zeros(states.len(), states.len());
        for (a, &s) in states.iter().enumerate() {
            for (&col, &v) in &self.rows[s] {
                let b = pos[col];
                if b != usize::MAX {
                    out[(a, b)] += v;
                }
            }
        }
        out
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Whether every nonzero entry connects states with equal particle number.
    pub fn conserves_particle_number(&self) -> bool {
        self.iter()
            .all(|(r, c, v)| v.norm() < 1e-14 || r.count_ones() == c.count_ones())
    }

    /// Whether every nonzero entry connects states of equal number parity.
    pub fn is_even(&self) -> bool {
        self.iter()
            .all(|(r, c, v)| v.norm() < 1e-14 || (r.count_ones() + c.count_ones()) % 2 == 0)
    }
}
