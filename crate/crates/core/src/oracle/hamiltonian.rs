use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, HermEig, ZERO};
use crate::model::Model;

use super::fock::{apply_string, FockBasis, Ladder, SparseOperator};

/// Where a second-quantized operator came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub description: String,
    pub mu: f64,
    pub one_body_nnz: usize,
    pub two_body_nnz: usize,
}

#[derive(Debug, Clone)]
pub struct SecondQuantizedOperator {
    pub basis: FockBasis,
    pub matrix: SparseOperator,
    pub provenance: Provenance,
}

impl SecondQuantizedOperator {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn to_dense(&self) -> CMat {
        self.matrix.to_dense()
    }

    pub fn sector_block(&self, n: usize) -> CMat {
        self.matrix.restrict(&self.basis.sector(n))
    }

    /// Expectation `Tr[ρ H]` for a dense density matrix.
    pub fn expectation(&self, rho: &CMat) -> f64 {
        let mut acc = ZERO;
        for (r, col, v) in self.matrix.iter() {
            acc += v * rho[(col, r)];
        }
        acc.re
    }
}

/// `dΓ(x) = Σ x_ij c†_i c_j` on the given basis.
pub fn second_quantize_one_body(basis: &FockBasis, x: &CMat) -> SparseOperator {
    let m = basis.modes();
    let mut op = SparseOperator::zeros(basis.dim());
    for s in 0..basis.dim() {
        for i in 0..m {
            for j in 0..m {
                let coef = x[(i, j)];
                if coef == ZERO {
                    continue;
                }
                if let Some((t, sign)) =
                    apply_string(&[Ladder::create(i), Ladder::annihilate(j)], s)
                {
                    op.add(t, s, coef * sign);
                }
            }
        }
    }
    op
}

/// `H_μ = dΓ(h) + ½ Σ V_ijkl c†_i c†_j c_l c_k − μ N̂`.
pub fn assemble_hamiltonian(model: &Model) -> Result<SecondQuantizedOperator> {
    model.validate()?;
    let basis = FockBasis::new(model.modes())?;
    let mut matrix = second_quantize_one_body(&basis, &model.h);
    for s in 0..basis.dim() {
        for ((i, j, k, l), v) in model.v.iter() {
            let ops = [
                Ladder::create(i),
                Ladder::create(j),
                Ladder::annihilate(l),
                Ladder::annihilate(k),
            ];
            if let Some((t, sign)) = apply_string(&ops, s) {
                matrix.add(t, s, v * (0.5 * sign));
            }
        }
        if model.mu != 0.0 {
            matrix.add(s, s, c(-model.mu * s.count_ones() as f64));
        }
    }
    let one_body_nnz = model.h.iter().filter(|z| z.norm() > 0.0).count();
    Ok(SecondQuantizedOperator {
        basis,
        matrix,
        provenance: Provenance {
            description: format!("H_mu for {} modes", model.modes()),
            mu: model.mu,
            one_body_nnz,
            two_body_nnz: model.v.nnz(),
        },
    })
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Normalized eigenvector on the full Fock space.
    pub vector: CVec,
    pub particle_number: usize,
    /// Number of eigenvalues within `1e-9` of the ground energy in the
    /// searched sector(s).
    pub degeneracy: usize,
}

const DEGENERACY_TOL: f64 = 1e-9;

fn sector_ground(h: &SecondQuantizedOperator, n: usize) -> (f64, CVec, usize) {
    let states = h.basis.sector(n);
    let eig = HermEig::new(&h.matrix.restrict(&states));
    let e0 = eig.values[0];
    let degeneracy = eig
        .values
        .iter()
        .take_while(|&&e| e - e0 <= DEGENERACY_TOL)
        .count();
    let mut v = CVec::zeros(h.dim());
    for (a, &s) in states.iter().enumerate() {
        v[s] = eig.vectors[(a, 0)];
    }
    (e0, v, degeneracy)
}

/// Lowest eigenvalue in the `n`-particle sector, or over all sectors.
///
/// Requires a particle-number-conserving operator; ties between sectors go
/// to the smallest particle number.
pub fn ground_energy(h: &SecondQuantizedOperator, sector: Option<usize>) -> Result<GroundState> {
    if !h.matrix.conserves_particle_number() {
        return Err(Error::Domain(
            "ground_energy expects a particle-number-conserving Hamiltonian".into(),
        ));
    }
    let modes = h.basis.modes();
    match sector {
        Some(n) => {
            if n > modes {
                return Err(Error::Domain(format!("sector N={n} exceeds {modes} modes")));
            }
            let (energy, vector, degeneracy) = sector_ground(h, n);
            Ok(GroundState {
                energy,
                vector,
                particle_number: n,
                degeneracy,
            })
        }
        None => {
            let mut best: Option<GroundState> = None;
            for n in 0..=modes {
                let (energy, vector, degeneracy) = sector_ground(h, n);
                match &mut best {
                    Some(b) if energy < b.energy - DEGENERACY_TOL => {
                        *b = GroundState {
                            energy,
                            vector,
                            particle_number: n,
                            degeneracy,
                        }
                    }
                    Some(b) if (energy - b.energy).abs() <= DEGENERACY_TOL => {
                        b.degeneracy += degeneracy;
                    }
                    Some(_) => {}
                    None => {
                        best = Some(GroundState {
                            energy,
                            vector,
                            particle_number: n,
                            degeneracy,
                        })
                    }
                }
            }
            Ok(best.expect("at least one sector"))
        }
    }
}

/// All eigenvalues, gathered sector by sector.
pub fn full_spectrum(h: &SecondQuantizedOperator) -> Vec<f64> {
    let mut out = Vec::with_capacity(h.dim());
    if h.matrix.conserves_particle_number() {
        for n in 0..=h.basis.modes() {
            out.extend(HermEig::new(&h.sector_block(n)).values);
        }
    } else {
        out = HermEig::new(&h.to_dense()).values;
    }
    out.sort_by(f64::total_cmp);
    out
}

/// `ln Tr e^{-β H}`.
pub fn log_partition(h: &SecondQuantizedOperator, beta: f64) -> f64 {
    crate::linalg::log_sum_exp(full_spectrum(h).into_iter().map(|e| -beta * e))
}

/// Thermal state `e^{-βH} / Z` as a dense matrix.
pub fn gibbs_state(h: &SecondQuantizedOperator, beta: f64) -> CMat {
    let eig = HermEig::new(&h.to_dense());
    let lz = crate::linalg::log_sum_exp(eig.values.iter().map(|e| -beta * e));
    eig.apply(|e| (-beta * e - lz).exp())
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inv = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if prefix[a] > prefix[b] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// The `N`-particle Hamiltonian built in first quantization: `Σ_n h^{(n)} +
/// Σ_{m<n} V^{(mn)} − μN` on `(C^M)^{⊗N}`, compressed onto the antisymmetric
/// vectors `e_{j1} ∧ ⋯ ∧ e_{jN}` ordered like `FockBasis::sector(N)`.
///
/// Independent of the ladder-operator assembly; meant for small `M^N`.
pub fn first_quantized_sector_matrix(model: &Model, n: usize) -> Result<CMat> {
    let m = model.modes();
    if n > m {
        return Err(Error::Domain(format!("N={n} exceeds {m} modes")));
    }
    let tensor_dim = m
        .checked_pow(n as u32)
        .filter(|&d| d <= 1 << 16)
        .ok_or_else(|| {
            Error::Domain(format!(
                "tensor space M^N = {m}^{n} is too large for the dense route"
            ))
        })?;
    let basis = FockBasis::with_cap(m, 63)?;
    let states = basis.sector(n);
    let perms = permutations(n);
    let norm = 1.0 / (perms.len() as f64).sqrt();

    let digits = |mut t: usize| -> Vec<usize> {
        let mut d = vec![0; n];
        for p in (0..n).rev() {
            d[p] = t % m;
            t /= m;
        }
        d
    };
    let index = |d: &[usize]| d.iter().fold(0, |acc, &x| acc * m + x);

    let mut wedge = CMat::zeros(tensor_dim, states.len());
    for (col, &s) in states.iter().enumerate() {
        let occ: Vec<usize> = (0..m).filter(|j| s >> j & 1 == 1).collect();
        for (perm, sign) in &perms {
            let d: Vec<usize> = perm.iter().map(|&p| occ[p]).collect();
            wedge[(index(&d), col)] += c(sign * norm);
        }
    }

    // H acting on each wedge column.
    let mut h_wedge = CMat::zeros(tensor_dim, states.len());
    for col in 0..states.len() {
        for t in 0..tensor_dim {
            let amp = wedge[(t, col)];
            if amp == ZERO {
                continue;
            }
            let d = digits(t);
            for p in 0..n {
                for i in 0..m {
                    let coef = model.h[(i, d[p])];
                    if coef != ZERO {
                        let mut e = d.clone();
                        e[p] = i;
                        h_wedge[(index(&e), col)] += coef * amp;
                    }
                }
            }
            for p in 0..n {
                for q in p + 1..n {
                    for ((i, j, k, l), v) in model.v.iter() {
                        if k == d[p] && l == d[q] {
                            let mut e = d.clone();
                            e[p] = i;
                            e[q] = j;
                            h_wedge[(index(&e), col)] += v * amp;
                        }
                    }
                }
            }
            h_wedge[(t, col)] += amp * c(-model.mu * n as f64);
        }
    }
    Ok(wedge.adjoint() * h_wedge)
}
