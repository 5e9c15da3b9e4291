use super::{j_vec, GOnePdm};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64, ZERO};
use crate::oracle::{b_dag, generalized_one_rdm, FockDensityMatrix, Ladder};

/// Largest 4-point Wick residual still counted as quasifree.
pub const QUASIFREE_THRESHOLD: f64 = 1e-7;

const MAX_POINTS: usize = 8;

/// `⟨A*(F) A*(G)⟩ = ⟨JG | Γ F⟩`.
pub fn two_point(gpdm: &GOnePdm, f: &CVec, g: &CVec) -> C64 {
    j_vec(g).dotc(&(gpdm.matrix() * f))
}

/// Sum over pairings `Σ_σ sgn(σ) Π pairs[(a, b)]` with `a < b`, i.e. the
/// Pfaffian of the antisymmetric extension of the strict upper triangle.
pub fn pfaffian_expectation(pairs: &CMat) -> C64 {
    fn rec(pairs: &CMat, idx: &[usize]) -> C64 {
        if idx.is_empty() {
            return C64::new(1.0, 0.0);
        }
        let first = idx[0];
        let mut acc = ZERO;
        for pos in 1..idx.len() {
            let w = pairs[(first, idx[pos])];
            if w == ZERO {
                continue;
            }
            let rest: Vec<usize> = idx[1..]
                .iter()
                .enumerate()
                .filter(|&(k, _)| k + 1 != pos)
                .map(|(_, &x)| x)
                .collect();
            let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
            acc += w * sign * rec(pairs, &rest);
        }
        acc
    }
    let idx: Vec<usize> = (0..pairs.nrows()).collect();
    rec(pairs, &idx)
}

/// `Tr[ρ A*(F₁) ⋯ A*(F_{2k})]` for the quasifree state with generalized
/// 1-pdm `Γ`, from the pairing formula.
pub fn wick_expectation(gpdm: &GOnePdm, orbitals: &[CVec]) -> Result<C64> {
    let n = orbitals.len();
    if n % 2 == 1 {
        return Err(Error::Domain(format!(
            "odd number ({n}) of field operators: the value is 0 by evenness"
        )));
    }
    if n > MAX_POINTS {
        return Err(Error::Domain(format!(
            "at most {MAX_POINTS} points supported, got {n}"
        )));
    }
    let pairs = CMat::from_fn(n, n, |a, b| {
        if a < b {
            two_point(gpdm, &orbitals[a], &orbitals[b])
        } else {
            ZERO
        }
    });
    Ok(pfaffian_expectation(&pairs))
}

fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..n {
            cur.push(a);
            rec(a + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Largest deviation between `⟨b†_{a₁} ⋯ b†_{a_n}⟩_ρ` and the pairing formula
/// built from `Γ_ρ`, over all strictly increasing index tuples of length
/// `order` in `0..2M`.
pub fn wick_residual(rho: &FockDensityMatrix, order: usize) -> Result<f64> {
    if order % 2 == 1 || order == 0 || order > MAX_POINTS {
        return Err(Error::Domain(format!(
            "Wick order must be even in 2..={MAX_POINTS}"
        )));
    }
    let m = rho.basis().modes();
    let gamma = generalized_one_rdm(rho);
    let partner = |a: usize| if a < m { a + m } else { a - m };
    let mut worst: f64 = 0.0;
    for tuple in increasing_tuples(2 * m, order) {
        let ops: Vec<Ladder> = tuple.iter().map(|&a| b_dag(a, m)).collect();
        let exact = rho.expect(&ops);
        let pairs = CMat::from_fn(order, order, |x, y| {
            if x < y {
                gamma[(partner(tuple[y]), tuple[x])]
            } else {
                ZERO
            }
        });
        worst = worst.max((exact - pfaffian_expectation(&pairs)).norm());
    }
    Ok(worst)
}

/// Quasifree membership: 4-point residual at most [`QUASIFREE_THRESHOLD`]
/// (and 2-point trivially). Odd states are never quasifree.
pub fn is_quasifree(rho: &FockDensityMatrix) -> bool {
    if !rho.is_even() {
        return false;
    }
    let m = rho.basis().modes();
    if m < 2 {
        return true;
    }
    wick_residual(rho, 4).is_ok_and(|r| r <= QUASIFREE_THRESHOLD)
}
