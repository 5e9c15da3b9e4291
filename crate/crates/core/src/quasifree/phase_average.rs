//! Phase-averaging construction behind the variational principle for
//! generalized HF: a mixed 1-pdm with occupations `λ` in the eigenbasis
//! `f_j` is written as an average of Slater determinants.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, C64};
use crate::model::Model;
use crate::oracle::{CarOperators, FockBasis, FockDensityMatrix};

fn check_occupations(lambda: &[f64]) -> Result<usize> {
    if let Some((j, x)) = lambda
        .iter()
        .enumerate()
        .find(|(_, &x)| !(-1e-12..=1.0 + 1e-12).contains(&x))
    {
        return Err(Error::Domain(format!(
            "occupation λ_{j} = {x} outside [0, 1]"
        )));
    }
    let sum: f64 = lambda.iter().sum();
    let n = sum.round();
    if (sum - n).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "occupations sum to {sum}, not an integer"
        )));
    }
    Ok(n as usize)
}

/// Orthonormal rows `G⁽¹⁾, …, G⁽ᴺ⁾ ∈ C^J` with `Σ_n |G_j⁽ⁿ⁾|² = λ_j`.
///
/// Builds a rank-`N` projection with diagonal `λ` by Givens rotations of
/// `diag(1, …, 1, 0, …, 0)` (Chan-Li): each step rotates two adjacent
/// diagonal values bracketing the largest remaining target.
pub fn mixing_vectors(lambda: &[f64]) -> Result<CMat> {
    let n = check_occupations(lambda)?;
    let j = lambda.len();
    let mut q = DMatrix::<f64>::identity(j, j);
    let mut d: Vec<f64> = (0..j).map(|p| if p < n { 1.0 } else { 0.0 }).collect();
    let mut unfixed: Vec<usize> = (0..j).collect();
    let mut label = vec![usize::MAX; j];

    let mut order: Vec<usize> = (0..j).collect();
    order.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]).then(a.cmp(&b)));

    for &target_label in &order {
        let t = lambda[target_label].clamp(0.0, 1.0);
        unfixed.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
        if unfixed.len() == 1 {
            label[unfixed[0]] = target_label;
            unfixed.clear();
            break;
        }
        let i = (0..unfixed.len() - 1)
            .find(|&i| d[unfixed[i]] >= t - 1e-14 && t >= d[unfixed[i + 1]] - 1e-14)
            .unwrap_or(0);
        let (p, r) = (unfixed[i], unfixed[i + 1]);
        let (a, b) = (d[p], d[r]);
        if a - b > 1e-15 {
            let c2 = ((t - b) / (a - b)).clamp(0.0, 1.0);
            let (cs, sn) = (c2.sqrt(), (1.0 - c2).sqrt());
            for col in 0..j {
                let (x, y) = (q[(p, col)], q[(r, col)]);
                q[(p, col)] = cs * x + sn * y;
                q[(r, col)] = -sn * x + cs * y;
            }
        }
        d[r] = a + b - t;
        d[p] = t;
        label[p] = target_label;
        unfixed.retain(|&x| x != p);
    }

    let mut g = CMat::zeros(n, j);
    for pos in 0..j {
        for row in 0..n {
            g[(row, label[pos])] = c(q[(pos, row)]);
        }
    }
    Ok(g)
}

/// Orbitals `g_n(θ) = Σ_j G_j⁽ⁿ⁾ e^{2πiθ_j} f_j` as columns.
fn phased_orbitals(f: &CMat, g: &CMat, theta: &[f64]) -> CMat {
    let phases = CVec::from_fn(theta.len(), |j, _| {
        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta[j])
    });
    let mut gp = g.clone();
    for (j, ph) in phases.iter().enumerate() {
        for row in 0..gp.nrows() {
            gp[(row, j)] *= ph;
        }
    }
    f * gp.transpose()
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseAverageStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std_error: f64,
    pub samples: usize,
}

fn check_inputs(lambda: &[f64], f: &CMat, g: &CMat) -> Result<()> {
    let n = check_occupations(lambda)?;
    if f.ncols() != lambda.len() || g.ncols() != lambda.len() || g.nrows() != n {
        return Err(Error::Shape(format!(
            "need M x J orbitals and N x J vectors for J = {}, N = {n}",
            lambda.len()
        )));
    }
    Ok(())
}

/// Monte-Carlo over `θ ∈ [0, 1)^J` of the HF energies of the Slater
/// determinants `Φ(g(θ))`.
pub fn phase_average<R: Rng + ?Sized>(
    model: &Model,
    lambda: &[f64],
    f: &CMat,
    g: &CMat,
    samples: usize,
    rng: &mut R,
) -> Result<PhaseAverageStats> {
    check_inputs(lambda, f, g)?;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for _ in 0..samples.max(1) {
        let theta: Vec<f64> = (0..lambda.len()).map(|_| rng.random::<f64>()).collect();
        let orbs = phased_orbitals(f, g, &theta);
        let gamma = &orbs * orbs.adjoint();
        let e = crate::hf::hf_energy(&gamma, model)?.total;
        sum += e;
        sum2 += e * e;
        min = min.min(e);
        max = max.max(e);
    }
    let k = samples.max(1) as f64;
    let mean = sum / k;
    let var = (sum2 / k - mean * mean).max(0.0);
    Ok(PhaseAverageStats {
        mean,
        min,
        max,
        std_error: (var / k).sqrt(),
        samples: samples.max(1),
    })
}

/// `ρ_av`: the average of `|Φ(g(θ))⟩⟨Φ(g(θ))|` over `θ ∈ {0, ½}^J`.
///
/// The sign average reproduces the continuous phase average on the one- and
/// two-particle reduced density matrices, which is all that is used.
pub fn phase_average_state(lambda: &[f64], f: &CMat, g: &CMat) -> Result<FockDensityMatrix> {
    check_inputs(lambda, f, g)?;
    let m = f.nrows();
    let j = lambda.len();
    if j > 16 {
        return Err(Error::Domain(format!("2^{j} sign patterns is too many")));
    }
    let basis = FockBasis::new(m)?;
    let car = CarOperators::new(basis);
    let dim = basis.dim();
    let mut rho = CMat::zeros(dim, dim);
    let count = 1usize << j;
    for pattern in 0..count {
        let theta: Vec<f64> = (0..j)
            .map(|k| if pattern >> k & 1 == 1 { 0.5 } else { 0.0 })
            .collect();
        let orbs = phased_orbitals(f, g, &theta);
        let mut psi = CVec::zeros(dim);
        psi[0] = c(1.0);
        for col in (0..orbs.ncols()).rev() {
            let mut next = CVec::zeros(dim);
            for k in 0..m {
                let amp = orbs[(k, col)];
                if amp.norm() > 0.0 {
                    next += car.cdag(k).apply(&psi) * amp;
                }
            }
            psi = next;
        }
        rho += &psi * psi.adjoint();
    }
    rho /= c(count as f64);
    FockDensityMatrix::new(basis, crate::linalg::hermitian_part(&rho))
}
