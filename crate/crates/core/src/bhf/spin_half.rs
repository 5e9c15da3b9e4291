use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::thermal::BhfOptions;
use super::{pairing_energy, pairing_field};
use crate::error::{Error, Result};
use crate::hf::{interaction_terms, mean_field_potentials};
use crate::linalg::{
    c, divided_differences, fermi_scalar, frobenius, from_real, herm_fn, hermitian_part, identity,
    kron, max_abs, random_real_symmetric, trace_product, CMat, HermEig,
};
use crate::model::Model;
use crate::quasifree::GOnePdm;
use crate::tensor::TwoBodyTensor;

fn pair_amplitude(x: f64) -> f64 {
    (x - x * x).max(0.0).sqrt()
}

fn pair_amplitude_slope(x: f64) -> f64 {
    (1.0 - 2.0 * x) / (2.0 * pair_amplitude(x).max(1e-8))
}

fn epsilon() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)])
}

/// Spin-½ fermions with `h = ĥ ⊗ 1` and the spin-independent attraction
/// `V = −V̂ ⊗ 1 ⊗ 1`, where `V̂` has a nonnegative kernel. Modes are
/// ordered `2·site + spin`.
#[derive(Debug, Clone)]
pub struct SpinHalfProblem {
    h_hat: CMat,
    v_hat: TwoBodyTensor,
    aux: Model,
}

impl SpinHalfProblem {
    pub fn new(h_hat: CMat, v_hat: TwoBodyTensor, mu: f64) -> Result<Self> {
        let aux = Model::new(h_hat.clone(), v_hat.clone(), mu)?;
        if h_hat.iter().any(|z| z.im.abs() > 1e-12) {
            return Err(Error::Domain("site Hamiltonian must be real".into()));
        }
        if !v_hat.is_real(1e-12) {
            return Err(Error::Domain("site interaction must be real".into()));
        }
        if v_hat.min_pair_eigenvalue() < -1e-10 {
            return Err(Error::Domain(
                "site interaction kernel must be nonnegative (V = −V̂ attractive)".into(),
            ));
        }
        Ok(Self { h_hat, v_hat, aux })
    }

    pub fn sites(&self) -> usize {
        self.h_hat.nrows()
    }

    pub fn mu(&self) -> f64 {
        self.aux.mu
    }

    /// The full spin-½ model on `2·sites` modes.
    pub fn model(&self) -> Result<Model> {
        let h = kron(&self.h_hat, &identity(2));
        let mut v = TwoBodyTensor::zeros(2 * self.sites());
        for ((x, y, xp, yp), w) in self.v_hat.iter() {
            for s in 0..2 {
                for t in 0..2 {
                    v.add(2 * x + s, 2 * y + t, 2 * xp + s, 2 * yp + t, -w);
                }
            }
        }
        Model::new(h, v, self.aux.mu)
    }

    /// `Γ[γ̂]` with `γ = γ̂ ⊗ 1` and `α = √(γ̂ − γ̂²) ⊗ [[0, 1], [−1, 0]]`.
    pub fn assemble(&self, gamma_hat: &CMat) -> GOnePdm {
        let s = herm_fn(gamma_hat, pair_amplitude);
        GOnePdm::from_blocks(&kron(gamma_hat, &identity(2)), &kron(&s, &epsilon()))
    }

    /// `Ê(γ̂) = ½ E_BHF(Γ[γ̂]) = Tr[ĥ_μ γ̂] − D̂ + ½X̂ − ½P̂` with the direct,
    /// exchange and pairing sums of `V̂`.
    pub fn aux_energy(&self, gamma_hat: &CMat) -> f64 {
        let s = herm_fn(gamma_hat, pair_amplitude);
        let (half_d, half_x) = interaction_terms(gamma_hat, &self.aux);
        trace_product(&self.aux.h_mu(), gamma_hat).re - 2.0 * half_d + half_x
            - pairing_energy(&s, &self.aux)
    }

    /// Gradient of [`Self::aux_energy`] for Hermitian directions, with the
    /// derivative of `√(γ̂ − γ̂²)` taken through divided differences.
    pub fn aux_gradient(&self, gamma_hat: &CMat) -> CMat {
        let eig = HermEig::new(gamma_hat);
        let s = eig.apply(pair_amplitude);
        let (j, k) = mean_field_potentials(gamma_hat, &self.aux);
        let s_field = pairing_field(&s, &self.aux);
        let dd = divided_differences(&eig.values, pair_amplitude, pair_amplitude_slope);
        let rotated = eig.vectors.adjoint() * s_field * &eig.vectors;
        let weighted = rotated.component_mul(&from_real(&dd));
        let chain = &eig.vectors * hermitian_part(&weighted) * eig.vectors.adjoint();
        hermitian_part(&(self.aux.h_mu() - j * c(2.0) + k - chain))
    }
}

fn clip_unit(x: &CMat) -> CMat {
    herm_fn(&hermitian_part(x), |v| v.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpinHalfReport {
    #[serde(skip)]
    pub gamma_hat: CMat,
    #[serde(skip)]
    pub gpdm: GOnePdm,
    pub aux_energy: f64,
    /// `2 Ê`, a candidate for the full BHF energy.
    pub energy: f64,
    pub occupations: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
}

struct Run {
    gamma_hat: CMat,
    energy: f64,
    iterations: usize,
    converged: bool,
}

fn projected_gradient(problem: &SpinHalfProblem, start: CMat, opts: &BhfOptions) -> Run {
    let mut g = clip_unit(&start);
    let mut energy = problem.aux_energy(&g);
    let mut step = 1.0 / (max_abs(&problem.aux.h_mu()) + 1.0);
    for it in 0..opts.descent_iterations {
        let grad = problem.aux_gradient(&g);
        loop {
            let trial = clip_unit(&(&g - &grad * c(step)));
            let diff = &trial - &g;
            let e = problem.aux_energy(&trial);
            let bound =
                energy + trace_product(&grad, &diff).re + frobenius(&diff).powi(2) / (2.0 * step);
            if e <= bound + 1e-15 || step < 1e-14 {
                let moved = frobenius(&diff);
                g = trial;
                energy = e;
                step *= 1.5;
                if moved / step.max(1e-300) < opts.descent_tol {
                    return Run {
                        gamma_hat: g,
                        energy,
                        iterations: it + 1,
                        converged: true,
                    };
                }
                break;
            }
            step *= 0.5;
        }
    }
    Run {
        gamma_hat: g,
        energy,
        iterations: opts.descent_iterations,
        converged: false,
    }
}

/// Minimize `Ê` over `0 ⪯ γ̂ ⪯ 1` by projected gradient descent. Restarts
/// begin at `½`, at `F_1(ĥ_μ)` and at random real occupations.
pub fn attractive_spin_half_solve(
    problem: &SpinHalfProblem,
    opts: &BhfOptions,
) -> Result<SpinHalfReport> {
    opts.validate()?;
    let l = problem.sites();
    let runs: Vec<Run> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = match r {
                0 => identity(l) * c(0.5),
                1 => herm_fn(&problem.aux.h_mu(), fermi_scalar),
                _ => {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x51 + r as u64));
                    herm_fn(&random_real_symmetric(l, &mut rng), |x| {
                        fermi_scalar(2.0 * x)
                    })
                }
            };
            projected_gradient(problem, start, opts)
        })
        .collect();
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .expect("at least one restart");
    Ok(SpinHalfReport {
        gpdm: problem.assemble(&best.gamma_hat),
        occupations: HermEig::new(&best.gamma_hat).values,
        aux_energy: best.energy,
        energy: 2.0 * best.energy,
        iterations,
        converged: best.converged,
        restarts: opts.restarts,
        gamma_hat: best.gamma_hat,
    })
}
