use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{aufbau_projection, fock_operator, hf_energy, ScfOptions};
use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, random_hermitian, trace_product, CMat, HermEig};
use crate::model::Model;

/// Euclidean projection onto `{0 ⪯ γ ⪯ 1, Tr γ = N}`: clip the spectrum
/// shifted by the water level `s` solving `Σ clip(x_i − s, 0, 1) = N`.
pub fn project_spectrahedron(x: &CMat, n: f64) -> Result<CMat> {
    let m = x.nrows();
    if n < 0.0 || n > m as f64 {
        return Err(Error::Domain(format!("trace {n} infeasible for {m} modes")));
    }
    let eig = HermEig::new(x);
    let filled = |s: f64| -> f64 { eig.values.iter().map(|v| (v - s).clamp(0.0, 1.0)).sum() };
    let (mut lo, mut hi) = (eig.min() - 1.0, eig.max() + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if filled(mid) > n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok(eig.apply(|v| (v - s).clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Serialize)]
pub struct RelaxedReport {
    #[serde(skip)]
    pub gamma: CMat,
    pub energy: f64,
    /// Eigenvalues of the minimizer, ascending.
    pub occupations: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
}

pub(crate) struct PgRun {
    pub gamma: CMat,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected gradient on `{0 ⪯ γ ⪯ 1, Tr γ = N}`; `symmetrize` is applied
/// before every projection and must commute with it.
pub(crate) fn projected_gradient(
    model: &Model,
    n: usize,
    start: CMat,
    opts: &ScfOptions,
    symmetrize: &(dyn Fn(&CMat) -> CMat + Sync),
) -> Result<PgRun> {
    let nf = n as f64;
    let mut gamma = project_spectrahedron(&symmetrize(&start), nf)?;
    let mut energy = hf_energy(&gamma, model)?.total;
    let mut step = 1.0;
    let max_iter = opts.max_iterations.max(1) * 20;
    for it in 0..max_iter {
        let grad = fock_operator(&gamma, model)?;
        loop {
            let trial = project_spectrahedron(&symmetrize(&(&gamma - &grad * c(step))), nf)?;
            let diff = &trial - &gamma;
            let e = hf_energy(&trial, model)?.total;
            let model_bound =
                energy + trace_product(&grad, &diff).re + frobenius(&diff).powi(2) / (2.0 * step);
            if e <= model_bound + 1e-14 || step < 1e-12 {
                let moved = frobenius(&diff);
                let de = energy - e;
                gamma = trial;
                energy = e;
                step *= 1.5;
                if moved < 1e-11 || (de.abs() < opts.energy_tol * 1e-2 && moved < 1e-8) {
                    return Ok(PgRun {
                        gamma,
                        energy,
                        iterations: it + 1,
                        converged: true,
                    });
                }
                break;
            }
            step *= 0.5;
        }
    }
    Ok(PgRun {
        gamma,
        energy,
        iterations: max_iter,
        converged: false,
    })
}

/// Minimize `E_HF` over mixed 1-pdms `{0 ⪯ γ ⪯ 1, Tr γ = N}` by projected
/// gradient descent with backtracking; best of `opts.restarts` starts.
pub fn relaxed_solve(model: &Model, n: usize, opts: &ScfOptions) -> Result<RelaxedReport> {
    let m = model.modes();
    if n > m {
        return Err(Error::Domain(format!("N = {n} exceeds {m} modes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let restarts = opts.restarts.max(1);
    let mut best: Option<PgRun> = None;
    let mut iterations = 0;
    for r in 0..restarts {
        let start = if r == 0 {
            aufbau_projection(&model.h_mu(), n)?.projection
        } else {
            let noise = random_hermitian(m, &mut rng);
            let scale = frobenius(&noise).max(1e-300);
            model.h_mu() * c(-1.0) + noise * c(frobenius(&model.h_mu()).max(1.0) / scale)
        };
        let run = projected_gradient(model, n, start, opts, &|g: &CMat| g.clone())?;
        iterations += run.iterations;
        if best.as_ref().is_none_or(|b| run.energy < b.energy - 1e-13) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(RelaxedReport {
        occupations: HermEig::new(&best.gamma).values,
        energy: best.energy,
        gamma: best.gamma,
        iterations,
        converged: best.converged,
        restarts,
    })
}
