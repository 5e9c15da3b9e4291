use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::thermal::BhfOptions;
use super::{bhf_effective, bhf_energy, BhfEnergyBreakdown};
use crate::error::Result;
use crate::linalg::{c, commutator, expm_anti_hermitian, frobenius, max_abs, CMat};
use crate::model::Model;
use crate::quasifree::{bdg_diagonalize, random_bogoliubov, GOnePdm};

pub(crate) struct Descent {
    pub gpdm: GOnePdm,
    pub energy: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Steepest descent over pure 1-gpdms along `Γ(s) = e^{−sC} Γ e^{sC}` with
/// `C = [h_BHF[Γ], Γ]`. `C` commutes with `J`, so every iterate is again a
/// pure quasifree 1-gpdm, and `dE/ds = −½‖C‖²` at `s = 0`.
pub(crate) fn descend(
    model: &Model,
    start: GOnePdm,
    tol: f64,
    max_iterations: usize,
) -> Result<Descent> {
    let mut gpdm = start;
    let mut energy = bhf_energy(&gpdm, model)?.total;
    let mut h = bhf_effective(&gpdm, model)?;
    let mut step = 1.0 / (max_abs(&h) + 1.0);
    for it in 0..max_iterations {
        let grad = commutator(&h, gpdm.matrix());
        let norm = frobenius(&grad);
        if norm < tol {
            return Ok(Descent {
                gpdm,
                energy,
                gradient_norm: norm,
                iterations: it,
                converged: true,
            });
        }
        let slope = 0.5 * norm * norm;
        loop {
            let u = expm_anti_hermitian(&(&grad * c(-step)));
            let mut trial = GOnePdm::from_matrix(&u * gpdm.matrix() * u.adjoint())?;
            if it % 32 == 31 {
                trial = trial.symmetrized();
            }
            let e = bhf_energy(&trial, model)?.total;
            if e <= energy - 1e-4 * step * slope || step < 1e-14 {
                let stalled = step < 1e-14;
                gpdm = trial;
                energy = e;
                h = bhf_effective(&gpdm, model)?;
                step *= 1.5;
                if stalled {
                    step = 1.0 / (max_abs(&h) + 1.0);
                }
                break;
            }
            step *= 0.5;
        }
    }
    let norm = frobenius(&commutator(&h, gpdm.matrix()));
    Ok(Descent {
        gpdm,
        energy,
        gradient_norm: norm,
        iterations: max_iterations,
        converged: norm < tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PureSearchReport {
    #[serde(skip)]
    pub gpdm: GOnePdm,
    pub breakdown: BhfEnergyBreakdown,
    pub gradient_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub best_restart: usize,
}

impl PureSearchReport {
    pub fn energy(&self) -> f64 {
        self.breakdown.total
    }
}

/// Minimize the energy over Bogoliubov-rotated vacua. Restart 0 starts at
/// the negative projection of the free BdG Hamiltonian, the others at
/// random Bogoliubov images of the vacuum.
pub fn pure_quasifree_search(model: &Model, opts: &BhfOptions) -> Result<PureSearchReport> {
    opts.validate()?;
    let m = model.modes();
    let vacuum = {
        let mut g = CMat::zeros(2 * m, 2 * m);
        for a in m..2 * m {
            g[(a, a)] = c(1.0);
        }
        GOnePdm::from_matrix(g)?
    };
    let runs: Vec<Result<(usize, Descent)>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                bdg_diagonalize(&bhf_effective(&vacuum.without_pairing(), model)?)?
                    .negative_projection()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x9e37 + r as u64));
                random_bogoliubov(m, &mut rng).conjugate(&vacuum)
            };
            Ok((
                r,
                descend(model, start, opts.descent_tol, opts.descent_iterations)?,
            ))
        })
        .collect();
    let mut best: Option<(usize, Descent)> = None;
    let mut iterations = 0;
    for run in runs {
        let (r, d) = run?;
        iterations += d.iterations;
        if best
            .as_ref()
            .is_none_or(|(_, b)| d.energy < b.energy - 1e-12)
        {
            best = Some((r, d));
        }
    }
    let (best_restart, d) = best.expect("at least one restart");
    Ok(PureSearchReport {
        breakdown: bhf_energy(&d.gpdm, model)?,
        gradient_norm: d.gradient_norm,
        converged: d.converged,
        iterations,
        restarts: opts.restarts,
        best_restart,
        gpdm: d.gpdm,
    })
}
