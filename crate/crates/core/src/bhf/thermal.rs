use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::descent::descend;
use super::{bhf_effective, bhf_energy, BhfEnergyBreakdown};
use crate::error::{Error, Result};
use crate::linalg::{c, fermi_scalar, frobenius, herm_fn, random_gaussian, random_hermitian, CMat};
use crate::model::Model;
use crate::oracle::{assemble_hamiltonian, log_partition};
use crate::quasifree::{bdg_diagonalize, j_conj, quasifree_entropy, GOnePdm};

/// Largest mode count for which [`pressure`] evaluates the exact
/// log-partition function.
pub const PRESSURE_ORACLE_MODES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemperatureSchedule {
    /// Strictly increasing inverse temperatures.
    pub betas: Vec<f64>,
    /// Fixed-point residual `‖Γ − F_β(h_BHF[Γ])‖_F` accepted at each β.
    pub tol: f64,
    pub mixing: f64,
}

impl TemperatureSchedule {
    pub fn geometric(from: f64, to: f64, steps: usize) -> Self {
        let steps = steps.max(2);
        let ratio = (to / from).powf(1.0 / (steps - 1) as f64);
        Self {
            betas: (0..steps).map(|k| from * ratio.powi(k as i32)).collect(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::Config("temperature schedule is empty".into()));
        }
        if self.betas.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::Config(
                "inverse temperatures must be positive".into(),
            ));
        }
        if self.betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "inverse temperatures must increase strictly".into(),
            ));
        }
        if !(positive(self.mixing) && self.mixing <= 1.0) || !positive(self.tol) {
            return Err(Error::Config(
                "schedule needs tol > 0 and mixing in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        let from: f64 = 1.0;
        let ratio = 10f64.powf(0.25);
        Self {
            betas: (0..17).map(|k| from * ratio.powi(k)).collect(),
            tol: 1e-10,
            mixing: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BhfOptions {
    /// Fixed-point iterations per inverse temperature.
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Size `η` of the random pairing field used to leave the `α = 0`
    /// fixed point.
    pub pairing_seed: f64,
    /// Stop the zero-temperature descent at `‖[h_BHF, Γ]‖_F` below this.
    pub descent_tol: f64,
    pub descent_iterations: usize,
}

impl Default for BhfOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            restarts: 4,
            seed: 0,
            pairing_seed: 1e-2,
            descent_tol: 1e-9,
            descent_iterations: 20000,
        }
    }
}

impl BhfOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.pairing_seed.is_nan() || self.pairing_seed < 0.0 || !positive(self.descent_tol) {
            return Err(Error::Config(
                "pairing_seed ≥ 0 and descent_tol > 0 required".into(),
            ));
        }
        Ok(())
    }
}

/// `F_β(h) = (1 + e^{βh})⁻¹` for a `J`-odd Hermitian `h`.
pub fn fermi_gpdm(h: &CMat, beta: f64) -> Result<GOnePdm> {
    Ok(GOnePdm::from_matrix(herm_fn(h, |x| fermi_scalar(beta * x)))?.symmetrized())
}

fn free_bdg(model: &Model) -> CMat {
    let m = model.modes();
    let hm = model.h_mu();
    let mut h = CMat::zeros(2 * m, 2 * m);
    h.view_mut((0, 0), (m, m)).copy_from(&hm);
    h.view_mut((m, m), (m, m)).copy_from(&(-hm.transpose()));
    h
}

#[derive(Debug, Clone)]
pub struct ThermalState {
    pub gpdm: GOnePdm,
    pub beta: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped iteration `Γ ← (1 − m)Γ + m F_β(h_BHF[Γ])`. The mixing is halved
/// whenever the residual grows and slowly restored otherwise.
pub fn finite_temperature_fixed_point(
    model: &Model,
    beta: f64,
    start: Option<&GOnePdm>,
    tol: f64,
    mixing: f64,
    max_iterations: usize,
) -> Result<ThermalState> {
    if !positive(beta) {
        return Err(Error::Domain(format!("β = {beta} must be positive")));
    }
    let mut gpdm = match start {
        Some(g) => g.clone(),
        None => fermi_gpdm(&free_bdg(model), beta)?,
    };
    let mut mix = mixing;
    let mut last = f64::INFINITY;
    for it in 0..max_iterations {
        let target = fermi_gpdm(&bhf_effective(&gpdm, model)?, beta)?;
        let residual = frobenius(&(target.matrix() - gpdm.matrix()));
        if residual < tol {
            return Ok(ThermalState {
                gpdm,
                beta,
                residual,
                iterations: it,
                converged: true,
            });
        }
        if residual > last {
            mix = (0.5 * mix).max(1e-3);
        } else {
            mix = (1.1 * mix).min(mixing);
        }
        last = residual;
        let next = gpdm.matrix() * c(1.0 - mix) + target.matrix() * c(mix);
        gpdm = GOnePdm::from_matrix(next)?.symmetrized();
    }
    let residual =
        frobenius(&(fermi_gpdm(&bhf_effective(&gpdm, model)?, beta)?.matrix() - gpdm.matrix()));
    Ok(ThermalState {
        gpdm,
        beta,
        residual,
        iterations: max_iterations,
        converged: residual < tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderStep {
    pub beta: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Γ² − Γ‖_F`.
    pub idempotency: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BhfReport {
    #[serde(skip)]
    pub gpdm: GOnePdm,
    pub breakdown: BhfEnergyBreakdown,
    /// `‖α‖_F`.
    pub pairing_norm: f64,
    pub particle_number: f64,
    pub idempotency_residual: f64,
    /// Zero-eigenvalue pairs of `h_BHF` at the returned state.
    pub zero_modes: usize,
    pub degenerate: bool,
    pub converged: bool,
    /// `‖[h_BHF, Γ]‖_F` at the returned state.
    pub gradient_norm: f64,
    pub ladder: Vec<LadderStep>,
    pub restart_count: usize,
    pub best_restart: usize,
    pub warnings: Vec<String>,
}

impl BhfReport {
    pub fn energy(&self) -> f64 {
        self.breakdown.total
    }
}

/// Random `J`-odd Hermitian matrix with only the pairing blocks filled.
fn random_pairing_field(m: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = random_gaussian(m, m, rng);
    let a = (&a - a.transpose()) * c(0.5);
    let mut k = CMat::zeros(2 * m, 2 * m);
    k.view_mut((0, m), (m, m)).copy_from(&a);
    k.view_mut((m, 0), (m, m)).copy_from(&a.adjoint());
    let norm = frobenius(&k).max(1e-300);
    k / c(norm)
}

fn random_j_odd(m: usize, rng: &mut ChaCha8Rng) -> CMat {
    let k = random_hermitian(2 * m, rng);
    let k = (&k - j_conj(&k)) * c(0.5);
    let norm = frobenius(&k).max(1e-300);
    k / c(norm)
}

fn solve_from(
    model: &Model,
    schedule: &TemperatureSchedule,
    opts: &BhfOptions,
    restart: usize,
) -> Result<BhfReport> {
    let m = model.modes();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
    let scale = frobenius(&model.h_mu()).max(1.0);
    let mut field =
        free_bdg(model) + random_pairing_field(m, &mut rng) * c(opts.pairing_seed * scale);
    if restart > 0 {
        field += random_j_odd(m, &mut rng) * c(scale);
    }
    let mut gpdm = fermi_gpdm(&field, schedule.betas[0])?;
    let mut ladder = Vec::with_capacity(schedule.betas.len());
    let mut warnings = Vec::new();
    for &beta in &schedule.betas {
        let state = finite_temperature_fixed_point(
            model,
            beta,
            Some(&gpdm),
            schedule.tol,
            schedule.mixing,
            opts.max_iterations,
        )?;
        gpdm = state.gpdm;
        let g = gpdm.matrix();
        ladder.push(LadderStep {
            beta,
            residual: state.residual,
            iterations: state.iterations,
            converged: state.converged,
            idempotency: frobenius(&(g * g - g)),
            energy: bhf_energy(&gpdm, model)?.total,
        });
    }
    if let Some(step) = ladder.iter().rev().find(|s| !s.converged) {
        warnings.push(format!(
            "fixed point not converged at β = {:.3e} (residual {:.2e})",
            step.beta, step.residual
        ));
    }

    let projected = bdg_diagonalize(&bhf_effective(&gpdm, model)?)?.negative_projection();
    let polished = descend(model, projected, opts.descent_tol, opts.descent_iterations)?;
    if !polished.converged {
        warnings.push(format!(
            "zero-temperature descent stopped at gradient {:.2e}",
            polished.gradient_norm
        ));
    }
    let final_gpdm = polished.gpdm;
    let eig = bdg_diagonalize(&bhf_effective(&final_gpdm, model)?)?;
    if eig.zero_modes > 0 {
        warnings.push(format!(
            "{} flat modes of h_BHF at the minimum",
            eig.zero_modes
        ));
    }
    let g = final_gpdm.matrix();
    Ok(BhfReport {
        breakdown: bhf_energy(&final_gpdm, model)?,
        pairing_norm: frobenius(&final_gpdm.alpha()),
        particle_number: final_gpdm.particle_number(),
        idempotency_residual: frobenius(&(g * g - g)),
        zero_modes: eig.zero_modes,
        degenerate: eig.zero_modes > 0,
        converged: polished.converged,
        gradient_norm: polished.gradient_norm,
        ladder,
        restart_count: opts.restarts,
        best_restart: restart,
        warnings,
        gpdm: final_gpdm,
    })
}

/// Zero-temperature BHF minimum by annealing the positive-temperature fixed
/// point along `schedule`, projecting onto the negative modes of `h_BHF` and
/// finishing with a descent over pure 1-gpdms. Best of `opts.restarts`.
pub fn bhf_solve_zero_t(
    model: &Model,
    schedule: &TemperatureSchedule,
    opts: &BhfOptions,
) -> Result<BhfReport> {
    schedule.validate()?;
    opts.validate()?;
    let runs: Vec<Result<BhfReport>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| solve_from(model, schedule, opts, r))
        .collect();
    let mut best: Option<BhfReport> = None;
    for run in runs {
        let run = run?;
        let better = match &best {
            None => true,
            Some(b) => run.energy() < b.energy() - 1e-12,
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, Serialize)]
pub struct PressureReport {
    #[serde(skip)]
    pub gpdm: GOnePdm,
    pub beta: f64,
    pub energy: f64,
    pub entropy: f64,
    /// `P_β(Γ) = β⁻¹ S(Γ) − E_BHF(Γ)`.
    pub pressure: f64,
    /// `β⁻¹ ln Tr e^{−βH_μ}` when the oracle was run.
    pub oracle_bound: Option<f64>,
}

impl PressureReport {
    pub fn bound_holds(&self, tol: f64) -> Option<bool> {
        self.oracle_bound.map(|b| self.pressure <= b + tol)
    }
}

/// Hartree-Fock pressure of `Γ`, optionally compared with the exact
/// grand-canonical pressure (only for at most [`PRESSURE_ORACLE_MODES`]).
pub fn pressure(gpdm: &GOnePdm, model: &Model, beta: f64, oracle: bool) -> Result<PressureReport> {
    if !positive(beta) {
        return Err(Error::Domain(format!("β = {beta} must be positive")));
    }
    let energy = bhf_energy(gpdm, model)?.total;
    let entropy = quasifree_entropy(gpdm);
    let oracle_bound = if oracle && model.modes() <= PRESSURE_ORACLE_MODES {
        let h = assemble_hamiltonian(model)?;
        Some(log_partition(&h, beta) / beta)
    } else {
        None
    };
    Ok(PressureReport {
        gpdm: gpdm.clone(),
        beta,
        energy,
        entropy,
        pressure: entropy / beta - energy,
        oracle_bound,
    })
}

/// False for NaN as well as for `x ≤ 0`.
fn positive(x: f64) -> bool {
    x > 0.0
}
