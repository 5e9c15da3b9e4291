use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fock_operator, hf_energy, interaction_terms, occupation_rounding, HfEnergyBreakdown};
use crate::error::{Error, Result};
use crate::linalg::{
    c, commutator, expm_anti_hermitian, frobenius, hermitian_part, identity, random_hermitian,
    trace_product, CMat, HermEig,
};
use crate::model::{ModeLabels, Model, Spin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    WarnAndLowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    /// `γ ← (1 − m)γ + m P` with the fixed `mixing`.
    #[default]
    Fixed,
    /// Exact line search of the quadratic energy on `[γ, P]`.
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScfOptions {
    pub max_iterations: usize,
    pub energy_tol: f64,
    pub commutator_tol: f64,
    pub mixing: f64,
    pub level_shift: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Norm of the random Hermitian perturbation of `h_μ` in the initial
    /// guess of every restart except the first.
    pub perturbation: f64,
    pub tie_break: TieBreak,
    pub damping: Damping,
    /// Fixed `(N↑, N↓)`; requires mode labels.
    pub spin_populations: Option<(usize, usize)>,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            energy_tol: 1e-11,
            commutator_tol: 1e-7,
            mixing: 0.5,
            level_shift: 0.0,
            restarts: 4,
            seed: 0,
            perturbation: 1e-2,
            tie_break: TieBreak::LowestIndex,
            damping: Damping::Fixed,
            spin_populations: None,
        }
    }
}

impl ScfOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_tol > 0.0 && self.commutator_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return Err(Error::Config(format!(
                "mixing {} not in (0, 1]",
                self.mixing
            )));
        }
        if self.level_shift < 0.0 {
            return Err(Error::Config("level_shift must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Result of filling the `N` lowest eigenvectors.
#[derive(Debug, Clone)]
pub struct Aufbau {
    pub projection: CMat,
    pub orbital_energies: Vec<f64>,
    /// `e_{N+1} − e_N`, absent when `N ∈ {0, M}`.
    pub gap: Option<f64>,
    pub degenerate: bool,
}

const DEGENERACY_TOL: f64 = 1e-8;

/// `1_N(F)`: projection onto the `N` lowest eigenvectors of `F`; ties at the
/// Fermi level go to the lowest eigensolver index.
pub fn aufbau_projection(f: &CMat, n: usize) -> Result<Aufbau> {
    let m = f.nrows();
    if n > m {
        return Err(Error::Domain(format!("N = {n} exceeds {m} modes")));
    }
    let eig = HermEig::new(f);
    let occ = eig.vectors.columns(0, n);
    let projection = occ * occ.adjoint();
    let gap = (n > 0 && n < m).then(|| eig.values[n] - eig.values[n - 1]);
    Ok(Aufbau {
        projection,
        degenerate: gap.is_some_and(|g| g < DEGENERACY_TOL),
        orbital_energies: eig.values,
        gap,
    })
}

/// Aufbau within each spin block (`γ` stays `S_z`-diagonal).
fn aufbau_spin(f: &CMat, populations: (usize, usize), labels: &ModeLabels) -> Result<Aufbau> {
    let m = f.nrows();
    let mut projection = CMat::zeros(m, m);
    let mut energies = Vec::with_capacity(m);
    let mut degenerate = false;
    let mut gaps = Vec::new();
    for (spin, n_s) in [(Spin::Up, populations.0), (Spin::Down, populations.1)] {
        let modes: Vec<usize> = (0..labels.sites)
            .map(|x| ModeLabels::mode(x, spin))
            .collect();
        let block = CMat::from_fn(modes.len(), modes.len(), |a, b| f[(modes[a], modes[b])]);
        let sub = aufbau_projection(&block, n_s)?;
        for (a, &p) in modes.iter().enumerate() {
            for (b, &q) in modes.iter().enumerate() {
                projection[(p, q)] = sub.projection[(a, b)];
            }
        }
        degenerate |= sub.degenerate;
        gaps.extend(sub.gap);
        energies.extend(sub.orbital_energies);
    }
    energies.sort_by(f64::total_cmp);
    Ok(Aufbau {
        projection,
        orbital_energies: energies,
        gap: gaps.into_iter().reduce(f64::min),
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScfStep {
    pub energy: f64,
    pub commutator: f64,
}

#[derive(Debug, Clone)]
pub struct HfReport {
    pub gamma: CMat,
    pub particle_number: usize,
    pub breakdown: HfEnergyBreakdown,
    pub orbital_energies: Vec<f64>,
    pub homo_lumo_gap: Option<f64>,
    pub degenerate: bool,
    pub trace: Vec<ScfStep>,
    pub converged: bool,
    pub restart_count: usize,
    pub best_restart: usize,
    pub warnings: Vec<String>,
}

impl HfReport {
    pub fn energy(&self) -> f64 {
        self.breakdown.total
    }
}

struct Run {
    gamma: CMat,
    trace: Vec<ScfStep>,
    converged: bool,
    degenerate_steps: usize,
}

fn fill(f: &CMat, n: usize, model: &Model, opts: &ScfOptions) -> Result<Aufbau> {
    match opts.spin_populations {
        Some(pop) => {
            let labels = model.labels.as_ref().ok_or_else(|| {
                Error::Domain("spin populations need (site, spin) mode labels".into())
            })?;
            if pop.0 + pop.1 != n {
                return Err(Error::Domain(format!(
                    "spin populations {pop:?} do not add up to N = {n}"
                )));
            }
            aufbau_spin(f, pop, labels)
        }
        None => aufbau_projection(f, n),
    }
}

fn single_run(model: &Model, n: usize, start: CMat, opts: &ScfOptions) -> Result<Run> {
    let m = model.modes();
    let mut gamma = start;
    let mut trace = Vec::new();
    let mut prev = f64::NAN;
    let mut converged = false;
    let mut degenerate_steps = 0;
    for _ in 0..opts.max_iterations {
        let f = fock_operator(&gamma, model)?;
        let energy = hf_energy(&gamma, model)?.total;
        let comm = frobenius(&commutator(&f, &gamma));
        trace.push(ScfStep {
            energy,
            commutator: comm,
        });
        if (energy - prev).abs() < opts.energy_tol && comm < opts.commutator_tol {
            converged = true;
            break;
        }
        prev = energy;
        let shifted = if opts.level_shift > 0.0 {
            &f + (identity(m) - &gamma) * c(opts.level_shift)
        } else {
            f.clone()
        };
        let target = fill(&shifted, n, model, opts)?;
        if target.degenerate {
            degenerate_steps += 1;
        }
        let delta = &target.projection - &gamma;
        let t = match opts.damping {
            Damping::Fixed => opts.mixing,
            Damping::Optimal => {
                let slope = trace_product(&f, &delta).re;
                let (d, x) = interaction_terms(&delta, model);
                let curv = d - x;
                if curv > 1e-14 {
                    (-slope / (2.0 * curv)).clamp(0.0, 1.0)
                } else if slope + curv < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        if t == 0.0 {
            // no descent along [γ, P]; take a small fixed step so the
            // commutator test can still settle
            gamma += delta * c(opts.mixing * 0.1);
        } else {
            gamma += delta * c(t);
        }
    }
    Ok(Run {
        gamma,
        trace,
        converged,
        degenerate_steps,
    })
}

/// Initial guesses: the aufbau projection of `h_μ` (restart 0) and of
/// `h_μ + δ` with fresh random perturbations `‖δ‖_F = perturbation`.
fn initial_guesses(model: &Model, n: usize, opts: &ScfOptions) -> Result<Vec<CMat>> {
    let m = model.modes();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let h = model.h_mu();
    let mut out = Vec::with_capacity(opts.restarts.max(1));
    for r in 0..opts.restarts.max(1) {
        let mut start = h.clone();
        if r > 0 && opts.perturbation > 0.0 {
            let mut d = random_hermitian(m, &mut rng);
            if opts.spin_populations.is_some() {
                // keep the perturbation S_z-diagonal
                for a in 0..m {
                    for b in 0..m {
                        if a % 2 != b % 2 {
                            d[(a, b)] = c(0.0);
                        }
                    }
                }
            }
            let norm = frobenius(&d).max(1e-300);
            start += d * c(opts.perturbation / norm);
        }
        out.push(fill(&start, n, model, opts)?.projection);
    }
    Ok(out)
}

/// Damped iterates are mixtures; HF lives on projections. Take the better of
/// the aufbau projection and the rounded iterate, then descend along orbital
/// rotations `P → e^{tA} P e^{−tA}`, `A = [P, F]`, until `[F, P] ≈ 0`.
fn settle_on_projection(
    model: &Model,
    n: usize,
    gamma: &CMat,
    opts: &ScfOptions,
) -> Result<(CMat, bool)> {
    let mut candidates = vec![fill(&fock_operator(gamma, model)?, n, model, opts)?.projection];
    if opts.spin_populations.is_none() {
        // rounding works in the eigenbasis of γ and may mix spin sectors
        candidates.push(occupation_rounding(gamma, model)?.gamma);
    }
    let mut p = CMat::zeros(0, 0);
    let mut e = f64::INFINITY;
    for cand in candidates {
        let ec = hf_energy(&cand, model)?.total;
        if ec < e - 1e-12 {
            p = cand;
            e = ec;
        }
    }
    let mut step = 1.0;
    for _ in 0..opts.max_iterations {
        let g = commutator(&p, &fock_operator(&p, model)?);
        let norm2 = frobenius(&g).powi(2);
        if norm2.sqrt() < opts.commutator_tol {
            return Ok((p, true));
        }
        loop {
            let u = expm_anti_hermitian(&(&g * c(step)));
            let trial = &u * &p * u.adjoint();
            let et = hf_energy(&trial, model)?.total;
            if et <= e - 1e-4 * step * norm2 {
                p = hermitian_part(&trial);
                e = et;
                step = (2.0 * step).min(10.0);
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                // no descent left at working precision
                return Ok((p, norm2.sqrt() < 1e3 * opts.commutator_tol));
            }
        }
    }
    Ok((p, false))
}

/// Aufbau SCF at fixed particle number, best over restarts.
pub fn scf_solve(model: &Model, n: usize, opts: &ScfOptions) -> Result<HfReport> {
    scf_solve_from(model, n, opts, &[])
}

/// As [`scf_solve`], with extra starting 1-pdms tried before the restarts.
pub fn scf_solve_from(
    model: &Model,
    n: usize,
    opts: &ScfOptions,
    seeds: &[CMat],
) -> Result<HfReport> {
    opts.validate()?;
    let m = model.modes();
    if n > m {
        return Err(Error::Domain(format!("N = {n} exceeds {m} modes")));
    }
    let mut starts: Vec<CMat> = seeds.to_vec();
    starts.extend(initial_guesses(model, n, opts)?);
    let runs: Vec<Result<Run>> = starts
        .into_par_iter()
        .map(|s| single_run(model, n, s, opts))
        .collect();
    let mut runs: Vec<Run> = runs.into_iter().collect::<Result<_>>()?;

    let mut best = 0;
    let mut best_energy = f64::INFINITY;
    let mut best_converged = false;
    for (r, run) in runs.iter_mut().enumerate() {
        let (gamma, stationary) = settle_on_projection(model, n, &run.gamma, opts)?;
        run.gamma = gamma;
        run.converged = stationary;
        let e = hf_energy(&run.gamma, model)?.total;
        // prefer converged runs at equal energy
        let better = e < best_energy - 1e-12
            || ((e - best_energy).abs() <= 1e-12 && run.converged && !best_converged);
        if better {
            best_energy = e;
            best = r;
            best_converged = run.converged;
        }
    }
    let restart_count = runs.len();
    let run = runs.swap_remove(best);
    let f = fock_operator(&run.gamma, model)?;
    let auf = fill(&f, n, model, opts)?;
    let mut warnings = Vec::new();
    if auf.degenerate || run.degenerate_steps > 0 {
        let msg = format!(
            "degenerate Fermi level (e_N+1 − e_N < {DEGENERACY_TOL:e}); lowest-index orbitals filled"
        );
        if opts.tie_break == TieBreak::WarnAndLowestIndex {
            eprintln!("warning: {msg}");
        }
        warnings.push(msg);
    }
    if !run.converged {
        warnings.push(format!(
            "not converged after {} iterations",
            opts.max_iterations
        ));
    }
    Ok(HfReport {
        breakdown: hf_energy(&run.gamma, model)?,
        gamma: run.gamma,
        particle_number: n,
        orbital_energies: auf.orbital_energies,
        homo_lumo_gap: auf.gap,
        degenerate: auf.degenerate,
        trace: run.trace,
        converged: run.converged,
        restart_count,
        best_restart: best,
        warnings,
    })
}

/// `E_HF = min_N E_HF(N)`: the grand-canonical HF energy.
pub fn hf_grand_canonical(model: &Model, opts: &ScfOptions) -> Result<HfReport> {
    let m = model.modes();
    let mut best: Option<HfReport> = None;
    for n in 0..=m {
        let mut o = opts.clone();
        o.spin_populations = None;
        let rep = scf_solve(model, n, &o)?;
        if best
            .as_ref()
            .is_none_or(|b| rep.energy() < b.energy() - 1e-12)
        {
            best = Some(rep);
        }
    }
    Ok(best.expect("at least N = 0"))
}
