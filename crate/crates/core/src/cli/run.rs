use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ModelConfig, OutputFormat, RestrictedMeanField, RunConfig, SolverKind};
use super::report::{
    CheckResult, CheckStatus, OracleTable, RunReport, SectorRow, SweepRow, SweepTable,
};
use crate::bhf::{bhf_solve_zero_t, pressure, BhfReport, PRESSURE_ORACLE_MODES};
use crate::error::{Error, Result};
use crate::hf::{hf_grand_canonical, occupation_rounding, relaxed_solve, scf_solve};
use crate::linalg::{identity, max_abs, CMat, HermEig};
use crate::model::Model;
use crate::models::{
    bcs_minimize, build_bcs, classify_symmetry, magnetization_profile, restricted_solve, MeanField,
    SolvedEnergy, SymmetrySet,
};
use crate::oracle::{assemble_hamiltonian, build_car, ground_energy, FockBasis, FockDensityMatrix};
use crate::quasifree::{
    random_gpdm, realize_quasifree, validate_gpdm, wick_residual, GOnePdm, QUASIFREE_THRESHOLD,
};
use crate::rdm_checks::{check_pair, random_projection, RdmPair, POSITIVITY_TOL, TRACE_TOL};

/// Largest model for which reports include exact energies.
pub const ORACLE_MODES: usize = 12;
const CAR_MODES: usize = 8;
const WICK_MODES: usize = 6;
const GPQ_MODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Check,
    Sweep,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Check => "check",
            Command::Sweep => "sweep",
            Command::Oracle => "oracle",
        }
    }
}

fn need_particles(cfg: &RunConfig) -> Result<usize> {
    cfg.particles()
        .ok_or_else(|| Error::Config("solver.particles is required for this model".into()))
}

fn exact_energy(model: &Model, particles: Option<usize>) -> Result<Option<f64>> {
    if model.modes() > ORACLE_MODES {
        return Ok(None);
    }
    let h = assemble_hamiltonian(model)?;
    Ok(Some(ground_energy(&h, particles)?.energy))
}

fn magnetization(report: &mut RunReport, gamma: &CMat, model: &Model) -> Result<()> {
    if let Some(labels) = model.labels.as_ref() {
        let mag = magnetization_profile(gamma, Some(labels))?;
        report
            .order_parameters
            .insert("staggered_magnetization".into(), mag.staggered);
        report
            .order_parameters
            .insert("uniform_magnetization".into(), mag.uniform);
    }
    Ok(())
}

fn variational(report: &mut RunReport, name: &str, lower: f64, upper: f64) {
    report
        .checks
        .push(CheckResult::bound(name, (lower - upper).max(0.0), 1e-9));
}

/// Bisect `μ` until `⟨N̂⟩(μ)` is within `tol` of `target`. `count` must be
/// nondecreasing in `μ`; returns the last evaluated `μ` and its result.
pub fn bisect_mu<T>(
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iterations: usize,
    count: impl Fn(f64) -> Result<(f64, T)>,
) -> Result<(f64, f64, T)> {
    let (n_lo, _) = count(lo)?;
    let (n_hi, at_hi) = count(hi)?;
    if target < n_lo - tol || target > n_hi + tol {
        return Err(Error::Domain(format!(
            "target ⟨N⟩ = {target} outside [{n_lo}, {n_hi}] on μ ∈ [{lo}, {hi}]"
        )));
    }
    let mut best = (hi, n_hi, at_hi);
    for _ in 0..max_iterations {
        let mid = 0.5 * (lo + hi);
        let (n, value) = count(mid)?;
        let closer = (n - target).abs() < (best.1 - target).abs();
        if n < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if closer || (n - target).abs() <= tol {
            best = (mid, n, value);
        }
        if (best.1 - target).abs() <= tol || hi - lo < 1e-12 {
            break;
        }
    }
    Ok(best)
}

fn mu_bracket(model: &Model) -> (f64, f64) {
    let eig = HermEig::new(&model.h);
    let w = model.v.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max) * model.modes() as f64;
    (eig.min() - 2.0 * w - 1.0, eig.max() + 2.0 * w + 1.0)
}

fn solve_bhf(cfg: &RunConfig, model: &Model, report: &mut RunReport) -> Result<BhfReport> {
    let opts = cfg.bhf_options();
    let schedule = &cfg.solver.schedule;
    match cfg.solver.target_particles {
        None => bhf_solve_zero_t(model, schedule, &opts),
        Some(target) => {
            let (lo, hi) = mu_bracket(model);
            let (mu, n, bhf) = bisect_mu(target, lo, hi, 1e-6, 60, |mu| {
                let r = bhf_solve_zero_t(&model.with_mu(mu), schedule, &opts)?;
                Ok((r.particle_number, r))
            })?;
            report.order_parameters.insert("mu".into(), mu);
            if (n - target).abs() > 1e-6 {
                report.warnings.push(format!(
                    "⟨N⟩ = {n} is the closest reachable value to the target {target}; ⟨N⟩(μ) jumps there"
                ));
            }
            Ok(bhf)
        }
    }
}

fn solve_into(cfg: &RunConfig, report: &mut RunReport) -> Result<()> {
    let model = cfg.model.build()?;
    let m = model.modes();
    report.model.insert("kind".into(), cfg.model.kind().into());
    report.model.insert("modes".into(), m.into());
    report.model.insert("mu".into(), model.mu.into());
    report
        .model
        .insert("repulsive".into(), model.v.is_repulsive().into());
    match cfg.solver.kind {
        SolverKind::Hf => {
            let n = need_particles(cfg)?;
            let hf = scf_solve(&model, n, &cfg.scf_options())?;
            report.energies.insert("hf".into(), hf.energy());
            report.breakdown("hf", hf.breakdown)?;
            if let Some(gap) = hf.homo_lumo_gap {
                report.order_parameters.insert("homo_lumo_gap".into(), gap);
            }
            magnetization(report, &hf.gamma, &model)?;
            report.converged &= hf.converged;
            report.warnings.extend(hf.warnings.iter().cloned());
            if cfg.checks.oracle {
                if let Some(e) = exact_energy(&model, Some(n))? {
                    report.energies.insert("exact_ground".into(), e);
                    variational(report, "variational_gs_le_hf", e, hf.energy());
                }
            }
        }
        SolverKind::Bhf => {
            let bhf = solve_bhf(cfg, &model, report)?;
            let model = match report.order_parameters.get("mu") {
                Some(&mu) => model.with_mu(mu),
                None => model,
            };
            let hf = hf_grand_canonical(&model, &cfg.scf_options())?;
            report.energies.insert("bhf".into(), bhf.energy());
            report.energies.insert("hf".into(), hf.energy());
            report.breakdown("bhf", bhf.breakdown)?;
            report
                .order_parameters
                .insert("pairing_norm".into(), bhf.pairing_norm);
            report
                .order_parameters
                .insert("particle_number".into(), bhf.particle_number);
            magnetization(report, &bhf.gpdm.gamma(), &model)?;
            report.converged &= bhf.converged && hf.converged;
            report.warnings.extend(bhf.warnings.iter().cloned());
            variational(report, "variational_bhf_le_hf", bhf.energy(), hf.energy());
            if cfg.checks.oracle {
                if let Some(e) = exact_energy(&model, None)? {
                    report.energies.insert("exact_ground".into(), e);
                    variational(report, "variational_gs_le_bhf", e, bhf.energy());
                }
            }
        }
        SolverKind::Bcs => {
            let ModelConfig::Bcs(spec) = &cfg.model else {
                return Err(Error::Config("bcs solver needs a bcs model".into()));
            };
            let bcs_model = build_bcs(spec)?;
            let bcs = bcs_minimize(&bcs_model, &cfg.solver.bcs)?;
            report.energies.insert("bcs".into(), bcs.energy.total);
            report.breakdown("bcs", bcs.energy)?;
            report.order_parameters.insert("gap".into(), bcs.gap);
            report
                .order_parameters
                .insert("pairing_norm".into(), bcs.pairing_norm);
            report.order_parameters.insert(
                "density".into(),
                bcs.state.gamma_hat.iter().sum::<f64>() / bcs_model.volume() as f64,
            );
            report
                .checks
                .push(CheckResult::bound("gap_equation", bcs.gap_residual, 1e-8));
            if bcs.open_shell > 0 {
                report.warnings.push(format!(
                    "{} momenta sit exactly on the Fermi surface",
                    bcs.open_shell
                ));
            }
            report.converged &= bcs.converged;
        }
        SolverKind::Restricted => {
            let rc = cfg.solver.restricted;
            let set = match &cfg.model {
                ModelConfig::Hubbard(spec) => SymmetrySet::lattice(spec, rc.symmetries),
                _ => SymmetrySet::none().with_flags(rc.symmetries)?,
            };
            let scf = cfg.scf_options();
            let (mean_field, free_energy, free_gamma, free_converged) = match rc.mean_field {
                RestrictedMeanField::Hf => {
                    let n = need_particles(cfg)?;
                    let free = scf_solve(&model, n, &scf)?;
                    (
                        MeanField::Hf { particles: n },
                        free.energy(),
                        free.gamma,
                        free.converged,
                    )
                }
                RestrictedMeanField::Bhf => {
                    let free = bhf_solve_zero_t(&model, &cfg.solver.schedule, &cfg.bhf_options())?;
                    report
                        .order_parameters
                        .insert("pairing_norm".into(), free.pairing_norm);
                    (
                        MeanField::Bhf,
                        free.energy(),
                        free.gpdm.gamma(),
                        free.converged,
                    )
                }
            };
            let restricted = restricted_solve(&model, &set, mean_field, &scf)?;
            report
                .energies
                .insert("restricted".into(), restricted.energy());
            report.energies.insert("unrestricted".into(), free_energy);
            report.breakdown("restricted", restricted.breakdown)?;
            report.breakdown("symmetry_checks", &restricted.checks)?;
            report.converged &= restricted.converged && free_converged;
            magnetization(report, &free_gamma, &model)?;
            if report.converged {
                let verdict = classify_symmetry(
                    SolvedEnergy {
                        energy: restricted.energy(),
                        converged: true,
                    },
                    SolvedEnergy {
                        energy: free_energy,
                        converged: true,
                    },
                    rc.tol,
                )?;
                report
                    .order_parameters
                    .insert("symmetry_gap".into(), verdict.gap);
                report.breakdown("verdict", verdict)?;
            } else {
                report
                    .warnings
                    .push("symmetry not classified: a solve did not converge".into());
            }
        }
    }
    Ok(())
}

pub fn solve(cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new("solve", cfg)?;
    solve_into(cfg, &mut report)?;
    report.seal()
}

fn car_residual(m: usize) -> Result<f64> {
    let car = build_car(m)?;
    let dim = car.basis().dim();
    let one = identity(dim);
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let ci = car.c(i).to_dense();
        for j in 0..m {
            let cj = car.c(j).to_dense();
            let cdj = car.cdag(j).to_dense();
            let mixed = &ci * &cdj + &cdj * &ci
                - if i == j {
                    one.clone()
                } else {
                    CMat::zeros(dim, dim)
                };
            let same = &ci * &cj + &cj * &ci;
            worst = worst.max(max_abs(&mixed)).max(max_abs(&same));
        }
    }
    Ok(worst)
}

fn rdm_suite(
    report: &mut RunReport,
    label: &str,
    rho: &FockDensityMatrix,
    projections: &[CMat],
) -> Result<()> {
    let pair = RdmPair::from_state(rho);
    let r = check_pair(&pair, Some(rho), projections)?;
    if let Some(min) = r.gpq_min_eigenvalue {
        report.checks.push(CheckResult::bound(
            format!("gpq/{label}"),
            (-min).max(0.0),
            POSITIVITY_TOL,
        ));
    }
    if let Some(t) = &r.trace {
        report.checks.push(CheckResult::bound(
            format!("trace_identities/{label}"),
            t.worst(),
            TRACE_TOL,
        ));
    }
    if let Some(s) = r.correlation_min_slack {
        report.checks.push(CheckResult::bound(
            format!("correlation_inequality/{label}"),
            (-s).max(0.0),
            POSITIVITY_TOL,
        ));
    }
    Ok(())
}

fn mean_field_state(cfg: &RunConfig, model: &Model) -> Result<GOnePdm> {
    Ok(match (cfg.solver.kind, cfg.particles()) {
        (SolverKind::Bhf, _) | (_, None) => {
            bhf_solve_zero_t(model, &cfg.solver.schedule, &cfg.bhf_options())?.gpdm
        }
        (_, Some(n)) => GOnePdm::from_one_pdm(&scf_solve(model, n, &cfg.scf_options())?.gamma),
    })
}

fn check_into(cfg: &RunConfig, report: &mut RunReport) -> Result<()> {
    let model = cfg.model.build()?;
    let m = model.modes();
    report.model.insert("kind".into(), cfg.model.kind().into());
    report.model.insert("modes".into(), m.into());
    let c = &cfg.checks;
    let all = !c.any_suite();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let skip = |report: &mut RunReport, suite: &str, cap: usize| {
        report
            .warnings
            .push(format!("{suite} suite skipped: {m} modes exceed {cap}"));
    };

    if let Some(inline) = &c.gpdm {
        let (gamma, alpha) = inline.blocks()?;
        let diag = validate_gpdm(&GOnePdm::from_blocks(&gamma, &alpha));
        let worst = diag
            .hermiticity
            .max(diag.j_symmetry)
            .max(diag.pairing_antisymmetry)
            .max(-diag.min_eigenvalue)
            .max(diag.max_eigenvalue - 1.0);
        let mut result = CheckResult::bound("gpdm_validity", worst.max(0.0), 1e-10);
        if !diag.violations.is_empty() {
            result = result.with_note(diag.violations.join("; "));
        }
        report.checks.push(result);
    }

    if all || c.car {
        if m <= CAR_MODES {
            report
                .checks
                .push(CheckResult::bound("car_relations", car_residual(m)?, 1e-12));
        } else {
            skip(report, "car", CAR_MODES);
        }
    }

    if all || c.wick {
        if m <= WICK_MODES {
            let state = mean_field_state(cfg, &model)?;
            let rho = realize_quasifree(&state)?;
            let mut worst: f64 = 0.0;
            for order in (2..=(2 * m).min(6)).step_by(2) {
                worst = worst.max(wick_residual(&rho, order)?);
            }
            report
                .checks
                .push(CheckResult::bound("wick/mean_field_state", worst, 1e-9));
            let h = assemble_hamiltonian(&model)?;
            let gs = ground_energy(&h, cfg.particles())?;
            let exact = FockDensityMatrix::pure(h.basis, &gs.vector)?;
            let r = if m >= 2 {
                wick_residual(&exact, 4)?
            } else {
                0.0
            };
            let note = if r > QUASIFREE_THRESHOLD {
                "non-quasifree"
            } else {
                "quasifree"
            };
            report
                .checks
                .push(CheckResult::info("wick/exact_ground_state", r, note));
        } else {
            skip(report, "wick", WICK_MODES);
        }
    }

    if all || c.gpq {
        if m <= GPQ_MODES {
            let projections: Vec<CMat> = (0..c.projections)
                .map(|k| random_projection(m, 1 + k % m.max(1), &mut rng))
                .collect();
            let h = assemble_hamiltonian(&model)?;
            let gs = ground_energy(&h, cfg.particles())?;
            rdm_suite(
                report,
                "exact_ground_state",
                &FockDensityMatrix::pure(h.basis, &gs.vector)?,
                &projections,
            )?;
            let basis = FockBasis::new(m)?;
            for k in 0..3 {
                let rho = FockDensityMatrix::random_even(basis, 1 + k, &mut rng);
                rdm_suite(report, &format!("random_even_{k}"), &rho, &projections)?;
            }
        } else {
            skip(report, "gpq", GPQ_MODES);
        }
    }

    if all || c.relaxation {
        match cfg.particles() {
            Some(n) => {
                let scf = cfg.scf_options();
                let relaxed = relaxed_solve(&model, n, &scf)?;
                let rounded = occupation_rounding(&relaxed.gamma, &model)?;
                report.checks.push(CheckResult::bound(
                    "relaxation/rounding_monotone",
                    (rounded.energy() - relaxed.energy).max(0.0),
                    1e-9,
                ));
                let fractional = relaxed
                    .occupations
                    .iter()
                    .map(|x| x.min(1.0 - x).max(0.0))
                    .fold(0.0, f64::max);
                let best = scf_solve(&model, n, &scf)?;
                let gap = (best.energy() - relaxed.energy).abs();
                if model.v.is_repulsive() {
                    report.checks.push(CheckResult::bound(
                        "relaxation/integral_occupations",
                        fractional,
                        1e-6,
                    ));
                    report.checks.push(CheckResult::bound(
                        "relaxation/relaxed_equals_scf",
                        gap,
                        1e-6,
                    ));
                } else {
                    report.checks.push(CheckResult::info(
                        "relaxation/relaxed_vs_scf",
                        gap,
                        "interaction not repulsive; equality not expected",
                    ));
                }
            }
            None => report
                .warnings
                .push("relaxation suite skipped: no particle number".into()),
        }
    }

    if all || c.pressure {
        if m <= PRESSURE_ORACLE_MODES {
            let mut worst: f64 = 0.0;
            for _ in 0..5 {
                let g = random_gpdm(m, &mut rng);
                for beta in [0.5, 2.0, 10.0] {
                    let p = pressure(&g, &model, beta, true)?;
                    if let Some(bound) = p.oracle_bound {
                        worst = worst.max(p.pressure - bound);
                    }
                }
            }
            report
                .checks
                .push(CheckResult::bound("pressure_bound", worst.max(0.0), 1e-8));
        } else {
            skip(report, "pressure", PRESSURE_ORACLE_MODES);
        }
    }
    Ok(())
}

pub fn check(cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new("check", cfg)?;
    check_into(cfg, &mut report)?;
    report.seal()
}

pub fn sweep(cfg: &RunConfig) -> Result<RunReport> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a [sweep] section".into()))?;
    let configs: Vec<RunConfig> = spec
        .values
        .iter()
        .map(|&v| cfg.with_parameter(&spec.parameter, v))
        .collect::<Result<_>>()?;
    let rows: Vec<Result<(SweepRow, RunReport)>> = configs
        .par_iter()
        .zip(spec.values.par_iter())
        .map(|(c, &value)| {
            let mut sub = RunReport::new("solve", c)?;
            solve_into(c, &mut sub)?;
            let row = SweepRow {
                value,
                energies: sub.energies.clone(),
                order_parameters: sub.order_parameters.clone(),
                converged: sub.converged,
            };
            Ok((row, sub))
        })
        .collect();
    let mut report = RunReport::new("sweep", cfg)?;
    let mut table = SweepTable {
        parameter: spec.parameter.clone(),
        rows: Vec::new(),
    };
    for r in rows {
        let (row, sub) = r?;
        report.converged &= row.converged;
        for check in sub.checks {
            report.checks.push(CheckResult {
                name: format!("{}={}/{}", spec.parameter, row.value, check.name),
                ..check
            });
        }
        report.warnings.extend(
            sub.warnings
                .into_iter()
                .map(|w| format!("{}={}: {w}", spec.parameter, row.value)),
        );
        table.rows.push(row);
    }
    report.sweep = Some(table);
    report.seal()
}

pub fn oracle(cfg: &RunConfig) -> Result<RunReport> {
    let model = cfg.model.build()?;
    let m = model.modes();
    if m > ORACLE_MODES {
        return Err(Error::Resource {
            modes: m,
            cap: ORACLE_MODES,
            dim: 1u128 << m,
        });
    }
    let mut report = RunReport::new("oracle", cfg)?;
    report.model.insert("kind".into(), cfg.model.kind().into());
    report.model.insert("modes".into(), m.into());
    let h = assemble_hamiltonian(&model)?;
    let sectors: Vec<SectorRow> = (0..=m)
        .map(|n| {
            ground_energy(&h, Some(n)).map(|g| SectorRow {
                particles: n,
                energy: g.energy,
                degeneracy: g.degeneracy,
            })
        })
        .collect::<Result<_>>()?;
    let global = ground_energy(&h, None)?;
    report.energies.insert("exact_ground".into(), global.energy);
    if let Some(n) = cfg.particles() {
        if let Some(row) = sectors.get(n) {
            report
                .energies
                .insert(format!("exact_ground_n{n}"), row.energy);
        }
    }
    report.oracle = Some(OracleTable {
        modes: m,
        sectors,
        ground_energy: global.energy,
        ground_particles: global.particle_number,
    });
    report.seal()
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<RunReport> {
    match command {
        Command::Solve => solve(cfg),
        Command::Check => check(cfg),
        Command::Sweep => sweep(cfg),
        Command::Oracle => oracle(cfg),
    }
}

/// 0 when everything converged and no check failed, 2 otherwise.
pub fn exit_code(report: &RunReport) -> i32 {
    if report.converged && report.failed_checks() == 0 {
        0
    } else {
        2
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Load, run and write the report. Returns the process exit code: 0 on
/// success, 2 if the report was written but something did not converge or
/// a check failed, 1 on configuration or runtime errors.
pub fn execute(inv: &Invocation) -> i32 {
    match execute_inner(inv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute_inner(inv: &Invocation) -> Result<i32> {
    let cfg = RunConfig::load(&inv.config)?.with_seed(inv.seed);
    cfg.validate()?;
    let report = match inv.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| run(inv.command, &cfg))?,
        None => run(inv.command, &cfg)?,
    };
    let text = report.render(cfg.output.format)?;
    let target = inv
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match target {
        Some(path) => std::fs::write(&path, text)?,
        None => print!("{text}"),
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for c in report
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
    {
        eprintln!("check failed: {} (residual {:.3e})", c.name, c.residual);
    }
    if cfg.output.format == OutputFormat::Json && !report.converged {
        eprintln!("warning: not all solves converged");
    }
    Ok(exit_code(&report))
}
