use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64, ZERO};
use crate::model::{ModeLabels, Model};
use crate::quasifree::GOnePdm;
use crate::tensor::TwoBodyTensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Dispersion {
    /// `ω(k) = −2 Σ_i cos k_i`.
    TightBinding,
    /// `ω(k) = |k|²` with each component folded into `(−π, π]`.
    Quadratic,
}

impl Dispersion {
    fn eval(self, k: &[f64]) -> f64 {
        match self {
            Dispersion::TightBinding => -2.0 * k.iter().map(|x| x.cos()).sum::<f64>(),
            Dispersion::Quadratic => k
                .iter()
                .map(|&x| {
                    let f = if x > PI { x - 2.0 * PI } else { x };
                    f * f
                })
                .sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BcsInteraction {
    /// `V(x) = strength · δ_{x,0}`; negative is attractive.
    Contact { strength: f64 },
    /// `V(x)` on the lattice sites, in site order.
    RealSpace { values: Vec<f64> },
    /// `V̂(k)` on the dual grid, in grid order.
    Fourier { values: Vec<f64> },
}

/// Reading of the direct term `‖γ̂‖₁²` coefficient.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectTerm {
    /// `V̂(0) = Σ_x V(x)`, which is what the full functional produces.
    #[default]
    Signed,
    /// `Σ_x |V(x)|`.
    Absolute,
}

/// Translation- and spin-invariant pairing model on `(Z/L)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcsSpec {
    pub dimension: usize,
    pub length: usize,
    pub dispersion: Dispersion,
    pub interaction: BcsInteraction,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub direct: DirectTerm,
}

impl BcsSpec {
    pub fn contact(dimension: usize, length: usize, strength: f64, mu: f64) -> Self {
        Self {
            dimension,
            length,
            dispersion: Dispersion::TightBinding,
            interaction: BcsInteraction::Contact { strength },
            mu,
            direct: DirectTerm::Signed,
        }
    }
}

/// Reduced data for the singlet, translation-invariant functional.
#[derive(Debug, Clone)]
pub struct BcsModel {
    pub spec: BcsSpec,
    /// Dual grid `(2π/L)·{0..L−1}^d`.
    pub momenta: Vec<Vec<f64>>,
    pub sites: Vec<Vec<usize>>,
    /// `ω(k) − μ`.
    pub xi: Vec<f64>,
    /// `V(x)`, real and even.
    pub potential: Vec<f64>,
    /// `phase[x][k] = e^{i k·x}`.
    phase: Vec<Vec<C64>>,
    /// Index of `−k` (equivalently `−x`).
    negate: Vec<usize>,
}

fn grid(dimension: usize, length: usize) -> Vec<Vec<usize>> {
    let n = length.pow(dimension as u32);
    (0..n)
        .map(|mut s| {
            (0..dimension)
                .map(|_| {
                    let x = s % length;
                    s /= length;
                    x
                })
                .collect()
        })
        .collect()
}

fn flat(coords: &[usize], length: usize) -> usize {
    coords
        .iter()
        .rev()
        .fold(0, |acc, &x| acc * length + x % length)
}

pub fn build_bcs(spec: &BcsSpec) -> Result<BcsModel> {
    if !(1..=3).contains(&spec.dimension) || spec.length == 0 {
        return Err(Error::Domain(format!(
            "BCS grid needs 1 ≤ d ≤ 3 and L ≥ 1, got d = {}, L = {}",
            spec.dimension, spec.length
        )));
    }
    let l = spec.length;
    let sites = grid(spec.dimension, l);
    let n = sites.len();
    let momenta: Vec<Vec<f64>> = sites
        .iter()
        .map(|s| s.iter().map(|&j| 2.0 * PI * j as f64 / l as f64).collect())
        .collect();
    let negate: Vec<usize> = sites
        .iter()
        .map(|s| flat(&s.iter().map(|&x| (l - x) % l).collect::<Vec<_>>(), l))
        .collect();
    let phase: Vec<Vec<C64>> = sites
        .iter()
        .map(|x| {
            sites
                .iter()
                .map(|kj| {
                    let dot: usize = x.iter().zip(kj).map(|(a, b)| a * b).sum();
                    C64::from_polar(1.0, 2.0 * PI * (dot % l) as f64 / l as f64)
                })
                .collect()
        })
        .collect();
    let potential = match &spec.interaction {
        BcsInteraction::Contact { strength } => {
            let mut v = vec![0.0; n];
            v[0] = *strength;
            v
        }
        BcsInteraction::RealSpace { values } => {
            if values.len() != n {
                return Err(Error::Shape(format!(
                    "V(x) has {} values, grid has {n}",
                    values.len()
                )));
            }
            values.clone()
        }
        BcsInteraction::Fourier { values } => {
            if values.len() != n {
                return Err(Error::Shape(format!(
                    "V̂(k) has {} values, grid has {n}",
                    values.len()
                )));
            }
            let mut v = Vec::with_capacity(n);
            for row in &phase {
                let z: C64 = row.iter().zip(values).map(|(p, w)| p * w).sum::<C64>() / n as f64;
                if z.im.abs() > 1e-10 {
                    return Err(Error::Domain("V̂ must be even so that V is real".into()));
                }
                v.push(z.re);
            }
            v
        }
    };
    for x in 0..n {
        if (potential[x] - potential[negate[x]]).abs() > 1e-10 {
            return Err(Error::Domain(
                "pair potential must be even, V(x) = V(−x)".into(),
            ));
        }
    }
    let xi = momenta
        .iter()
        .map(|k| spec.dispersion.eval(k) - spec.mu)
        .collect();
    Ok(BcsModel {
        spec: spec.clone(),
        momenta,
        sites,
        xi,
        potential,
        phase,
        negate,
    })
}

/// Momentum-space occupations and pair amplitudes, both even in `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcsState {
    pub gamma_hat: Vec<f64>,
    pub alpha_hat: Vec<C64>,
}

impl BcsState {
    /// Largest violation of `|α̂|² ≤ γ̂(1 − γ̂)`, `0 ≤ γ̂ ≤ 1` and evenness.
    pub fn validity_residual(&self, model: &BcsModel) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, (&g, a)) in self.gamma_hat.iter().zip(&self.alpha_hat).enumerate() {
            worst = worst
                .max(-g)
                .max(g - 1.0)
                .max(a.norm_sqr() - g * (1.0 - g))
                .max((g - self.gamma_hat[model.negate[k]]).abs())
                .max((a - self.alpha_hat[model.negate[k]]).norm());
        }
        worst
    }

    fn from_disk(u: &[f64], v: &[f64]) -> Self {
        Self {
            gamma_hat: u.iter().map(|x| 0.5 * (1.0 - x)).collect(),
            alpha_hat: v.iter().map(|y| c(0.5 * y)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcsEnergy {
    /// `Σ_k (ω(k) − μ) γ̂(k)`.
    pub one_body: f64,
    pub direct: f64,
    /// `½ |Λ| Σ_x V(x) |γ(x)|²`, entering with a minus sign.
    pub exchange: f64,
    /// `½ |Λ| Σ_x V(x) |α(x)|²`.
    pub pairing: f64,
    pub total: f64,
}

impl BcsModel {
    pub fn volume(&self) -> usize {
        self.sites.len()
    }

    fn check_state(&self, state: &BcsState) -> Result<()> {
        let n = self.volume();
        if state.gamma_hat.len() != n || state.alpha_hat.len() != n {
            return Err(Error::Shape(format!("BCS state must have {n} momenta")));
        }
        Ok(())
    }

    /// `|Λ|⁻¹ Σ_k f(k) e^{ik·x}` for every `x`.
    fn inverse_dft(&self, f: impl Fn(usize) -> C64) -> Vec<C64> {
        let n = self.volume() as f64;
        let fk: Vec<C64> = (0..self.volume()).map(f).collect();
        self.phase
            .iter()
            .map(|row| row.iter().zip(&fk).map(|(p, z)| p * z).sum::<C64>() / n)
            .collect()
    }

    /// `Σ_x V(x) Re(conj(f(x)) e^{ik·x})` for every `k`.
    fn field(&self, fx: &[C64]) -> Vec<f64> {
        (0..self.volume())
            .map(|k| {
                self.potential
                    .iter()
                    .zip(fx)
                    .zip(&self.phase)
                    .map(|((v, f), row)| v * (f.conj() * row[k]).re)
                    .sum()
            })
            .collect()
    }

    fn direct_coefficient(&self) -> f64 {
        let w: f64 = match self.spec.direct {
            DirectTerm::Signed => self.potential.iter().sum(),
            DirectTerm::Absolute => self.potential.iter().map(|v| v.abs()).sum(),
        };
        w / self.volume() as f64
    }

    /// Real-space profiles `γ(x)` and `α(x)`.
    pub fn real_space(&self, state: &BcsState) -> (Vec<C64>, Vec<C64>) {
        (
            self.inverse_dft(|k| c(state.gamma_hat[k])),
            self.inverse_dft(|k| state.alpha_hat[k]),
        )
    }

    pub fn energy(&self, state: &BcsState) -> Result<BcsEnergy> {
        self.check_state(state)?;
        let n = self.volume() as f64;
        let (g, a) = self.real_space(state);
        let one_body = self
            .xi
            .iter()
            .zip(&state.gamma_hat)
            .map(|(x, y)| x * y)
            .sum();
        let mass: f64 = state.gamma_hat.iter().map(|y| y.abs()).sum();
        let direct = self.direct_coefficient() * mass * mass;
        let weigh = |f: &[C64]| {
            0.5 * n
                * self
                    .potential
                    .iter()
                    .zip(f)
                    .map(|(v, z)| v * z.norm_sqr())
                    .sum::<f64>()
        };
        let exchange = weigh(&g);
        let pairing = weigh(&a);
        Ok(BcsEnergy {
            one_body,
            direct,
            exchange,
            pairing,
            total: one_body + direct - exchange + pairing,
        })
    }

    /// `(∂E/∂γ̂, ∂E/∂Re α̂)`; the second is the pairing field `Δ(k)`.
    pub fn gradients(&self, state: &BcsState) -> (Vec<f64>, Vec<f64>) {
        let (g, a) = self.real_space(state);
        let mass: f64 = state.gamma_hat.iter().sum();
        let shift = 2.0 * self.direct_coefficient() * mass;
        let ex = self.field(&g);
        let d_gamma = self
            .xi
            .iter()
            .zip(&ex)
            .map(|(x, e)| x + shift - e)
            .collect();
        (d_gamma, self.field(&a))
    }

    /// Full real-space model on `2|Λ|` modes (`2·site + spin`) whose BHF
    /// functional, restricted to embedded states, is twice [`Self::energy`]
    /// under [`DirectTerm::Signed`].
    pub fn to_model(&self) -> Result<Model> {
        let n = self.volume();
        let hop = self.inverse_dft(|k| c(self.xi[k] + self.spec.mu));
        let diff = |x: usize, y: usize| -> usize {
            let l = self.spec.length;
            let d: Vec<usize> = self.sites[x]
                .iter()
                .zip(&self.sites[y])
                .map(|(a, b)| (a + l - b) % l)
                .collect();
            flat(&d, l)
        };
        let mut h = CMat::zeros(2 * n, 2 * n);
        let mut v = TwoBodyTensor::zeros(2 * n);
        for x in 0..n {
            for y in 0..n {
                let z = diff(x, y);
                for s in 0..2 {
                    h[(2 * x + s, 2 * y + s)] = hop[z];
                    for t in 0..2 {
                        if self.potential[z] != 0.0 {
                            v.add(
                                2 * x + s,
                                2 * y + t,
                                2 * x + s,
                                2 * y + t,
                                c(self.potential[z]),
                            );
                        }
                    }
                }
            }
        }
        let parity = self
            .sites
            .iter()
            .map(|s| {
                if s.iter().sum::<usize>() % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Model::new(h, v, self.spec.mu)?.with_labels(ModeLabels::new(n, parity))
    }

    /// `γ = γ(x − y) ⊗ 1`, `α = α(x − y) ⊗ [[0, 1], [−1, 0]]`.
    pub fn embed(&self, state: &BcsState) -> Result<GOnePdm> {
        self.check_state(state)?;
        let n = self.volume();
        let (g, a) = self.real_space(state);
        let l = self.spec.length;
        let mut gamma = CMat::zeros(2 * n, 2 * n);
        let mut alpha = CMat::zeros(2 * n, 2 * n);
        for x in 0..n {
            for y in 0..n {
                let d: Vec<usize> = self.sites[x]
                    .iter()
                    .zip(&self.sites[y])
                    .map(|(p, q)| (p + l - q) % l)
                    .collect();
                let z = flat(&d, l);
                for s in 0..2 {
                    gamma[(2 * x + s, 2 * y + s)] = g[z];
                }
                alpha[(2 * x, 2 * y + 1)] = a[z];
                alpha[(2 * x + 1, 2 * y)] = -a[z];
            }
        }
        Ok(GOnePdm::from_blocks(&gamma, &alpha))
    }

    /// `Δ(k) = Σ_x V(x) α(x) e^{−ik·x}`.
    pub fn pairing_field(&self, state: &BcsState) -> Vec<C64> {
        let (_, a) = self.real_space(state);
        (0..self.volume())
            .map(|k| {
                self.potential
                    .iter()
                    .zip(&a)
                    .zip(&self.phase)
                    .map(|((v, z), row)| v * z * row[k].conj())
                    .sum()
            })
            .collect()
    }
}

const SHELL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BcsOptions {
    pub max_iterations: usize,
    /// Target for the projected-gradient stationarity residual.
    pub tol: f64,
}

impl Default for BcsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BcsReport {
    pub state: BcsState,
    pub energy: BcsEnergy,
    /// `max_k |Δ(k)|`.
    pub gap: f64,
    /// `‖P(x − ∇E) − x‖_∞` in the disk coordinates `(1 − 2γ̂, 2α̂)`; zero
    /// exactly at solutions of the gap equation.
    pub gap_residual: f64,
    pub pairing_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub start: &'static str,
    /// Momenta with `ω(k) = μ` up to rounding; unpaired starts put them
    /// at `γ̂ = ½`.
    pub open_shell: usize,
}

struct Disk {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Disk {
    fn project(mut self) -> Self {
        for (u, v) in self.u.iter_mut().zip(self.v.iter_mut()) {
            let r = u.hypot(*v);
            if r > 1.0 {
                *u /= r;
                *v /= r;
            }
        }
        self
    }

    fn state(&self) -> BcsState {
        BcsState::from_disk(&self.u, &self.v)
    }
}

fn disk_gradient(model: &BcsModel, d: &Disk) -> (Vec<f64>, Vec<f64>) {
    let (dg, da) = model.gradients(&d.state());
    (
        dg.iter().map(|x| -0.5 * x).collect(),
        da.iter().map(|x| 0.5 * x).collect(),
    )
}

fn stationarity(model: &BcsModel, d: &Disk) -> f64 {
    let (gu, gv) = disk_gradient(model, d);
    let moved = Disk {
        u: d.u.iter().zip(&gu).map(|(x, g)| x - g).collect(),
        v: d.v.iter().zip(&gv).map(|(x, g)| x - g).collect(),
    }
    .project();
    moved
        .u
        .iter()
        .zip(&d.u)
        .chain(moved.v.iter().zip(&d.v))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

const MAX_STEP: f64 = 1e3;

/// Start name, final point, energy, iterations, converged.
type Run = (&'static str, Disk, f64, usize, bool);

fn descend(model: &BcsModel, start: Disk, opts: &BcsOptions) -> Result<(Disk, f64, usize, bool)> {
    let mut d = start.project();
    let mut e = model.energy(&d.state())?.total;
    let mut step = 1.0;
    for it in 0..opts.max_iterations {
        if it % 16 == 0 && stationarity(model, &d) <= opts.tol {
            return Ok((d, e, it, true));
        }
        let (gu, gv) = disk_gradient(model, &d);
        loop {
            let trial = Disk {
                u: d.u.iter().zip(&gu).map(|(x, g)| x - step * g).collect(),
                v: d.v.iter().zip(&gv).map(|(x, g)| x - step * g).collect(),
            }
            .project();
            let du: Vec<f64> = trial.u.iter().zip(&d.u).map(|(a, b)| a - b).collect();
            let dv: Vec<f64> = trial.v.iter().zip(&d.v).map(|(a, b)| a - b).collect();
            let lin: f64 = du
                .iter()
                .zip(&gu)
                .chain(dv.iter().zip(&gv))
                .map(|(a, b)| a * b)
                .sum();
            let sq: f64 = du.iter().chain(&dv).map(|a| a * a).sum();
            let et = model.energy(&trial.state())?.total;
            // slack at roundoff level so the search does not stall near the minimum
            let accept =
                et.is_finite() && et <= e + lin + sq / (2.0 * step) + 1e-14 * e.abs().max(1.0);
            if accept || step < 1e-14 {
                if accept {
                    d = trial;
                    e = et;
                }
                step = (1.5 * step).min(MAX_STEP);
                break;
            }
            step *= 0.5;
        }
    }
    let ok = stationarity(model, &d) <= opts.tol;
    Ok((d, e, opts.max_iterations, ok))
}

/// Minimize the singlet functional over valid even states by projected
/// gradient in the disk coordinates `(1 − 2γ̂(k), 2α̂(k))`, with real `α̂`.
/// Starts: a smooth paired Fermi profile, uniform half filling with maximal
/// pairing, and a sharp Fermi sea with a small pairing seed; the lowest
/// stationary point wins.
pub fn bcs_minimize(model: &BcsModel, opts: &BcsOptions) -> Result<BcsReport> {
    if opts.tol <= 0.0 || opts.max_iterations == 0 {
        return Err(Error::Domain(
            "BCS options need tol > 0 and max_iterations > 0".into(),
        ));
    }
    let n = model.volume();
    let on_shell = |x: f64| x.abs() < SHELL_TOL;
    let open_shell = model.xi.iter().filter(|x| on_shell(**x)).count();
    let sign = |x: f64| if on_shell(x) { 0.0 } else { x.signum() };
    let starts: Vec<(&'static str, Disk)> = vec![
        (
            "fermi_sea_unpaired",
            Disk {
                u: model.xi.iter().map(|x| sign(*x)).collect(),
                v: vec![0.0; n],
            },
        ),
        (
            "smooth_paired",
            Disk {
                u: model.xi.iter().map(|x| (0.5 * x).tanh()).collect(),
                v: model.xi.iter().map(|x| 1.0 / (0.5 * x).cosh()).collect(),
            },
        ),
        (
            "half_filled_paired",
            Disk {
                u: vec![0.0; n],
                v: vec![1.0; n],
            },
        ),
        (
            "fermi_sea",
            Disk {
                u: model.xi.iter().map(|x| sign(*x) * 0.995).collect(),
                v: vec![0.0998; n],
            },
        ),
    ];
    let runs: Vec<Result<Run>> = starts
        .into_par_iter()
        .map(|(name, d)| descend(model, d, opts).map(|(d, e, it, ok)| (name, d, e, it, ok)))
        .collect();
    let mut best: Option<Run> = None;
    let mut iterations = 0;
    for run in runs {
        let run = run?;
        iterations += run.3;
        if best.as_ref().is_none_or(|b| run.2 < b.2 - 1e-13) {
            best = Some(run);
        }
    }
    let (start, disk, _, _, converged) = best.expect("at least one start");
    let state = disk.state();
    let energy = model.energy(&state)?;
    let gap = model
        .pairing_field(&state)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let (_, a) = model.real_space(&state);
    let pairing_norm = (2.0 * n as f64 * a.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    Ok(BcsReport {
        gap_residual: stationarity(model, &disk),
        state,
        energy,
        gap,
        pairing_norm,
        iterations,
        converged,
        start,
        open_shell,
    })
}

/// Random valid even state, for consistency checks.
pub fn random_bcs_state<R: rand::Rng + ?Sized>(model: &BcsModel, rng: &mut R) -> BcsState {
    let n = model.volume();
    let mut gamma_hat = vec![0.0; n];
    let mut alpha_hat = vec![ZERO; n];
    for k in 0..n {
        let nk = model.negate[k];
        if nk < k {
            gamma_hat[k] = gamma_hat[nk];
            alpha_hat[k] = alpha_hat[nk];
            continue;
        }
        let g: f64 = rng.random();
        let r = (g * (1.0 - g)).sqrt() * rng.random::<f64>();
        gamma_hat[k] = g;
        alpha_hat[k] = C64::from_polar(r, 2.0 * PI * rng.random::<f64>());
    }
    BcsState {
        gamma_hat,
        alpha_hat,
    }
}
