use serde::Serialize;

use super::hf_energy;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, HermEig};
use crate::model::Model;

#[derive(Debug, Clone, Serialize)]
pub struct RoundingReport {
    #[serde(skip)]
    pub gamma: CMat,
    /// Energy after every accepted move, starting with the input energy.
    pub energies: Vec<f64>,
    /// Pair moves whose line was not strictly concave.
    pub flat_steps: usize,
    /// Occupied/empty exchanges made by the final local search.
    pub swaps: usize,
}

impl RoundingReport {
    pub fn energy(&self) -> f64 {
        *self.energies.last().expect("nonempty")
    }
}

const FRACTIONAL: f64 = 1e-12;

fn assemble(orbitals: &[CVec], occ: &[f64]) -> CMat {
    let m = orbitals[0].len();
    let mut g = CMat::zeros(m, m);
    for (f, &x) in orbitals.iter().zip(occ) {
        if x != 0.0 {
            g += f * f.adjoint() * c(x);
        }
    }
    g
}

/// Round a mixed 1-pdm to a projection in its own eigenbasis.
///
/// While two occupations `λ_p, λ_q ∈ (0, 1)` remain, move along
/// `(λ_p + δ, λ_q − δ)` to the lower-energy endpoint of the feasible segment.
/// The energy is quadratic in `δ` and concave for repulsive interactions, so
/// no step raises it there. A final exchange search over occupied/empty
/// eigenvectors takes any strictly improving swap.
pub fn occupation_rounding(gamma: &CMat, model: &Model) -> Result<RoundingReport> {
    let eig = HermEig::new(gamma);
    let orbitals: Vec<CVec> = (0..eig.values.len())
        .map(|j| eig.vectors.column(j).into_owned())
        .collect();
    let mut occ: Vec<f64> = eig.values.iter().map(|x| x.clamp(0.0, 1.0)).collect();
    let total: f64 = occ.iter().sum();
    if (total - total.round()).abs() > 1e-8 {
        return Err(Error::Domain(format!("Tr γ = {total} is not an integer")));
    }
    let energy =
        |occ: &[f64]| -> Result<f64> { Ok(hf_energy(&assemble(&orbitals, occ), model)?.total) };

    let mut current = energy(&occ)?;
    let mut energies = vec![current];
    let mut flat_steps = 0;
    loop {
        let frac: Vec<usize> = (0..occ.len())
            .filter(|&j| occ[j] > FRACTIONAL && occ[j] < 1.0 - FRACTIONAL)
            .collect();
        if frac.len() < 2 {
            for j in frac {
                occ[j] = occ[j].round();
            }
            break;
        }
        let (p, q) = (frac[0], frac[1]);
        let lo = -occ[p].min(1.0 - occ[q]);
        let hi = (1.0 - occ[p]).min(occ[q]);
        let shifted = |d: f64| {
            let mut o = occ.clone();
            o[p] += d;
            o[q] -= d;
            for x in [p, q] {
                if o[x] < FRACTIONAL {
                    o[x] = 0.0;
                } else if o[x] > 1.0 - FRACTIONAL {
                    o[x] = 1.0;
                }
            }
            o
        };
        let (o_lo, o_hi) = (shifted(lo), shifted(hi));
        let (e_lo, e_hi) = (energy(&o_lo)?, energy(&o_hi)?);
        // curvature of E(δ) through the three known points
        let curv = (e_hi - current) / hi - (current - e_lo) / (-lo);
        if curv >= -1e-12 {
            flat_steps += 1;
        }
        if e_lo <= e_hi {
            occ = o_lo;
            current = e_lo;
        } else {
            occ = o_hi;
            current = e_hi;
        }
        energies.push(current);
    }

    let mut swaps = 0;
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in (0..occ.len()).filter(|&a| occ[a] == 1.0) {
            for b in (0..occ.len()).filter(|&b| occ[b] == 0.0) {
                let mut o = occ.clone();
                o[a] = 0.0;
                o[b] = 1.0;
                let e = energy(&o)?;
                if e < best.map_or(current - 1e-12, |x| x.2) {
                    best = Some((a, b, e));
                }
            }
        }
        match best {
            Some((a, b, e)) => {
                occ[a] = 0.0;
                occ[b] = 1.0;
                current = e;
                energies.push(e);
                swaps += 1;
            }
            None => break,
        }
    }

    Ok(RoundingReport {
        gamma: assemble(&orbitals, &occ),
        energies,
        flat_steps,
        swaps,
    })
}
