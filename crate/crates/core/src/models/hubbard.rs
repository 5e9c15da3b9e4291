use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::model::{ModeLabels, Model, Spin};
use crate::tensor::TwoBodyTensor;

/// Periodic nearest-neighbour Hubbard model on `L` or `L × L` sites with
/// on-site coupling `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubbardSpec {
    pub dimension: usize,
    pub length: usize,
    pub coupling: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "one")]
    pub hopping: f64,
}

fn one() -> f64 {
    1.0
}

impl HubbardSpec {
    pub fn chain(length: usize, coupling: f64) -> Self {
        Self {
            dimension: 1,
            length,
            coupling,
            mu: 0.0,
            hopping: 1.0,
        }
    }

    pub fn square(length: usize, coupling: f64) -> Self {
        Self {
            dimension: 2,
            ..Self::chain(length, coupling)
        }
    }

    pub fn sites(&self) -> usize {
        self.length.pow(self.dimension as u32)
    }

    /// Site coordinates, `x = x₀ + L·x₁`.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut s = site;
        (0..self.dimension)
            .map(|_| {
                let x = s % self.length;
                s /= self.length;
                x
            })
            .collect()
    }

    pub fn site_index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .rev()
            .fold(0, |acc, &x| acc * self.length + x % self.length)
    }

    /// Undirected nearest-neighbour bonds of the periodic lattice; a
    /// length-2 direction contributes a single bond.
    pub fn bonds(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for x in 0..self.sites() {
            let cx = self.coords(x);
            for d in 0..self.dimension {
                let mut cy = cx.clone();
                cy[d] = (cy[d] + 1) % self.length;
                let y = self.site_index(&cy);
                if x != y {
                    out.insert((x.min(y), x.max(y)));
                }
            }
        }
        out
    }

    pub fn labels(&self) -> ModeLabels {
        let parity = (0..self.sites())
            .map(|x| {
                if self.coords(x).iter().sum::<usize>() % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        ModeLabels::new(self.sites(), parity)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::Domain(format!(
                "Hubbard dimension must be 1 or 2, got {}",
                self.dimension
            )));
        }
        if self.length < 2 {
            return Err(Error::Domain("Hubbard length must be at least 2".into()));
        }
        Ok(())
    }
}

/// `h = t ⊗ 1` with `t(x, y) = −hopping` on bonds; `V` puts `λ` on
/// opposite-spin pairs at the same site, i.e. `½V̂ = λ Σ_x n_{x↑} n_{x↓}`.
pub fn build_hubbard(spec: &HubbardSpec) -> Result<Model> {
    spec.validate()?;
    let sites = spec.sites();
    let m = 2 * sites;
    let mut h = CMat::zeros(m, m);
    for (x, y) in spec.bonds() {
        for s in [Spin::Up, Spin::Down] {
            let (a, b) = (ModeLabels::mode(x, s), ModeLabels::mode(y, s));
            h[(a, b)] = c(-spec.hopping);
            h[(b, a)] = c(-spec.hopping);
        }
    }
    let mut v = TwoBodyTensor::zeros(m);
    if spec.coupling != 0.0 {
        for x in 0..sites {
            let up = ModeLabels::mode(x, Spin::Up);
            let dn = ModeLabels::mode(x, Spin::Down);
            v.add(up, dn, up, dn, c(spec.coupling));
            v.add(dn, up, dn, up, c(spec.coupling));
        }
    }
    Model::new(h, v, spec.mu)?.with_labels(spec.labels())
}
