//! The finite-mode fermion problem shared by every solver: a one-body matrix,
//! a two-body tensor, a chemical potential and optional (site, spin) labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_residual, identity, CMat};
use crate::tensor::TwoBodyTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

/// Mode labels for spin-½ lattice models. Mode `2·site + spin` carries
/// `(site, spin)`; `parity[site]` is the sublattice sign used for staggered
/// order parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLabels {
    pub sites: usize,
    pub parity: Vec<i8>,
}

impl ModeLabels {
    pub fn new(sites: usize, parity: Vec<i8>) -> Self {
        assert_eq!(parity.len(), sites);
        Self { sites, parity }
    }

    pub fn modes(&self) -> usize {
        2 * self.sites
    }

    #[inline]
    pub fn mode(site: usize, spin: Spin) -> usize {
        2 * site + spin.index()
    }

    #[inline]
    pub fn site_of(mode: usize) -> usize {
        mode / 2
    }

    #[inline]
    pub fn spin_of(mode: usize) -> Spin {
        Spin::from_index(mode % 2)
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub h: CMat,
    pub v: TwoBodyTensor,
    pub mu: f64,
    pub labels: Option<ModeLabels>,
}

impl Model {
    pub fn new(h: CMat, v: TwoBodyTensor, mu: f64) -> Result<Self> {
        let m = Self {
            h,
            v,
            mu,
            labels: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_labels(mut self, labels: ModeLabels) -> Result<Self> {
        if labels.modes() != self.modes() {
            return Err(Error::Shape(format!(
                "labels describe {} modes, model has {}",
                labels.modes(),
                self.modes()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.h.nrows()
    }

    /// `h - μ`.
    pub fn h_mu(&self) -> CMat {
        &self.h - identity(self.modes()) * c(self.mu)
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.h.is_square() {
            return Err(Error::Shape(format!(
                "one-body matrix is {}x{}",
                self.h.nrows(),
                self.h.ncols()
            )));
        }
        if self.v.modes() != self.modes() {
            return Err(Error::Shape(format!(
                "one-body matrix has {} modes but the two-body tensor has {}",
                self.modes(),
                self.v.modes()
            )));
        }
        let mut worst = 0.0;
        let mut at = (0, 0);
        for i in 0..self.modes() {
            for j in 0..self.modes() {
                let d = (self.h[(i, j)] - self.h[(j, i)].conj()).norm();
                if d > worst {
                    worst = d;
                    at = (i, j);
                }
            }
        }
        if worst > 1e-10 {
            return Err(Error::Validation(format!(
                "one-body matrix is not Hermitian: worst entry ({}, {}) off by {worst:.3e}",
                at.0, at.1
            )));
        }
        debug_assert!(hermiticity_residual(&self.h) <= 1e-10);
        self.v.validate(1e-10)
    }
}
