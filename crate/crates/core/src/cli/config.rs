use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bhf::{BhfOptions, TemperatureSchedule};
use crate::error::{Error, Result};
use crate::hf::ScfOptions;
use crate::linalg::{CMat, C64};
use crate::model::{ModeLabels, Model};
use crate::models::{build_bcs, build_hubbard, BcsOptions, BcsSpec, HubbardSpec, SymmetryFlags};
use crate::tensor::TwoBodyTensor;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Required whenever a stochastic option is active; overrides the seeds
    /// inside the solver sections.
    #[serde(default)]
    pub seed: Option<u64>,
    pub model: ModelConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Hubbard(HubbardSpec),
    Bcs(BcsSpec),
    Custom(CustomModel),
}

/// A model given inline: `h` as real and imaginary row lists, `V` as a
/// list of entries that must already satisfy the tensor symmetries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub modes: usize,
    pub h: Vec<Vec<f64>>,
    #[serde(default)]
    pub h_imag: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub v: Vec<TensorEntry>,
    #[serde(default)]
    pub mu: f64,
    /// Attach `(site, spin)` labels with this many sites (`modes = 2·sites`).
    #[serde(default)]
    pub sites: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Hf,
    Bhf,
    Bcs,
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestrictedMeanField {
    #[default]
    Hf,
    Bhf,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RestrictedConfig {
    pub mean_field: RestrictedMeanField,
    pub symmetries: SymmetryFlags,
    /// Classification threshold; defaults to `1e−6·max(1, |E|)`.
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Particle number for HF; Hubbard defaults to half filling.
    #[serde(default)]
    pub particles: Option<usize>,
    /// For BHF: bisect `μ` until `⟨N̂⟩` hits this value.
    #[serde(default)]
    pub target_particles: Option<f64>,
    #[serde(default)]
    pub scf: ScfOptions,
    #[serde(default)]
    pub schedule: TemperatureSchedule,
    #[serde(default)]
    pub bhf: BhfOptions,
    #[serde(default)]
    pub bcs: BcsOptions,
    #[serde(default)]
    pub restricted: RestrictedConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    /// Exact Fock-space energies alongside the mean-field ones.
    pub oracle: bool,
    pub car: bool,
    pub wick: bool,
    pub gpq: bool,
    pub relaxation: bool,
    pub pressure: bool,
    /// Random projections per correlation-inequality check.
    pub projections: usize,
    /// A 1-gpdm to validate as given.
    pub gpdm: Option<InlineGpdm>,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            oracle: false,
            car: false,
            wick: false,
            gpq: false,
            relaxation: false,
            pressure: false,
            projections: 10,
            gpdm: None,
        }
    }
}

impl ChecksConfig {
    pub fn any_suite(&self) -> bool {
        self.car || self.wick || self.gpq || self.relaxation || self.pressure
    }
}

/// Real `γ` and `α` row lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineGpdm {
    pub gamma: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    CsvTables,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted path to a numeric leaf, e.g. `model.coupling`.
    pub parameter: String,
    pub values: Vec<f64>,
}

fn real_matrix(rows: &[Vec<f64>], n: usize, what: &str) -> Result<CMat> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config(format!("{what} must be {n}x{n}")));
    }
    Ok(CMat::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
}

impl InlineGpdm {
    pub fn blocks(&self) -> Result<(CMat, CMat)> {
        let m = self.gamma.len();
        Ok((
            real_matrix(&self.gamma, m, "checks.gpdm.gamma")?,
            real_matrix(&self.alpha, m, "checks.gpdm.alpha")?,
        ))
    }
}

impl CustomModel {
    pub fn build(&self) -> Result<Model> {
        let m = self.modes;
        let mut h = real_matrix(&self.h, m, "model.h")?;
        if let Some(im) = &self.h_imag {
            let im = real_matrix(im, m, "model.h_imag")?;
            h += im * C64::new(0.0, 1.0);
        }
        let mut v = TwoBodyTensor::zeros(m);
        for e in &self.v {
            if [e.i, e.j, e.k, e.l].iter().any(|&x| x >= m) {
                return Err(Error::Config(format!(
                    "model.v entry ({}, {}, {}, {}) out of range for {m} modes",
                    e.i, e.j, e.k, e.l
                )));
            }
            v.add(e.i, e.j, e.k, e.l, C64::new(e.re, e.im));
        }
        let model = Model::new(h, v, self.mu)?;
        match self.sites {
            Some(s) => model.with_labels(ModeLabels::new(s, vec![1; s])),
            None => Ok(model),
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<Model> {
        match self {
            ModelConfig::Hubbard(spec) => build_hubbard(spec),
            ModelConfig::Bcs(spec) => build_bcs(spec)?.to_model(),
            ModelConfig::Custom(c) => c.build(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Hubbard(_) => "hubbard",
            ModelConfig::Bcs(_) => "bcs",
            ModelConfig::Custom(_) => "custom",
        }
    }

    pub fn default_particles(&self) -> Option<usize> {
        match self {
            ModelConfig::Hubbard(spec) => Some(spec.sites()),
            _ => None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Names of the active options that draw random numbers.
    pub fn stochastic_options(&self) -> Vec<&'static str> {
        let s = &self.solver;
        let mut out = Vec::new();
        let uses_scf =
            matches!(s.kind, SolverKind::Hf | SolverKind::Restricted) || self.checks.relaxation;
        if uses_scf && s.scf.restarts > 1 {
            out.push("solver.scf.restarts");
        }
        let uses_bhf = s.kind == SolverKind::Bhf
            || (s.kind == SolverKind::Restricted
                && s.restricted.mean_field == RestrictedMeanField::Bhf);
        if uses_bhf && (s.bhf.restarts > 1 || s.bhf.pairing_seed > 0.0) {
            out.push("solver.bhf");
        }
        if self.checks.gpq {
            out.push("checks.gpq");
        }
        if self.checks.pressure {
            out.push("checks.pressure");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.seed.is_none() {
            let stochastic = self.stochastic_options();
            if !stochastic.is_empty() {
                return Err(Error::Config(format!(
                    "seed is required because these options are stochastic: {}",
                    stochastic.join(", ")
                )));
            }
        }
        if self.solver.kind == SolverKind::Bcs && !matches!(self.model, ModelConfig::Bcs(_)) {
            return Err(Error::Config(
                "solver.kind = \"bcs\" needs model.kind = \"bcs\"".into(),
            ));
        }
        if self.solver.target_particles.is_some() && self.solver.kind != SolverKind::Bhf {
            return Err(Error::Config(
                "solver.target_particles applies to the bhf solver only".into(),
            ));
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(Error::Config("sweep.values is empty".into()));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        self
    }

    pub fn scf_options(&self) -> ScfOptions {
        ScfOptions {
            seed: self.seed.unwrap_or(0),
            ..self.solver.scf.clone()
        }
    }

    pub fn bhf_options(&self) -> BhfOptions {
        BhfOptions {
            seed: self.seed.unwrap_or(0),
            ..self.solver.bhf.clone()
        }
    }

    pub fn particles(&self) -> Option<usize> {
        self.solver
            .particles
            .or_else(|| self.model.default_particles())
    }

    /// Copy with the numeric leaf at the dotted `path` set to `value`.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Self> {
        let mut tree = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        let mut node = &mut tree;
        for part in path.split('.') {
            node = match node {
                serde_json::Value::Object(map) => map.get_mut(part).ok_or_else(|| {
                    Error::Config(format!("sweep parameter {path}: no field {part}"))
                })?,
                serde_json::Value::Array(items) => {
                    let idx: usize = part.parse().map_err(|_| {
                        Error::Config(format!("sweep parameter {path}: {part} is not an index"))
                    })?;
                    items.get_mut(idx).ok_or_else(|| {
                        Error::Config(format!("sweep parameter {path}: index {idx} out of range"))
                    })?
                }
                _ => {
                    return Err(Error::Config(format!(
                        "sweep parameter {path}: {part} is below a leaf"
                    )))
                }
            };
        }
        *node = match node {
            serde_json::Value::Number(n) if n.is_u64() || n.is_i64() => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::Config(format!(
                        "sweep parameter {path} is an integer, got {value}"
                    )));
                }
                serde_json::Value::from(value as u64)
            }
            serde_json::Value::Number(_) => serde_json::Value::from(value),
            other => {
                return Err(Error::Config(format!(
                    "sweep parameter {path} is not numeric (found {other})"
                )))
            }
        };
        let cfg: RunConfig =
            serde_json::from_value(tree).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
