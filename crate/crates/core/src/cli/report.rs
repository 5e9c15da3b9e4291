use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{OutputFormat, RunConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported for information; never fails the run.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Info => "info",
        }
    }
}

impl CheckResult {
    pub fn bound(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            status: if residual <= tol {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            residual,
            note: None,
        }
    }

    pub fn info(name: impl Into<String>, residual: f64, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Info,
            residual,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub energies: BTreeMap<String, f64>,
    pub order_parameters: BTreeMap<String, f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorRow {
    pub particles: usize,
    pub energy: f64,
    pub degeneracy: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleTable {
    pub modes: usize,
    pub sectors: Vec<SectorRow>,
    pub ground_energy: f64,
    pub ground_particles: usize,
}

/// Everything a command produces. Maps are ordered and no timings are
/// recorded, so the serialized bytes depend only on config and seed.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub model: BTreeMap<String, serde_json::Value>,
    pub energies: BTreeMap<String, f64>,
    pub breakdowns: BTreeMap<String, serde_json::Value>,
    pub order_parameters: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleTable>,
    pub converged: bool,
    pub warnings: Vec<String>,
    /// SHA-256 of this report serialized with an empty `content_hash`.
    pub content_hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Config(format!("serialization failed: {e}"))
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig) -> Result<Self> {
        let canonical = serde_json::to_vec(config).map_err(json_err)?;
        Ok(Self {
            schema_version: super::config::SCHEMA_VERSION,
            command: command.into(),
            config: config.clone(),
            config_hash: sha256_hex(&canonical),
            model: BTreeMap::new(),
            energies: BTreeMap::new(),
            breakdowns: BTreeMap::new(),
            order_parameters: BTreeMap::new(),
            checks: Vec::new(),
            sweep: None,
            oracle: None,
            converged: true,
            warnings: Vec::new(),
            content_hash: String::new(),
        })
    }

    pub fn breakdown(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.breakdowns
            .insert(key.into(), serde_json::to_value(value).map_err(json_err)?);
        Ok(())
    }

    pub fn failed_checks(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .count()
    }

    /// Fill in `content_hash`.
    pub fn seal(mut self) -> Result<Self> {
        self.content_hash.clear();
        let bytes = serde_json::to_vec(&self).map_err(json_err)?;
        self.content_hash = sha256_hex(&bytes);
        Ok(self)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(json_err)?;
                s.push('\n');
                Ok(s)
            }
            OutputFormat::CsvTables => Ok(self.csv_tables()),
        }
    }

    fn csv_tables(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# run\nkey,value");
        let _ = writeln!(out, "command,{}", self.command);
        let _ = writeln!(out, "config_hash,{}", self.config_hash);
        let _ = writeln!(out, "content_hash,{}", self.content_hash);
        let _ = writeln!(out, "converged,{}", self.converged);
        let _ = writeln!(out, "\n# energies\nquantity,value");
        for (k, v) in &self.energies {
            let _ = writeln!(out, "{k},{v}");
        }
        let _ = writeln!(out, "\n# order_parameters\nquantity,value");
        for (k, v) in &self.order_parameters {
            let _ = writeln!(out, "{k},{v}");
        }
        let _ = writeln!(out, "\n# checks\nname,status,residual");
        for c in &self.checks {
            let _ = writeln!(out, "{},{},{}", c.name, c.status.as_str(), c.residual);
        }
        if let Some(sweep) = &self.sweep {
            let energy_keys: std::collections::BTreeSet<&String> =
                sweep.rows.iter().flat_map(|r| r.energies.keys()).collect();
            let order_keys: std::collections::BTreeSet<&String> = sweep
                .rows
                .iter()
                .flat_map(|r| r.order_parameters.keys())
                .collect();
            let mut header = vec![sweep.parameter.clone()];
            header.extend(energy_keys.iter().map(|k| format!("energy.{k}")));
            header.extend(order_keys.iter().map(|k| format!("order.{k}")));
            header.push("converged".into());
            let _ = writeln!(out, "\n# sweep\n{}", header.join(","));
            for row in &sweep.rows {
                let mut cells = vec![row.value.to_string()];
                let cell = |m: &BTreeMap<String, f64>, k: &String| {
                    m.get(k).map(|v| v.to_string()).unwrap_or_default()
                };
                cells.extend(energy_keys.iter().map(|k| cell(&row.energies, k)));
                cells.extend(order_keys.iter().map(|k| cell(&row.order_parameters, k)));
                cells.push(row.converged.to_string());
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        if let Some(table) = &self.oracle {
            let _ = writeln!(out, "\n# oracle\nparticles,energy,degeneracy");
            for r in &table.sectors {
                let _ = writeln!(out, "{},{},{}", r.particles, r.energy, r.degeneracy);
            }
        }
        out
    }
}
