//! Config-driven runs: TOML in, key-ordered JSON (or CSV tables) out.

mod config;
mod report;
mod run;

pub use config::{
    ChecksConfig, CustomModel, InlineGpdm, ModelConfig, OutputConfig, OutputFormat,
    RestrictedConfig, RestrictedMeanField, RunConfig, SolverConfig, SolverKind, SweepConfig,
    TensorEntry, SCHEMA_VERSION,
};
pub use report::{
    sha256_hex, CheckResult, CheckStatus, OracleTable, RunReport, SectorRow, SweepRow, SweepTable,
};
pub use run::{
    bisect_mu, check, execute, exit_code, oracle, run, solve, sweep, Command, Invocation,
    ORACLE_MODES,
};
