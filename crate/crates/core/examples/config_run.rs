//! Drive a run from a TOML config, as the command-line tool does.

use gbhf::cli::{solve, OutputFormat, RunConfig};

fn main() -> gbhf::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/configs/hubbard_dimer_hf.toml").into()
    });
    let cfg = RunConfig::load(path.as_ref())?;
    let report = solve(&cfg)?;
    print!("{}", report.render(OutputFormat::CsvTables)?);
    Ok(())
}
