//! Front end for the `pseudospec` library: configuration, presets, dispatch
//! and reproducible result files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod params;
pub mod presets;

use std::path::Path;
use std::time::Instant;

pub use config::{Command, RunConfig};
pub use error::{CliError, CliResult};
pub use output::RunManifest;

/// Runs a configuration and writes `result.csv`, `result.json` and
/// `manifest.json` into `config.output_path`.
pub fn run(config: &RunConfig) -> CliResult<RunManifest> {
    let budget = commands::budget_from_env()?;
    let start = Instant::now();
    let outcome = commands::execute(config, budget)?;
    let elapsed = start.elapsed().as_secs_f64();

    let dir = Path::new(&config.output_path);
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    output::write_atomic(dir, output::RESULT_CSV, outcome.csv.as_str().as_bytes())?;
    output::write_atomic(dir, output::RESULT_JSON, &output::to_pretty_json(&outcome.json)?)?;
    let manifest = RunManifest {
        tool: "pseudospec".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        wall_clock_seconds: elapsed,
        tolerances: outcome.tolerances,
        files: vec![output::RESULT_CSV.into(), output::RESULT_JSON.into()],
    };
    output::write_atomic(dir, output::MANIFEST_JSON, &output::to_pretty_json(&manifest)?)?;
    Ok(manifest)
}
