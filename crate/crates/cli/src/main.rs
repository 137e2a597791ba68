use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pseudospec_cli::{presets, CliError, CliResult, Command, RunConfig};

/// Spectra of flat tori and AdS³ quotients, Cartan projections and sharpness.
///
/// COMMAND is one of the analysis commands, `preset NAME` to run a named
/// scenario, or `presets` to list them.
#[derive(Parser, Debug)]
#[command(name = "pseudospec", version)]
struct Cli {
    command: String,
    /// Preset name (only with `preset`).
    name: Option<String>,
    /// Flat JSON parameter file, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter override, repeatable; the value is parsed as JSON if possible.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut config = match (cli.command.as_str(), &cli.name) {
        ("preset", Some(name)) => presets::preset(name)?,
        ("preset", None) => {
            return Err(CliError::Usage(format!(
                "`preset` needs a name:\n{}",
                presets::listing()
            )))
        }
        (_, Some(extra)) => return Err(CliError::Usage(format!("unexpected argument `{extra}`"))),
        (cmd, None) => RunConfig::new(cmd.parse::<Command>()?),
    };
    if let Some(path) = &cli.config {
        config.merge_file(path)?;
    }
    for assignment in &cli.set {
        config.apply_assignment(assignment)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_path = out.to_string_lossy().into_owned();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.command == "presets" {
        print!("{}", presets::listing());
        return ExitCode::SUCCESS;
    }
    let result = build_config(&cli).and_then(|config| pseudospec_cli::run(&config).map(|m| (config, m)));
    match result {
        Ok((config, manifest)) => {
            println!(
                "{}: wrote {} ({:.3} s)",
                config.command, config.output_path, manifest.wall_clock_seconds
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
