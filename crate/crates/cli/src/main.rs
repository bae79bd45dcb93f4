use std::process::ExitCode;

use clap::Parser;
use pnp_steric_cli::args::Cli;
use pnp_steric_cli::output::emit;
use pnp_steric_cli::{run, CliError};

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let config = cli.command.config()?;
    let report = run(&config)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let out_dir = cli.command.common().out_dir.clone();
    emit(&report, out_dir.as_deref(), &mut std::io::stdout().lock())?;
    Ok(report.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
