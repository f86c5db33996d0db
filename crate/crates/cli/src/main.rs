mod cli;
mod commands;
mod config;
mod io;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use psfmat::PsfError;

use cli::{Cli, Command};

const THREADS_VAR: &str = "PSF_MATFUNC_THREADS";

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<PsfError>()) {
        Some(e) if !e.is_precondition() => 3,
        _ => 2,
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let n: usize = value
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_VAR} must be a positive integer, got `{value}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run() -> anyhow::Result<()> {
    let argv = config::merge_args(std::env::args().collect())?;
    let matches = Cli::command()
        .mut_subcommands(|c| c.allow_negative_numbers(true))
        .try_get_matches_from(argv)
        .unwrap_or_else(|e| e.exit());
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    init_threads()?;
    match cli.command {
        Command::Plan(a) => commands::plan(a),
        Command::Kernel(a) => commands::kernel(a),
        Command::SimulateFourier(a) => commands::simulate_fourier(a),
        Command::SimulateContour(a) => commands::simulate_contour(a),
        Command::App(a) => commands::app(a),
        Command::Cost(a) => commands::cost(a),
        Command::Sweep(a) => commands::sweep(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        let precondition = anyhow::Error::new(PsfError::invalid("eps", "out of range"));
        assert_eq!(exit_code(&precondition), 2);
        let numerical = anyhow::Error::new(PsfError::EigenNoConvergence { iterations: 10 }).context("simulating");
        assert_eq!(exit_code(&numerical), 3);
        assert_eq!(exit_code(&anyhow::anyhow!("bad config line")), 2);
    }
}
