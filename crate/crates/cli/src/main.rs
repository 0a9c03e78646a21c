mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use mather_core::Error as CoreError;

use args::Cli;
use commands::UsageError;
use config::{split_tolerance_flags, Overrides, RunConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_REFUSAL: u8 = 3;

/// Refusals and failed constructions exit with 3; every other core error,
/// usage problems and I/O exit with 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return if e.is_refusal() || matches!(e, CoreError::Construction(_)) { EXIT_REFUSAL } else { EXIT_USAGE };
        }
    }
    EXIT_USAGE
}

fn init_workers() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var("MATHER_WORKERS") {
        let n: usize = raw
            .parse()
            .map_err(|_| UsageError(format!("MATHER_WORKERS must be a positive integer, got {raw:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let (args, tol_pairs) = match split_tolerance_flags(std::env::args().collect()) {
        Ok(split) => split,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let g = cli.global;
    let overrides = Overrides {
        k: g.k,
        alpha: g.alpha,
        a: g.a,
        grid_n: g.grid_n,
        seed: g.seed,
        out: g.out,
        tolerances: tol_pairs,
    };
    let result = init_workers()
        .and_then(|()| RunConfig::resolve(g.config.as_deref(), &overrides).map_err(|e| UsageError(format!("{e:#}")).into()))
        .and_then(|mut cfg| {
            println!("run_config: {}", serde_json::to_string(&cfg.echo())?);
            commands::run(cli.command, &mut cfg)
        });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
