use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Run one experiment described by a key=value config file.
///
/// Exit codes: 0 = criterion passed, 2 = criterion failed, 1 = error.
#[derive(Parser)]
#[command(name = "barron", disable_help_flag = false)]
struct Cli {
    /// Path to the key=value experiment config.
    config: PathBuf,
    /// Output directory for CSV and summary artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Size of the worker pool (defaults to the number of cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep exit code 2 reserved for scientific-criterion failures
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error: failed to size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match barron_cli::run(&cli.config, &cli.out, cli.seed) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
