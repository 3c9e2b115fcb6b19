use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crescent_cli::config::{self, Task};
use crescent_cli::CliError;

/// Environment variable holding the worker count for grid parallelism.
const THREADS_VAR: &str = "CRESCENT_THREADS";

/// Conditional crescent-state preparation: data tables and summaries.
#[derive(Debug, Parser)]
#[command(name = "crescent", version)]
struct Args {
    /// photon-stats, wigner, fidelity, ensemble or scan. Defaults to the
    /// config's `task` key.
    task: Option<String>,
    /// Flat `key = value` config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_VAR} must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size worker pool: {e}")))
}

fn run(args: Args) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = config::load(args.config.as_deref(), &args.set)?;
    let task = match (&args.task, cfg.task) {
        (Some(t), _) => t.parse::<Task>().map_err(CliError::Config)?,
        (None, Some(t)) => t,
        (None, None) => {
            return Err(CliError::Config(
                "no task given on the command line or in `task`".into(),
            ))
        }
    };
    for path in crescent_cli::run(task, &cfg, &args.out)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crescent: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
