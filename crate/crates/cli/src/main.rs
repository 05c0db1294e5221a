use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use norlund_cli::{budget_from_env, CliError, Outcome, RunConfig, DENOM_BITS_ENV};

#[derive(Parser)]
#[command(name = "norlund", version, about = "Nörlund summation: transforms, comparisons and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a method to a sequence and report the limit verdict.
    Transform {
        /// Method spec file, or inline spec such as "family=cesaro".
        #[arg(long)]
        method: String,
        /// Registry name (see `families`) or a file of values.
        #[arg(long)]
        series: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Comparison tables and inclusion verdicts for a pair of methods.
    Compare {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Finiteness, regularity, triviality and brackets over a parameter grid.
    Sweep {
        #[arg(long)]
        family: String,
        /// Parameter to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Parameters held fixed, as KEY=VALUE.
        #[arg(long = "set", value_parser = parse_key_value)]
        fixed: Vec<(String, String)>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// List the method families and built-in series.
    Families,
}

#[derive(Args)]
struct RunArgs {
    /// Transform horizon M.
    #[arg(long, default_value_t = norlund_core::transform::DEFAULT_HORIZON)]
    horizon: usize,
    /// Comparison horizon N.
    #[arg(long, default_value_t = norlund_core::comparison::DEFAULT_CMP_HORIZON)]
    cmp_horizon: usize,
    #[arg(long, default_value_t = norlund_core::transform::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = norlund_core::transform::DEFAULT_WINDOW)]
    window: usize,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, found `{s}`"))
}

fn config(run: RunArgs) -> Result<RunConfig, CliError> {
    let env = std::env::var(DENOM_BITS_ENV).ok();
    Ok(RunConfig {
        horizon: run.horizon,
        cmp_horizon: run.cmp_horizon,
        epsilon: run.epsilon,
        window: run.window,
        out: run.out,
        seed: run.seed,
        budget: budget_from_env(env.as_deref())?,
    })
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Transform { method, series, run } => {
            let cfg = config(run)?;
            let (csv, outcome) = norlund_cli::cmd_transform(&method, &series, &cfg)?;
            emit(&csv, cfg.out.as_ref())?;
            Ok(outcome)
        }
        Command::Compare { p, q, run } => {
            let cfg = config(run)?;
            emit(&norlund_cli::cmd_compare(&p, &q, &cfg)?, cfg.out.as_ref())?;
            Ok(Outcome::Done)
        }
        Command::Sweep {
            family,
            param,
            values,
            fixed,
            run,
        } => {
            let cfg = config(run)?;
            let csv = norlund_cli::cmd_sweep(&family, &param, &values, &fixed, &cfg)?;
            emit(&csv, cfg.out.as_ref())?;
            Ok(Outcome::Done)
        }
        Command::Families => {
            emit(&norlund_cli::families_listing(), None)?;
            Ok(Outcome::Done)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("norlund: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
