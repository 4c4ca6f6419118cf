use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plap_cli::commands::check_exponents_args;
use plap_cli::config::{LoadedConfig, OUTPUT_ROOT_ENV};
use plap_cli::{parse_config, resolve_output_dir, run_subcommand, CliError, Command, RunOptions};

#[derive(Parser)]
#[command(name = "plap", version, about = "Numerical laboratory for singular p-Laplacian systems")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` and PLAP_OUTPUT_ROOT.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExponentArgs {
    /// TOML run configuration; alternatively give --p and --n.
    #[arg(long, required_unless_present = "p", conflicts_with_all = ["p", "n"])]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, requires = "n")]
    p: Option<f64>,
    #[arg(long, requires = "p")]
    n: Option<usize>,
    /// Calderón–Zygmund constant.
    #[arg(long = "K", default_value_t = 1.0)]
    k: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Audit a finished `solve-parabolic` output instead of solving again.
    #[arg(long)]
    run_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Report the exponents derived from (p, n, K).
    CheckExponents(ExponentArgs),
    /// Solve the stationary problem.
    SolveStationary(Common),
    /// Run the implicit Euler scheme and record the energy ledger.
    SolveParabolic(Common),
    /// Evaluate the a-priori estimates.
    VerifyEstimates(VerifyArgs),
    /// Observe convergence orders on a refinement ladder.
    ConvergenceStudy(Common),
    /// Check uniformity in mu and the mu -> 0 limit.
    MuSweep(Common),
}

fn load(path: &std::path::Path) -> Result<LoadedConfig, CliError> {
    Ok(parse_config(path)?)
}

fn default_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("plap-out"))
}

fn dispatch(cli: Cli) -> Result<plap_cli::Outcome, CliError> {
    let mut options = RunOptions::default();
    let (command, loaded, output) = match cli.command {
        Sub::CheckExponents(a) => {
            let Some(path) = a.config else {
                let (p, n) = (a.p.expect("clap requires --p"), a.n.expect("clap requires --n"));
                let dir = a.output.unwrap_or_else(|| default_root().join("check-exponents"));
                return check_exponents_args(p, n, a.k, &dir);
            };
            (Command::CheckExponents, load(&path)?, a.output)
        }
        Sub::SolveStationary(c) => (Command::SolveStationary, load(&c.config)?, c.output),
        Sub::SolveParabolic(c) => (Command::SolveParabolic, load(&c.config)?, c.output),
        Sub::VerifyEstimates(v) => {
            options.run_dir = v.run_dir;
            (Command::VerifyEstimates, load(&v.common.config)?, v.common.output)
        }
        Sub::ConvergenceStudy(c) => (Command::ConvergenceStudy, load(&c.config)?, c.output),
        Sub::MuSweep(c) => (Command::MuSweep, load(&c.config)?, c.output),
    };
    let dir = resolve_output_dir(output.as_deref(), &loaded);
    run_subcommand(command, &loaded, &dir, &options)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
