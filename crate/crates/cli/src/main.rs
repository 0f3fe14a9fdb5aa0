use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use strata::experiments::{self, ExperimentConfig, RunOptions, Suite};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    GroupCheck,
    Kernel,
    LpBuild,
    Besov,
    Equivalence,
    CwtEquivalence,
    Decay,
}

impl From<Command> for Suite {
    fn from(c: Command) -> Self {
        match c {
            Command::GroupCheck => Suite::GroupCheck,
            Command::Kernel => Suite::Kernel,
            Command::LpBuild => Suite::LpBuild,
            Command::Besov => Suite::Besov,
            Command::Equivalence => Suite::Equivalence,
            Command::CwtEquivalence => Suite::CwtEquivalence,
            Command::Decay => Suite::Decay,
        }
    }
}

/// Experiment suites for Littlewood-Paley and wavelet decompositions on stratified groups.
///
/// Exit status: 0 when every check passes, 1 when a check fails or the experiment
/// cannot be carried out, 2 for invalid configuration or input files.
#[derive(Debug, Parser)]
#[command(name = "strata", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Rebuild eigendecompositions instead of reading the cache.
    #[arg(long)]
    no_cache: bool,
    /// Report directory; overrides `output` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn exit_for(e: &strata::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() { EXIT_INVALID } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    let cfg = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| cfg.resolve(o)))
        .unwrap_or_else(|| PathBuf::from("strata-out"));
    let opts = RunOptions {
        no_cache: cli.no_cache,
    };
    let report = match experiments::run(cli.command.into(), &cfg, &opts) {
        Ok(r) => r,
        Err(e) => return exit_for(&e),
    };
    if let Err(e) = report.write(&out) {
        eprintln!("error: cannot write reports to {}: {e}", out.display());
        return ExitCode::from(EXIT_FAIL);
    }
    let summary = report.summary();
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    for c in report.checks.iter().filter(|c| !c.pass) {
        log::warn!("FAIL {}: {} > {} ({})", c.case, c.value, c.bound, c.provenance);
    }
    if summary.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
