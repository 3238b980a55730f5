//! `vqls-poisson <experiment> --config <path> [--set key=value]... --out <dir> --seed <u64>`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vqls_core::harness::{self, ExperimentConfig, ExperimentKind};
use vqls_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "vqls-poisson", version, about = "Variational Poisson-solver experiments")]
struct Cli {
    /// train, sample-fidelity, innerp-error, op-error, cost-variation,
    /// grad-similarity, or `verify` to recheck a finished run directory
    experiment: String,

    /// JSON config file; omitted keys take their defaults
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one key by dotted path, e.g. `--set problem.n=5`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Run directory
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master seed; overrides the config's `seed`
    #[arg(long)]
    seed: Option<u64>,

    /// Print the effective config and exit
    #[arg(long)]
    print_config: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if cli.experiment == "verify" {
        let dir = cli.out.ok_or_else(|| config_error("--out", "verify needs the run directory"))?;
        harness::verify(&dir)?;
        println!("{}: summary matches raw table", dir.display());
        return Ok(());
    }
    let kind: ExperimentKind = cli.experiment.parse()?;
    let mut overrides = vec![format!("experiment={}", kind.name())];
    overrides.extend(cli.set);
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &overrides)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let cfg = cfg.with_master_seed(seed);
    cfg.validate()?;
    if cli.print_config {
        println!("{}", cfg.to_json_pretty());
        return Ok(());
    }
    let out = cli.out.ok_or_else(|| config_error("--out", "an output directory is required"))?;
    let report = harness::run(&cfg, &out)?;
    println!(
        "{}: {} raw rows, {} summary rows in {}",
        kind,
        report.raw.rows.len(),
        report.summary.rows.len(),
        out.display()
    );
    Ok(())
}

fn config_error(path: &str, message: &str) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}
