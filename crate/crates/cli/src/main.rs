use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cqnls_cli::config::ExperimentConfig;
use cqnls_cli::{run, Overrides};

#[derive(Debug, Parser)]
#[command(name = "cqnls", version, about = "Radial cubic-quintic NLS experiments")]
struct Args {
    /// Experiment name; overrides `experiment` in the config.
    experiment: Option<String>,

    /// TOML or JSON config. Defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,

    #[arg(short, long)]
    workers: Option<usize>,

    /// List registered experiments and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for name in cqnls_cli::experiments::experiment_registry().names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    };
    let ov = Overrides { experiment: args.experiment, out: args.out, workers: args.workers };
    match cfg.and_then(|c| run(c, &ov)) {
        Ok(o) => {
            eprintln!(
                "{}: {} checks, {} failed, artifacts in {}",
                o.manifest.experiment,
                o.report.checks.len(),
                o.report.failures(),
                o.out_dir.display()
            );
            ExitCode::from(o.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
