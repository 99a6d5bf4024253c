//! Numerical studies of the linearized inverse problem for admissible
//! polyharmonic operators. Each subcommand runs a set of checks, prints one
//! line per check and writes its tables to the output directory.

mod config;
mod report;
mod studies;

use clap::Parser;
use config::{defaults_help, ExperimentConfig};
use report::{write_report, Format, Provenance, Session};
use std::path::PathBuf;
use std::process::ExitCode;
use studies::{Study, StudyError};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "admissible", version, about)]
struct Cli {
    /// TOML experiment config; defaults apply to every missing key.
    #[arg(long, global = true, value_name = "PATH", long_help = defaults_help())]
    config: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    study: Study,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            return usage("--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return usage(e);
        }
    }
    let cfg = match cli.config.as_deref().map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::load) {
        Ok(c) => c.with_env_override(),
        Err(e) => return usage(e),
    };
    if let Err(e) = cfg.validate().and_then(|_| cli.study.validate(&cfg)) {
        return usage(e);
    }
    if let Err(e) = std::fs::create_dir_all(&cfg.output_dir) {
        eprintln!("error: cannot create {}: {e}", cfg.output_dir.display());
        return ExitCode::from(EXIT_FAIL);
    }

    let mut session = Session::new(cfg.output_dir.clone(), cli.format);
    match cli.study.run(&cfg, &mut session) {
        Ok(()) => {}
        Err(StudyError::Usage(e)) => return usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    }
    let report = match session
        .finish(cli.study.name(), Provenance::of(&cfg))
        .and_then(|r| write_report(&r, &cfg.output_dir).map(|_| r))
    {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    };
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    if report.passed() {
        println!("{}: all {} checks passed", cli.study.name(), report.checks.len());
        ExitCode::SUCCESS
    } else {
        println!("{}: {failed} of {} checks failed", cli.study.name(), report.checks.len());
        ExitCode::from(EXIT_FAIL)
    }
}
