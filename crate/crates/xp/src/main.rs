use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use yule_bins::config::THREADS_ENV;
use yule_bins::{catalog, self_test, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "yule-bins", version, about = "Verification experiments for the Yule bins-and-balls model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set replications=500`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List the experiment catalog.
    ListExperiments,
    /// Check the statistical machinery.
    SelfTest,
}

fn run(config: PathBuf, set: Vec<String>) -> Result<i32, RunError> {
    let cfg = ExperimentConfig::from_file(&config, &set)?;
    let env = std::env::var(THREADS_ENV).ok();
    let threads = cfg.resolved_threads(env.as_deref())?;
    let report = yule_bins::run(&cfg, threads)?;
    for c in &report.criteria {
        println!(
            "{} {} measured={} reference={} tolerance={}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.measured,
            c.reference,
            c.tolerance
        );
    }
    if report.truncated {
        eprintln!("warning: a simulated window ran past the sampled bins");
    }
    println!("outputs written to {}", cfg.output_dir.display());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, set } => run(config, set).unwrap_or_else(|e| {
            eprintln!("error: {e}");
            e.exit_code()
        }),
        Command::ListExperiments => {
            for e in catalog::catalog() {
                println!("{:<22} {}", e.id.as_str(), e.summary);
                println!("{:<22} [{}]", "", e.anchor);
                println!("{:<22} {}", "", e.defaults_text());
            }
            0
        }
        Command::SelfTest => {
            let checks = self_test::run_self_test();
            for c in &checks {
                println!("{} {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            i32::from(!checks.iter().all(|c| c.pass))
        }
    };
    ExitCode::from(code as u8)
}
