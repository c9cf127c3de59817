use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pinnbc_cli::{execute, load_config, Outcome, Overrides};

#[derive(Debug, Parser)]
#[command(name = "pinnbc", version, about = "Train PINNs on the bar and beam problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one case, or all four with --suite, and write result files.
    Run(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// TOML config file; flags below override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run all four cases and write summary.csv.
    #[arg(long, conflicts_with_all = ["problem", "strategy"])]
    suite: bool,
    /// bar | beam
    #[arg(long)]
    problem: Option<String>,
    /// penalty | reparam | hybrid
    #[arg(long)]
    strategy: Option<String>,
    /// Adam steps to take.
    #[arg(long)]
    epochs: Option<usize>,
    /// Seed for the weight initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Interior grid nodes, endpoints included.
    #[arg(long)]
    nodes: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let overrides = Overrides {
        suite: args.suite,
        problem: args.problem,
        strategy: args.strategy,
        epochs: args.epochs,
        seed: args.seed,
        nodes: args.nodes,
        out: args.out,
    };
    let result = load_config(args.config.as_deref(), &overrides).and_then(|config| {
        let outcome = execute(&config)?;
        Ok((config, outcome))
    });
    match result {
        Ok((config, outcome)) => {
            match outcome {
                Outcome::Single(report) => {
                    println!("{}: percent error {:.4}%", report.case.label(), report.percent_error);
                }
                Outcome::Suite(suite) => {
                    for (case, run) in &suite.runs {
                        if let Ok(r) = run {
                            println!("{}: percent error {:.4}%", case.label(), r.percent_error);
                        }
                    }
                }
            }
            println!("results written to {}", config.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
