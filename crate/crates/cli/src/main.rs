use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod render;

use commands::Failure;
use platonic::num::Arithmetic;

#[derive(Parser, Debug)]
#[command(
    name = "platonic",
    version,
    about = "Arbitrage, martingale measures and super-replication on finite scenario files"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Exact rational arithmetic (default for up to 64 outcomes).
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Floating-point solves, certified against --tol.
    #[arg(long, global = true)]
    float: bool,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print the report as JSON (default).
    #[arg(long, global = true, conflicts_with = "table")]
    json: bool,
    /// Print the report as aligned text.
    #[arg(long, global = true)]
    table: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
}

impl Global {
    pub fn arithmetic(&self, outcomes: usize) -> Arithmetic {
        if self.float {
            Arithmetic::Float { tol: self.tol }
        } else if self.exact {
            Arithmetic::Exact
        } else {
            match Arithmetic::default_for(outcomes) {
                Arithmetic::Float { .. } => Arithmetic::Float { tol: self.tol },
                exact => exact,
            }
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scenario against the model rules.
    Validate { scenario: PathBuf },
    /// Arbitrage certificate or full-support (super)martingale measure.
    Ftap {
        scenario: PathBuf,
        #[arg(long)]
        long_only: bool,
    },
    /// Optional projections of prices onto an admissible set's filtration.
    Project {
        scenario: PathBuf,
        /// Comma-separated asset names of the admissible set.
        #[arg(long)]
        set: String,
        /// `search`, or the path of an earlier `ftap` report.
        #[arg(long, default_value = "search")]
        measure: String,
        #[arg(long)]
        long_only: bool,
    },
    /// Cheapest super-hedge of a claim and the dual measure.
    Superhedge {
        scenario: PathBuf,
        #[arg(long)]
        claim: String,
        #[arg(long)]
        long_only: bool,
    },
    /// Arbitrage-free price interval of a claim.
    Interval {
        scenario: PathBuf,
        #[arg(long)]
        claim: String,
        /// Accuracy of the mixing witness for an unattained bound.
        #[arg(long, default_value = "1/100")]
        eta: String,
    },
    /// Primal, dual and vertex values for every claim (or the named ones).
    CheckDuality {
        scenario: PathBuf,
        #[arg(long)]
        claim: Vec<String>,
        #[arg(long)]
        long_only: bool,
    },
    /// Builder sections.
    #[command(subcommand)]
    Bayes(BayesCommand),
    /// Generated experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Subcommand, Debug)]
enum BayesCommand {
    /// Apply the builder sections and write the flat scenario.
    Build {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum ExperimentCommand {
    /// Free-lunch truncations for n = 1..=max-n.
    FreeLunch {
        #[arg(long)]
        max_n: usize,
        /// Write the largest truncation as a scenario file.
        #[arg(long, value_name = "FILE")]
        scenario_out: Option<PathBuf>,
    },
    /// Exclusivity of the two certificates on seeded random markets.
    FtapSuite {
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Validate { scenario } => commands::validate(g, scenario),
        Command::Ftap { scenario, long_only } => commands::ftap(g, scenario, *long_only),
        Command::Project {
            scenario,
            set,
            measure,
            long_only,
        } => commands::project(g, scenario, set, measure, *long_only),
        Command::Superhedge {
            scenario,
            claim,
            long_only,
        } => commands::superhedge(g, scenario, claim, *long_only),
        Command::Interval { scenario, claim, eta } => commands::interval(g, scenario, claim, eta),
        Command::CheckDuality {
            scenario,
            claim,
            long_only,
        } => commands::check_duality(g, scenario, claim, *long_only),
        Command::Bayes(BayesCommand::Build { scenario, out }) => commands::bayes_build(g, scenario, out),
        Command::Experiment(ExperimentCommand::FreeLunch { max_n, scenario_out }) => {
            commands::free_lunch(g, *max_n, scenario_out.as_deref())
        }
        Command::Experiment(ExperimentCommand::FtapSuite { count }) => commands::ftap_suite(g, *count),
    };
    match result {
        Ok(outcome) => {
            let text = if g.table {
                render::table(&outcome.report)
            } else {
                render::json(&outcome.report)
            };
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{text}");
            if let Some(path) = &g.report {
                if let Err(e) = std::fs::write(path, render::json(&outcome.report)) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(outcome.code)
        }
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
