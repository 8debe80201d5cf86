mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact blackjack oracle, model-free trainers, and bet-sizing controls.
#[derive(Debug, Parser)]
#[command(name = "bjbench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct RulesArgs {
    /// Ruleset preset: benchmark, h17, surrender, nodas.
    #[arg(long, conflicts_with = "rules")]
    pub preset: Option<String>,
    /// Ruleset TOML file.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Run configuration TOML file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve every decision cell and write the solution, charts and summary.
    Solve {
        #[command(flatten)]
        rules: RulesArgs,
        #[arg(long, default_value = "out/solve")]
        out: PathBuf,
    },
    /// Train one optimizer and score it against the oracle.
    Train {
        #[arg(value_enum)]
        method: MethodArg,
        #[command(flatten)]
        rules: RulesArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Total simulated hands, overriding the method default.
        #[arg(long)]
        budget: Option<u64>,
        /// Write a logit checkpoint every this many hands.
        #[arg(long)]
        checkpoint_every: Option<u64>,
        /// Output directory; defaults to runs/<method>-seed<seed>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bet-sizing controls under the oracle policy.
    Bet {
        #[arg(value_enum)]
        mode: BetMode,
        #[command(flatten)]
        rules: RulesArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Bankroll strategy: min, mid, max, proportional, or all.
        #[arg(long, default_value = "all")]
        strategy: String,
        /// Custom fixed wager for bankroll runs.
        #[arg(long, conflicts_with = "fraction")]
        fixed: Option<f64>,
        /// Custom bankroll fraction for bankroll runs.
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        hands: Option<u64>,
        #[arg(long, default_value = "out/bet")]
        out: PathBuf,
    },
    /// Merge completed training runs into one comparison table.
    Report {
        /// Directory holding run subdirectories.
        #[arg(long, default_value = "runs")]
        runs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regret heatmaps for a policy dump, or for the oracle itself.
    Heatmaps {
        #[arg(long)]
        policy: Option<PathBuf>,
        #[command(flatten)]
        rules: RulesArgs,
        #[arg(long, default_value = "out/heatmaps")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Pg,
    Spsa,
    Cem,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BetMode {
    Sweep,
    Bankroll,
    Monotonicity,
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<bjbench::Error>() {
        Some(bjbench::Error::Config(_) | bjbench::Error::InvalidArgument(_)) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { rules, out } => commands::solve(&rules, &out),
        Command::Train { method, rules, seed, budget, checkpoint_every, out } => {
            commands::train(method, &rules, seed, budget, checkpoint_every, out)
        }
        Command::Bet { mode, rules, seed, strategy, fixed, fraction, trials, hands, out } => {
            commands::bet(mode, &rules, seed, &strategy, fixed, fraction, trials, hands, &out)
        }
        Command::Report { runs, out } => commands::report(&runs, out),
        Command::Heatmaps { policy, rules, out } => commands::heatmaps(policy.as_deref(), &rules, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
