mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ivauction", version, about = "Optimal truthful single-item allocation with interdependent values")]
struct Cli {
    /// Add display-only decimal approximations next to exact ratios.
    #[arg(long, global = true)]
    decimal: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Value,
    Cost,
    Det,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FastPath {
    Auto,
    Lp,
    Duo,
    Binary,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Good,
    Chore,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal ratio, witness rule and certificate for one objective.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "value")]
        objective: ObjectiveArg,
        /// Only decide whether a rule within this ratio exists.
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        fast_path: FastPath,
        /// Node budget for the propagation search.
        #[arg(long, default_value_t = ivauction::oracle::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Ratio and truthfulness of a given allocation.
    Verify {
        instance: PathBuf,
        allocation: PathBuf,
        #[arg(long, value_enum, default_value = "value")]
        objective: ObjectiveArg,
    },
    /// Payments implementing a monotone allocation, with exhaustive IC / IR check.
    Payments { instance: PathBuf, allocation: PathBuf },
    /// Instance generators.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Runs every applicable path and the oracle and compares exact ratios.
    Crosscheck {
        instance: PathBuf,
        #[arg(long, default_value_t = ivauction::oracle::DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand)]
pub enum GenKind {
    /// Two-agent, two-signal pair with ratios 11/8, 8/5 and 2.
    Fig5,
    /// Four-agent gadget instance for a 1-in-3 SAT formula.
    Hardness {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, default_value = "2")]
        beta: String,
        /// Defaults to 1/(2 beta).
        #[arg(long)]
        epsilon: Option<String>,
        /// Writes a ratio-1 witness rule when the formula is satisfiable.
        #[arg(long)]
        witness_out: Option<PathBuf>,
        /// Writes the coordinate table.
        #[arg(long)]
        layout_out: Option<PathBuf>,
    },
    /// Adversary family for the query lower bound.
    Query {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// `none`, `first:INDEX` or `second:INDEX`.
        #[arg(long, default_value = "none")]
        plant: String,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        /// Writes the focal profile and plant-set sizes.
        #[arg(long)]
        meta_out: Option<PathBuf>,
    },
    /// Seeded random instance.
    Random {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value = "good")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        tie_prob: f64,
    },
    /// Non-integral vertex of the truthful polytope, as an allocation file.
    Fracvertex {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            instance,
            objective,
            gamma,
            fast_path,
            budget,
        } => commands::solve(&instance, objective, gamma.as_deref(), fast_path, budget, cli.decimal),
        Command::Verify {
            instance,
            allocation,
            objective,
        } => commands::verify(&instance, &allocation, objective, cli.decimal),
        Command::Payments { instance, allocation } => commands::payments(&instance, &allocation),
        Command::Gen { kind } => commands::generate(kind),
        Command::Crosscheck { instance, budget } => commands::crosscheck(&instance, budget, cli.decimal),
    };
    match result {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(detail) = e.stdout() {
                emit(detail);
            }
            ExitCode::from(e.code())
        }
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}
