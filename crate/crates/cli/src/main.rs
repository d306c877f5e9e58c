//! `xormmap`: generate instances, run the estimators and baselines, export
//! replicated queries.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod bench;
mod error;
mod export;
mod generate;
mod output;
mod run;
mod solve;

/// Exit status when a run finished but some oracle call hit its budget.
const EXIT_DEGRADED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "xormmap", version, about = "Marginal MAP by hashed parity queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random instance.
    Generate(generate::GenerateArgs),
    /// Run one method on one instance; prints JSON lines.
    Solve(solve::SolveArgs),
    /// Sweep instances x seeds x methods; prints CSV.
    Bench(bench::BenchArgs),
    /// Write one replicated parity query as DIMACS with x-lines.
    Export(export::ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Xormmap,
    Binsearch,
    Plus,
    Biased,
    Saa,
    Exact,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Xormmap => "xormmap",
            Method::Binsearch => "binsearch",
            Method::Plus => "plus",
            Method::Biased => "biased",
            Method::Saa => "saa",
            Method::Exact => "exact",
        }
    }

    /// Whether the method sweeps hashed queries (and so takes oracle flags).
    pub fn is_hashed(self) -> bool {
        !matches!(self, Method::Saa | Method::Exact)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    EnumerateA,
    JointDpll,
}

impl From<EngineArg> for xormmap::Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::EnumerateA => xormmap::Engine::EnumerateA,
            EngineArg::JointDpll => xormmap::Engine::JointDpll,
        }
    }
}

/// Estimator flags shared by `solve` and `bench`.
#[derive(Args, Debug, Clone)]
pub struct MethodFlags {
    /// Approximation constant: the estimate is within a factor 2^c.
    #[arg(long, default_value_t = 3)]
    pub c: u32,
    /// Failure probability.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Replicates per XOR_K call (default: from the guarantee).
    #[arg(long = "T", value_name = "N")]
    pub t: Option<usize>,
    /// Trials per k (plus only).
    #[arg(long, value_name = "N")]
    pub r: Option<usize>,
    /// Vote threshold (biased only; default: the balanced q*).
    #[arg(long, value_name = "N")]
    pub q: Option<usize>,
    /// Lift size for weighted instances (default: n).
    #[arg(long, value_name = "L")]
    pub lift: Option<usize>,
    /// Marginal samples (saa only).
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    /// XOR_K calls dispatched concurrently.
    #[arg(long, value_name = "K")]
    pub parallel: Option<usize>,
    /// Per-oracle-call time limit.
    #[arg(long, value_name = "SECS")]
    pub timeout_secs: Option<f64>,
    /// Per-oracle-call node limit.
    #[arg(long, value_name = "N")]
    pub node_cap: Option<u64>,
    /// Report measured wall times instead of 0 (output is then not
    /// reproducible).
    #[arg(long)]
    pub timing: bool,
}

/// Master seed: `--seed`, else `XORMMAP_SEED`, else 0.
#[derive(Args, Debug, Clone, Copy)]
pub struct SeedFlag {
    #[arg(long, env = "XORMMAP_SEED", default_value_t = 0)]
    pub seed: u64,
}

/// Output sink: a file, or standard output when absent.
#[derive(Args, Debug, Clone)]
pub struct OutFlag {
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate::run(&a).map(|_| true),
        Command::Solve(a) => solve::run(&a),
        Command::Bench(a) => bench::run(&a).map(|_| true),
        Command::Export(a) => export::run(&a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_DEGRADED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
