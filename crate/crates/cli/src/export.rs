use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use xormmap::instances::read_instance;
use xormmap::mmap::{majority_threshold, sample_systems};
use xormmap::oracle::{export_dimacs_xor, ReplicatedProblem};
use xormmap::SeedTree;

use crate::error::CliError;
use crate::output::sink;
use crate::{OutFlag, SeedFlag};

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long, value_name = "FILE")]
    pub instance: PathBuf,
    /// Parity rows per replicate.
    #[arg(long)]
    pub k: usize,
    /// Replicates.
    #[arg(long = "T", value_name = "N", default_value_t = 1)]
    pub t: usize,
    /// Replicates that must be satisfied (default: strict majority).
    #[arg(long)]
    pub threshold: Option<u32>,
    /// Trial index within the seed's stream.
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
    #[command(flatten)]
    pub seed: SeedFlag,
    #[command(flatten)]
    pub out: OutFlag,
}

/// The systems are the ones `solve` draws for the same seed, `k` and trial.
pub fn run(args: &ExportArgs) -> Result<(), CliError> {
    let inst = read_instance(&args.instance).map_err(|source| CliError::File {
        path: args.instance.display().to_string(),
        source,
    })?;
    if !inst.is_cnf() {
        return Err(CliError::usage("export needs a CNF instance"));
    }
    if args.t == 0 {
        return Err(CliError::usage("--T must be at least 1"));
    }
    if args.k > inst.n() {
        return Err(CliError::usage(format!(
            "--k {} exceeds n = {}",
            args.k,
            inst.n()
        )));
    }
    let threshold = args.threshold.unwrap_or_else(|| majority_threshold(args.t));
    if threshold == 0 || threshold as usize > args.t {
        return Err(CliError::usage(format!(
            "--threshold {threshold} outside [1, {}]",
            args.t
        )));
    }
    let seeds = SeedTree::new(args.seed.seed);
    let systems = sample_systems(&seeds, inst.n(), args.k, args.t, args.trial);
    let rep = ReplicatedProblem::from_systems(&inst, systems)?;
    let mut w = sink(args.out.out.as_deref())?;
    w.write_all(export_dimacs_xor(&rep, threshold).as_bytes())?;
    w.flush()?;
    Ok(())
}
