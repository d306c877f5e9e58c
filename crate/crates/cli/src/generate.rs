use std::io::Write;

use clap::{Args, Subcommand};
use xormmap::instances::{format_instance, gen_ising_grid, gen_ising_grid_with, gen_random_2sat};
use xormmap::seed::Purpose;
use xormmap::SeedTree;

use crate::error::CliError;
use crate::output::sink;
use crate::{OutFlag, SeedFlag};

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(subcommand)]
    kind: Kind,
}

#[derive(Args, Debug)]
struct Common {
    #[command(flatten)]
    seed: SeedFlag,
    #[command(flatten)]
    out: OutFlag,
}

#[derive(Subcommand, Debug)]
enum Kind {
    /// Random 2-CNF; the first `m-count` variables are decisions.
    #[command(name = "2sat")]
    TwoSat {
        #[arg(long)]
        n_total: usize,
        #[arg(long)]
        m_count: usize,
        #[arg(long)]
        clauses: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Ising grid with uniform fields in [-f, f] and couplings in [-w, w].
    Ising {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// Field strength f.
        #[arg(long, default_value_t = 0.1)]
        field: f64,
        /// Coupling strength w.
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
        /// Fraction of nodes made decisions (ignored with --m-count).
        #[arg(long, default_value_t = 0.5, conflicts_with = "m_count")]
        max_fraction: f64,
        /// Exact number of decision nodes.
        #[arg(long)]
        m_count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

pub fn run(args: &GenerateArgs) -> Result<(), CliError> {
    let common = match &args.kind {
        Kind::TwoSat { common, .. } | Kind::Ising { common, .. } => common,
    };
    let mut rng = SeedTree::new(common.seed.seed).rng(Purpose::Generate, 0, 0, 0);
    let inst = match args.kind {
        Kind::TwoSat {
            n_total,
            m_count,
            clauses,
            ..
        } => gen_random_2sat(n_total, m_count, clauses, &mut rng)?,
        Kind::Ising {
            rows,
            cols,
            field,
            coupling,
            max_fraction,
            m_count,
            ..
        } => match m_count {
            Some(m) => gen_ising_grid_with(rows, cols, field, coupling, m, &mut rng)?,
            None => gen_ising_grid(rows, cols, field, coupling, max_fraction, &mut rng)?,
        },
    };
    let mut w = sink(common.out.out.as_deref())?;
    w.write_all(format_instance(&inst).as_bytes())?;
    w.flush()?;
    Ok(())
}
