use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use xormmap::instances::read_instance;

use crate::error::CliError;
use crate::output::sink;
use crate::run::{applicable, run_method};
use crate::solve::wall_ms;
use crate::{Method, MethodFlags, OutFlag, SeedFlag};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Instance files; each becomes an `instance_id` (its file stem).
    #[arg(long = "instance", value_name = "FILE", required = true)]
    pub instances: Vec<PathBuf>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = [Method::Xormmap, Method::Saa, Method::Exact]
    )]
    pub methods: Vec<Method>,
    /// Runs per (instance, method), with seeds `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[command(flatten)]
    pub flags: MethodFlags,
    #[command(flatten)]
    pub seed: SeedFlag,
    #[command(flatten)]
    pub out: OutFlag,
}

#[derive(Serialize)]
struct Row<'a> {
    instance_id: &'a str,
    seed: u64,
    method: &'static str,
    c: Option<u32>,
    delta: Option<f64>,
    #[serde(rename = "T")]
    replicates: Option<usize>,
    k_hat: Option<usize>,
    estimate_log10: Option<f64>,
    lb_log10: Option<f64>,
    ub_log10: Option<f64>,
    score_log10: Option<f64>,
    oracle_calls: Option<usize>,
    nodes: Option<u64>,
    wall_ms: Option<f64>,
    status: &'static str,
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let instances = args
        .instances
        .iter()
        .map(|p| {
            let inst = read_instance(p).map_err(|source| CliError::File {
                path: p.display().to_string(),
                source,
            })?;
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            Ok((id, inst))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut out = csv::Writer::from_writer(sink(args.out.out.as_deref())?);
    for (id, inst) in &instances {
        for i in 0..args.seeds {
            let seed = args.seed.seed.wrapping_add(i);
            for &method in &args.methods {
                let mut flags = applicable(method, &args.flags);
                if inst.is_cnf() {
                    flags.lift = None;
                }
                let hashed = method.is_hashed();
                let mut row = Row {
                    instance_id: id,
                    seed,
                    method: method.name(),
                    c: hashed.then_some(flags.c),
                    delta: hashed.then_some(flags.delta),
                    replicates: None,
                    k_hat: None,
                    estimate_log10: None,
                    lb_log10: None,
                    ub_log10: None,
                    score_log10: None,
                    oracle_calls: None,
                    nodes: None,
                    wall_ms: None,
                    status: "error",
                };
                match run_method(inst, method, &flags, seed) {
                    Ok(run) => {
                        row.replicates = run.replicates;
                        row.k_hat = run.k_hat;
                        row.estimate_log10 = Some(run.estimate_log10);
                        row.lb_log10 = run.lb_log10;
                        row.ub_log10 = run.ub_log10;
                        row.score_log10 = run.score_log10(inst);
                        row.oracle_calls = Some(run.oracle_calls);
                        row.nodes = Some(run.nodes);
                        row.wall_ms = Some(wall_ms(run.wall, flags.timing));
                        row.status = run.status.name();
                    }
                    // a failed run is still a row
                    Err(e) => eprintln!("{id} seed {seed} {}: {e}", method.name()),
                }
                out.serialize(&row)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
