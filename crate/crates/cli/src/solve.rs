use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::Args;
use serde::Serialize;
use xormmap::instances::read_instance;
use xormmap::{MmapInstance, ReportStatus, RunRecord};

use crate::error::CliError;
use crate::output::{bits, sink};
use crate::run::{run_method, MethodRun};
use crate::{Method, MethodFlags, OutFlag, SeedFlag};

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_name = "FILE")]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Xormmap)]
    pub method: Method,
    #[command(flatten)]
    pub flags: MethodFlags,
    #[command(flatten)]
    pub seed: SeedFlag,
    #[command(flatten)]
    pub out: OutFlag,
}

/// One XOR_K call.
#[derive(Serialize)]
struct RecordLine {
    #[serde(rename = "type")]
    kind: &'static str,
    method: &'static str,
    k: usize,
    trial: usize,
    #[serde(rename = "T")]
    replicates: usize,
    threshold: u32,
    objective: u32,
    outcome: &'static str,
    oracle_status: &'static str,
    argmax: String,
    nodes: u64,
    wall_ms: f64,
}

/// The method's answer.
#[derive(Serialize)]
struct ResultLine {
    #[serde(rename = "type")]
    kind: &'static str,
    method: &'static str,
    m: usize,
    n: usize,
    seed: u64,
    c: Option<u32>,
    delta: Option<f64>,
    #[serde(rename = "T")]
    replicates: Option<usize>,
    k_hat: Option<usize>,
    estimate_log10: f64,
    lb_log10: Option<f64>,
    ub_log10: Option<f64>,
    argmax: Option<String>,
    oracle_calls: usize,
    nodes: u64,
    wall_ms: f64,
    status: &'static str,
    possibly_zero: bool,
}

pub fn wall_ms(d: Duration, timing: bool) -> f64 {
    if timing {
        d.as_secs_f64() * 1e3
    } else {
        0.0
    }
}

fn record_line(method: Method, r: &RunRecord, timing: bool) -> RecordLine {
    RecordLine {
        kind: "record",
        method: method.name(),
        k: r.k,
        trial: r.trial,
        replicates: r.replicates,
        threshold: r.threshold,
        objective: r.objective,
        outcome: r.outcome.name(),
        oracle_status: r.oracle_status.name(),
        argmax: bits(&r.argmax),
        nodes: r.nodes,
        wall_ms: wall_ms(r.wall, timing),
    }
}

fn result_line(inst: &MmapInstance, run: &MethodRun, flags: &MethodFlags, seed: u64) -> ResultLine {
    let hashed = run.method.is_hashed();
    ResultLine {
        kind: "result",
        method: run.method.name(),
        m: inst.m(),
        n: inst.n(),
        seed,
        c: hashed.then_some(flags.c),
        delta: hashed.then_some(flags.delta),
        replicates: run.replicates,
        k_hat: run.k_hat,
        estimate_log10: run.estimate_log10,
        lb_log10: run.lb_log10,
        ub_log10: run.ub_log10,
        argmax: run.argmax.as_ref().map(bits),
        oracle_calls: run.oracle_calls,
        nodes: run.nodes,
        wall_ms: wall_ms(run.wall, flags.timing),
        status: run.status.name(),
        possibly_zero: run.possibly_zero,
    }
}

/// `Ok(false)` when the run completed in degraded mode.
pub fn run(args: &SolveArgs) -> Result<bool, CliError> {
    let inst = read_instance(&args.instance).map_err(|source| CliError::File {
        path: args.instance.display().to_string(),
        source,
    })?;
    let seed = args.seed.seed;
    let run = run_method(&inst, args.method, &args.flags, seed)?;
    let mut w = sink(args.out.out.as_deref())?;
    for r in &run.records {
        serde_json::to_writer(&mut w, &record_line(run.method, r, args.flags.timing))?;
        w.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut w, &result_line(&inst, &run, &args.flags, seed))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(run.status == ReportStatus::Complete)
}
