//! One method on one instance, normalised for reporting.

use std::time::{Duration, Instant};

use xormmap::baselines::{exact_mmap, saa_solve, score_solution, SaaOptions, SaaSamples};
use xormmap::mmap::{estimate, CnfQuery, ParityQuery};
use xormmap::model::DEFAULT_ENUM_BITS;
use xormmap::seed::Purpose;
use xormmap::variants::{biased_sweep, plus_sweep, PlusParams};
use xormmap::weighted::weighted_mmap_with;
use xormmap::{
    BitVec, Budget, Engine, EstimateReport, EstimatorConfig, MmapInstance, ReportStatus, RunRecord, SeedTree,
    Sweep,
};

use crate::error::CliError;
use crate::output::pow2_log10;
use crate::{Method, MethodFlags};

/// Everything a result line or CSV row reports.
#[derive(Debug)]
pub struct MethodRun {
    pub method: Method,
    /// Replicates per XOR_K call, for hashed methods.
    pub replicates: Option<usize>,
    pub k_hat: Option<usize>,
    /// `log10` of the estimate of `max_a sum_x w(a, x)`.
    pub estimate_log10: f64,
    /// Bounds on the optimum implied by the run (absent for SAA).
    pub lb_log10: Option<f64>,
    pub ub_log10: Option<f64>,
    pub argmax: Option<BitVec>,
    pub records: Vec<RunRecord>,
    pub oracle_calls: usize,
    pub nodes: u64,
    pub wall: Duration,
    pub status: ReportStatus,
    pub possibly_zero: bool,
}

impl MethodRun {
    /// `log10 sum_x w(a, x)` at the reported decision (all-zeros when the
    /// method returned none), or `None` beyond the enumeration cap.
    pub fn score_log10(&self, inst: &MmapInstance) -> Option<f64> {
        let a = self.argmax.clone().unwrap_or_else(|| BitVec::zeros(inst.m()));
        score_solution(inst, &a, DEFAULT_ENUM_BITS).ok()
    }
}

/// Rejects flags that do not apply to `method`.
pub fn check_flags(method: Method, f: &MethodFlags) -> Result<(), CliError> {
    let reject = |flag: &str, set: bool| {
        if set {
            Err(CliError::usage(format!(
                "--{flag} does not apply to --method {}",
                method.name()
            )))
        } else {
            Ok(())
        }
    };
    reject("q", f.q.is_some() && method != Method::Biased)?;
    reject("r", f.r.is_some() && method != Method::Plus)?;
    reject("samples", f.samples.is_some() && method != Method::Saa)?;
    if !method.is_hashed() {
        reject("T", f.t.is_some())?;
        reject("lift", f.lift.is_some())?;
        reject("engine", f.engine.is_some())?;
        reject("parallel", f.parallel.is_some())?;
        reject("timeout-secs", f.timeout_secs.is_some())?;
        reject("node-cap", f.node_cap.is_some())?;
    }
    if let Some(s) = f.timeout_secs {
        if !(s > 0.0 && s.is_finite()) {
            return Err(CliError::usage("--timeout-secs must be positive"));
        }
    }
    Ok(())
}

/// `f` with the flags that do not apply to `method` cleared, so one flag set
/// can drive several methods.
pub fn applicable(method: Method, f: &MethodFlags) -> MethodFlags {
    let mut f = f.clone();
    if method != Method::Biased {
        f.q = None;
    }
    if method != Method::Plus {
        f.r = None;
    }
    if method != Method::Saa {
        f.samples = None;
    }
    if !method.is_hashed() {
        f.t = None;
        f.lift = None;
        f.engine = None;
        f.parallel = None;
        f.timeout_secs = None;
        f.node_cap = None;
    }
    f
}

fn config(f: &MethodFlags, method: Method, seed: u64) -> EstimatorConfig {
    EstimatorConfig {
        c: f.c,
        delta: f.delta,
        replicates: f.t,
        sweep: if method == Method::Binsearch {
            Sweep::BinarySearch
        } else {
            Sweep::Descending
        },
        engine: f.engine.map(Engine::from).unwrap_or_default(),
        budget: Budget {
            node_cap: f.node_cap,
            time_limit: f.timeout_secs.map(Duration::from_secs_f64),
        },
        seed,
        parallel: f.parallel.unwrap_or(1),
    }
}

fn sweep(
    method: Method,
    query: &dyn ParityQuery,
    cfg: &EstimatorConfig,
    f: &MethodFlags,
) -> xormmap::Result<EstimateReport> {
    match method {
        Method::Plus => {
            let derived = PlusParams::derive(query.m(), query.hashed_bits(), cfg.delta, cfg.c)?;
            let params = PlusParams {
                replicates: f.t.unwrap_or(derived.replicates),
                trials: f.r.unwrap_or(derived.trials),
            };
            plus_sweep(query, cfg, params)
        }
        Method::Biased => biased_sweep(query, cfg, f.q),
        _ => estimate(query, cfg),
    }
}

pub fn run_method(
    inst: &MmapInstance,
    method: Method,
    f: &MethodFlags,
    seed: u64,
) -> Result<MethodRun, CliError> {
    check_flags(method, f)?;
    let start = Instant::now();
    let mut run = match method {
        Method::Exact => {
            let e = exact_mmap(inst, DEFAULT_ENUM_BITS)?;
            let opt = e.opt.log_weight().log10();
            MethodRun {
                method,
                replicates: None,
                k_hat: None,
                estimate_log10: opt,
                lb_log10: Some(opt),
                ub_log10: Some(opt),
                argmax: Some(e.argmax),
                records: Vec::new(),
                oracle_calls: 0,
                nodes: 0,
                wall: Duration::ZERO,
                status: ReportStatus::Complete,
                possibly_zero: false,
            }
        }
        Method::Saa => {
            let opts = SaaOptions {
                samples: SaaSamples::Random(f.samples.unwrap_or(10_000)),
                ..Default::default()
            };
            let mut rng = SeedTree::new(seed).rng(Purpose::Saa, 0, 0, 0);
            let s = saa_solve(inst, &opts, &mut rng)?;
            MethodRun {
                method,
                replicates: None,
                k_hat: None,
                estimate_log10: s.estimate.log10(),
                lb_log10: None,
                ub_log10: None,
                argmax: Some(s.argmax),
                records: Vec::new(),
                oracle_calls: 0,
                nodes: 0,
                wall: Duration::ZERO,
                status: ReportStatus::Complete,
                possibly_zero: false,
            }
        }
        _ => {
            let cfg = config(f, method, seed);
            if inst.is_cnf() {
                if f.lift.is_some() {
                    return Err(CliError::usage("--lift applies to weighted instances only"));
                }
                let query = CnfQuery::new(inst, cfg.oracle_options())?;
                let rep = sweep(method, &query, &cfg, f)?;
                from_report(method, rep)
            } else {
                let w = weighted_mmap_with(inst, &cfg, f.lift, |q| sweep(method, q, &cfg, f))?;
                match w.unweighted {
                    Some(rep) => {
                        let mut run = from_report(method, rep);
                        // back on the weighted scale
                        run.estimate_log10 = w.estimate.log10();
                        run.lb_log10 = Some(w.opt_lower.log10());
                        run.ub_log10 = Some(w.opt_upper.log10());
                        run
                    }
                    None => MethodRun {
                        // every weight is zero: the optimum is exactly 0
                        method,
                        replicates: None,
                        k_hat: None,
                        estimate_log10: f64::NEG_INFINITY,
                        lb_log10: Some(f64::NEG_INFINITY),
                        ub_log10: Some(f64::NEG_INFINITY),
                        argmax: Some(BitVec::zeros(inst.m())),
                        records: Vec::new(),
                        oracle_calls: 0,
                        nodes: 0,
                        wall: Duration::ZERO,
                        status: ReportStatus::Complete,
                        possibly_zero: false,
                    },
                }
            }
        }
    };
    run.wall = start.elapsed();
    Ok(run)
}

/// Count-scale reporting: the estimate is `2^k_hat`.
fn from_report(method: Method, rep: EstimateReport) -> MethodRun {
    MethodRun {
        method,
        replicates: Some(rep.replicates),
        k_hat: Some(rep.k_hat),
        estimate_log10: pow2_log10(rep.k_hat),
        lb_log10: Some(pow2_log10(rep.lower)),
        ub_log10: Some(pow2_log10(rep.upper)),
        oracle_calls: rep.oracle_calls(),
        nodes: rep.nodes(),
        argmax: rep.argmax,
        records: rep.records,
        wall: Duration::ZERO,
        status: rep.status,
        possibly_zero: rep.possibly_zero,
    }
}
