//! The XOR_MMAP estimator: one-shot hashed emptiness queries, the replicated
//! majority vote for a fixed `k`, and the descending sweep over `k`.

use std::time::Duration;

use crate::error::{Error, Result};
use crate::gf2::{sample_parity, BitVec, ParitySystem};
use crate::model::MmapInstance;
use crate::oracle::{
    solve_emptiness, solve_replicated, Budget, Engine, OracleOptions, OracleResult, OracleStatus,
    ReplicatedProblem,
};
use crate::seed::{Purpose, SeedTree};

/// `D(p || q)` for Bernoulli distributions, with `0 ln 0 = 0`.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p = {p} outside [0, 1]")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param(format!("q = {q} outside (0, 1)")));
    }
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    Ok(term(p, q) + term(1.0 - p, 1.0 - q))
}

/// `p = 2^c / (2^c - 1)^2`, the per-replicate error bound.
pub fn error_bound_p(c: u32) -> Result<f64> {
    if !(2..=60).contains(&c) {
        return Err(Error::param(format!("c = {c} outside [2, 60]")));
    }
    let two_c = (1u64 << c) as f64;
    Ok(two_c / ((two_c - 1.0) * (two_c - 1.0)))
}

/// `D(1/2 || p)`.
pub fn alpha_star(c: u32) -> Result<f64> {
    kl_bernoulli(0.5, error_bound_p(c)?)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(())
}

/// `ceil((m ln 2 + ln(n / delta)) / alpha*(c))`, at least 1.
pub fn required_t(m: usize, n: usize, delta: f64, c: u32) -> Result<usize> {
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let num = m as f64 * std::f64::consts::LN_2 + (n as f64 / delta).ln();
    Ok(ceil_at_least_one(num / alpha_star(c)?))
}

pub(crate) fn ceil_at_least_one(x: f64) -> usize {
    // absorb rounding noise just above an integer
    let r = x.round();
    let c = if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    };
    (c as usize).max(1)
}

/// Smallest objective that counts as a "true" vote: strictly more than half
/// of the replicates.
pub fn majority_threshold(t: usize) -> u32 {
    (t / 2 + 1) as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    True,
    False,
    /// The oracle hit its budget before deciding.
    Unknown,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::True => "true",
            Outcome::False => "false",
            Outcome::Unknown => "unknown",
        }
    }
}

/// One XOR_K call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub k: usize,
    /// Independent repetition index at this `k` (0 unless repeated).
    pub trial: usize,
    pub replicates: usize,
    pub threshold: u32,
    pub objective: u32,
    pub outcome: Outcome,
    pub oracle_status: OracleStatus,
    /// Decision vector of the oracle's best witness.
    pub argmax: BitVec,
    pub nodes: u64,
    pub wall: Duration,
}

/// A replicated query for a fixed set of sampled parity systems.
pub trait ParityQuery: Sync {
    /// Decision bits.
    fn m(&self) -> usize;
    /// Bits the parity rows range over.
    fn hashed_bits(&self) -> usize;
    /// `max_a` of the number of replicates feasible under their systems.
    fn solve(&self, systems: Vec<ParitySystem>, threshold: u32) -> Result<OracleResult>;
}

/// The unweighted query over a CNF instance.
pub struct CnfQuery<'a> {
    pub inst: &'a MmapInstance,
    pub options: OracleOptions,
}

impl<'a> CnfQuery<'a> {
    pub fn new(inst: &'a MmapInstance, options: OracleOptions) -> Result<Self> {
        if !inst.is_cnf() {
            return Err(Error::Unsupported(
                "the unweighted estimator needs a CNF instance; use the weighted path".into(),
            ));
        }
        Ok(Self { inst, options })
    }
}

impl ParityQuery for CnfQuery<'_> {
    fn m(&self) -> usize {
        self.inst.m()
    }

    fn hashed_bits(&self) -> usize {
        self.inst.n()
    }

    fn solve(&self, systems: Vec<ParitySystem>, threshold: u32) -> Result<OracleResult> {
        let rep = ReplicatedProblem::from_systems(self.inst, systems)?;
        solve_replicated(&rep, threshold, &self.options)
    }
}

/// XOR_Binary: does `W(a0, h)` survive one random `k`-row hash?
pub fn xor_binary<R: rand::RngCore + ?Sized>(
    inst: &MmapInstance,
    a0: &BitVec,
    k: usize,
    rng: &mut R,
    budget: Budget,
) -> Result<bool> {
    let ps = sample_parity(inst.n(), k, rng);
    Ok(solve_emptiness(inst, a0, &ps, budget)?.is_nonempty())
}

/// The parity systems for one `(k, trial)` coordinate; each replicate draws
/// from its own derived stream.
pub fn sample_systems(seeds: &SeedTree, dim: usize, k: usize, t: usize, trial: usize) -> Vec<ParitySystem> {
    (0..t)
        .map(|i| sample_parity(dim, k, &mut seeds.rng(Purpose::Replicate, k, i, trial)))
        .collect()
}

/// XOR_K with an arbitrary acceptance threshold (`objective >= threshold`).
pub fn xor_k_threshold(
    query: &dyn ParityQuery,
    k: usize,
    t: usize,
    threshold: u32,
    seeds: &SeedTree,
    trial: usize,
) -> Result<RunRecord> {
    if t == 0 {
        return Err(Error::param("T must be at least 1"));
    }
    if threshold == 0 || threshold as usize > t {
        return Err(Error::param(format!("threshold {threshold} outside [1, {t}]")));
    }
    let systems = sample_systems(seeds, query.hashed_bits(), k, t, trial);
    let res = query.solve(systems, threshold)?;
    let outcome = match res.status {
        OracleStatus::Optimal => {
            if res.objective >= threshold {
                Outcome::True
            } else {
                Outcome::False
            }
        }
        OracleStatus::ThresholdReached => Outcome::True,
        OracleStatus::BudgetExceeded if res.objective >= threshold => Outcome::True,
        OracleStatus::BudgetExceeded => Outcome::Unknown,
    };
    Ok(RunRecord {
        k,
        trial,
        replicates: t,
        threshold,
        objective: res.objective,
        outcome,
        oracle_status: res.status,
        argmax: res.argmax,
        nodes: res.nodes,
        wall: res.wall,
    })
}

/// XOR_K: true when more than half of `T` replicates survive.
pub fn xor_k(
    query: &dyn ParityQuery,
    k: usize,
    t: usize,
    seeds: &SeedTree,
    trial: usize,
) -> Result<RunRecord> {
    xor_k_threshold(query, k, t, majority_threshold(t), seeds, trial)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sweep {
    #[default]
    Descending,
    BinarySearch,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub c: u32,
    pub delta: f64,
    /// Replicates per call; derived from the guarantee when `None`.
    pub replicates: Option<usize>,
    pub sweep: Sweep,
    pub engine: Engine,
    pub budget: Budget,
    pub seed: u64,
    /// XOR_K calls dispatched at once.
    pub parallel: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            c: 3,
            delta: 0.1,
            replicates: None,
            sweep: Sweep::Descending,
            engine: Engine::EnumerateA,
            budget: Budget::unlimited(),
            seed: 0,
            parallel: 1,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        error_bound_p(self.c)?;
        check_delta(self.delta)?;
        if self.replicates == Some(0) {
            return Err(Error::param("T must be at least 1"));
        }
        if self.parallel == 0 {
            return Err(Error::param("parallelism must be at least 1"));
        }
        Ok(())
    }

    pub fn oracle_options(&self) -> OracleOptions {
        OracleOptions {
            engine: self.engine,
            budget: self.budget,
            early_stop: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportStatus {
    /// Every call the sweep needed was decided.
    Complete,
    /// Some call ran out of budget; bounds come from decided calls only.
    Degraded,
}

impl ReportStatus {
    pub fn name(self) -> &'static str {
        match self {
            ReportStatus::Complete => "complete",
            ReportStatus::Degraded => "degraded",
        }
    }
}

/// Outcome of an estimator run. All quantities are base-2 exponents of the
/// (unweighted) count.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    /// The estimate is `2^k_hat`.
    pub k_hat: usize,
    pub lower: usize,
    pub upper: usize,
    /// Hashed dimension swept over.
    pub n: usize,
    pub c: u32,
    pub replicates: usize,
    pub records: Vec<RunRecord>,
    /// Per-`k` decision after combining trials, in probe order.
    pub decisions: Vec<(usize, Outcome)>,
    /// Decision vector from the accepting call, if any.
    pub argmax: Option<BitVec>,
    pub status: ReportStatus,
    /// Even the unhashed problem has no feasible point: the true optimum may
    /// be 0 although the estimate is 1.
    pub possibly_zero: bool,
}

impl EstimateReport {
    pub fn oracle_calls(&self) -> usize {
        self.records.len()
    }

    pub fn nodes(&self) -> u64 {
        self.records.iter().map(|r| r.nodes).sum()
    }

    pub(crate) fn assemble(
        query: &dyn ParityQuery,
        c: u32,
        replicates: usize,
        records: Vec<RunRecord>,
        decisions: Vec<(usize, Outcome)>,
        accepted: Option<(usize, BitVec)>,
    ) -> Result<Self> {
        let n = query.hashed_bits();
        let degraded = decisions.iter().any(|&(_, o)| o == Outcome::Unknown);
        let (lower, upper) = bounds_from_partial(&decisions, c, n);
        let possibly_zero = match accepted {
            Some(_) => false,
            None => !unhashed_feasible(query)?,
        };
        let (k_hat, argmax) = match accepted {
            Some((k, a)) => (k, Some(a)),
            None => (0, None),
        };
        Ok(Self {
            k_hat,
            lower,
            upper,
            n,
            c,
            replicates,
            records,
            decisions,
            argmax,
            status: if degraded {
                ReportStatus::Degraded
            } else {
                ReportStatus::Complete
            },
            possibly_zero,
        })
    }
}

fn unhashed_feasible(query: &dyn ParityQuery) -> Result<bool> {
    let res = query.solve(vec![ParitySystem::unconstrained(query.hashed_bits())], 1)?;
    // a budget hit here leaves the question open; do not claim zero
    Ok(res.objective >= 1 || res.status == OracleStatus::BudgetExceeded)
}

/// Exponent bounds from whichever `k` have been decided.
///
/// `upper = min{k false} + c` (or `n`), `lower = max{k true} - c` (or 0),
/// both clamped to `[0, n]`. A non-monotone record set is reported as the
/// ordered pair.
pub fn bounds_from_partial(decided: &[(usize, Outcome)], c: u32, n: usize) -> (usize, usize) {
    let c = c as usize;
    let lower = decided
        .iter()
        .filter(|d| d.1 == Outcome::True)
        .map(|d| d.0.saturating_sub(c))
        .max()
        .unwrap_or(0)
        .min(n);
    let upper = decided
        .iter()
        .filter(|d| d.1 == Outcome::False)
        .map(|d| (d.0 + c).min(n))
        .min()
        .unwrap_or(n);
    (lower.min(upper), lower.max(upper))
}

/// Runs `f(k)` for each `k`, `parallel` at a time, returning results in the
/// order of `ks`. `stop` is checked on each batch's results in order; once it
/// returns true, later entries are dropped and no further batches start.
pub(crate) fn run_batched<T: Send>(
    ks: &[usize],
    parallel: usize,
    f: impl Fn(usize) -> Result<T> + Sync,
    mut stop: impl FnMut(&T) -> bool,
) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(ks.len());
    for batch in ks.chunks(parallel.max(1)) {
        let results: Vec<Result<T>> = if batch.len() == 1 {
            vec![f(batch[0])]
        } else {
            let f = &f;
            std::thread::scope(|s| {
                let handles: Vec<_> = batch.iter().map(|&k| s.spawn(move || f(k))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("estimator worker panicked"))
                    .collect()
            })
        };
        for r in results {
            let r = r?;
            let done = stop(&r);
            out.push(r);
            if done {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// The XOR_MMAP sweep for any query and acceptance threshold: sweep `k` from the
/// hashed dimension down to 1 and stop at the first true.
pub(crate) fn descending_sweep(
    query: &dyn ParityQuery,
    cfg: &EstimatorConfig,
    t: usize,
    threshold: u32,
) -> Result<EstimateReport> {
    let seeds = SeedTree::new(cfg.seed);
    let ks: Vec<usize> = (1..=query.hashed_bits()).rev().collect();
    let records = run_batched(
        &ks,
        cfg.parallel,
        |k| xor_k_threshold(query, k, t, threshold, &seeds, 0),
        |r| r.outcome == Outcome::True,
    )?;
    let decisions = records.iter().map(|r| (r.k, r.outcome)).collect();
    let accepted = records
        .iter()
        .find(|r| r.outcome == Outcome::True)
        .map(|r| (r.k, r.argmax.clone()));
    EstimateReport::assemble(query, cfg.c, t, records, decisions, accepted)
}

/// XOR_MMAP on a CNF instance.
pub fn xor_mmap(inst: &MmapInstance, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let query = CnfQuery::new(inst, cfg.oracle_options())?;
    estimate(&query, cfg)
}

/// XOR_MMAP over an arbitrary query, honouring `cfg.sweep`.
pub fn estimate(query: &dyn ParityQuery, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    match cfg.sweep {
        Sweep::Descending => {
            let t = match cfg.replicates {
                Some(t) => t,
                None => required_t(query.m(), query.hashed_bits(), cfg.delta, cfg.c)?,
            };
            descending_sweep(query, cfg, t, majority_threshold(t))
        }
        Sweep::BinarySearch => crate::variants::binsearch_sweep(query, cfg),
    }
}
