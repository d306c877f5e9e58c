//! Replicate-reducing variants of the sweep: binary search over `k`,
//! repeated-trial majority (XOR_MMAP+), and a tuned, biased threshold.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::mmap::{
    alpha_star, ceil_at_least_one, descending_sweep, error_bound_p, kl_bernoulli, majority_threshold,
    required_t, run_batched, xor_k_threshold, CnfQuery, EstimateReport, EstimatorConfig, Outcome,
    ParityQuery, RunRecord,
};
use crate::model::MmapInstance;
use crate::seed::SeedTree;

/// `ceil((m ln 2 + ln log2 n + ln(1/delta)) / alpha*(c))`. The `ln log2 n`
/// term is taken as 0 for `n <= 2`, where it would be non-positive.
pub fn required_t_binsearch(m: usize, n: usize, delta: f64, c: u32) -> Result<usize> {
    required_t(m, n.max(1), delta, c)?; // shared validation
    let log_term = if n <= 2 { 0.0 } else { (n as f64).log2().ln() };
    let num = m as f64 * LN_2 + log_term + (1.0 / delta).ln();
    Ok(ceil_at_least_one(num / alpha_star(c)?))
}

/// Replicates per trial for XOR_MMAP+: `ceil((m ln 2 + ln(1/p)) / alpha*(c))`.
pub fn required_t_plus(m: usize, c: u32) -> Result<usize> {
    let p = error_bound_p(c)?;
    Ok(ceil_at_least_one(
        (m as f64 * LN_2 + (1.0 / p).ln()) / alpha_star(c)?,
    ))
}

/// Trials per `k` for XOR_MMAP+: `ceil(ln(n/delta) / D(1/2 || p))`.
pub fn required_r(n: usize, delta: f64, c: u32) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta = {delta} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    Ok(ceil_at_least_one((n as f64 / delta).ln() / alpha_star(c)?))
}

/// The threshold `q` in `(T/2, T]` balancing the false-negative bound
/// `exp(-D((T-q+1)/T || p) T)` against the false-positive bound
/// `2^m exp(-D(q/T || p) T)`. Ties go to the smaller `q`.
pub fn q_star(t: usize, m: usize, c: u32) -> Result<usize> {
    if t < 2 {
        return Err(Error::param("q* needs T >= 2"));
    }
    let p = error_bound_p(c)?;
    let tf = t as f64;
    let mut best: Option<(usize, f64)> = None;
    for q in t / 2 + 1..=t {
        let qf = q as f64;
        let miss = -kl_bernoulli((tf - qf + 1.0) / tf, p)? * tf;
        let false_pos = m as f64 * LN_2 - kl_bernoulli(qf / tf, p)? * tf;
        // compare in log space
        let worst = miss.max(false_pos);
        if best.is_none_or(|(_, b)| worst < b) {
            best = Some((q, worst));
        }
    }
    Ok(best.expect("range (T/2, T] is non-empty").0)
}

/// XOR_K+ : true when at least `q` of `T` replicates survive.
pub fn xor_k_plus(
    query: &dyn ParityQuery,
    k: usize,
    t: usize,
    q: usize,
    seeds: &SeedTree,
    trial: usize,
) -> Result<RunRecord> {
    if 2 * q <= t || q > t {
        return Err(Error::param(format!("q = {q} outside (T/2, T] for T = {t}")));
    }
    xor_k_threshold(query, k, t, q as u32, seeds, trial)
}

/// Binary search on `k` in `[0, n]`, treating `k = 0` as true and `n + 1` as
/// false. Returns the highest probed true; an undecided probe ends the search.
pub(crate) fn binsearch_sweep(query: &dyn ParityQuery, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    let n = query.hashed_bits();
    let t = match cfg.replicates {
        Some(t) => t,
        None => required_t_binsearch(query.m(), n, cfg.delta, cfg.c)?,
    };
    let threshold = majority_threshold(t);
    let seeds = SeedTree::new(cfg.seed);
    let (mut lo, mut hi) = (0usize, n + 1);
    let mut records: Vec<RunRecord> = Vec::new();
    let mut accepted = None;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let r = xor_k_threshold(query, mid, t, threshold, &seeds, 0)?;
        match r.outcome {
            Outcome::True => {
                lo = mid;
                accepted = Some((mid, r.argmax.clone()));
            }
            Outcome::False => hi = mid,
            Outcome::Unknown => {
                records.push(r);
                break;
            }
        }
        records.push(r);
    }
    let decisions = records.iter().map(|r| (r.k, r.outcome)).collect();
    EstimateReport::assemble(query, cfg.c, t, records, decisions, accepted)
}

/// XOR_MMAP with binary search over `k`.
pub fn xor_mmap_binsearch(inst: &MmapInstance, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    binsearch_sweep(&CnfQuery::new(inst, cfg.oracle_options())?, cfg)
}

/// Trial counts and replicate count for XOR_MMAP+.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlusParams {
    pub replicates: usize,
    pub trials: usize,
}

impl PlusParams {
    pub fn derive(m: usize, n: usize, delta: f64, c: u32) -> Result<Self> {
        Ok(Self {
            replicates: required_t_plus(m, c)?,
            trials: required_r(n, delta, c)?,
        })
    }
}

/// XOR_MMAP+: `r` fresh XOR_K calls per `k`, accepting when at least
/// `ceil(r/2)` say true. A `k` is rejected once that count is out of reach;
/// otherwise it is undecided.
pub fn plus_sweep(
    query: &dyn ParityQuery,
    cfg: &EstimatorConfig,
    params: PlusParams,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let PlusParams {
        replicates: t,
        trials: r,
    } = params;
    if t == 0 || r == 0 {
        return Err(Error::param("T and r must be at least 1"));
    }
    let need = r.div_ceil(2);
    let threshold = majority_threshold(t);
    let seeds = SeedTree::new(cfg.seed);
    let ks: Vec<usize> = (1..=query.hashed_bits()).rev().collect();
    let per_k = run_batched(
        &ks,
        cfg.parallel,
        |k| {
            let mut recs = Vec::with_capacity(r);
            let (mut yes, mut no) = (0, 0);
            for trial in 0..r {
                let rec = xor_k_threshold(query, k, t, threshold, &seeds, trial)?;
                match rec.outcome {
                    Outcome::True => yes += 1,
                    Outcome::False => no += 1,
                    Outcome::Unknown => {}
                }
                recs.push(rec);
                if yes >= need || no > r - need {
                    break;
                }
            }
            let outcome = if yes >= need {
                Outcome::True
            } else if no > r - need {
                Outcome::False
            } else {
                Outcome::Unknown
            };
            Ok((k, outcome, recs))
        },
        |(_, o, _)| *o == Outcome::True,
    )?;
    let decisions = per_k.iter().map(|(k, o, _)| (*k, *o)).collect();
    let accepted = per_k
        .iter()
        .find(|(_, o, _)| *o == Outcome::True)
        .map(|(k, _, recs)| {
            let first = recs
                .iter()
                .find(|r| r.outcome == Outcome::True)
                .expect("accepted k has a true trial");
            (*k, first.argmax.clone())
        });
    let records = per_k.into_iter().flat_map(|(_, _, recs)| recs).collect();
    EstimateReport::assemble(query, cfg.c, t, records, decisions, accepted)
}

/// XOR_MMAP+ on a CNF instance with `(T, r)` from `params`, or from the
/// formulas when `None`.
pub fn xor_mmap_plus(
    inst: &MmapInstance,
    cfg: &EstimatorConfig,
    params: Option<PlusParams>,
) -> Result<EstimateReport> {
    let query = CnfQuery::new(inst, cfg.oracle_options())?;
    let params = match params {
        Some(p) => p,
        None => PlusParams::derive(inst.m(), inst.n(), cfg.delta, cfg.c)?,
    };
    plus_sweep(&query, cfg, params)
}

/// The descending sweep with XOR_K+ at threshold `q` (default `q*`).
pub fn biased_sweep(
    query: &dyn ParityQuery,
    cfg: &EstimatorConfig,
    q: Option<usize>,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let t = match cfg.replicates {
        Some(t) => t,
        None => required_t(query.m(), query.hashed_bits(), cfg.delta, cfg.c)?,
    };
    let q = match q {
        Some(q) => q,
        None if t == 1 => 1,
        None => q_star(t, query.m(), cfg.c)?,
    };
    if 2 * q <= t || q > t {
        return Err(Error::param(format!("q = {q} outside (T/2, T] for T = {t}")));
    }
    descending_sweep(query, cfg, t, q as u32)
}

/// [`biased_sweep`] on a CNF instance.
pub fn xor_mmap_biased(
    inst: &MmapInstance,
    cfg: &EstimatorConfig,
    q: Option<usize>,
) -> Result<EstimateReport> {
    cfg.validate()?;
    biased_sweep(&CnfQuery::new(inst, cfg.oracle_options())?, cfg, q)
}
