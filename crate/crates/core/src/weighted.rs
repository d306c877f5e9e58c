//! Weighted MMAP through the unweighted estimator.
//!
//! Each `x` is lifted to `x × {0,1}^l`, keeping the `y` whose forced
//! coordinates are zero. A point of weight `w` keeps `2^f` of its `2^l`
//! lifts, where `f` grows with `log2(w / M)`, so counts of the lifted problem
//! track `2^l / M` times the weighted sum up to a factor of about 2.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::gf2::{BitVec, ParitySystem};
use crate::mmap::{estimate, EstimateReport, EstimatorConfig, ParityQuery, ReportStatus};
use crate::model::{max_weight, LogWeight, MmapInstance, DEFAULT_ENUM_BITS};
use crate::oracle::{solve_weighted_replicated, Engine, OracleResult};

const SNAP: f64 = 1e-12;

/// Number of unforced `y` coordinates: `clamp(ceil(l + log2(w / M)), 0, l)`.
/// Coordinate `i` (1-based) is forced when `w / M <= 2^(i-1-l)`, so the free
/// ones are exactly `1..=f`. Zero weight forces everything.
pub fn free_count(w: LogWeight, max: LogWeight, l: usize) -> usize {
    if w.is_zero() {
        return 0;
    }
    let x = l as f64 + (w.ln() - max.ln()) / LN_2;
    let r = x.round();
    let x = if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x
    };
    x.ceil().clamp(0.0, l as f64) as usize
}

fn check_weight(w: LogWeight, max: LogWeight) -> Result<()> {
    if max.is_zero() {
        return Err(Error::param("maximum weight is zero"));
    }
    if w.ln() > max.ln() + SNAP * max.ln().abs().max(1.0) {
        return Err(Error::Invariant(format!(
            "weight {} exceeds the maximum {}",
            w.ln(),
            max.ln()
        )));
    }
    Ok(())
}

/// The 1-based indices of forced `y` coordinates: `{f+1, ..., l}`.
pub fn forced_set(w: LogWeight, max: LogWeight, l: usize) -> Result<Vec<usize>> {
    check_weight(w, max)?;
    Ok((free_count(w, max, l) + 1..=l).collect())
}

/// `log2 |S_a(w, l, x)|`, the number of free coordinates.
pub fn slice_size_log2(w: LogWeight, max: LogWeight, l: usize) -> Result<usize> {
    check_weight(w, max)?;
    Ok(free_count(w, max, l))
}

/// `2^f`; requires `l < 64`.
pub fn slice_size(w: LogWeight, max: LogWeight, l: usize) -> Result<u64> {
    if l >= 64 {
        return Err(Error::param("slice sizes are 64-bit; use slice_size_log2"));
    }
    Ok(1u64 << slice_size_log2(w, max, l)?)
}

/// A weighted instance lifted by `l` extra marginal bits.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedInstance {
    base: MmapInstance,
    l: usize,
    max: LogWeight,
}

/// Lifts `inst` with `l` bits (default `n`). `None` when every weight is
/// zero, in which case the optimum is 0.
pub fn embed(inst: &MmapInstance, l: Option<usize>) -> Result<Option<EmbeddedInstance>> {
    let l = l.unwrap_or(inst.n());
    if l == 0 {
        return Err(Error::param("embedding needs l >= 1"));
    }
    let max = max_weight(inst, DEFAULT_ENUM_BITS)?.value;
    if max.is_zero() {
        return Ok(None);
    }
    Ok(Some(EmbeddedInstance {
        base: inst.clone(),
        l,
        max,
    }))
}

impl EmbeddedInstance {
    pub fn base(&self) -> &MmapInstance {
        &self.base
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn max(&self) -> LogWeight {
        self.max
    }

    /// Marginal dimension of the lifted problem, `n + l`.
    pub fn n(&self) -> usize {
        self.base.n() + self.l
    }

    /// `w'(a, x, y)`.
    pub fn indicator(&self, a: u64, x: u64, y: &BitVec) -> bool {
        let f = free_count(self.base.log_weight_ints(a, x), self.max, self.l);
        (f..self.l).all(|j| !y.get(j))
    }

    /// `sum_{x,y} w'(a, x, y) = sum_x 2^f(a,x)`.
    pub fn lifted_sum(&self, a: u64) -> LogWeight {
        (0..1u64 << self.base.n())
            .map(|x| {
                let f = free_count(self.base.log_weight_ints(a, x), self.max, self.l);
                LogWeight::pow2(f as i64)
            })
            .sum()
    }

    /// `M / 2^l`, the factor mapping lifted counts back to weights.
    pub fn scale(&self) -> LogWeight {
        self.max / LogWeight::pow2(self.l as i64)
    }
}

/// The replicated query over a lifted instance, by enumeration over `x`.
pub struct WeightedQuery<'a> {
    pub embedded: &'a EmbeddedInstance,
}

impl ParityQuery for WeightedQuery<'_> {
    fn m(&self) -> usize {
        self.embedded.base.m()
    }

    fn hashed_bits(&self) -> usize {
        self.embedded.n()
    }

    fn solve(&self, systems: Vec<ParitySystem>, _threshold: u32) -> Result<OracleResult> {
        let e = self.embedded;
        solve_weighted_replicated(&e.base, e.l, e.max, &systems)
    }
}

/// Weighted estimate with bounds on the optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedReport {
    /// `None` when the maximum weight is zero.
    pub unweighted: Option<EstimateReport>,
    pub l: usize,
    pub max: LogWeight,
    /// `(M / 2^l) 2^k_hat`.
    pub estimate: LogWeight,
    /// The optimum lies in `[opt_lower, opt_upper]` when the sweep's
    /// guarantee holds.
    pub opt_lower: LogWeight,
    pub opt_upper: LogWeight,
    pub status: ReportStatus,
}

/// Estimates `max_a sum_x w(a, x)` with lift size `l` (default `n`).
pub fn weighted_mmap(inst: &MmapInstance, cfg: &EstimatorConfig, l: Option<usize>) -> Result<WeightedReport> {
    weighted_mmap_with(inst, cfg, l, |q| estimate(q, cfg))
}

/// Like [`weighted_mmap`], with the sweep over the lifted query supplied by
/// the caller (e.g. one of the variants).
pub fn weighted_mmap_with(
    inst: &MmapInstance,
    cfg: &EstimatorConfig,
    l: Option<usize>,
    sweep: impl FnOnce(&dyn ParityQuery) -> Result<EstimateReport>,
) -> Result<WeightedReport> {
    cfg.validate()?;
    if cfg.engine != Engine::EnumerateA {
        return Err(Error::Unsupported(format!(
            "the weighted oracle enumerates x; engine {} is not available",
            cfg.engine.name()
        )));
    }
    let Some(emb) = embed(inst, l)? else {
        return Ok(WeightedReport {
            unweighted: None,
            l: l.unwrap_or(inst.n()),
            max: LogWeight::ZERO,
            estimate: LogWeight::ZERO,
            opt_lower: LogWeight::ZERO,
            opt_upper: LogWeight::ZERO,
            status: ReportStatus::Complete,
        });
    };
    let report = sweep(&WeightedQuery { embedded: &emb })?;
    let scale = emb.scale();
    let at = |e: usize| scale * LogWeight::pow2(e as i64);
    Ok(WeightedReport {
        l: emb.l,
        max: emb.max,
        estimate: at(report.k_hat),
        // lifted sums overshoot the weighted optimum by at most a factor 3
        opt_lower: at(report.lower) / LogWeight::from_value(3.0),
        opt_upper: at(report.upper),
        status: report.status,
        unweighted: Some(report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_ising_grid_with;
    use crate::model::IsingGrid;
    use crate::oracle::count_exact;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    #[test]
    fn forced_set_examples() {
        let m = LogWeight::from_value(2.5);
        let l = 4;
        assert!(forced_set(m, m, l).unwrap().is_empty());
        assert_eq!(slice_size(m, m, l).unwrap(), 16);
        let tiny = m / LogWeight::pow2(l as i64 + 1);
        assert_eq!(forced_set(tiny, m, l).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(slice_size(tiny, m, l).unwrap(), 1);
        // M 2^(i-1-l) < w <= M 2^(i-l) leaves i free
        for i in 1..=l {
            let w = m * LogWeight::pow2(i as i64 - l as i64);
            assert_eq!(forced_set(w, m, l).unwrap(), (i + 1..=l).collect::<Vec<_>>());
            let just_above = m * LogWeight::from_ln((i as f64 - 1.0 - l as f64) * LN_2 + 1e-6);
            assert_eq!(slice_size(just_above, m, l).unwrap(), 1 << i);
        }
        assert_eq!(slice_size(LogWeight::ZERO, m, l).unwrap(), 1);
        assert!(forced_set(m * LogWeight::from_value(2.0), m, l).is_err());
    }

    #[test]
    fn slice_sandwich() {
        let mut rng = rng_from_seed(17);
        for _ in 0..10_000 {
            let l = rng.random_range(1..=12);
            let max = LogWeight::from_ln(rng.random_range(-5.0..5.0));
            let w = max * LogWeight::from_ln(-rng.random_range(0.0..12.0));
            let s = slice_size(w, max, l).unwrap() as f64;
            let scaled = max.value() / 2f64.powi(l as i32) * s;
            let tol = 1e-9 * max.value();
            assert!(w.value() <= scaled + tol);
            assert!(scaled <= 2.0 * w.value() + max.value() / 2f64.powi(l as i32) + tol);
        }
    }

    #[test]
    fn suffix_shape() {
        let max = LogWeight::ONE;
        for e in 0..100 {
            let w = LogWeight::from_ln(-(e as f64) * 0.13);
            let f = forced_set(w, max, 6).unwrap();
            let j = 6 - f.len();
            assert_eq!(f, (j + 1..=6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn constant_weight_fills_every_slice() {
        let inst = MmapInstance::ising(IsingGrid::zeros(2, 2, &[0]).unwrap());
        let emb = embed(&inst, None).unwrap().unwrap();
        assert_eq!(emb.n(), 6);
        for a in 0..2 {
            assert!((emb.lifted_sum(a).log2() - 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lifted_sum_matches_indicator_enumeration() {
        let mut rng = rng_from_seed(2);
        let inst = gen_ising_grid_with(2, 2, 0.5, 1.0, 1, &mut rng).unwrap();
        let emb = embed(&inst, Some(3)).unwrap().unwrap();
        for a in 0..2 {
            let brute = (0..1u64 << 3)
                .flat_map(|x| (0..8u64).map(move |y| (x, y)))
                .filter(|&(x, y)| emb.indicator(a, x, &BitVec::from_u64(3, y)))
                .count();
            assert!((emb.lifted_sum(a).value() - brute as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn lifting_chain_on_small_grids() {
        let mut rng = rng_from_seed(8);
        for _ in 0..10 {
            let inst = gen_ising_grid_with(2, 3, 0.3, 1.0, 2, &mut rng).unwrap();
            let (m, n) = (inst.m(), inst.n());
            let emb = embed(&inst, None).unwrap().unwrap();
            let opt = (0..1u64 << m)
                .map(|a| {
                    count_exact(&inst, &BitVec::from_u64(m, a), DEFAULT_ENUM_BITS)
                        .unwrap()
                        .log_weight()
                        .value()
                })
                .fold(0.0, f64::max);
            let lifted = (0..1u64 << m)
                .map(|a| emb.lifted_sum(a).value())
                .fold(0.0, f64::max);
            let scaled = emb.scale().value() * lifted;
            let slack = emb.max().value() * 2f64.powi(n as i32 - emb.l() as i32);
            assert!(opt <= scaled * (1.0 + 1e-9));
            assert!(scaled <= (2.0 * opt + slack) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn scaling_leaves_the_lift_unchanged() {
        let mut rng = rng_from_seed(4);
        let max = LogWeight::from_ln(1.3);
        for _ in 0..1000 {
            let w = max * LogWeight::from_ln(-rng.random_range(0.0..8.0));
            let gamma = LogWeight::from_ln(rng.random_range(-3.0..3.0));
            assert_eq!(free_count(w, max, 7), free_count(w * gamma, max * gamma, 7));
        }
    }

    #[test]
    fn flat_grid_estimate() {
        let inst = MmapInstance::ising(IsingGrid::zeros(1, 4, &[0]).unwrap());
        let cfg = EstimatorConfig {
            seed: 5,
            replicates: Some(9),
            ..Default::default()
        };
        let r = weighted_mmap(&inst, &cfg, None).unwrap();
        // OPT = 2^3; window from the unweighted guarantee
        let e = r.estimate.log2();
        assert!((-1.0..=7.0).contains(&e), "{e}");
        assert!(r.opt_lower.log2() <= r.opt_upper.log2());
        let cfg = EstimatorConfig {
            engine: Engine::JointDpll,
            ..cfg
        };
        assert!(matches!(
            weighted_mmap(&inst, &cfg, None),
            Err(Error::Unsupported(_))
        ));
    }
}
