//! Reference methods: exact enumeration and sample average approximation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::model::{check_enum, LogWeight, MmapInstance, DEFAULT_ENUM_BITS};
use crate::oracle::{count_exact, MarginalSum};

/// The exact optimum and its lowest-integer maximiser.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub argmax: BitVec,
    pub opt: MarginalSum,
}

/// `max_a sum_x w(a, x)` by full enumeration.
pub fn exact_mmap(inst: &MmapInstance, cap_bits: usize) -> Result<ExactSolution> {
    let (m, n) = (inst.m(), inst.n());
    check_enum(m + n, cap_bits)?;
    let mut best: Option<(u64, MarginalSum)> = None;
    for a in 0..1u64 << m {
        let s = count_exact(inst, &BitVec::from_u64(m, a), cap_bits)?;
        let better = match best {
            None => true,
            Some((_, b)) => s.log_weight().ln() > b.log_weight().ln(),
        };
        if better {
            best = Some((a, s));
        }
    }
    let (a, opt) = best.expect("at least one decision vector");
    Ok(ExactSolution {
        argmax: BitVec::from_u64(m, a),
        opt,
    })
}

/// `log10 sum_x w(a, x)`; `-inf` when the sum is zero.
pub fn score_solution(inst: &MmapInstance, a: &BitVec, cap_bits: usize) -> Result<f64> {
    Ok(count_exact(inst, a, cap_bits)?.log_weight().log10())
}

/// Which marginal points SAA averages over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaaSamples {
    /// `N` uniform draws, with repetition.
    Random(usize),
    /// Every `x` once; SAA then equals exact optimisation.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SaaOptions {
    pub samples: SaaSamples,
    /// Enumerate decision vectors up to `2^enum_cap_bits`.
    pub enum_cap_bits: usize,
    /// Above the cap, run this many greedy bit-flip restarts; 0 turns local
    /// search off and makes a large `m` an error.
    pub restarts: usize,
}

impl Default for SaaOptions {
    fn default() -> Self {
        Self {
            samples: SaaSamples::Random(10_000),
            enum_cap_bits: 20,
            restarts: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaaSolution {
    pub argmax: BitVec,
    /// `(2^n / N) sum_j w(a, x_j)`, the sample estimate of the marginal sum.
    pub estimate: LogWeight,
    pub samples: usize,
}

/// Sample average approximation: fix a sample of `x`, then maximise the
/// sample sum over `a`. Ties go to the lowest integer `a`.
pub fn saa_solve<R: Rng + ?Sized>(
    inst: &MmapInstance,
    opts: &SaaOptions,
    rng: &mut R,
) -> Result<SaaSolution> {
    let (m, n) = (inst.m(), inst.n());
    check_enum(m, 63)?;
    check_enum(n, 63)?;
    let xs: Vec<u64> = match opts.samples {
        SaaSamples::Random(0) => return Err(Error::param("SAA needs at least one sample")),
        SaaSamples::Random(count) => sample_marginals(n, count, rng),
        SaaSamples::Exhaustive => {
            check_enum(n, DEFAULT_ENUM_BITS)?;
            (0..1u64 << n).collect()
        }
    };
    let score = |a: u64| -> LogWeight { xs.iter().map(|&x| inst.log_weight_ints(a, x)).sum() };
    let better = |s: LogWeight, a: u64, best: &(LogWeight, u64)| {
        s.ln() > best.0.ln() || (s.ln() == best.0.ln() && a < best.1)
    };

    let (best_score, best_a) = if m <= opts.enum_cap_bits {
        let mut best = (score(0), 0u64);
        for a in 1..1u64 << m {
            let s = score(a);
            if better(s, a, &best) {
                best = (s, a);
            }
        }
        best
    } else if opts.restarts == 0 {
        return Err(Error::EnumerationBudget {
            bits: m,
            cap_bits: opts.enum_cap_bits,
        });
    } else {
        let mask = (1u64 << m) - 1;
        let mut best = (LogWeight::ZERO, u64::MAX);
        for restart in 0..opts.restarts {
            // the first restart starts from all-zeros so ties favour low a
            let mut a = if restart == 0 {
                0
            } else {
                rng.random::<u64>() & mask
            };
            let mut cur = score(a);
            loop {
                let mut step: Option<(LogWeight, u64)> = None;
                for bit in 0..m {
                    let b = a ^ (1 << bit);
                    let s = score(b);
                    if step.is_none_or(|st| better(s, b, &st)) {
                        step = Some((s, b));
                    }
                }
                match step {
                    Some((s, b)) if s.ln() > cur.ln() => {
                        cur = s;
                        a = b;
                    }
                    _ => break,
                }
            }
            if better(cur, a, &best) {
                best = (cur, a);
            }
        }
        best
    };
    Ok(SaaSolution {
        argmax: BitVec::from_u64(m, best_a),
        estimate: best_score * sample_scale(n, xs.len()),
        samples: xs.len(),
    })
}

/// `count` uniform integer-coded points of `{0,1}^n`, `n < 64`.
pub fn sample_marginals<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<u64> {
    let mask = (1u64 << n) - 1;
    (0..count).map(|_| rng.random::<u64>() & mask).collect()
}

/// `(2^n / N) sum_j w(a, x_j)` over the given sample.
pub fn sample_estimate(inst: &MmapInstance, a: u64, xs: &[u64]) -> LogWeight {
    let sum: LogWeight = xs.iter().map(|&x| inst.log_weight_ints(a, x)).sum();
    sum * sample_scale(inst.n(), xs.len())
}

fn sample_scale(n: usize, count: usize) -> LogWeight {
    LogWeight::pow2(n as i64) / LogWeight::from_count(count as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_eq_instance, gen_ising_grid_with, gen_random_2sat};
    use crate::model::{CnfFormula, IsingGrid, Lit, VarSpace};
    use crate::seed::rng_from_seed;

    #[test]
    fn exact_examples() {
        let free = MmapInstance::cnf(VarSpace::canonical(2, 4).unwrap(), CnfFormula::empty(6)).unwrap();
        let e = exact_mmap(&free, DEFAULT_ENUM_BITS).unwrap();
        assert_eq!(e.opt, MarginalSum::Count(16));
        assert_eq!(e.argmax, BitVec::zeros(2));
        let eq = exact_mmap(&gen_eq_instance(4).unwrap(), DEFAULT_ENUM_BITS).unwrap();
        assert_eq!(eq.opt, MarginalSum::Count(1));
        let flat = MmapInstance::ising(IsingGrid::zeros(2, 2, &[1]).unwrap());
        let e = exact_mmap(&flat, DEFAULT_ENUM_BITS).unwrap();
        assert!((e.opt.log_weight().log2() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_agrees_with_nested_loops() {
        let mut rng = rng_from_seed(12);
        for _ in 0..20 {
            let inst = gen_random_2sat(9, 4, 9, &mut rng).unwrap();
            let (m, n) = (inst.m() as u64, inst.n() as u64);
            let mut best = (0u64, 0u64);
            for a in 0..1 << m {
                let mut count = 0;
                for x in 0..1 << n {
                    if inst.indicator_ints(a, x) {
                        count += 1;
                    }
                }
                if count > best.1 {
                    best = (a, count);
                }
            }
            let e = exact_mmap(&inst, DEFAULT_ENUM_BITS).unwrap();
            assert_eq!(e.opt, MarginalSum::Count(best.1));
            if best.1 > 0 {
                assert_eq!(e.argmax.to_u64(), best.0);
            }
            let s = score_solution(&inst, &e.argmax, DEFAULT_ENUM_BITS).unwrap();
            assert!((s - (best.1 as f64).log10()).abs() < 1e-12 || best.1 == 0);
        }
    }

    #[test]
    fn unsatisfiable_scores_neg_inf() {
        let f = CnfFormula::new(2, vec![vec![Lit::pos(1)], vec![Lit::neg(1)]]).unwrap();
        let inst = MmapInstance::cnf(VarSpace::canonical(1, 1).unwrap(), f).unwrap();
        assert_eq!(
            score_solution(&inst, &BitVec::zeros(1), 20).unwrap(),
            f64::NEG_INFINITY
        );
        let s = saa_solve(&inst, &SaaOptions::default(), &mut rng_from_seed(0)).unwrap();
        assert_eq!(s.argmax, BitVec::zeros(1));
        assert!(s.estimate.is_zero());
    }

    #[test]
    fn exhaustive_saa_is_exact() {
        let mut rng = rng_from_seed(3);
        let opts = SaaOptions {
            samples: SaaSamples::Exhaustive,
            ..Default::default()
        };
        for _ in 0..10 {
            let inst = gen_random_2sat(10, 4, 10, &mut rng).unwrap();
            let e = exact_mmap(&inst, DEFAULT_ENUM_BITS).unwrap();
            let s = saa_solve(&inst, &opts, &mut rng).unwrap();
            assert_eq!(e.argmax, s.argmax);
            assert!(
                (s.estimate.ln() - e.opt.log_weight().ln()).abs() < 1e-9 || e.opt == MarginalSum::Count(0)
            );
        }
    }

    #[test]
    fn eq_instance_saa_scores_at_most_one() {
        let inst = gen_eq_instance(6).unwrap();
        let opts = SaaOptions {
            samples: SaaSamples::Random(20),
            ..Default::default()
        };
        let s = saa_solve(&inst, &opts, &mut rng_from_seed(9)).unwrap();
        // the chosen a was sampled, so its sample sum is its number of copies
        assert!(s.estimate.value() > 0.0);
    }

    #[test]
    fn local_search_beyond_the_cap() {
        let mut rng = rng_from_seed(6);
        let inst = gen_ising_grid_with(3, 3, 0.2, 1.0, 4, &mut rng).unwrap();
        let exact = exact_mmap(&inst, DEFAULT_ENUM_BITS).unwrap();
        let opts = SaaOptions {
            samples: SaaSamples::Exhaustive,
            enum_cap_bits: 1,
            restarts: 16,
        };
        let s = saa_solve(&inst, &opts, &mut rng).unwrap();
        let got = score_solution(&inst, &s.argmax, DEFAULT_ENUM_BITS).unwrap();
        assert!(got <= exact.opt.log_weight().log10() + 1e-12);
        let off = SaaOptions { restarts: 0, ..opts };
        assert!(saa_solve(&inst, &off, &mut rng).is_err());
    }

    #[test]
    fn saa_estimate_is_unbiased() {
        let mut rng = rng_from_seed(21);
        let inst = gen_random_2sat(8, 2, 6, &mut rng).unwrap();
        let a = 1u64;
        let exact = count_exact(&inst, &BitVec::from_u64(2, a), 20)
            .unwrap()
            .log_weight()
            .value();
        let reps = 1000;
        let means: Vec<f64> = (0..reps)
            .map(|_| sample_estimate(&inst, a, &sample_marginals(inst.n(), 50, &mut rng)).value())
            .collect();
        let mu = means.iter().sum::<f64>() / reps as f64;
        let var = means.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!((mu - exact).abs() <= 4.0 * se + 1e-9, "{mu} vs {exact}");
    }
}
