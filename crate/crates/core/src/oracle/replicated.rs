use rand::RngCore;

use super::dpll::{branch_order, clauses_hold, reduce_under_decision, XorDpll};
use super::{joint, Engine, Exceeded, Meter, OracleOptions, OracleResult, OracleStatus};
use crate::error::{Error, Result};
use crate::gf2::{sample_parity, BitVec, ParitySystem};
use crate::model::{CnfFormula, Lit, MmapInstance};

/// `T` copies of the marginal bits sharing one decision vector, each copy
/// under its own parity system.
///
/// Variables are numbered as in the DIMACS export (0-based here): decision
/// bits `0..m`, copy `i` of marginal bit `j` at `m + i*n + j`, and the
/// replicate indicator `y_i` at `m + T*n + i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplicatedProblem {
    m: usize,
    n: usize,
    k: usize,
    /// Base clauses over decision `0..m` and marginal `m..m+n`.
    base: CnfFormula,
    systems: Vec<ParitySystem>,
}

/// Samples `t` parity systems of `k` rows each from `rng`, in replicate order.
pub fn build_replicated<R: RngCore + ?Sized>(
    inst: &MmapInstance,
    t: usize,
    k: usize,
    rng: &mut R,
) -> Result<ReplicatedProblem> {
    let systems = (0..t).map(|_| sample_parity(inst.n(), k, rng)).collect();
    ReplicatedProblem::from_systems(inst, systems)
}

impl ReplicatedProblem {
    pub fn from_systems(inst: &MmapInstance, systems: Vec<ParitySystem>) -> Result<Self> {
        let base = inst
            .canonical_formula()
            .ok_or_else(|| Error::Unsupported("replicated problems need a CNF instance".into()))?;
        Self::new(inst.m(), inst.n(), base, systems)
    }

    pub(crate) fn new(m: usize, n: usize, base: CnfFormula, systems: Vec<ParitySystem>) -> Result<Self> {
        if systems.is_empty() {
            return Err(Error::param("at least one replicate is required"));
        }
        let k = systems[0].num_rows();
        for ps in &systems {
            if ps.dim() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: ps.dim(),
                });
            }
            if ps.num_rows() != k {
                return Err(Error::param("replicates must share the row count k"));
            }
        }
        if base.num_vars() != m + n {
            return Err(Error::malformed("base formula does not match m + n"));
        }
        Ok(Self {
            m,
            n,
            k,
            base,
            systems,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn replicates(&self) -> usize {
        self.systems.len()
    }

    pub fn base(&self) -> &CnfFormula {
        &self.base
    }

    pub fn systems(&self) -> &[ParitySystem] {
        &self.systems
    }

    /// `m + T*n + T`.
    pub fn num_vars(&self) -> usize {
        self.m + self.replicates() * (self.n + 1)
    }

    pub fn x_var(&self, replicate: usize, j: usize) -> usize {
        self.m + replicate * self.n + j
    }

    pub fn y_var(&self, replicate: usize) -> usize {
        self.m + self.replicates() * self.n + replicate
    }

    /// Base clause `c` of replicate `i`, renamed to copy `i` and extended with
    /// `not y_i`.
    pub fn augmented_clause(&self, replicate: usize, clause: &[Lit]) -> Vec<Lit> {
        let mut out: Vec<Lit> = clause
            .iter()
            .map(|&l| {
                if l.var() < self.m {
                    l
                } else {
                    Lit::new(self.x_var(replicate, l.var() - self.m), l.is_negated())
                }
            })
            .collect();
        out.push(Lit::neg(self.y_var(replicate)));
        out
    }

    /// Every augmented clause, replicate by replicate.
    pub fn augmented_clauses(&self) -> Vec<Vec<Lit>> {
        (0..self.replicates())
            .flat_map(|i| {
                self.base
                    .clauses()
                    .iter()
                    .map(move |c| self.augmented_clause(i, c))
            })
            .collect()
    }

    /// Is replicate `i` satisfied by `(a, x)`?
    pub fn replicate_holds(&self, replicate: usize, a: &BitVec, x: &BitVec) -> bool {
        let m = self.m;
        self.systems[replicate].satisfied_unchecked(x)
            && self
                .base
                .satisfied_by(|v| if v < m { a.get(v) } else { x.get(v - m) })
    }

    /// Checks a result's witness against every clause and parity row.
    pub fn verify(&self, result: &OracleResult) -> Result<()> {
        if result.witnesses.len() != self.replicates() || result.argmax.len() != self.m {
            return Err(Error::Invariant("witness has the wrong shape".into()));
        }
        let mut count = 0;
        for (i, w) in result.witnesses.iter().enumerate() {
            if let Some(x) = w {
                if x.len() != self.n || !self.replicate_holds(i, &result.argmax, x) {
                    return Err(Error::Invariant(format!(
                        "replicate {i} witness violates a clause or parity row"
                    )));
                }
                count += 1;
            }
        }
        if count != result.objective {
            return Err(Error::Invariant(format!(
                "objective {} but {count} witnessed replicates",
                result.objective
            )));
        }
        Ok(())
    }
}

/// `max_{a, x_i} sum_i w(a, x_i)` subject to `h_i(x_i) = 0`, with replicates
/// whose constraints cannot hold contributing zero.
pub fn solve_replicated(
    rep: &ReplicatedProblem,
    threshold: u32,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    let t = rep.replicates() as u32;
    if threshold < 1 || threshold > t {
        return Err(Error::param(format!("threshold {threshold} outside [1, {t}]")));
    }
    let result = match opts.engine {
        Engine::EnumerateA => enumerate_a(rep, opts)?,
        Engine::JointDpll => joint::solve(rep, threshold, opts),
    };
    rep.verify(&result)?;
    Ok(result)
}

fn enumerate_a(rep: &ReplicatedProblem, opts: &OracleOptions) -> Result<OracleResult> {
    let (m, n, t) = (rep.m(), rep.n(), rep.replicates());
    if m >= 63 {
        return Err(Error::EnumerationBudget {
            bits: m,
            cap_bits: 62,
        });
    }
    let echelons: Vec<_> = rep.systems().iter().map(|ps| ps.eliminate()).collect();
    let orders: Vec<_> = rep.systems().iter().map(branch_order).collect();
    let mut meter = Meter::new(opts.budget);
    let mut best = OracleResult {
        objective: 0,
        argmax: BitVec::zeros(m),
        witnesses: vec![None; t],
        nodes: 0,
        wall: Default::default(),
        status: OracleStatus::Optimal,
    };
    let mut exceeded = false;
    'decisions: for a_int in 0..1u64 << m {
        let a = BitVec::from_u64(m, a_int);
        let Some(clauses) = reduce_under_decision(rep.base().clauses(), m, &a) else {
            continue;
        };
        let mut witnesses = vec![None; t];
        let mut count = 0u32;
        for i in 0..t {
            // the remaining replicates cannot lift this a above the incumbent
            if count + (t - i) as u32 <= best.objective {
                break;
            }
            match XorDpll::new(n, &clauses, &echelons[i], &orders[i]).solve(&mut meter) {
                Ok(Some(x)) => {
                    debug_assert!(clauses_hold(&clauses, &x));
                    witnesses[i] = Some(x);
                    count += 1;
                }
                Ok(None) => {}
                Err(Exceeded) => {
                    exceeded = true;
                    if count > best.objective {
                        best.objective = count;
                        best.argmax = a;
                        best.witnesses = witnesses;
                    }
                    break 'decisions;
                }
            }
        }
        if count > best.objective {
            best.objective = count;
            best.argmax = a;
            best.witnesses = witnesses;
            if count as usize == t {
                break;
            }
        }
    }
    best.nodes = meter.nodes();
    best.wall = meter.elapsed();
    if exceeded {
        best.status = OracleStatus::BudgetExceeded;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarSpace;
    use crate::oracle::Budget;
    use crate::seed::rng_from_seed;

    fn inst(m: usize, n: usize, clauses: Vec<Vec<Lit>>) -> MmapInstance {
        MmapInstance::cnf(
            VarSpace::canonical(m, n).unwrap(),
            CnfFormula::new(m + n, clauses).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn shape() {
        let base = inst(2, 5, vec![vec![Lit::pos(0), Lit::pos(3)]]);
        let rep = build_replicated(&base, 3, 2, &mut rng_from_seed(4)).unwrap();
        assert_eq!(rep.replicates(), 3);
        assert!(rep.systems().iter().all(|ps| ps.num_rows() == 2 && ps.dim() == 5));
        assert_eq!(rep.num_vars(), 2 + 3 * 5 + 3);
    }

    #[test]
    fn augmented_clause_renames_into_the_copy() {
        // (a1 or x2) with m = 1: x2 is canonical variable 2
        let base = inst(1, 3, vec![vec![Lit::pos(0), Lit::pos(2)]]);
        let rep = build_replicated(&base, 3, 0, &mut rng_from_seed(4)).unwrap();
        // replicate 2 is index 1; x2 is marginal position 1
        let c = rep.augmented_clause(1, &rep.base().clauses()[0]);
        assert_eq!(
            c,
            vec![Lit::pos(0), Lit::pos(rep.x_var(1, 1)), Lit::neg(rep.y_var(1))]
        );
    }

    #[test]
    fn trivial_objectives() {
        let opts = OracleOptions {
            early_stop: false,
            ..Default::default()
        };
        let unsat = inst(1, 2, vec![vec![Lit::pos(1)], vec![Lit::neg(1)]]);
        let free = inst(1, 2, vec![]);
        for engine in [Engine::EnumerateA, Engine::JointDpll] {
            let opts = OracleOptions { engine, ..opts };
            for k in 0..=2 {
                let rep = build_replicated(&unsat, 3, k, &mut rng_from_seed(k as u64)).unwrap();
                assert_eq!(solve_replicated(&rep, 1, &opts).unwrap().objective, 0);
            }
            let rep = build_replicated(&free, 4, 0, &mut rng_from_seed(0)).unwrap();
            let r = solve_replicated(&rep, 1, &opts).unwrap();
            assert_eq!(r.objective, 4);
            assert_eq!(r.status, OracleStatus::Optimal);
            let single = build_replicated(&free, 1, 0, &mut rng_from_seed(0)).unwrap();
            assert_eq!(solve_replicated(&single, 1, &opts).unwrap().objective, 1);
        }
    }

    #[test]
    fn threshold_range() {
        let free = inst(1, 2, vec![]);
        let rep = build_replicated(&free, 2, 0, &mut rng_from_seed(0)).unwrap();
        assert!(solve_replicated(&rep, 0, &OracleOptions::default()).is_err());
        assert!(solve_replicated(&rep, 3, &OracleOptions::default()).is_err());
    }

    #[test]
    fn budget_is_explicit() {
        let free = inst(3, 8, vec![vec![Lit::pos(4), Lit::pos(5)]]);
        let rep = build_replicated(&free, 4, 3, &mut rng_from_seed(2)).unwrap();
        for engine in [Engine::EnumerateA, Engine::JointDpll] {
            let opts = OracleOptions {
                engine,
                budget: Budget {
                    node_cap: Some(2),
                    time_limit: None,
                },
                early_stop: false,
            };
            let r = solve_replicated(&rep, 3, &opts).unwrap();
            assert_eq!(r.status, OracleStatus::BudgetExceeded);
        }
    }
}
