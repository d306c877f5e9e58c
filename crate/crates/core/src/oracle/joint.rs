//! Branch-and-bound over the decision bits of a replicated problem.
//!
//! A node fixes a prefix of the decision bits (highest index first, 0 before
//! 1, so leaves are visited in increasing integer order). Each replicate is
//! then checked with the unfixed decision bits left free, which is an upper
//! bound on whether it can still count in the subtree. A replicate that fails
//! the check is dropped for the whole subtree; one that passes keeps its
//! witness until a fixed bit contradicts it. The node is pruned once the
//! surviving replicates cannot beat the incumbent.

use super::dpll::{branch_order, XorDpll};
use super::replicated::ReplicatedProblem;
use super::{Exceeded, Meter, OracleOptions, OracleResult, OracleStatus};
use crate::gf2::{BitVec, EchelonForm, ParitySystem, PartialAssignment};
use crate::model::Lit;

struct Replicate {
    ef: EchelonForm,
    order: Vec<usize>,
}

struct Search<'a> {
    m: usize,
    n: usize,
    clauses: &'a [Vec<Lit>],
    reps: Vec<Replicate>,
    threshold: u32,
    early_stop: bool,
    best: OracleResult,
    meter: Meter,
}

/// Witness over `(a, x)` in the local numbering (decision `0..m`, then `x`).
type Local = Option<BitVec>;

pub(crate) fn solve(rep: &ReplicatedProblem, threshold: u32, opts: &OracleOptions) -> OracleResult {
    let (m, n, t) = (rep.m(), rep.n(), rep.replicates());
    let reps = rep
        .systems()
        .iter()
        .map(|ps| {
            // the same rows, lifted to the joint (a, x) space
            let rows = ps.rows().iter().map(|r| BitVec::zeros(m).concat(r)).collect();
            let lifted =
                ParitySystem::new(m + n, rows, ps.rhs().clone()).expect("lifted rows have dimension m + n");
            let mut order: Vec<usize> = branch_order(ps).into_iter().map(|j| m + j).collect();
            order.extend(0..m);
            Replicate {
                ef: lifted.eliminate(),
                order,
            }
        })
        .collect();
    let mut search = Search {
        m,
        n,
        clauses: rep.base().clauses(),
        reps,
        threshold,
        early_stop: opts.early_stop,
        best: OracleResult {
            objective: 0,
            argmax: BitVec::zeros(m),
            witnesses: vec![None; t],
            nodes: 0,
            wall: Default::default(),
            status: OracleStatus::Optimal,
        },
        meter: Meter::new(opts.budget),
    };
    let root = PartialAssignment::empty(m + n);
    let status = match search.node(root, vec![Some(BitVec::zeros(0)); t]) {
        Ok(true) if (search.best.objective as usize) < t => OracleStatus::ThresholdReached,
        Ok(_) => OracleStatus::Optimal,
        Err(Exceeded) => OracleStatus::BudgetExceeded,
    };
    let mut best = search.best;
    best.status = status;
    best.nodes = search.meter.nodes();
    best.wall = search.meter.elapsed();
    best
}

impl Search<'_> {
    /// `alive[i]` is `None` once replicate `i` is infeasible in this subtree;
    /// a zero-length witness means "not checked yet". `Ok(true)` asks every
    /// caller to stop (threshold certified).
    fn node(&mut self, fixed: PartialAssignment, mut alive: Vec<Local>) -> Result<bool, Exceeded> {
        self.meter.tick()?;
        let depth = fixed.num_assigned();
        let mut ub = alive.iter().filter(|w| w.is_some()).count() as u32;
        for (slot, r) in alive.iter_mut().zip(&self.reps) {
            if ub <= self.best.objective {
                return Ok(false);
            }
            let stale = match slot {
                None => continue,
                Some(w) => w.is_empty() || !agrees(w, &fixed, self.m),
            };
            if stale {
                let dpll = XorDpll::new(self.m + self.n, self.clauses, &r.ef, &r.order);
                *slot = dpll.solve_from(fixed.clone(), &mut self.meter)?;
                if slot.is_none() {
                    ub -= 1;
                }
            }
        }
        if ub <= self.best.objective {
            return Ok(false);
        }
        if depth == self.m {
            // every surviving replicate now has an exact witness under a
            self.best.objective = ub;
            self.best.argmax = head(fixed.values(), self.m);
            self.best.witnesses = alive
                .iter()
                .map(|w| w.as_ref().map(|v| tail(v, self.m)))
                .collect();
            let done = ub as usize == alive.len() || (self.early_stop && ub >= self.threshold);
            return Ok(done);
        }
        let var = self.m - 1 - depth;
        for value in [false, true] {
            let mut child = fixed.clone();
            child.assign(var, value);
            if self.node(child, alive.clone())? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn agrees(w: &BitVec, fixed: &PartialAssignment, m: usize) -> bool {
    (0..m).all(|v| fixed.get(v).is_none_or(|b| w.get(v) == b))
}

fn head(v: &BitVec, m: usize) -> BitVec {
    let bits: Vec<bool> = v.iter().take(m).collect();
    BitVec::from_bools(&bits)
}

fn tail(v: &BitVec, m: usize) -> BitVec {
    let bits: Vec<bool> = v.iter().skip(m).collect();
    BitVec::from_bools(&bits)
}
