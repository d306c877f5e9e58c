use super::{Budget, Exceeded, Meter};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, EchelonForm, ParitySystem, PartialAssignment};
use crate::model::{Lit, MmapInstance};

/// Answer of an emptiness query for `W(a0, h)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    /// Some `x` satisfies the formula under `a0` and the parity system.
    NonEmpty(BitVec),
}

impl Emptiness {
    pub fn is_nonempty(&self) -> bool {
        matches!(self, Emptiness::NonEmpty(_))
    }
}

/// Decides whether some `x` satisfies both the CNF under `a0` and `ps`.
pub fn solve_emptiness(
    inst: &MmapInstance,
    a0: &BitVec,
    ps: &ParitySystem,
    budget: Budget,
) -> Result<Emptiness> {
    let formula = inst
        .canonical_formula()
        .ok_or_else(|| Error::Unsupported("emptiness queries need a CNF instance".into()))?;
    let (m, n) = (inst.m(), inst.n());
    if a0.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: a0.len(),
        });
    }
    if ps.dim() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: ps.dim(),
        });
    }
    let Some(clauses) = reduce_under_decision(formula.clauses(), m, a0) else {
        return Ok(Emptiness::Empty);
    };
    let ef = ps.eliminate();
    let order = branch_order(ps);
    let mut meter = Meter::new(budget);
    match XorDpll::new(n, &clauses, &ef, &order).solve(&mut meter) {
        Ok(Some(x)) => {
            if !(ps.satisfied_unchecked(&x) && clauses_hold(&clauses, &x)) {
                return Err(Error::Invariant("DPLL witness violates a constraint".into()));
            }
            Ok(Emptiness::NonEmpty(x))
        }
        Ok(None) => Ok(Emptiness::Empty),
        Err(Exceeded) => Err(Error::BudgetExceeded { nodes: meter.nodes() }),
    }
}

/// Drops clauses satisfied by the decision bits and strips decision literals
/// from the rest; marginal variable `m + p` becomes local variable `p`.
/// `None` when some clause is falsified outright.
pub(crate) fn reduce_under_decision(clauses: &[Vec<Lit>], m: usize, a: &BitVec) -> Option<Vec<Vec<Lit>>> {
    let mut out = Vec::with_capacity(clauses.len());
    for clause in clauses {
        let mut sat = false;
        let mut rest = Vec::with_capacity(clause.len());
        for &l in clause {
            if l.var() < m {
                if l.holds(a.get(l.var())) {
                    sat = true;
                    break;
                }
            } else {
                rest.push(Lit::new(l.var() - m, l.is_negated()));
            }
        }
        if sat {
            continue;
        }
        if rest.is_empty() {
            return None;
        }
        out.push(rest);
    }
    Some(out)
}

pub(crate) fn clauses_hold(clauses: &[Vec<Lit>], x: &BitVec) -> bool {
    clauses.iter().all(|c| c.iter().any(|l| l.holds(x.get(l.var()))))
}

/// Coordinates by descending number of parity rows containing them, ties by
/// lowest index.
pub(crate) fn branch_order(ps: &ParitySystem) -> Vec<usize> {
    let mut occ = vec![0usize; ps.dim()];
    for row in ps.rows() {
        for j in row.iter_ones() {
            occ[j] += 1;
        }
    }
    let mut order: Vec<usize> = (0..ps.dim()).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(occ[j]), j));
    order
}

/// DPLL over one variable block with clause and XOR unit propagation.
pub(crate) struct XorDpll<'a> {
    nvars: usize,
    clauses: &'a [Vec<Lit>],
    ef: &'a EchelonForm,
    order: &'a [usize],
}

impl<'a> XorDpll<'a> {
    pub(crate) fn new(
        nvars: usize,
        clauses: &'a [Vec<Lit>],
        ef: &'a EchelonForm,
        order: &'a [usize],
    ) -> Self {
        debug_assert_eq!(ef.dim(), nvars);
        Self {
            nvars,
            clauses,
            ef,
            order,
        }
    }

    pub(crate) fn solve(&self, meter: &mut Meter) -> std::result::Result<Option<BitVec>, Exceeded> {
        self.solve_from(PartialAssignment::empty(self.nvars), meter)
    }

    /// Search below a fixed partial assignment.
    pub(crate) fn solve_from(
        &self,
        mut asg: PartialAssignment,
        meter: &mut Meter,
    ) -> std::result::Result<Option<BitVec>, Exceeded> {
        if !self.ef.is_consistent() {
            return Ok(None);
        }
        let mut trail = Vec::with_capacity(self.nvars);
        if self.search(&mut asg, &mut trail, meter)? {
            Ok(Some(asg.values().clone()))
        } else {
            Ok(None)
        }
    }

    fn search(
        &self,
        asg: &mut PartialAssignment,
        trail: &mut Vec<usize>,
        meter: &mut Meter,
    ) -> std::result::Result<bool, Exceeded> {
        meter.tick()?;
        let mark = trail.len();
        if !self.propagate(asg, trail) {
            undo(asg, trail, mark);
            return Ok(false);
        }
        let Some(&var) = self.order.iter().find(|&&v| asg.get(v).is_none()) else {
            return Ok(true);
        };
        for value in [false, true] {
            asg.assign(var, value);
            trail.push(var);
            if self.search(asg, trail, meter)? {
                return Ok(true);
            }
            undo(asg, trail, trail.len() - 1);
        }
        undo(asg, trail, mark);
        Ok(false)
    }

    /// Runs to a fixpoint; false on conflict.
    fn propagate(&self, asg: &mut PartialAssignment, trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for clause in self.clauses {
                match clause_state(clause, asg) {
                    ClauseState::Done => {}
                    ClauseState::Falsified => return false,
                    ClauseState::Unit(l) => {
                        asg.assign(l.var(), !l.is_negated());
                        trail.push(l.var());
                        changed = true;
                    }
                }
            }
            for (row, &b) in self.ef.rows().iter().zip(self.ef.rhs()) {
                let open = row.and_not(asg.assigned_mask());
                let need = b ^ row.dot(asg.values());
                match open.count_ones() {
                    0 if need => return false,
                    1 => {
                        let v = open.first_one().expect("one open coordinate");
                        asg.assign(v, need);
                        trail.push(v);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }
}

pub(crate) enum ClauseState {
    /// Satisfied, or still has two distinct open literals.
    Done,
    Falsified,
    Unit(Lit),
}

pub(crate) fn clause_state(clause: &[Lit], asg: &PartialAssignment) -> ClauseState {
    let mut open: Option<Lit> = None;
    let mut multi = false;
    for &l in clause {
        match asg.get(l.var()) {
            Some(v) if l.holds(v) => return ClauseState::Done,
            Some(_) => {}
            None => match open {
                None => open = Some(l),
                Some(o) if o == l => {}
                Some(_) => multi = true,
            },
        }
    }
    match (open, multi) {
        (None, _) => ClauseState::Falsified,
        (Some(l), false) => ClauseState::Unit(l),
        (Some(_), true) => ClauseState::Done,
    }
}

fn undo(asg: &mut PartialAssignment, trail: &mut Vec<usize>, mark: usize) {
    while trail.len() > mark {
        let v = trail.pop().expect("trail above mark");
        asg.unassign(v);
    }
}
