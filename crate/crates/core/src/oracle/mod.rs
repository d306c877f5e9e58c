//! Optimization queries behind the estimators.
//!
//! * [`solve_emptiness`]: is `{x : w(a0, x) = 1, h(x) = 0}` non-empty?
//! * [`solve_replicated`]: `max_a sum_i w(a, x_i)` over `T` hashed replicates,
//!   with two engines that must agree on every threshold decision.
//! * [`weighted_replicate_feasible`]: the same question for the embedded
//!   weighted indicator, answered by enumeration over `x`.
//! * [`export_dimacs_xor`]: the replicated problem as extended DIMACS.

mod count;
mod dimacs;
mod dpll;
mod joint;
mod replicated;
mod weighted;

use std::time::{Duration, Instant};

use crate::error::Error;
use crate::gf2::BitVec;

pub use count::{count_exact, MarginalSum};
pub use dimacs::{export_dimacs_xor, parse_dimacs_xor, XorExport};
pub use dpll::{solve_emptiness, Emptiness};
pub use replicated::{build_replicated, solve_replicated, ReplicatedProblem};
pub use weighted::{solve_weighted_replicated, weighted_replicate_feasible};

/// Which search answers a replicated query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    /// Loop over every decision vector; replicates decouple and each is a
    /// separate DPLL+XOR feasibility check. Exact.
    #[default]
    EnumerateA,
    /// One branch-and-bound over the decision bits, bounded by the number of
    /// replicates still feasible with the unfixed decision bits left free.
    JointDpll,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::EnumerateA => "enumerate-a",
            Engine::JointDpll => "joint-dpll",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "enumerate-a" => Ok(Engine::EnumerateA),
            "joint-dpll" => Ok(Engine::JointDpll),
            other => Err(Error::param(format!("unknown engine {other:?}"))),
        }
    }
}

/// Per-call search limits. Exceeding either is reported, never read as
/// "infeasible".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub node_cap: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub engine: Engine,
    pub budget: Budget,
    /// Let the joint engine stop once the threshold is certified.
    pub early_stop: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            engine: Engine::EnumerateA,
            budget: Budget::unlimited(),
            early_stop: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleStatus {
    /// `objective` is the exact maximum.
    Optimal,
    /// Search stopped early: `objective >= threshold` is certified by the
    /// witness, but a larger value may exist.
    ThresholdReached,
    /// A limit was hit; `objective` is only a lower bound.
    BudgetExceeded,
}

impl OracleStatus {
    pub fn name(self) -> &'static str {
        match self {
            OracleStatus::Optimal => "optimal",
            OracleStatus::ThresholdReached => "threshold-reached",
            OracleStatus::BudgetExceeded => "budget-exceeded",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// Number of replicates satisfied by the witness.
    pub objective: u32,
    /// Decision vector of the witness.
    pub argmax: BitVec,
    /// Per replicate, the hashed-space witness when that replicate counts.
    pub witnesses: Vec<Option<BitVec>>,
    pub nodes: u64,
    pub wall: Duration,
    pub status: OracleStatus,
}

/// Limit was hit mid-search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Exceeded;

/// Node and wall-clock accounting for one oracle call.
#[derive(Debug)]
pub(crate) struct Meter {
    nodes: u64,
    start: Instant,
    budget: Budget,
}

impl Meter {
    pub(crate) fn new(budget: Budget) -> Self {
        Self {
            nodes: 0,
            start: Instant::now(),
            budget,
        }
    }

    #[inline]
    pub(crate) fn tick(&mut self) -> Result<(), Exceeded> {
        self.nodes += 1;
        if let Some(cap) = self.budget.node_cap {
            if self.nodes > cap {
                return Err(Exceeded);
            }
        }
        if let Some(limit) = self.budget.time_limit {
            if self.nodes.is_multiple_of(256) && self.start.elapsed() > limit {
                return Err(Exceeded);
            }
        }
        Ok(())
    }

    pub(crate) fn nodes(&self) -> u64 {
        self.nodes
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}
