//! Marginal MAP estimation with hashed parity constraints.
//!
//! `max_a sum_x w(a, x)` is approximated by asking, for decreasing `k`,
//! whether a majority of `T` independently hashed copies of the marginal
//! space keep a surviving point for one shared `a`. The largest such `k`
//! gives a constant-factor estimate of the optimum with high probability.
//!
//! * [`model`]: instances (CNF indicators, grid Ising models) and weights.
//! * [`gf2`]: bit vectors, random parity systems, elimination.
//! * [`oracle`]: the emptiness and replicated optimisation queries.
//! * [`mmap`]: the estimator and its parameter formulas.
//! * [`variants`]: binary-search, repeated-trial and biased-threshold sweeps.
//! * [`weighted`]: the weighted-to-unweighted lift.
//! * [`baselines`]: exact enumeration and sample average approximation.
//! * [`instances`]: generators and file formats.

pub mod baselines;
pub mod error;
pub mod gf2;
pub mod instances;
pub mod mmap;
pub mod model;
pub mod oracle;
pub mod seed;
pub mod variants;
pub mod weighted;

pub use error::{Error, Result};
pub use gf2::{BitVec, ParitySystem};
pub use mmap::{xor_mmap, EstimateReport, EstimatorConfig, Outcome, ReportStatus, RunRecord, Sweep};
pub use model::{LogWeight, MmapInstance};
pub use oracle::{Budget, Engine, OracleOptions};
pub use seed::SeedTree;
