//! Fixed benchmark inputs shared by the criterion targets.

use xormmap::gf2::ParitySystem;
use xormmap::instances::{gen_ising_grid_with, gen_random_2sat};
use xormmap::oracle::{build_replicated, ReplicatedProblem};
use xormmap::seed::rng_from_seed;
use xormmap::MmapInstance;

/// A random 2-SAT instance at desk scale.
pub fn two_sat(n_total: usize, m: usize, clauses: usize, seed: u64) -> MmapInstance {
    gen_random_2sat(n_total, m, clauses, &mut rng_from_seed(seed)).expect("valid generator parameters")
}

/// A grid Ising model with `m` decision nodes.
pub fn ising(rows: usize, cols: usize, m: usize, seed: u64) -> MmapInstance {
    gen_ising_grid_with(rows, cols, 0.1, 1.0, m, &mut rng_from_seed(seed))
        .expect("valid generator parameters")
}

/// `t` replicates with `k` rows each.
pub fn replicated(inst: &MmapInstance, t: usize, k: usize, seed: u64) -> ReplicatedProblem {
    build_replicated(inst, t, k, &mut rng_from_seed(seed)).expect("CNF instance")
}

pub fn parity(dim: usize, k: usize, seed: u64) -> ParitySystem {
    xormmap::gf2::sample_parity(dim, k, &mut rng_from_seed(seed))
}
