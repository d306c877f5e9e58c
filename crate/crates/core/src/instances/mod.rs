//! Benchmark generators and the two on-disk instance formats.

mod format;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{CnfFormula, IsingGrid, Lit, MmapInstance, VarSpace};

pub use format::{format_instance, parse_instance, read_instance, write_instance};

/// Random 2-SAT: `m_count` decision variables drawn without replacement,
/// then `n_clauses` clauses over two distinct uniform variables with fair
/// signs. Duplicate clauses are kept.
pub fn gen_random_2sat<R: Rng + ?Sized>(
    n_total: usize,
    m_count: usize,
    n_clauses: usize,
    rng: &mut R,
) -> Result<MmapInstance> {
    if n_total < 2 {
        return Err(Error::param("2-SAT needs at least two variables"));
    }
    if m_count >= n_total {
        return Err(Error::param("need at least one marginal variable"));
    }
    let mut decision = sample(rng, n_total, m_count).into_vec();
    decision.sort_unstable();
    let clauses = (0..n_clauses)
        .map(|_| {
            let pair = sample(rng, n_total, 2);
            pair.iter().map(|v| Lit::new(v, rng.random::<bool>())).collect()
        })
        .collect();
    MmapInstance::cnf(
        VarSpace::new(n_total, &decision)?,
        CnfFormula::new(n_total, clauses)?,
    )
}

/// Grid Ising model with fields `U[-f, f]`, couplings `U[-w, w]` and
/// `floor(max_fraction * rows * cols)` decision nodes.
pub fn gen_ising_grid<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    field_strength: f64,
    coupling_strength: f64,
    max_fraction: f64,
    rng: &mut R,
) -> Result<MmapInstance> {
    if !(0.0..=1.0).contains(&max_fraction) {
        return Err(Error::param("max fraction must lie in [0, 1]"));
    }
    // the small epsilon keeps e.g. 0.2 * 10 from flooring to 1
    let count = (max_fraction * (rows * cols) as f64 + 1e-9).floor() as usize;
    gen_ising_grid_with(rows, cols, field_strength, coupling_strength, count, rng)
}

/// As [`gen_ising_grid`] with an explicit decision-node count.
pub fn gen_ising_grid_with<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    field_strength: f64,
    coupling_strength: f64,
    m_count: usize,
    rng: &mut R,
) -> Result<MmapInstance> {
    if rows == 0 || cols == 0 {
        return Err(Error::param("grid needs at least one row and column"));
    }
    for s in [field_strength, coupling_strength] {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::param("strengths must be finite and non-negative"));
        }
    }
    let nodes = rows * cols;
    if m_count >= nodes {
        return Err(Error::param("need at least one marginal node"));
    }
    let mut uniform = |s: f64| if s == 0.0 { 0.0 } else { rng.random_range(-s..=s) };
    let field = (0..nodes).map(|_| uniform(field_strength)).collect();
    let horizontal = (0..rows * (cols - 1))
        .map(|_| uniform(coupling_strength))
        .collect();
    let vertical = (0..(rows - 1) * cols)
        .map(|_| uniform(coupling_strength))
        .collect();
    let mut decision = vec![false; nodes];
    for d in sample(rng, nodes, m_count) {
        decision[d] = true;
    }
    Ok(MmapInstance::ising(IsingGrid::new(
        rows, cols, field, horizontal, vertical, decision,
    )?))
}

/// `w(a, x) = 1` iff `x = a`, with `m = n`. Every decision vector has exactly
/// one satisfying `x`, so the optimum is 1.
pub fn gen_eq_instance(n: usize) -> Result<MmapInstance> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let clauses = (0..n)
        .flat_map(|p| {
            [
                vec![Lit::neg(p), Lit::pos(n + p)],
                vec![Lit::pos(p), Lit::neg(n + p)],
            ]
        })
        .collect();
    MmapInstance::cnf(VarSpace::canonical(n, n)?, CnfFormula::new(2 * n, clauses)?)
}

/// `m` unconstrained decision bits and `n` marginal bits of which the first
/// `free` are unconstrained and the rest are forced to zero: `#w(a) = 2^free`
/// for every `a`.
pub fn gen_free_block(m: usize, n: usize, free: usize) -> Result<MmapInstance> {
    if free > n {
        return Err(Error::param("free block larger than n"));
    }
    let clauses = (free..n).map(|p| vec![Lit::neg(m + p)]).collect();
    MmapInstance::cnf(VarSpace::canonical(m, n)?, CnfFormula::new(m + n, clauses)?)
}
