//! Replicate feasibility for the embedded weighted indicator.
//!
//! A point `(x, y)` of the embedding carries weight 1 iff every forced
//! coordinate of `y` is zero. With `x` fixed the parity rows become a system
//! over the free `y` coordinates alone, so feasibility is a small elimination
//! per `x`.

use super::{OracleResult, OracleStatus};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, ParitySystem, PartialAssignment};
use crate::model::{check_enum, LogWeight, MmapInstance, DEFAULT_ENUM_BITS};
use crate::weighted::free_count;

/// Does some `(x, y)` in the embedding of `a` satisfy `ps`?
pub fn weighted_replicate_feasible(
    inst: &MmapInstance,
    l: usize,
    max: LogWeight,
    a: &BitVec,
    ps: &ParitySystem,
) -> Result<bool> {
    let free = free_table(inst, l, max, a)?;
    let split = Split::new(ps, inst.n(), l)?;
    Ok((0..free.len() as u64).any(|x| split.witness(x, free[x as usize]).is_some()))
}

/// `max_a` of the number of replicates whose embedding meets their system.
/// Exact; ties go to the lowest decision integer.
pub fn solve_weighted_replicated(
    inst: &MmapInstance,
    l: usize,
    max: LogWeight,
    systems: &[ParitySystem],
) -> Result<OracleResult> {
    let (m, n) = (inst.m(), inst.n());
    check_enum(m, DEFAULT_ENUM_BITS)?;
    let start = std::time::Instant::now();
    let splits = systems
        .iter()
        .map(|ps| Split::new(ps, n, l))
        .collect::<Result<Vec<_>>>()?;
    let t = splits.len();
    let mut best = OracleResult {
        objective: 0,
        argmax: BitVec::zeros(m),
        witnesses: vec![None; t],
        nodes: 0,
        wall: Default::default(),
        status: OracleStatus::Optimal,
    };
    let mut nodes = 0u64;
    for a_int in 0..1u64 << m {
        let a = BitVec::from_u64(m, a_int);
        let free = free_table(inst, l, max, &a)?;
        let mut witnesses = vec![None; t];
        let mut count = 0u32;
        for (i, split) in splits.iter().enumerate() {
            if count + (t - i) as u32 <= best.objective {
                break;
            }
            for x in 0..free.len() as u64 {
                nodes += 1;
                if let Some(y) = split.witness(x, free[x as usize]) {
                    witnesses[i] = Some(BitVec::from_u64(n, x).concat(&y));
                    count += 1;
                    break;
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
    best.nodes = nodes;
    best.wall = start.elapsed();
    Ok(best)
}

/// Free `y` count for every `x` under decision `a`.
pub(crate) fn free_table(inst: &MmapInstance, l: usize, max: LogWeight, a: &BitVec) -> Result<Vec<usize>> {
    let (m, n) = (inst.m(), inst.n());
    if a.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: a.len(),
        });
    }
    check_enum(n, DEFAULT_ENUM_BITS)?;
    let a = a.to_u64();
    Ok((0..1u64 << n)
        .map(|x| free_count(inst.log_weight_ints(a, x), max, l))
        .collect())
}

/// A parity system over `(x, y)` split into its `x` and `y` column blocks.
struct Split {
    l: usize,
    full: ParitySystem,
    xrows: Vec<BitVec>,
    /// `y` block packed into a word; only used when `l < 64`.
    yrows: Vec<u64>,
    rhs: Vec<bool>,
}

impl Split {
    fn new(ps: &ParitySystem, n: usize, l: usize) -> Result<Self> {
        if ps.dim() != n + l {
            return Err(Error::LengthMismatch {
                expected: n + l,
                got: ps.dim(),
            });
        }
        let mut xrows = Vec::with_capacity(ps.num_rows());
        let mut yrows = Vec::with_capacity(ps.num_rows());
        for row in ps.rows() {
            let bits = row.to_bools();
            xrows.push(BitVec::from_bools(&bits[..n]));
            yrows.push(
                bits[n..]
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .fold(0u64, |acc, (j, _)| if j < 64 { acc | 1 << j } else { acc }),
            );
        }
        Ok(Self {
            l,
            full: ps.clone(),
            xrows,
            yrows,
            rhs: ps.rhs().iter().collect(),
        })
    }

    /// A `y` with `y_j = 0` for `j >= free` such that `(x, y)` meets the
    /// system, if any.
    fn witness(&self, x: u64, free: usize) -> Option<BitVec> {
        let n = self.xrows.first().map_or(0, BitVec::len);
        if self.l >= 64 || n > 64 {
            return self.witness_slow(x, free);
        }
        let xv = BitVec::from_u64(n, x);
        let mask = if free >= 64 { u64::MAX } else { (1u64 << free) - 1 };
        let mut rows: Vec<(u64, bool)> = self
            .yrows
            .iter()
            .zip(&self.xrows)
            .zip(&self.rhs)
            .map(|((&y, xr), &b)| (y & mask, b ^ xr.dot(&xv)))
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..free {
            let bit = 1u64 << col;
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].0 & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.0 & bit != 0 {
                    row.0 ^= pivot.0;
                    row.1 ^= pivot.1;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rows[rank..].iter().any(|&(_, b)| b) {
            return None;
        }
        let mut y = BitVec::zeros(self.l);
        for (&col, &(_, b)) in pivots.iter().zip(&rows) {
            y.set(col, b);
        }
        Some(y)
    }

    fn witness_slow(&self, x: u64, free: usize) -> Option<BitVec> {
        let n = self.full.dim() - self.l;
        let mut fixed = PartialAssignment::empty(n + self.l);
        for j in 0..n {
            fixed.assign(j, j < 64 && (x >> j) & 1 == 1);
        }
        for j in free..self.l {
            fixed.assign(n + j, false);
        }
        let sol = self.full.solve_under_fixing(&fixed).expect("dimensions match")?;
        let bits = sol.to_bools();
        Some(BitVec::from_bools(&bits[n..]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::sample_parity;
    use crate::instances::gen_ising_grid_with;
    use crate::model::{max_weight, IsingGrid};
    use crate::seed::rng_from_seed;
    use rand::Rng;

    fn brute(inst: &MmapInstance, l: usize, max: LogWeight, a: u64, ps: &ParitySystem) -> bool {
        let n = inst.n();
        (0..1u64 << n).any(|x| {
            let f = free_count(inst.log_weight_ints(a, x), max, l);
            (0..1u64 << l).any(|y| {
                y >> f == 0
                    && ps
                        .satisfied(&BitVec::from_u64(n, x).concat(&BitVec::from_u64(l, y)))
                        .unwrap()
            })
        })
    }

    #[test]
    fn all_free_at_the_maximum() {
        let inst = MmapInstance::ising(IsingGrid::zeros(2, 2, &[0]).unwrap());
        let ps = ParitySystem::unconstrained(3 + 4);
        assert!(weighted_replicate_feasible(&inst, 4, LogWeight::ONE, &BitVec::zeros(1), &ps).unwrap());
    }

    #[test]
    fn zero_weight_forces_every_y() {
        // weight e^0 = 1 everywhere but M huge: all y forced to zero
        let inst = MmapInstance::ising(IsingGrid::zeros(1, 3, &[0]).unwrap());
        let l = 3;
        let huge = LogWeight::from_ln(1e6);
        // y_1 = 1 is unreachable
        let ps = ParitySystem::from_rows(2 + l, &[(&[2], true)]).unwrap();
        assert!(!weighted_replicate_feasible(&inst, l, huge, &BitVec::zeros(1), &ps).unwrap());
        // x_1 = 1 is fine
        let ps = ParitySystem::from_rows(2 + l, &[(&[0], true)]).unwrap();
        assert!(weighted_replicate_feasible(&inst, l, huge, &BitVec::zeros(1), &ps).unwrap());
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = rng_from_seed(55);
        for _ in 0..60 {
            let inst = gen_ising_grid_with(2, 3, 0.4, 1.0, 2, &mut rng).unwrap();
            let (n, l) = (inst.n(), 4);
            let max = max_weight(&inst, DEFAULT_ENUM_BITS).unwrap().value;
            let k = rng.random_range(0..=n + l);
            let ps = sample_parity(n + l, k, &mut rng);
            let a = rng.random_range(0..1u64 << inst.m());
            let got =
                weighted_replicate_feasible(&inst, l, max, &BitVec::from_u64(inst.m(), a), &ps).unwrap();
            assert_eq!(got, brute(&inst, l, max, a, &ps));
            let split = Split::new(&ps, n, l).unwrap();
            for x in 0..1u64 << n {
                for f in 0..=l {
                    let fast = split.witness(x, f);
                    assert_eq!(fast.is_some(), split.witness_slow(x, f).is_some());
                    if let Some(y) = fast {
                        assert!(ps.satisfied(&BitVec::from_u64(n, x).concat(&y)).unwrap());
                        assert!((f..l).all(|j| !y.get(j)));
                    }
                }
            }
        }
    }
}
