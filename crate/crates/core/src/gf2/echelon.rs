use super::{BitVec, ParitySystem, PartialAssignment};

/// Reduced row echelon form of a parity system.
///
/// Only non-zero rows are kept. Pivot columns strictly increase and each
/// pivot column is zero in every other row. A zero row with right-hand side 1
/// is recorded by clearing `consistent`; it is not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EchelonForm {
    dim: usize,
    rows: Vec<BitVec>,
    rhs: Vec<bool>,
    pivots: Vec<usize>,
    consistent: bool,
}

/// Outcome of XOR propagation under a partial assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// Coordinates forced by the rows, in the order they were derived.
    Implied(Vec<(usize, bool)>),
    /// Some row reduced to `0 = 1`.
    Conflict,
}

impl EchelonForm {
    pub(crate) fn from_rows(dim: usize, mut rows: Vec<BitVec>, rhs_bits: BitVec) -> Self {
        let mut rhs: Vec<bool> = rhs_bits.iter().collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..dim {
            let Some(found) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, found);
            rhs.swap(rank, found);
            let (head, rest) = rows.split_at_mut(rank);
            let (pivot_row, tail) = rest.split_first_mut().expect("pivot row exists");
            let pivot_row = &*pivot_row;
            let pivot_rhs = rhs[rank];
            for (r, row) in head.iter_mut().enumerate() {
                if row.get(col) {
                    row.xor_assign(pivot_row);
                    rhs[r] ^= pivot_rhs;
                }
            }
            for (off, row) in tail.iter_mut().enumerate() {
                if row.get(col) {
                    row.xor_assign(pivot_row);
                    rhs[rank + 1 + off] ^= pivot_rhs;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        let consistent = !rhs[rank..].iter().any(|&b| b);
        rows.truncate(rank);
        rhs.truncate(rank);
        Self {
            dim,
            rows,
            rhs,
            pivots,
            consistent,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn rhs(&self) -> &[bool] {
        &self.rhs
    }

    /// `log2` of the solution count, or `None` when there is none.
    pub fn solution_count_log2(&self) -> Option<usize> {
        self.consistent.then(|| self.dim - self.rank())
    }

    /// The solution with every free coordinate set to zero.
    pub fn particular_solution(&self) -> Option<BitVec> {
        if !self.consistent {
            return None;
        }
        let mut sol = BitVec::zeros(self.dim);
        for (&p, &b) in self.pivots.iter().zip(&self.rhs) {
            sol.set(p, b);
        }
        Some(sol)
    }

    pub fn satisfied(&self, v: &BitVec) -> bool {
        self.consistent && self.rows.iter().zip(&self.rhs).all(|(row, &b)| row.dot(v) == b)
    }

    /// The reduced rows as a system of their own (same solution set when
    /// consistent).
    pub fn to_system(&self) -> ParitySystem {
        ParitySystem::new(self.dim.max(1), self.rows.clone(), BitVec::from_bools(&self.rhs))
            .expect("echelon rows have the system dimension")
    }

    /// Unit propagation over the rows, run to a fixpoint.
    pub fn propagate(&self, partial: &PartialAssignment) -> Propagation {
        if !self.consistent {
            return Propagation::Conflict;
        }
        let mut work = partial.clone();
        let mut implied = Vec::new();
        loop {
            let mut changed = false;
            for (row, &b) in self.rows.iter().zip(&self.rhs) {
                let open = row.and_not(work.assigned_mask());
                let need = b ^ row.dot(work.values());
                match open.count_ones() {
                    0 if need => return Propagation::Conflict,
                    1 => {
                        let v = open.first_one().expect("one open coordinate");
                        work.assign(v, need);
                        implied.push((v, need));
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Propagation::Implied(implied);
            }
        }
    }
}
