use rand::{Rng, RngCore};

use super::{BitVec, EchelonForm, PartialAssignment};
use crate::error::{Error, Result};

/// `k` parity constraints over `d` coordinates: row `i` asserts
/// `<A_i, x> = b_i`, which is exactly `h_{A,b}(x) = Ax + b = 0 (mod 2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParitySystem {
    dim: usize,
    rows: Vec<BitVec>,
    rhs: BitVec,
}

/// Draws every bit of `A` and `b` as an independent fair coin.
pub fn sample_parity<R: RngCore + ?Sized>(dim: usize, k: usize, rng: &mut R) -> ParitySystem {
    let mut rows = Vec::with_capacity(k);
    let mut rhs = BitVec::zeros(k);
    for i in 0..k {
        let words = (0..dim.div_ceil(64)).map(|_| rng.next_u64()).collect();
        rows.push(BitVec::from_words(dim, words));
        rhs.set(i, rng.random::<bool>());
    }
    ParitySystem { dim, rows, rhs }
}

impl ParitySystem {
    pub fn new(dim: usize, rows: Vec<BitVec>, rhs: BitVec) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("parity system dimension must be at least 1"));
        }
        if rhs.len() != rows.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                got: rhs.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self { dim, rows, rhs })
    }

    /// The system with no rows; every vector satisfies it.
    pub fn unconstrained(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
            rhs: BitVec::zeros(0),
        }
    }

    /// Builds a system from `(support, rhs)` pairs.
    pub fn from_rows(dim: usize, rows: &[(&[usize], bool)]) -> Result<Self> {
        let mut out = Vec::with_capacity(rows.len());
        let mut rhs = BitVec::zeros(rows.len());
        for (i, (support, b)) in rows.iter().enumerate() {
            let mut row = BitVec::zeros(dim);
            for &j in support.iter() {
                if j >= dim {
                    return Err(Error::param(format!("parity support index {j} >= {dim}")));
                }
                row.flip(j);
            }
            out.push(row);
            rhs.set(i, *b);
        }
        Self::new(dim, out, rhs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows `k`.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn rhs(&self) -> &BitVec {
        &self.rhs
    }

    pub fn row(&self, i: usize) -> (&BitVec, bool) {
        (&self.rows[i], self.rhs.get(i))
    }

    /// Value of `h(v) = Av + b`.
    pub fn hash(&self, v: &BitVec) -> Result<BitVec> {
        self.check_len(v)?;
        let mut out = BitVec::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            out.set(i, row.dot(v) ^ self.rhs.get(i));
        }
        Ok(out)
    }

    /// True iff `Av + b = 0`.
    pub fn satisfied(&self, v: &BitVec) -> Result<bool> {
        self.check_len(v)?;
        Ok(self.satisfied_unchecked(v))
    }

    pub(crate) fn satisfied_unchecked(&self, v: &BitVec) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, row)| row.dot(v) == self.rhs.get(i))
    }

    pub fn eliminate(&self) -> EchelonForm {
        EchelonForm::from_rows(self.dim, self.rows.clone(), self.rhs.clone())
    }

    /// Looks for a completion of `fixed` that satisfies the system.
    pub fn solve_under_fixing(&self, fixed: &PartialAssignment) -> Result<Option<BitVec>> {
        if fixed.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: fixed.len(),
            });
        }
        let mask = fixed.assigned_mask();
        let values = fixed.values();
        let mut rows = Vec::with_capacity(self.rows.len());
        let mut rhs = BitVec::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            rhs.set(i, self.rhs.get(i) ^ row.dot(values));
            rows.push(row.and_not(mask));
        }
        let ef = EchelonForm::from_rows(self.dim, rows, rhs);
        Ok(ef.particular_solution().map(|mut sol| {
            // the reduced rows never touch fixed coordinates, so the pivots
            // solved above are independent of these
            for i in mask.iter_ones() {
                sol.set(i, values.get(i));
            }
            sol
        }))
    }

    fn check_len(&self, v: &BitVec) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }
}
