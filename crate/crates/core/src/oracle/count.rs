use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::model::{check_enum, LogWeight, MmapInstance};

/// `sum_x w(a, x)` for one decision vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MarginalSum {
    /// Number of satisfying `x` for an indicator weight.
    Count(u64),
    Weight(LogWeight),
}

impl MarginalSum {
    pub fn log_weight(self) -> LogWeight {
        match self {
            MarginalSum::Count(c) => LogWeight::from_count(c),
            MarginalSum::Weight(w) => w,
        }
    }
}

/// Exact marginal sum by enumerating `x`.
pub fn count_exact(inst: &MmapInstance, a: &BitVec, cap_bits: usize) -> Result<MarginalSum> {
    let (m, n) = (inst.m(), inst.n());
    if a.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: a.len(),
        });
    }
    check_enum(n, cap_bits)?;
    check_enum(m, 63)?;
    let a = a.to_u64();
    let xs = 0..1u64 << n;
    if inst.is_cnf() {
        Ok(MarginalSum::Count(
            xs.filter(|&x| inst.indicator_ints(a, x)).count() as u64,
        ))
    } else {
        Ok(MarginalSum::Weight(xs.map(|x| inst.log_weight_ints(a, x)).sum()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CnfFormula, IsingGrid, Lit, VarSpace, DEFAULT_ENUM_BITS};

    #[test]
    fn empty_cnf_counts_everything() {
        let inst = MmapInstance::cnf(VarSpace::canonical(1, 10).unwrap(), CnfFormula::empty(11)).unwrap();
        let got = count_exact(&inst, &BitVec::zeros(1), DEFAULT_ENUM_BITS).unwrap();
        assert_eq!(got, MarginalSum::Count(1024));
    }

    #[test]
    fn equality_instance_counts_one() {
        // x_p <-> a_p for each p
        let n = 4;
        let clauses = (0..n)
            .flat_map(|p| {
                [
                    vec![Lit::neg(p), Lit::pos(n + p)],
                    vec![Lit::pos(p), Lit::neg(n + p)],
                ]
            })
            .collect();
        let inst = MmapInstance::cnf(
            VarSpace::canonical(n, n).unwrap(),
            CnfFormula::new(2 * n, clauses).unwrap(),
        )
        .unwrap();
        for a in 0..16 {
            let got = count_exact(&inst, &BitVec::from_u64(n, a), DEFAULT_ENUM_BITS).unwrap();
            assert_eq!(got, MarginalSum::Count(1));
        }
    }

    #[test]
    fn flat_ising_sums_to_two_to_the_n() {
        let inst = MmapInstance::ising(IsingGrid::zeros(2, 3, &[0]).unwrap());
        let got = count_exact(&inst, &BitVec::ones(1), DEFAULT_ENUM_BITS).unwrap();
        assert!((got.log_weight().log2() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = MmapInstance::cnf(VarSpace::canonical(0, 12).unwrap(), CnfFormula::empty(12)).unwrap();
        assert!(matches!(
            count_exact(&inst, &BitVec::zeros(0), 8),
            Err(Error::EnumerationBudget { .. })
        ));
    }
}
