//! Marginal MAP instances: variable spaces split into decision and marginal
//! bits, CNF indicator weights, grid Ising weights.
//!
//! Ising spins use the convention `s = 2 * bit - 1`, so bit 1 is spin +1.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Not;

use crate::error::{Error, Result};
use crate::gf2::{BitVec, ParitySystem};

/// Default cap on exhaustive enumeration, as a power of two.
pub const DEFAULT_ENUM_BITS: usize = 26;

pub(crate) fn check_enum(bits: usize, cap_bits: usize) -> Result<()> {
    if bits > cap_bits || bits >= 64 {
        return Err(Error::EnumerationBudget { bits, cap_bits });
    }
    Ok(())
}

/// A non-negative real stored as its natural logarithm. Weight zero is the
/// sentinel `ln = -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogWeight(ln)
    }

    pub fn from_value(v: f64) -> Self {
        debug_assert!(v >= 0.0);
        if v == 0.0 {
            Self::ZERO
        } else {
            LogWeight(v.ln())
        }
    }

    pub fn from_count(c: u64) -> Self {
        Self::from_value(c as f64)
    }

    pub fn pow2(e: i64) -> Self {
        LogWeight(e as f64 * std::f64::consts::LN_2)
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn log10(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.0 / std::f64::consts::LN_10
        }
    }

    pub fn log2(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.0 / std::f64::consts::LN_2
        }
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl std::ops::Mul for LogWeight {
    type Output = LogWeight;

    fn mul(self, other: LogWeight) -> LogWeight {
        if self.is_zero() || other.is_zero() {
            Self::ZERO
        } else {
            LogWeight(self.0 + other.0)
        }
    }
}

/// `other` must be non-zero.
impl std::ops::Div for LogWeight {
    type Output = LogWeight;

    fn div(self, other: LogWeight) -> LogWeight {
        debug_assert!(!other.is_zero());
        if self.is_zero() {
            Self::ZERO
        } else {
            LogWeight(self.0 - other.0)
        }
    }
}

/// Computed without leaving log space.
impl std::ops::Add for LogWeight {
    type Output = LogWeight;

    fn add(self, other: LogWeight) -> LogWeight {
        let (hi, lo) = if self.0 >= other.0 {
            (self.0, other.0)
        } else {
            (other.0, self.0)
        };
        if lo == f64::NEG_INFINITY {
            return LogWeight(hi);
        }
        LogWeight(hi + (lo - hi).exp().ln_1p())
    }
}

impl PartialOrd for LogWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl std::iter::Sum for LogWeight {
    fn sum<I: Iterator<Item = LogWeight>>(iter: I) -> Self {
        iter.fold(LogWeight::ZERO, |a, b| a + b)
    }
}

/// Literal over a global variable index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: usize, negated: bool) -> Self {
        Lit(((var as u32) << 1) | negated as u32)
    }

    pub fn pos(var: usize) -> Self {
        Self::new(var, false)
    }

    pub fn neg(var: usize) -> Self {
        Self::new(var, true)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// Truth value of the literal when its variable takes `value`.
    #[inline]
    pub fn holds(self, value: bool) -> bool {
        value != self.is_negated()
    }

    /// 1-based signed DIMACS integer.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(lit: i64) -> Option<Self> {
        if lit == 0 {
            return None;
        }
        Some(Self::new(lit.unsigned_abs() as usize - 1, lit < 0))
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Clause list over `num_vars` variables. Tautological clauses are dropped at
/// construction; repeated literals inside a clause are kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<Self> {
        let mut kept = Vec::with_capacity(clauses.len());
        for (i, clause) in clauses.into_iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::malformed(format!("clause {i} is empty")));
            }
            if let Some(l) = clause.iter().find(|l| l.var() >= num_vars) {
                return Err(Error::malformed(format!(
                    "clause {i} references variable {} of {num_vars}",
                    l.var() + 1
                )));
            }
            let tautology = clause.iter().any(|&l| clause.contains(&!l));
            if !tautology {
                kept.push(clause);
            }
        }
        Ok(Self {
            num_vars,
            clauses: kept,
        })
    }

    pub fn empty(num_vars: usize) -> Self {
        Self {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Checks the formula under a full assignment given as a lookup.
    pub fn satisfied_by(&self, value: impl Fn(usize) -> bool) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.holds(value(l.var()))))
    }
}

/// Which block a variable belongs to, with its position inside the block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Decision(usize),
    Marginal(usize),
}

/// Split of the variables into `m` decision bits and `n` marginal bits.
///
/// Decision positions follow the order the decision variables were listed in;
/// marginal positions follow ascending variable index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSpace {
    roles: Vec<Role>,
    decision: Vec<usize>,
    marginal: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl VarSpace {
    pub fn new(num_vars: usize, decision_vars: &[usize]) -> Result<Self> {
        let mut is_decision = vec![false; num_vars];
        for &v in decision_vars {
            if v >= num_vars {
                return Err(Error::malformed(format!(
                    "decision variable {} out of range 1..={num_vars}",
                    v + 1
                )));
            }
            if std::mem::replace(&mut is_decision[v], true) {
                return Err(Error::malformed(format!(
                    "decision variable {} listed twice",
                    v + 1
                )));
            }
        }
        let marginal: Vec<usize> = (0..num_vars).filter(|&v| !is_decision[v]).collect();
        if marginal.is_empty() {
            return Err(Error::malformed("at least one marginal variable is required"));
        }
        let mut roles = vec![Role::Marginal(0); num_vars];
        for (p, &v) in decision_vars.iter().enumerate() {
            roles[v] = Role::Decision(p);
        }
        for (p, &v) in marginal.iter().enumerate() {
            roles[v] = Role::Marginal(p);
        }
        Ok(Self {
            roles,
            decision: decision_vars.to_vec(),
            marginal,
            labels: None,
        })
    }

    /// Decision variables `0..m`, marginal variables `m..m+n`.
    pub fn canonical(m: usize, n: usize) -> Result<Self> {
        Self::new(m + n, &(0..m).collect::<Vec<_>>())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.roles.len() {
            return Err(Error::LengthMismatch {
                expected: self.roles.len(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn m(&self) -> usize {
        self.decision.len()
    }

    pub fn n(&self) -> usize {
        self.marginal.len()
    }

    pub fn num_vars(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, var: usize) -> Role {
        self.roles[var]
    }

    pub fn decision_vars(&self) -> &[usize] {
        &self.decision
    }

    pub fn marginal_vars(&self) -> &[usize] {
        &self.marginal
    }
}

/// Values for the decision bits `a` and the marginal bits `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub decision: BitVec,
    pub marginal: BitVec,
}

impl Assignment {
    pub fn new(space: &VarSpace, decision: BitVec, marginal: BitVec) -> Result<Self> {
        let asg = Self { decision, marginal };
        asg.check(space)?;
        Ok(asg)
    }

    /// Bit `j` of `a` is decision position `j`; likewise for `x`.
    pub fn from_ints(m: usize, a: u64, n: usize, x: u64) -> Self {
        Self {
            decision: BitVec::from_u64(m, a),
            marginal: BitVec::from_u64(n, x),
        }
    }

    pub fn check(&self, space: &VarSpace) -> Result<()> {
        if self.decision.len() != space.m() {
            return Err(Error::LengthMismatch {
                expected: space.m(),
                got: self.decision.len(),
            });
        }
        if self.marginal.len() != space.n() {
            return Err(Error::LengthMismatch {
                expected: space.n(),
                got: self.marginal.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, space: &VarSpace, var: usize) -> bool {
        match space.role(var) {
            Role::Decision(p) => self.decision.get(p),
            Role::Marginal(p) => self.marginal.get(p),
        }
    }
}

/// Grid Ising model with log-potentials on nodes and on 4-neighbour edges.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingGrid {
    rows: usize,
    cols: usize,
    field: Vec<f64>,
    /// Edge `(r, c)-(r, c+1)` at `r * (cols - 1) + c`.
    horizontal: Vec<f64>,
    /// Edge `(r, c)-(r+1, c)` at `r * cols + c`.
    vertical: Vec<f64>,
    decision: Vec<bool>,
}

/// One grid edge: node indices and coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub theta: f64,
}

impl IsingGrid {
    pub fn new(
        rows: usize,
        cols: usize,
        field: Vec<f64>,
        horizontal: Vec<f64>,
        vertical: Vec<f64>,
        decision: Vec<bool>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::malformed("grid needs at least one row and column"));
        }
        let nodes = rows * cols;
        let expect = [
            ("field", field.len(), nodes),
            ("horizontal", horizontal.len(), rows * (cols - 1)),
            ("vertical", vertical.len(), (rows - 1) * cols),
            ("designation", decision.len(), nodes),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(Error::malformed(format!(
                    "{name} table has {got} entries, expected {want}"
                )));
            }
        }
        if field
            .iter()
            .chain(&horizontal)
            .chain(&vertical)
            .any(|t| !t.is_finite())
        {
            return Err(Error::malformed("non-finite potential"));
        }
        if decision.iter().all(|&d| d) {
            return Err(Error::malformed("at least one node must be marginal"));
        }
        Ok(Self {
            rows,
            cols,
            field,
            horizontal,
            vertical,
            decision,
        })
    }

    /// All potentials zero, every node marginal except `decision_nodes`.
    pub fn zeros(rows: usize, cols: usize, decision_nodes: &[usize]) -> Result<Self> {
        let mut decision = vec![false; rows * cols];
        for &d in decision_nodes {
            decision[d] = true;
        }
        Self::new(
            rows,
            cols,
            vec![0.0; rows * cols],
            vec![0.0; rows * cols.saturating_sub(1)],
            vec![0.0; rows.saturating_sub(1) * cols],
            decision,
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_nodes(&self) -> usize {
        self.rows * self.cols
    }

    pub fn node(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn field_mut(&mut self) -> &mut [f64] {
        &mut self.field
    }

    pub fn is_decision(&self, node: usize) -> bool {
        self.decision[node]
    }

    pub fn decision_flags(&self) -> &[bool] {
        &self.decision
    }

    /// Coupling between two 4-neighbours, `None` when they are not adjacent.
    pub fn coupling(&self, (r1, c1): (usize, usize), (r2, c2): (usize, usize)) -> Option<f64> {
        self.edge_slot((r1, c1), (r2, c2))
            .map(|(h, i)| if h { self.horizontal[i] } else { self.vertical[i] })
    }

    pub fn set_coupling(&mut self, a: (usize, usize), b: (usize, usize), theta: f64) -> Result<()> {
        let (h, i) = self
            .edge_slot(a, b)
            .ok_or_else(|| Error::malformed(format!("{a:?} and {b:?} are not grid neighbours")))?;
        if h {
            self.horizontal[i] = theta;
        } else {
            self.vertical[i] = theta;
        }
        Ok(())
    }

    fn edge_slot(&self, a: (usize, usize), b: (usize, usize)) -> Option<(bool, usize)> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let ((r1, c1), (r2, c2)) = (a, b);
        if r2 >= self.rows || c1 >= self.cols || c2 >= self.cols {
            return None;
        }
        if r1 == r2 && c2 == c1 + 1 {
            Some((true, r1 * (self.cols - 1) + c1))
        } else if c1 == c2 && r2 == r1 + 1 {
            Some((false, r1 * self.cols + c1))
        } else {
            None
        }
    }

    /// Horizontal edges row by row, then vertical edges row by row.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let cols = self.cols;
        let h = (0..self.rows).flat_map(move |r| {
            (0..cols.saturating_sub(1)).map(move |c| Edge {
                u: r * cols + c,
                v: r * cols + c + 1,
                theta: self.horizontal[r * (cols - 1) + c],
            })
        });
        let v = (0..self.rows.saturating_sub(1)).flat_map(move |r| {
            (0..cols).map(move |c| Edge {
                u: r * cols + c,
                v: (r + 1) * cols + c,
                theta: self.vertical[r * cols + c],
            })
        });
        h.chain(v)
    }

    pub fn var_space(&self) -> VarSpace {
        let decision: Vec<usize> = (0..self.num_nodes()).filter(|&i| self.decision[i]).collect();
        VarSpace::new(self.num_nodes(), &decision).expect("grid designation validated")
    }

    /// `sum theta_i s_i + sum theta_ij s_i s_j` with `s = 2 bit - 1`.
    pub fn energy(&self, bit: impl Fn(usize) -> bool) -> f64 {
        let spin = |i: usize| if bit(i) { 1.0 } else { -1.0 };
        let unary: f64 = self.field.iter().enumerate().map(|(i, t)| t * spin(i)).sum();
        let pair: f64 = self.edges().map(|e| e.theta * spin(e.u) * spin(e.v)).sum();
        unary + pair
    }

    /// `sum |theta|` over every potential.
    pub fn abs_potential_sum(&self) -> f64 {
        self.field
            .iter()
            .chain(&self.horizontal)
            .chain(&self.vertical)
            .map(|t| t.abs())
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// `w(a, x) = 1` iff the formula holds.
    Cnf(CnfFormula),
    /// `w(a, x) = exp(energy)`.
    Ising(IsingGrid),
}

/// Clause compiled to masks over the decision and marginal integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct ClauseMask {
    a_pos: u64,
    a_neg: u64,
    x_pos: u64,
    x_neg: u64,
}

impl ClauseMask {
    #[inline]
    fn holds(&self, a: u64, x: u64) -> bool {
        (a & self.a_pos) | (!a & self.a_neg) | (x & self.x_pos) | (!x & self.x_neg) != 0
    }
}

/// A marginal MAP instance `max_a sum_x w(a, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MmapInstance {
    space: VarSpace,
    weight: Weight,
    masks: Option<Vec<ClauseMask>>,
}

impl MmapInstance {
    pub fn cnf(space: VarSpace, formula: CnfFormula) -> Result<Self> {
        if formula.num_vars() != space.num_vars() {
            return Err(Error::malformed(format!(
                "formula has {} variables, space has {}",
                formula.num_vars(),
                space.num_vars()
            )));
        }
        let masks = (space.m() <= 64 && space.n() <= 64).then(|| {
            formula
                .clauses()
                .iter()
                .map(|clause| {
                    let mut m = ClauseMask {
                        a_pos: 0,
                        a_neg: 0,
                        x_pos: 0,
                        x_neg: 0,
                    };
                    for l in clause {
                        let slot = match (space.role(l.var()), l.is_negated()) {
                            (Role::Decision(p), false) => (&mut m.a_pos, p),
                            (Role::Decision(p), true) => (&mut m.a_neg, p),
                            (Role::Marginal(p), false) => (&mut m.x_pos, p),
                            (Role::Marginal(p), true) => (&mut m.x_neg, p),
                        };
                        *slot.0 |= 1u64 << slot.1;
                    }
                    m
                })
                .collect()
        });
        Ok(Self {
            space,
            weight: Weight::Cnf(formula),
            masks,
        })
    }

    pub fn ising(grid: IsingGrid) -> Self {
        Self {
            space: grid.var_space(),
            weight: Weight::Ising(grid),
            masks: None,
        }
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn formula(&self) -> Option<&CnfFormula> {
        match &self.weight {
            Weight::Cnf(f) => Some(f),
            Weight::Ising(_) => None,
        }
    }

    pub fn grid(&self) -> Option<&IsingGrid> {
        match &self.weight {
            Weight::Ising(g) => Some(g),
            Weight::Cnf(_) => None,
        }
    }

    pub fn is_cnf(&self) -> bool {
        matches!(self.weight, Weight::Cnf(_))
    }

    /// Formula over the canonical numbering: decision position `j` is
    /// variable `j`, marginal position `p` is variable `m + p`.
    pub fn canonical_formula(&self) -> Option<CnfFormula> {
        let f = self.formula()?;
        let m = self.m();
        let clauses = f
            .clauses()
            .iter()
            .map(|c| {
                c.iter()
                    .map(|l| {
                        let v = match self.space.role(l.var()) {
                            Role::Decision(p) => p,
                            Role::Marginal(p) => m + p,
                        };
                        Lit::new(v, l.is_negated())
                    })
                    .collect()
            })
            .collect();
        Some(CnfFormula {
            num_vars: f.num_vars(),
            clauses,
        })
    }

    pub fn evaluate_weight(&self, asg: &Assignment) -> Result<LogWeight> {
        asg.check(&self.space)?;
        Ok(match &self.weight {
            Weight::Cnf(f) => {
                if f.satisfied_by(|v| asg.value(&self.space, v)) {
                    LogWeight::ONE
                } else {
                    LogWeight::ZERO
                }
            }
            Weight::Ising(g) => LogWeight::from_ln(g.energy(|v| asg.value(&self.space, v))),
        })
    }

    /// Weight at integer-coded `(a, x)`; requires `m, n <= 64`.
    pub fn log_weight_ints(&self, a: u64, x: u64) -> LogWeight {
        match (&self.weight, &self.masks) {
            (Weight::Cnf(_), Some(masks)) => {
                if masks.iter().all(|c| c.holds(a, x)) {
                    LogWeight::ONE
                } else {
                    LogWeight::ZERO
                }
            }
            (Weight::Cnf(_), None) => panic!("integer evaluation needs m, n <= 64"),
            (Weight::Ising(g), _) => {
                let space = &self.space;
                LogWeight::from_ln(g.energy(|v| match space.role(v) {
                    Role::Decision(p) => (a >> p) & 1 == 1,
                    Role::Marginal(p) => (x >> p) & 1 == 1,
                }))
            }
        }
    }

    /// CNF indicator at integer-coded `(a, x)`.
    pub fn indicator_ints(&self, a: u64, x: u64) -> bool {
        !self.log_weight_ints(a, x).is_zero()
    }
}

/// 1 iff every clause has a satisfied literal under `asg`.
pub fn evaluate_indicator(formula: &CnfFormula, space: &VarSpace, asg: &Assignment) -> Result<bool> {
    if formula.num_vars() != space.num_vars() {
        return Err(Error::malformed(format!(
            "formula has {} variables, space has {}",
            formula.num_vars(),
            space.num_vars()
        )));
    }
    asg.check(space)?;
    Ok(formula.satisfied_by(|v| asg.value(space, v)))
}

/// How [`max_weight`] obtained its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxWeightPath {
    /// The bound `exp(sum |theta|)` is attained by some configuration.
    AttainableBound,
    /// Exhaustive enumeration over all `2^(m+n)` assignments.
    Enumerated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxWeight {
    pub value: LogWeight,
    pub path: MaxWeightPath,
    /// A maximizing assignment, absent when every weight is zero.
    pub witness: Option<Assignment>,
}

/// Exact `M = max_{a,x} w(a, x)`.
pub fn max_weight(inst: &MmapInstance, cap_bits: usize) -> Result<MaxWeight> {
    let (m, n) = (inst.m(), inst.n());
    if let Weight::Ising(g) = inst.weight() {
        if let Some(bits) = attaining_configuration(g) {
            let space = inst.space();
            let asg = assignment_from_nodes(space, &bits);
            return Ok(MaxWeight {
                value: LogWeight::from_ln(g.abs_potential_sum()),
                path: MaxWeightPath::AttainableBound,
                witness: Some(asg),
            });
        }
    }
    check_enum(m + n, cap_bits)?;
    let mut best = LogWeight::ZERO;
    let mut arg = None;
    'outer: for a in 0..1u64 << m {
        for x in 0..1u64 << n {
            let w = inst.log_weight_ints(a, x);
            if w > best || (arg.is_none() && !w.is_zero()) {
                best = w;
                arg = Some((a, x));
                if inst.is_cnf() {
                    break 'outer;
                }
            }
        }
    }
    Ok(MaxWeight {
        value: best,
        path: MaxWeightPath::Enumerated,
        witness: arg.map(|(a, x)| Assignment::from_ints(m, a, n, x)),
    })
}

fn assignment_from_nodes(space: &VarSpace, bits: &BitVec) -> Assignment {
    let mut asg = Assignment {
        decision: BitVec::zeros(space.m()),
        marginal: BitVec::zeros(space.n()),
    };
    for v in bits.iter_ones() {
        match space.role(v) {
            Role::Decision(p) => asg.decision.set(p, true),
            Role::Marginal(p) => asg.marginal.set(p, true),
        }
    }
    asg
}

/// A configuration aligning every spin with its field and every pair with
/// its coupling sign, when one exists. Each non-zero potential becomes one
/// GF(2) equation on node bits.
fn attaining_configuration(g: &IsingGrid) -> Option<BitVec> {
    let nodes = g.num_nodes();
    let mut rows: Vec<(Vec<usize>, bool)> = Vec::new();
    for (i, &t) in g.field().iter().enumerate() {
        if t != 0.0 {
            rows.push((vec![i], t > 0.0));
        }
    }
    for e in g.edges() {
        if e.theta != 0.0 {
            rows.push((vec![e.u, e.v], e.theta < 0.0));
        }
    }
    let refs: Vec<(&[usize], bool)> = rows.iter().map(|(s, b)| (s.as_slice(), *b)).collect();
    let ps = ParitySystem::from_rows(nodes, &refs).expect("node indices in range");
    ps.eliminate().particular_solution()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2(coupling: f64) -> MmapInstance {
        let mut g = IsingGrid::zeros(1, 2, &[]).unwrap();
        g.set_coupling((0, 0), (0, 1), coupling).unwrap();
        MmapInstance::ising(g)
    }

    #[test]
    fn indicator_examples() {
        let space = VarSpace::canonical(1, 2).unwrap();
        let empty = CnfFormula::empty(3);
        let asg = Assignment::from_ints(1, 1, 2, 0);
        assert!(evaluate_indicator(&empty, &space, &asg).unwrap());

        let contra = CnfFormula::new(3, vec![vec![Lit::pos(0)], vec![Lit::neg(0)]]).unwrap();
        for a in 0..2 {
            let asg = Assignment::from_ints(1, a, 2, 3);
            assert!(!evaluate_indicator(&contra, &space, &asg).unwrap());
        }

        let or = CnfFormula::new(3, vec![vec![Lit::pos(1), Lit::pos(2)]]).unwrap();
        // x = (0, 1)
        assert!(evaluate_indicator(&or, &space, &Assignment::from_ints(1, 0, 2, 0b10)).unwrap());
        assert!(!evaluate_indicator(&or, &space, &Assignment::from_ints(1, 0, 2, 0)).unwrap());
    }

    #[test]
    fn out_of_range_and_tautologies() {
        assert!(matches!(
            CnfFormula::new(2, vec![vec![Lit::pos(2)]]),
            Err(Error::MalformedInstance(_))
        ));
        let f = CnfFormula::new(
            2,
            vec![vec![Lit::pos(0), Lit::neg(0)], vec![Lit::pos(1), Lit::pos(1)]],
        )
        .unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.clauses()[0].len(), 2);
        let space = VarSpace::canonical(1, 2).unwrap();
        assert!(evaluate_indicator(&f, &space, &Assignment::from_ints(1, 0, 1, 0)).is_err());
    }

    #[test]
    fn ising_weights() {
        let g = IsingGrid::zeros(2, 2, &[0]).unwrap();
        let inst = MmapInstance::ising(g);
        for a in 0..2 {
            for x in 0..8 {
                assert_eq!(inst.log_weight_ints(a, x), LogWeight::ONE);
            }
        }

        let mut g = IsingGrid::zeros(1, 1, &[]).unwrap();
        g.field_mut()[0] = 0.5;
        // a single node needs to stay marginal
        let inst = MmapInstance::ising(g);
        assert!((inst.log_weight_ints(0, 1).ln() - 0.5).abs() < 1e-15);
        assert!((inst.log_weight_ints(0, 0).ln() + 0.5).abs() < 1e-15);

        let inst = chain2(1.0);
        let w = inst
            .evaluate_weight(&Assignment::from_ints(0, 0, 2, 0b11))
            .unwrap();
        assert!((w.ln() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_weight_examples() {
        let inst = MmapInstance::ising(IsingGrid::zeros(2, 2, &[1]).unwrap());
        let mw = max_weight(&inst, 20).unwrap();
        assert_eq!(mw.value, LogWeight::ONE);

        let mut g = IsingGrid::zeros(1, 1, &[]).unwrap();
        g.field_mut()[0] = 0.7;
        let mw = max_weight(&MmapInstance::ising(g), 20).unwrap();
        assert!((mw.value.ln() - 0.7).abs() < 1e-15);
        assert_eq!(mw.path, MaxWeightPath::AttainableBound);

        let space = VarSpace::canonical(0, 1).unwrap();
        let f = CnfFormula::new(1, vec![vec![Lit::pos(0)], vec![Lit::neg(0)]]).unwrap();
        let mw = max_weight(&MmapInstance::cnf(space, f).unwrap(), 20).unwrap();
        assert!(mw.value.is_zero());
        assert!(mw.witness.is_none());
    }

    #[test]
    fn frustrated_triangle_falls_back_to_enumeration() {
        // a 2x2 plaquette with three ferromagnetic and one antiferromagnetic
        // bond cannot satisfy every bond
        let mut g = IsingGrid::zeros(2, 2, &[]).unwrap();
        g.set_coupling((0, 0), (0, 1), 1.0).unwrap();
        g.set_coupling((1, 0), (1, 1), 1.0).unwrap();
        g.set_coupling((0, 0), (1, 0), 1.0).unwrap();
        g.set_coupling((0, 1), (1, 1), -1.0).unwrap();
        let inst = MmapInstance::ising(g);
        let mw = max_weight(&inst, 20).unwrap();
        assert_eq!(mw.path, MaxWeightPath::Enumerated);
        assert!((mw.value.ln() - 2.0).abs() < 1e-12);
        let asg = mw.witness.unwrap();
        assert_eq!(inst.evaluate_weight(&asg).unwrap(), mw.value);
    }

    #[test]
    fn enumeration_cap() {
        let space = VarSpace::canonical(4, 8).unwrap();
        let inst = MmapInstance::cnf(space, CnfFormula::new(12, vec![vec![Lit::pos(0)]]).unwrap()).unwrap();
        assert!(matches!(
            max_weight(&inst, 10),
            Err(Error::EnumerationBudget {
                bits: 12,
                cap_bits: 10
            })
        ));
    }

    #[test]
    fn log_add_is_stable() {
        let big = LogWeight::from_ln(1000.0);
        let s = big + big;
        assert!((s.ln() - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
        assert_eq!(LogWeight::ZERO + LogWeight::ZERO, LogWeight::ZERO);
        assert_eq!(LogWeight::ZERO + big, big);
    }
}
