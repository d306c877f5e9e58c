//! Extended DIMACS for replicated problems.
//!
//! Variables (1-based): decision bits `1..=m`, then copy `i` of marginal bit
//! `j` at `m + i*n + j + 1`, then `y_i` at `m + T*n + i + 1`. Each parity row
//! is an `x` line whose literals XOR to true: the first literal is negated
//! iff the row's right-hand side is 0. An all-zero row with right-hand side 1
//! is `x 0`; one with right-hand side 0 holds trivially and is kept only as a
//! `c x-empty` comment.
//!
//! Parity rows are asserted unconditionally, so a replicate whose system is
//! inconsistent makes the exported formula unsatisfiable, while the built-in
//! engines merely score that replicate zero. The two agree whenever every
//! system is consistent.

use std::fmt::Write as _;

use super::replicated::ReplicatedProblem;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, ParitySystem};
use crate::model::{CnfFormula, Lit};

/// A parsed export.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorExport {
    pub problem: ReplicatedProblem,
    pub threshold: u32,
}

pub fn export_dimacs_xor(rep: &ReplicatedProblem, threshold: u32) -> String {
    let (m, n, t) = (rep.m(), rep.n(), rep.replicates());
    let clauses = rep.augmented_clauses();
    let x_lines: usize = rep
        .systems()
        .iter()
        .map(|ps| {
            (0..ps.num_rows())
                .filter(|&r| {
                    let (row, b) = ps.row(r);
                    !row.is_zero() || b
                })
                .count()
        })
        .sum();
    let mut out = String::new();
    let _ = writeln!(out, "c xormmap m {m} n {n} T {t} k {}", rep.k());
    out.push_str("c card y");
    for i in 0..t {
        let _ = write!(out, " {}", rep.y_var(i) + 1);
    }
    let _ = writeln!(out, " >= {threshold}");
    let _ = writeln!(out, "p cnf {} {}", rep.num_vars(), clauses.len() + x_lines);
    for clause in &clauses {
        for l in clause {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    for (i, ps) in rep.systems().iter().enumerate() {
        let _ = writeln!(out, "c replicate {i}");
        for r in 0..ps.num_rows() {
            let (row, b) = ps.row(r);
            if row.is_zero() && !b {
                out.push_str("c x-empty\n");
                continue;
            }
            out.push('x');
            for (pos, j) in row.iter_ones().enumerate() {
                let id = (rep.x_var(i, j) + 1) as i64;
                let lit = if pos == 0 && !b { -id } else { id };
                let _ = write!(out, " {lit}");
            }
            out.push_str(" 0\n");
        }
    }
    out
}

pub fn parse_dimacs_xor(text: &str) -> Result<XorExport> {
    let mut dims: Option<(usize, usize, usize, usize)> = None;
    let mut threshold: Option<u32> = None;
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    // per replicate: (rows, rhs)
    let mut systems: Vec<(Vec<BitVec>, Vec<bool>)> = Vec::new();
    let mut current: Option<usize> = None;
    let mut body_lines = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().expect("non-empty line");
        match head {
            "c" => match toks.next() {
                Some("xormmap") => {
                    let mut field = |name: &str| -> Result<usize> {
                        if toks.next() != Some(name) {
                            return Err(Error::parse(
                                no,
                                format!("expected `{name}` in the xormmap header"),
                            ));
                        }
                        parse_num(no, toks.next())
                    };
                    let d = (field("m")?, field("n")?, field("T")?, field("k")?);
                    if d.1 == 0 || d.2 == 0 {
                        return Err(Error::parse(no, "n and T must be positive"));
                    }
                    systems = vec![(Vec::new(), Vec::new()); d.2];
                    dims = Some(d);
                }
                Some("card") => {
                    let rest: Vec<&str> = toks.collect();
                    match rest.split_last() {
                        Some((q, [_, .., ge])) if *ge == ">=" => threshold = Some(parse_num(no, Some(q))?),
                        _ => return Err(Error::parse(no, "malformed card comment")),
                    }
                }
                Some("replicate") => {
                    let i: usize = parse_num(no, toks.next())?;
                    if i >= systems.len() {
                        return Err(Error::parse(no, format!("replicate {i} out of range")));
                    }
                    current = Some(i);
                }
                Some("x-empty") => {
                    let i = current.ok_or_else(|| Error::parse(no, "x-empty outside a replicate"))?;
                    let n = dims.map_or(0, |d| d.1);
                    systems[i].0.push(BitVec::zeros(n));
                    systems[i].1.push(false);
                }
                _ => {}
            },
            "p" => {
                if toks.next() != Some("cnf") {
                    return Err(Error::parse(no, "expected `p cnf`"));
                }
                header = Some((parse_num(no, toks.next())?, parse_num(no, toks.next())?));
            }
            "x" => {
                let (m, n, _, _) =
                    dims.ok_or_else(|| Error::parse(no, "x line before the xormmap header"))?;
                let i = current.ok_or_else(|| Error::parse(no, "x line outside a replicate"))?;
                let lits = read_lits(no, toks)?;
                let mut row = BitVec::zeros(n);
                let mut parity = true;
                for l in lits {
                    let base = m + i * n;
                    if l.var() < base || l.var() >= base + n {
                        return Err(Error::parse(no, format!("x literal outside replicate {i}")));
                    }
                    row.flip(l.var() - base);
                    parity ^= l.is_negated();
                }
                systems[i].0.push(row);
                systems[i].1.push(parity);
                body_lines += 1;
            }
            _ => {
                if header.is_none() {
                    return Err(Error::parse(no, "clause before the `p cnf` header"));
                }
                let lits = read_lits(no, std::iter::once(head).chain(toks))?;
                clauses.push(lits);
                body_lines += 1;
            }
        }
    }

    let (m, n, t, k) = dims.ok_or_else(|| Error::parse(1, "missing `c xormmap` header"))?;
    let threshold = threshold.ok_or_else(|| Error::parse(1, "missing `c card` comment"))?;
    let (vars, declared) = header.ok_or_else(|| Error::parse(1, "missing `p cnf` header"))?;
    if vars != m + t * (n + 1) {
        return Err(Error::parse(
            1,
            format!("header declares {vars} variables, expected {}", m + t * (n + 1)),
        ));
    }
    if declared != body_lines {
        return Err(Error::parse(
            1,
            format!("header declares {declared} lines, found {body_lines}"),
        ));
    }
    if !clauses.len().is_multiple_of(t) {
        return Err(Error::parse(1, "clause count is not a multiple of T"));
    }
    let per = clauses.len() / t;
    let y0 = m + t * n;
    let mut base = Vec::with_capacity(per);
    for clause in &clauses[..per] {
        let (last, body) = clause
            .split_last()
            .ok_or_else(|| Error::malformed("empty augmented clause"))?;
        if *last != Lit::neg(y0) {
            return Err(Error::malformed("replicate 0 clause does not end in -y_0"));
        }
        let mapped = body
            .iter()
            .map(|&l| {
                if l.var() < m {
                    Ok(l)
                } else if l.var() < m + n {
                    Ok(Lit::new(l.var(), l.is_negated()))
                } else {
                    Err(Error::malformed("replicate 0 clause mentions another copy"))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        base.push(mapped);
    }
    let base = CnfFormula::new(m + n, base)?;
    let systems = systems
        .into_iter()
        .map(|(rows, rhs)| {
            if rows.len() != k {
                return Err(Error::malformed(format!(
                    "replicate has {} rows, expected {k}",
                    rows.len()
                )));
            }
            ParitySystem::new(n, rows, BitVec::from_bools(&rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = ReplicatedProblem::new(m, n, base, systems)?;
    if problem.augmented_clauses() != clauses {
        return Err(Error::malformed(
            "replicate clauses are not renamings of replicate 0",
        ));
    }
    Ok(XorExport { problem, threshold })
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: Option<&str>) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, "missing number"))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad number {tok:?}")))
}

fn read_lits<'a>(line: usize, toks: impl Iterator<Item = &'a str>) -> Result<Vec<Lit>> {
    let mut out = Vec::new();
    let mut ended = false;
    for tok in toks {
        if ended {
            return Err(Error::parse(line, "tokens after terminating 0"));
        }
        let v: i64 = parse_num(line, Some(tok))?;
        match v {
            0 => ended = true,
            v => out.push(Lit::from_dimacs(v).ok_or_else(|| Error::parse(line, "bad literal"))?),
        }
    }
    if !ended {
        return Err(Error::parse(line, "line not terminated by 0"));
    }
    Ok(out)
}
