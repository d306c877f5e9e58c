//! Text formats.
//!
//! CNF: DIMACS plus a mandatory `vmax <ids> 0` line before the clauses
//! naming the decision variables (1-based; `vmax 0` for none).
//!
//! Ising: `ising <rows> <cols>`, then `node <r> <c> <theta> <max|sum>` and
//! `edge <r1> <c1> <r2> <c2> <theta>` lines. Omitted potentials are zero and
//! omitted nodes are summed. Reals are written in shortest round-trip form.
//!
//! `c` lines and blank lines are ignored in both.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{CnfFormula, IsingGrid, Lit, MmapInstance, VarSpace, Weight};

pub fn read_instance(path: impl AsRef<Path>) -> Result<MmapInstance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn write_instance(inst: &MmapInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_instance(inst))?;
    Ok(())
}

pub fn format_instance(inst: &MmapInstance) -> String {
    let mut out = String::new();
    match inst.weight() {
        Weight::Cnf(f) => {
            let _ = writeln!(out, "p cnf {} {}", f.num_vars(), f.len());
            out.push_str("vmax");
            for &v in inst.space().decision_vars() {
                let _ = write!(out, " {}", v + 1);
            }
            out.push_str(" 0\n");
            for clause in f.clauses() {
                for l in clause {
                    let _ = write!(out, "{} ", l.to_dimacs());
                }
                out.push_str("0\n");
            }
        }
        Weight::Ising(g) => {
            let _ = writeln!(out, "ising {} {}", g.rows(), g.cols());
            for r in 0..g.rows() {
                for c in 0..g.cols() {
                    let i = g.node(r, c);
                    let role = if g.is_decision(i) { "max" } else { "sum" };
                    let _ = writeln!(out, "node {r} {c} {} {role}", g.field()[i]);
                }
            }
            for e in g.edges() {
                let (r1, c1) = (e.u / g.cols(), e.u % g.cols());
                let (r2, c2) = (e.v / g.cols(), e.v % g.cols());
                let _ = writeln!(out, "edge {r1} {c1} {r2} {c2} {}", e.theta);
            }
        }
    }
    out
}

pub fn parse_instance(text: &str) -> Result<MmapInstance> {
    let mut lines = content_lines(text);
    let Some((no, first)) = lines.next() else {
        return Err(Error::parse(1, "empty instance file"));
    };
    let mut toks = first.split_whitespace();
    match toks.next() {
        Some("p") => parse_cnf(no, toks, lines),
        Some("ising") => parse_ising(no, toks, lines),
        Some(other) => Err(Error::parse(no, format!("unknown header {other:?}"))),
        None => unreachable!("content lines are non-empty"),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !(*l == "c" || l.starts_with("c ") || l.starts_with("c\t")))
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {tok:?}")))
}

/// Literals up to the terminating 0.
fn dimacs_lits<'a>(line: usize, toks: impl Iterator<Item = &'a str>, num_vars: usize) -> Result<Vec<Lit>> {
    let mut out = Vec::new();
    let mut ended = false;
    for tok in toks {
        if ended {
            return Err(Error::parse(line, "tokens after terminating 0"));
        }
        let v: i64 = num(line, Some(tok), "literal")?;
        if v == 0 {
            ended = true;
            continue;
        }
        let lit = Lit::from_dimacs(v)
            .filter(|l| l.var() < num_vars)
            .ok_or_else(|| Error::parse(line, format!("literal {v} outside 1..={num_vars}")))?;
        out.push(lit);
    }
    if !ended {
        return Err(Error::parse(line, "line not terminated by 0"));
    }
    Ok(out)
}

fn parse_cnf<'a>(
    header: usize,
    mut toks: impl Iterator<Item = &'a str>,
    mut lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<MmapInstance> {
    if toks.next() != Some("cnf") {
        return Err(Error::parse(header, "expected `p cnf <vars> <clauses>`"));
    }
    let num_vars: usize = num(header, toks.next(), "variable count")?;
    let num_clauses: usize = num(header, toks.next(), "clause count")?;
    if toks.next().is_some() {
        return Err(Error::parse(header, "trailing tokens in header"));
    }
    let (vno, vline) = lines
        .next()
        .ok_or_else(|| Error::parse(header, "missing `vmax` line"))?;
    let mut vt = vline.split_whitespace();
    if vt.next() != Some("vmax") {
        return Err(Error::parse(vno, "expected `vmax <ids> 0` before the clauses"));
    }
    let decision: Vec<usize> = dimacs_lits(vno, vt, num_vars)?
        .into_iter()
        .map(|l| {
            if l.is_negated() {
                Err(Error::parse(vno, "negative id in vmax"))
            } else {
                Ok(l.var())
            }
        })
        .collect::<Result<_>>()?;
    let mut clauses = Vec::with_capacity(num_clauses);
    for (no, line) in lines {
        if line.starts_with("vmax") {
            return Err(Error::parse(no, "repeated vmax line"));
        }
        let lits = dimacs_lits(no, line.split_whitespace(), num_vars)?;
        if lits.is_empty() {
            return Err(Error::parse(no, "empty clause"));
        }
        clauses.push(lits);
    }
    if clauses.len() != num_clauses {
        return Err(Error::parse(
            header,
            format!("header declares {num_clauses} clauses, found {}", clauses.len()),
        ));
    }
    let space = VarSpace::new(num_vars, &decision).map_err(|e| Error::parse(vno, e.to_string()))?;
    let formula = CnfFormula::new(num_vars, clauses).map_err(|e| Error::parse(header, e.to_string()))?;
    MmapInstance::cnf(space, formula)
}

fn parse_ising<'a>(
    header: usize,
    mut toks: impl Iterator<Item = &'a str>,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<MmapInstance> {
    let rows: usize = num(header, toks.next(), "row count")?;
    let cols: usize = num(header, toks.next(), "column count")?;
    if rows == 0 || cols == 0 || toks.next().is_some() {
        return Err(Error::parse(
            header,
            "expected `ising <rows> <cols>` with both positive",
        ));
    }
    let mut grid = IsingGrid::zeros(rows, cols, &[]).map_err(|e| Error::parse(header, e.to_string()))?;
    let mut seen_node = vec![false; rows * cols];
    let mut decision = Vec::new();
    let mut seen_edges = std::collections::HashSet::new();
    for (no, line) in lines {
        let mut t = line.split_whitespace();
        let kind = t.next().expect("content lines are non-empty");
        match kind {
            "node" => {
                let r: usize = num(no, t.next(), "row")?;
                let c: usize = num(no, t.next(), "column")?;
                let theta: f64 = num(no, t.next(), "theta")?;
                let role = t.next().ok_or_else(|| Error::parse(no, "missing max|sum"))?;
                if t.next().is_some() {
                    return Err(Error::parse(no, "trailing tokens"));
                }
                if r >= rows || c >= cols {
                    return Err(Error::parse(no, format!("node ({r}, {c}) outside the grid")));
                }
                if !theta.is_finite() {
                    return Err(Error::parse(no, "non-finite theta"));
                }
                let i = grid.node(r, c);
                if std::mem::replace(&mut seen_node[i], true) {
                    return Err(Error::parse(no, format!("node ({r}, {c}) repeated")));
                }
                match role {
                    "max" => decision.push(i),
                    "sum" => {}
                    other => return Err(Error::parse(no, format!("role {other:?} is not max|sum"))),
                }
                grid.field_mut()[i] = theta;
            }
            "edge" => {
                let r1: usize = num(no, t.next(), "row")?;
                let c1: usize = num(no, t.next(), "column")?;
                let r2: usize = num(no, t.next(), "row")?;
                let c2: usize = num(no, t.next(), "column")?;
                let theta: f64 = num(no, t.next(), "theta")?;
                if t.next().is_some() {
                    return Err(Error::parse(no, "trailing tokens"));
                }
                if !theta.is_finite() {
                    return Err(Error::parse(no, "non-finite theta"));
                }
                let key = if (r1, c1) <= (r2, c2) {
                    (r1, c1, r2, c2)
                } else {
                    (r2, c2, r1, c1)
                };
                if !seen_edges.insert(key) {
                    return Err(Error::parse(no, "edge repeated"));
                }
                grid.set_coupling((r1, c1), (r2, c2), theta)
                    .map_err(|e| Error::parse(no, e.to_string()))?;
            }
            other => return Err(Error::parse(no, format!("unknown line kind {other:?}"))),
        }
    }
    decision.sort_unstable();
    let grid = IsingGrid::new(
        rows,
        cols,
        grid.field().to_vec(),
        (0..rows)
            .flat_map(|r| (0..cols.saturating_sub(1)).map(move |c| (r, c)))
            .map(|(r, c)| grid.coupling((r, c), (r, c + 1)).expect("in-grid edge"))
            .collect(),
        (0..rows.saturating_sub(1))
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| grid.coupling((r, c), (r + 1, c)).expect("in-grid edge"))
            .collect(),
        {
            let mut d = vec![false; rows * cols];
            for &i in &decision {
                d[i] = true;
            }
            d
        },
    )
    .map_err(|e| Error::parse(header, e.to_string()))?;
    Ok(MmapInstance::ising(grid))
}
