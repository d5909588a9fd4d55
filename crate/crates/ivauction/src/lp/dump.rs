//! Plain-text LP dump in the familiar sectioned layout, with exact coefficients.
//!
//! Grammar (one item per line, `\` starts a comment line):
//!
//! ```text
//! file       := sense NL objective NL "Subject To" NL row* "End"
//! sense      := "Maximize" | "Minimize"
//! objective  := " obj:" expr
//! row        := " " name ":" expr rel rational
//! expr       := term (("+" | "-") term)* | "0"
//! term       := rational " " var
//! rel        := "<=" | ">=" | "="
//! rational   := integer | integer "/" integer
//! ```
//!
//! All variables are implicitly non-negative, so no `Bounds` section is written.

use super::simplex::{Constraint, RationalLP, Relation, Sense};
use crate::model::Dims;
use crate::rational::{fmt_q, parse_q, zero, Q};
use num_traits::{Signed, Zero};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DumpError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

/// `x_<agent>_<s1>_..._<sn>` for every table entry, 1-based, plus `extra` names.
pub fn variable_names(dims: Dims, extra: &[&str]) -> Vec<String> {
    let mut names = Vec::with_capacity(dims.entries() + extra.len());
    for p in 0..dims.profiles() {
        let sig: Vec<String> = dims.profile(p).0.iter().map(usize::to_string).collect();
        for i in 0..dims.n() {
            names.push(format!("x_{}_{}", i + 1, sig.join("_")));
        }
    }
    names.extend(extra.iter().map(|s| s.to_string()));
    names
}

fn write_expr(out: &mut String, coeffs: &[Q], names: &[String]) {
    let mut first = true;
    for (a, name) in coeffs.iter().zip(names) {
        if a.is_zero() {
            continue;
        }
        let sign = if a.is_negative() { "-" } else { "+" };
        if first {
            if a.is_negative() {
                out.push_str(" -");
            }
        } else {
            let _ = write!(out, " {sign}");
        }
        let _ = write!(out, " {} {}", fmt_q(&a.abs()), name);
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
}

pub fn dump_lp(lp: &RationalLP, names: &[String]) -> String {
    assert_eq!(names.len(), lp.num_vars, "one name per variable");
    let mut out = String::new();
    out.push_str(match lp.sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    write_expr(&mut out, &lp.objective, names);
    out.push_str("\nSubject To\n");
    for (r, c) in lp.constraints.iter().enumerate() {
        let _ = write!(out, " c{r}:");
        write_expr(&mut out, &c.coeffs, names);
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {}", fmt_q(&c.rhs));
    }
    out.push_str("End\n");
    out
}

fn parse_expr(
    tokens: &[&str],
    index: &mut HashMap<String, usize>,
    names: &mut Vec<String>,
    line: usize,
) -> Result<Vec<(usize, Q)>, DumpError> {
    let err = |reason: &str| DumpError::Syntax {
        line,
        reason: reason.to_string(),
    };
    if tokens == ["0"] {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    let mut t = 0;
    while t < tokens.len() {
        let mut sign = if terms.is_empty() { 1 } else { 0 };
        match tokens[t] {
            "+" => {
                sign = 1;
                t += 1;
            }
            "-" => {
                sign = -1;
                t += 1;
            }
            _ => {}
        }
        if sign == 0 || t + 1 >= tokens.len() {
            return Err(err("malformed term"));
        }
        let a = parse_q(tokens[t]).map_err(|e| err(&e.to_string()))?;
        let name = tokens[t + 1].to_string();
        let j = *index.entry(name.clone()).or_insert_with(|| {
            names.push(name);
            names.len() - 1
        });
        terms.push((j, if sign < 0 { -a } else { a }));
        t += 2;
    }
    Ok(terms)
}

/// Reads a dump back; variables are numbered in order of first appearance.
pub fn parse_lp(text: &str) -> Result<(RationalLP, Vec<String>), DumpError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('\\'));
    let syntax = |line: usize, reason: &str| DumpError::Syntax {
        line,
        reason: reason.to_string(),
    };
    let (ln, head) = lines.next().ok_or_else(|| syntax(0, "empty input"))?;
    let sense = match head {
        "Maximize" => Sense::Maximize,
        "Minimize" => Sense::Minimize,
        _ => return Err(syntax(ln, "expected Maximize or Minimize")),
    };
    let mut index = HashMap::new();
    let mut names = Vec::new();
    let (ln, obj_line) = lines.next().ok_or_else(|| syntax(ln, "missing objective"))?;
    let obj_body = obj_line
        .strip_prefix("obj:")
        .ok_or_else(|| syntax(ln, "expected obj:"))?;
    let tokens: Vec<&str> = obj_body.split_whitespace().collect();
    let objective = parse_expr(&tokens, &mut index, &mut names, ln)?;
    match lines.next() {
        Some((_, "Subject To")) => {}
        Some((l, _)) => return Err(syntax(l, "expected Subject To")),
        None => return Err(syntax(ln, "missing Subject To")),
    }
    let mut rows = Vec::new();
    let mut ended = false;
    for (l, body) in lines.by_ref() {
        if body == "End" {
            ended = true;
            break;
        }
        let (_, rest) = body.split_once(':').ok_or_else(|| syntax(l, "missing row name"))?;
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(syntax(l, "row too short"));
        }
        let rel = match tokens[tokens.len() - 2] {
            "<=" => Relation::Le,
            ">=" => Relation::Ge,
            "=" => Relation::Eq,
            _ => return Err(syntax(l, "expected relation")),
        };
        let rhs = parse_q(tokens[tokens.len() - 1]).map_err(|e| syntax(l, &e.to_string()))?;
        let terms = parse_expr(&tokens[..tokens.len() - 2], &mut index, &mut names, l)?;
        rows.push((terms, rel, rhs));
    }
    if !ended {
        return Err(syntax(0, "missing End"));
    }
    let nv = names.len();
    let mut lp = RationalLP::new(nv, sense);
    for (j, a) in objective {
        lp.objective[j] += a;
    }
    for (terms, rel, rhs) in rows {
        lp.add(&terms, rel, rhs);
    }
    Ok((lp, names))
}

/// Reorders the columns of `lp` so that `names` match `order`; unknown names
/// get an all-zero column.
pub fn align_columns(lp: &RationalLP, names: &[String], order: &[String]) -> RationalLP {
    let pos: HashMap<&str, usize> = names.iter().enumerate().map(|(j, n)| (n.as_str(), j)).collect();
    let remap = |v: &[Q]| -> Vec<Q> {
        order
            .iter()
            .map(|n| pos.get(n.as_str()).map_or_else(zero, |&j| v[j].clone()))
            .collect()
    };
    RationalLP {
        num_vars: order.len(),
        constraints: lp
            .constraints
            .iter()
            .map(|c| Constraint {
                coeffs: remap(&c.coeffs),
                relation: c.relation,
                rhs: c.rhs.clone(),
            })
            .collect(),
        sense: lp.sense,
        objective: remap(&lp.objective),
    }
}
