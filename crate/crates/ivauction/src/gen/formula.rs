//! 1-in-3 SAT formulas and their text format.
//!
//! ```text
//! c comment
//! p 1in3 <vars> <clauses>
//! 1 -2 3 0
//! ```
//! Literals are 1-based signed integers; the trailing `0` is optional.

use super::GenError;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    /// 0-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: usize, positive: bool) -> Self {
        Self { var, positive }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }

    fn from_signed(v: i64) -> Option<Self> {
        (v != 0).then(|| Self::new(v.unsigned_abs() as usize - 1, v > 0))
    }

    fn signed(&self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula1in3 {
    vars: usize,
    clauses: Vec<[Literal; 3]>,
}

fn malformed(line: usize, reason: impl Into<String>) -> GenError {
    GenError::MalformedFormula {
        line,
        reason: reason.into(),
    }
}

impl Formula1in3 {
    pub fn new(vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self, GenError> {
        for (j, c) in clauses.iter().enumerate() {
            if let Some(l) = c.iter().find(|l| l.var >= vars) {
                return Err(malformed(0, format!("clause {j} uses variable {} of {vars}", l.var + 1)));
            }
        }
        Ok(Self { vars, clauses })
    }

    /// Builds from 1-based signed triples.
    pub fn from_signed(vars: usize, clauses: &[[i64; 3]]) -> Result<Self, GenError> {
        let mut out = Vec::with_capacity(clauses.len());
        for (j, c) in clauses.iter().enumerate() {
            let mut lits = [Literal::new(0, true); 3];
            for (t, &v) in c.iter().enumerate() {
                lits[t] = Literal::from_signed(v).ok_or_else(|| malformed(0, format!("clause {j} has a zero literal")))?;
            }
            out.push(lits);
        }
        Self::new(vars, out)
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    /// Exactly one true literal in every clause.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.vars
            && self
                .clauses
                .iter()
                .all(|c| c.iter().filter(|l| l.eval(assignment)).count() == 1)
    }

    /// Exhaustive search, first assignment in binary counting order.
    pub fn solve_exhaustive(&self) -> Option<Vec<bool>> {
        if self.vars >= 26 {
            return None;
        }
        (0u64..1 << self.vars)
            .map(|m| (0..self.vars).map(|v| m >> v & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.satisfied_by(a))
    }

    pub fn parse(text: &str) -> Result<Self, GenError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                if header.is_some() {
                    return Err(malformed(line_no, "second header"));
                }
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [kind, v, m] = parts[..] else {
                    return Err(malformed(line_no, "header must be `p 1in3 <vars> <clauses>`"));
                };
                if kind != "1in3" {
                    return Err(malformed(line_no, format!("unknown problem kind `{kind}`")));
                }
                let v = v.parse().map_err(|_| malformed(line_no, "bad variable count"))?;
                let m = m.parse().map_err(|_| malformed(line_no, "bad clause count"))?;
                header = Some((v, m));
                continue;
            }
            let Some((vars, _)) = header else {
                return Err(malformed(line_no, "clause before header"));
            };
            let mut nums = line
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| malformed(line_no, format!("bad literal `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if nums.len() == 4 && nums[3] == 0 {
                nums.pop();
            }
            if nums.len() != 3 {
                return Err(malformed(line_no, format!("expected 3 literals, found {}", nums.len())));
            }
            let mut lits = [Literal::new(0, true); 3];
            for (t, &v) in nums.iter().enumerate() {
                let l = Literal::from_signed(v).ok_or_else(|| malformed(line_no, "zero literal"))?;
                if l.var >= vars {
                    return Err(malformed(line_no, format!("variable {} out of range", l.var + 1)));
                }
                lits[t] = l;
            }
            clauses.push(lits);
        }
        let Some((vars, m)) = header else {
            return Err(malformed(0, "missing header"));
        };
        if clauses.len() != m {
            return Err(malformed(0, format!("header declares {m} clauses, found {}", clauses.len())));
        }
        Self::new(vars, clauses)
    }
}

impl fmt::Display for Formula1in3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p 1in3 {} {}", self.vars, self.clauses.len())?;
        for c in &self.clauses {
            writeln!(f, "{} {} {} 0", c[0].signed(), c[1].signed(), c[2].signed())?;
        }
        Ok(())
    }
}
