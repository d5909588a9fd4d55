//! Solver outputs, certificates, and their JSON forms.

use crate::model::{AllocationRule, SignalProfile};
use crate::rational::{fmt_q, to_decimal, Q};
use serde_json::{json, Value};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RatioKind {
    Value,
    Cost,
    Det,
}

impl fmt::Display for RatioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatioKind::Value => "value",
            RatioKind::Cost => "cost",
            RatioKind::Det => "det",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverPath {
    Lp,
    Duo,
    TwoSat,
    Binary,
    Oracle,
    Propagation,
}

impl fmt::Display for SolverPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverPath::Lp => "lp",
            SolverPath::Duo => "duo",
            SolverPath::TwoSat => "twosat",
            SolverPath::Binary => "binary",
            SolverPath::Oracle => "oracle",
            SolverPath::Propagation => "propagation",
        })
    }
}

/// Two profiles `source` before `sink` whose ratios force a lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictPair {
    pub source: SignalProfile,
    pub sink: SignalProfile,
    pub kind: RatioKind,
    pub bound: Q,
}

/// A matched pair of profiles sharing the selected agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchEdge {
    pub must_match: SignalProfile,
    pub partner: SignalProfile,
    pub agent: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Ratio 1 needs no lower-bound witness.
    Trivial,
    ConflictPair(ConflictPair),
    Matching {
        gamma: Q,
        edges: Vec<MatchEdge>,
        must_match: Vec<SignalProfile>,
    },
    LpBasis {
        basis: Vec<usize>,
        objective: Q,
    },
    Exhaustive {
        nodes: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub kind: RatioKind,
    pub ratio: Q,
    pub witness: AllocationRule,
    pub certificate: Certificate,
    pub path: SolverPath,
}

fn q_json(v: &Q, decimal: bool) -> Value {
    if decimal {
        json!({ "exact": fmt_q(v), "decimal": to_decimal(v, 6) })
    } else {
        json!(fmt_q(v))
    }
}

pub fn allocation_json(x: &AllocationRule) -> Value {
    let dims = x.dims();
    let per_agent: Vec<Vec<String>> = (0..dims.n())
        .map(|i| (0..dims.profiles()).map(|p| fmt_q(x.get(i, p))).collect())
        .collect();
    json!({
        "n": dims.n(),
        "k": dims.k(),
        "deterministic": x.is_deterministic(),
        "allocation": per_agent,
    })
}

impl ConflictPair {
    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source.0,
            "sink": self.sink.0,
            "kind": self.kind.to_string(),
            "bound": fmt_q(&self.bound),
        })
    }
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Trivial => json!({ "type": "trivial" }),
            Certificate::ConflictPair(cp) => {
                json!({ "type": "conflict_pair", "pair": cp.to_json() })
            }
            Certificate::Matching {
                gamma,
                edges,
                must_match,
            } => json!({
                "type": "matching",
                "gamma": fmt_q(gamma),
                "must_match": must_match.iter().map(|s| s.0.clone()).collect::<Vec<_>>(),
                "edges": edges.iter().map(|e| json!({
                    "must_match": e.must_match.0,
                    "partner": e.partner.0,
                    "agent": e.agent + 1,
                })).collect::<Vec<_>>(),
            }),
            Certificate::LpBasis { basis, objective } => json!({
                "type": "lp_basis",
                "basis": basis,
                "objective": fmt_q(objective),
            }),
            Certificate::Exhaustive { nodes } => json!({ "type": "exhaustive", "nodes": nodes }),
        }
    }
}

impl SolveReport {
    pub fn to_json(&self, decimal: bool) -> Value {
        json!({
            "objective": self.kind.to_string(),
            "ratio": q_json(&self.ratio, decimal),
            "path": self.path.to_string(),
            "witness": allocation_json(&self.witness),
            "certificate": self.certificate.to_json(),
        })
    }
}
