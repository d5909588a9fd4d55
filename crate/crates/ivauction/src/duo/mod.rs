//! Two-agent fast path: closed-form optimal ratios, constructive rules and
//! the 2-SAT decision procedure.

pub mod crossing;
pub mod graph;
pub mod twosat;

pub use crossing::is_single_crossing;
pub use graph::{build_dependency_graph, condense, CondensedDag, DependencyGraph};
pub use twosat::{twosat_feasible, twosat_search};

use crate::model::{
    orderings_from_instance, ratios_from_values, AllocationRule, Instance, LineOrdering, ModelError, Ratios,
};
use crate::rational::{fmt_q, one, qi, zero, Q};
use crate::report::{Certificate, ConflictPair, RatioKind, SolveReport, SolverPath};
use num_traits::One;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DuoError {
    #[error("this path needs exactly two agents, got {0}")]
    WrongArity(usize),
    #[error("no rule within ratio {}: conflict pair {} before {} forces {}",
        fmt_q(.alpha), .pair.source, .pair.sink, fmt_q(&.pair.bound))]
    PreconditionViolation { alpha: Q, pair: Box<ConflictPair> },
    #[error("no feasible share left at {0}")]
    EmptyInterval(crate::model::SignalProfile),
    #[error("instance is not monotone along every line")]
    NotMonotone,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `f(u, v) = (uv - 1) / (u + v - 2)`, and 1 at `u = v = 1`.
pub fn conflict_function(u: &Q, v: &Q) -> Q {
    if u.is_one() && v.is_one() {
        return one();
    }
    (u * v - one()) / (u + v - qi(2))
}

/// Lower bound a source ratio `second` (agent 1 at the source) and a sink
/// ratio `first` (agent 0 at the sink) impose for each objective.
pub fn pair_bound(kind: RatioKind, second: &Q, first: &Q) -> Q {
    match kind {
        RatioKind::Value => conflict_function(second, first).recip(),
        RatioKind::Cost => conflict_function(&second.recip(), &first.recip()),
        RatioKind::Det => second.recip().min(first.recip()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalRatios {
    pub value: Q,
    pub cost: Q,
    pub det: Q,
    /// Extremal pairs, absent when the ratio is 1.
    pub value_pair: Option<ConflictPair>,
    pub cost_pair: Option<ConflictPair>,
    pub det_pair: Option<ConflictPair>,
}

impl OptimalRatios {
    pub fn ratio(&self, kind: RatioKind) -> &Q {
        match kind {
            RatioKind::Value => &self.value,
            RatioKind::Cost => &self.cost,
            RatioKind::Det => &self.det,
        }
    }

    pub fn pair(&self, kind: RatioKind) -> Option<&ConflictPair> {
        match kind {
            RatioKind::Value => self.value_pair.as_ref(),
            RatioKind::Cost => self.cost_pair.as_ref(),
            RatioKind::Det => self.det_pair.as_ref(),
        }
    }
}

/// Side of an interval; infinite ends are kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    NegInf,
    At(Q),
    PosInf,
}

impl Ord for Endpoint {
    fn cmp(&self, other: &Self) -> Ordering {
        use Endpoint::*;
        match (self, other) {
            (At(a), At(b)) => a.cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Endpoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Feasible range `[left, right]` of agent 0's share at one profile so that
/// the profile alone meets ratio `alpha` for a randomized objective.
pub fn share_interval(kind: RatioKind, first: &Q, second: &Q, alpha: &Q) -> (Endpoint, Endpoint) {
    // Both objectives reduce to x * a + (1 - x) * b  (>= or <=)  t.
    let (a, b, t, at_least) = match kind {
        RatioKind::Value | RatioKind::Det => (first.clone(), second.clone(), alpha.recip(), true),
        RatioKind::Cost => (first.recip(), second.recip(), alpha.clone(), false),
    };
    // x * (a - b) >= t - b  or  <=.
    let slope = &a - &b;
    let need = &t - &b;
    match (slope.cmp(&zero()), at_least) {
        (Ordering::Equal, _) => (Endpoint::NegInf, Endpoint::PosInf),
        (Ordering::Greater, true) | (Ordering::Less, false) => (Endpoint::At(need / slope), Endpoint::PosInf),
        (Ordering::Less, true) | (Ordering::Greater, false) => (Endpoint::NegInf, Endpoint::At(need / slope)),
    }
}

/// Two-agent instance prepared once: ratios, ordering and condensed graph.
#[derive(Debug, Clone)]
pub struct Duo {
    rho: Ratios,
    ord: LineOrdering,
    graph: DependencyGraph,
    dag: CondensedDag,
}

impl Duo {
    pub fn new(rho: Ratios, ord: LineOrdering) -> Result<Self, DuoError> {
        if rho.dims().n() != 2 {
            return Err(DuoError::WrongArity(rho.dims().n()));
        }
        if rho.dims() != ord.dims() {
            return Err(ModelError::DimensionMismatch.into());
        }
        let graph = build_dependency_graph(&ord);
        let dag = condense(&graph, &rho);
        Ok(Self { rho, ord, graph, dag })
    }

    pub fn from_instance(inst: &Instance) -> Result<Self, DuoError> {
        Self::new(ratios_from_values(inst), orderings_from_instance(inst))
    }

    pub fn ratios(&self) -> &Ratios {
        &self.rho
    }

    pub fn ordering(&self) -> &LineOrdering {
        &self.ord
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn dag(&self) -> &CondensedDag {
        &self.dag
    }

    /// Best source for every component: the minimum of agent 1's ratio over
    /// profiles in strictly earlier components that reach it.
    fn incoming_minima(&self) -> Vec<Option<(Q, usize)>> {
        let dag = &self.dag;
        let mut incoming: Vec<Option<(Q, usize)>> = vec![None; dag.len()];
        for c in 0..dag.len() {
            let mut best: Option<(Q, usize)> = None;
            for &p in &dag.pred[c] {
                for cand in [&dag.min_second[p], &incoming[p]].into_iter().flatten() {
                    if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                        best = Some(cand.clone());
                    }
                }
            }
            incoming[c] = best;
        }
        incoming
    }

    /// `(source, sink)` candidates, one or two per component.
    fn candidate_pairs(&self) -> Vec<(usize, usize)> {
        let incoming = self.incoming_minima();
        let mut out = Vec::new();
        for c in 0..self.dag.len() {
            let Some((_, sink)) = &self.dag.min_first[c] else {
                continue;
            };
            if let Some((_, src)) = &incoming[c] {
                out.push((*src, *sink));
            }
            if self.dag.profiles[c].len() >= 2 {
                let (_, src) = self.dag.min_second[c].as_ref().expect("non-empty");
                out.push((*src, *sink));
            }
        }
        out
    }

    pub fn optimal_ratios(&self) -> OptimalRatios {
        let pairs = self.candidate_pairs();
        let dims = self.rho.dims();
        let extremal = |kind: RatioKind| -> (Q, Option<ConflictPair>) {
            let mut best = (one(), None);
            for &(src, sink) in &pairs {
                let bound = pair_bound(kind, self.rho.get(1, src), self.rho.get(0, sink));
                if bound > best.0 {
                    best = (
                        bound.clone(),
                        Some(ConflictPair {
                            source: dims.profile(src),
                            sink: dims.profile(sink),
                            kind,
                            bound,
                        }),
                    );
                }
            }
            best
        };
        let (value, value_pair) = extremal(RatioKind::Value);
        let (cost, cost_pair) = extremal(RatioKind::Cost);
        let (det, det_pair) = extremal(RatioKind::Det);
        OptimalRatios {
            value,
            cost,
            det,
            value_pair,
            cost_pair,
            det_pair,
        }
    }

    fn check_precondition(&self, kind: RatioKind, alpha: &Q) -> Result<(), DuoError> {
        let opt = self.optimal_ratios();
        if opt.ratio(kind) > alpha {
            return Err(DuoError::PreconditionViolation {
                alpha: alpha.clone(),
                pair: Box::new(opt.pair(kind).cloned().expect("ratio above 1 has a pair")),
            });
        }
        Ok(())
    }

    fn shares_to_rule(&self, comp_share: &[Q]) -> Result<AllocationRule, DuoError> {
        let dims = self.rho.dims();
        let share: Vec<Q> = (0..dims.profiles())
            .map(|p| comp_share[self.dag.component[p]].clone())
            .collect();
        Ok(AllocationRule::from_first_share(dims, &share)?)
    }

    /// Deterministic rule giving agent 0 the item only where forced.
    pub fn zap(&self, alpha: &Q) -> Result<AllocationRule, DuoError> {
        self.check_precondition(RatioKind::Det, alpha)?;
        let threshold = alpha.recip();
        let dag = &self.dag;
        let mut take = vec![false; dag.len()];
        for c in 0..dag.len() {
            take[c] = dag.pred[c].iter().any(|&p| take[p])
                || dag.profiles[c].iter().any(|&p| *self.rho.get(1, p) < threshold);
        }
        let shares: Vec<Q> = take.iter().map(|&t| if t { one() } else { zero() }).collect();
        self.shares_to_rule(&shares)
    }

    fn smallest_shares(&self, kind: RatioKind, alpha: &Q) -> Result<AllocationRule, DuoError> {
        self.check_precondition(kind, alpha)?;
        let dag = &self.dag;
        let mut shares: Vec<Q> = Vec::with_capacity(dag.len());
        for c in 0..dag.len() {
            let mut left = Endpoint::At(zero());
            let mut right = Endpoint::At(one());
            for &p in &dag.pred[c] {
                left = left.max(Endpoint::At(shares[p].clone()));
            }
            for &p in &dag.profiles[c] {
                let (lo, hi) = share_interval(kind, self.rho.get(0, p), self.rho.get(1, p), alpha);
                left = left.max(lo);
                right = right.min(hi);
            }
            match (left, right) {
                (Endpoint::At(l), r) if Endpoint::At(l.clone()) <= r => shares.push(l),
                _ => {
                    let at = dag.profiles[c].first().copied().unwrap_or(0);
                    return Err(DuoError::EmptyInterval(self.rho.dims().profile(at)));
                }
            }
        }
        self.shares_to_rule(&shares)
    }

    /// Randomized rule with the smallest feasible share for agent 0 (value objective).
    pub fn sap_v(&self, alpha: &Q) -> Result<AllocationRule, DuoError> {
        self.smallest_shares(RatioKind::Value, alpha)
    }

    /// Randomized rule with the smallest feasible share for agent 0 (cost objective).
    pub fn sap_c(&self, alpha: &Q) -> Result<AllocationRule, DuoError> {
        self.smallest_shares(RatioKind::Cost, alpha)
    }

    /// Optimal ratio for `kind` with a witness rule built at that ratio.
    pub fn solve(&self, kind: RatioKind) -> Result<SolveReport, DuoError> {
        let opt = self.optimal_ratios();
        let ratio = opt.ratio(kind).clone();
        let witness = match kind {
            RatioKind::Value => self.sap_v(&ratio)?,
            RatioKind::Cost => self.sap_c(&ratio)?,
            RatioKind::Det => self.zap(&ratio)?,
        };
        let certificate = match opt.pair(kind) {
            Some(cp) => Certificate::ConflictPair(cp.clone()),
            None => Certificate::Trivial,
        };
        Ok(SolveReport {
            kind,
            ratio,
            witness,
            certificate,
            path: SolverPath::Duo,
        })
    }
}
