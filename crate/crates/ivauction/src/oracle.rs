//! Brute-force ground truth for small instances and independent report checks.

use crate::duo::graph::precedence_closure;
use crate::duo::pair_bound;
use crate::model::{
    check_truthful, eval_ratio, AllocationRule, Dims, LineOrdering, MonotonicityViolation, Objective, Ratios,
};
use crate::rational::{fmt_q, qi, Q};
use crate::report::{Certificate, RatioKind, SolveReport, SolverPath};
use num_traits::One;
use thiserror::Error;

pub const DEFAULT_SIZE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space n^(k^n) exceeds the cap of {cap}")]
    TooLarge { cap: u64 },
    #[error("node budget of {budget} exhausted")]
    Timeout { budget: u64 },
    #[error("pinned agent {agent} out of range or profile {profile} out of range")]
    BadPin { profile: usize, agent: usize },
    #[error("dimension mismatch between inputs")]
    DimensionMismatch,
}

/// `n^(k^n)`, saturating.
pub fn search_space(dims: Dims) -> u64 {
    let mut total: u64 = 1;
    for _ in 0..dims.profiles() {
        total = total.saturating_mul(dims.n() as u64);
        if total == u64::MAX {
            break;
        }
    }
    total
}

/// Strictly higher and strictly lower profiles on every agent's line.
struct Neighbors {
    above: Vec<Vec<usize>>,
    below: Vec<Vec<usize>>,
}

impl Neighbors {
    fn new(ord: &LineOrdering) -> Self {
        let dims = ord.dims();
        let mut above = vec![Vec::new(); dims.entries()];
        let mut below = vec![Vec::new(); dims.entries()];
        for i in 0..dims.n() {
            for base in dims.line_bases(i) {
                let line: Vec<usize> = dims.line(base, i).collect();
                for &a in &line {
                    for &b in &line {
                        if ord.precedes(i, a, b) {
                            above[a * dims.n() + i].push(b);
                            below[b * dims.n() + i].push(a);
                        }
                    }
                }
            }
        }
        Self { above, below }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub ratio: Q,
    pub rule: AllocationRule,
    pub nodes: u64,
}

impl BruteForce {
    pub fn into_report(self) -> SolveReport {
        SolveReport {
            kind: RatioKind::Det,
            ratio: self.ratio,
            witness: self.rule,
            certificate: Certificate::Exhaustive { nodes: self.nodes },
            path: SolverPath::Oracle,
        }
    }
}

struct Enumerator<'a> {
    rho: &'a Ratios,
    nb: Neighbors,
    /// Agents by decreasing ratio at every profile.
    order: Vec<Vec<usize>>,
    winner: Vec<usize>,
    best: Option<(Q, Vec<usize>)>,
    nodes: u64,
}

impl Enumerator<'_> {
    fn consistent(&self, p: usize, w: usize) -> bool {
        let n = self.rho.dims().n();
        for i in 0..n {
            let e = p * n + i;
            // Profiles below p are already assigned iff their index is smaller.
            let lower_ok = self.nb.below[e].iter().all(|&t| t > p || self.winner[t] != i || w == i);
            let upper_ok = self.nb.above[e].iter().all(|&t| t > p || w != i || self.winner[t] == i);
            if !lower_ok || !upper_ok {
                return false;
            }
        }
        true
    }

    fn run(&mut self, p: usize, worst: Q) {
        self.nodes += 1;
        if let Some((b, _)) = &self.best {
            if worst >= *b {
                return;
            }
        }
        if p == self.winner.len() {
            self.best = Some((worst, self.winner.clone()));
            return;
        }
        for idx in 0..self.order[p].len() {
            let w = self.order[p][idx];
            if !self.consistent(p, w) {
                continue;
            }
            self.winner[p] = w;
            let here = self.rho.get(w, p).recip();
            self.run(p + 1, if here > worst { here } else { worst.clone() });
            self.winner[p] = usize::MAX;
        }
    }
}

/// Exact optimal deterministic ratio by exhaustive branch and bound.
/// `cap = None` skips the size guard.
pub fn brute_force_det(rho: &Ratios, ord: &LineOrdering, cap: Option<u64>) -> Result<BruteForce, OracleError> {
    let dims = rho.dims();
    if ord.dims() != dims {
        return Err(OracleError::DimensionMismatch);
    }
    if let Some(cap) = cap {
        if search_space(dims) > cap {
            return Err(OracleError::TooLarge { cap });
        }
    }
    let order = (0..dims.profiles())
        .map(|p| {
            let mut agents: Vec<usize> = (0..dims.n()).collect();
            agents.sort_by(|&a, &b| rho.get(b, p).cmp(rho.get(a, p)).then(a.cmp(&b)));
            agents
        })
        .collect();
    let mut e = Enumerator {
        rho,
        nb: Neighbors::new(ord),
        order,
        winner: vec![usize::MAX; dims.profiles()],
        best: None,
        nodes: 0,
    };
    e.run(0, qi(1));
    let (ratio, winners) = e.best.expect("a constant rule is always truthful");
    Ok(BruteForce {
        ratio,
        rule: AllocationRule::from_winners(dims, &winners).expect("valid winners"),
        nodes: e.nodes,
    })
}

/// Deterministic feasibility at a fixed ratio by propagation and branching.
pub struct Propagator {
    dims: Dims,
    nb: Neighbors,
    initial: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Search {
    Feasible(AllocationRule),
    Infeasible,
}

impl Propagator {
    pub fn new(rho: &Ratios, ord: &LineOrdering, gamma: &Q) -> Result<Self, OracleError> {
        let dims = rho.dims();
        if ord.dims() != dims {
            return Err(OracleError::DimensionMismatch);
        }
        let threshold = gamma.recip();
        let initial = (0..dims.profiles())
            .map(|p| {
                (0..dims.n())
                    .filter(|&i| *rho.get(i, p) >= threshold)
                    .fold(0u64, |m, i| m | (1 << i))
            })
            .collect();
        Ok(Self {
            dims,
            nb: Neighbors::new(ord),
            initial,
        })
    }

    /// Restricts domains to the pins `(profile, agent)` and propagates to a
    /// fixpoint; `None` when some domain empties.
    pub fn closure(&self, pins: &[(usize, usize)]) -> Result<Option<Vec<u64>>, OracleError> {
        let mut dom = self.initial.clone();
        let mut touched = Vec::new();
        for &(p, a) in pins {
            if p >= self.dims.profiles() || a >= self.dims.n() {
                return Err(OracleError::BadPin { profile: p, agent: a });
            }
            dom[p] &= 1 << a;
            touched.push(p);
        }
        touched.extend(0..self.dims.profiles());
        let mut trail = Vec::new();
        Ok(self.propagate(&mut dom, touched, &mut trail).then_some(dom))
    }

    /// Records `(profile, old domain)` on `trail` before every change.
    fn propagate(&self, dom: &mut [u64], mut work: Vec<usize>, trail: &mut Vec<(usize, u64)>) -> bool {
        let n = self.dims.n();
        while let Some(p) = work.pop() {
            let d = dom[p];
            if d == 0 {
                return false;
            }
            for i in 0..n {
                let bit = 1u64 << i;
                if d == bit {
                    for &t in &self.nb.above[p * n + i] {
                        if dom[t] != bit {
                            trail.push((t, dom[t]));
                            dom[t] &= bit;
                            if dom[t] == 0 {
                                return false;
                            }
                            work.push(t);
                        }
                    }
                } else if d & bit == 0 {
                    for &t in &self.nb.below[p * n + i] {
                        if dom[t] & bit != 0 {
                            trail.push((t, dom[t]));
                            dom[t] &= !bit;
                            if dom[t] == 0 {
                                return false;
                            }
                            work.push(t);
                        }
                    }
                }
            }
        }
        true
    }

    /// Complete search; `budget` bounds the number of branching decisions.
    pub fn solve(&self, pins: &[(usize, usize)], budget: u64) -> Result<Search, OracleError> {
        let Some(dom) = self.closure(pins)? else {
            return Ok(Search::Infeasible);
        };
        match self.branch(dom, budget)? {
            Some(dom) => {
                let winners: Vec<usize> = dom.iter().map(|d| d.trailing_zeros() as usize).collect();
                Ok(Search::Feasible(
                    AllocationRule::from_winners(self.dims, &winners).expect("valid winners"),
                ))
            }
            None => Ok(Search::Infeasible),
        }
    }

    /// Depth-first search with an undo trail. Profiles are decided in a
    /// static order: most constrained initial domain first, then by index.
    fn branch(&self, mut dom: Vec<u64>, budget: u64) -> Result<Option<Vec<u64>>, OracleError> {
        struct Frame {
            pos: usize,
            options: u64,
            mark: usize,
        }
        let mut order: Vec<usize> = (0..dom.len()).collect();
        order.sort_by_key(|&p| (self.initial[p].count_ones(), p));
        let mut trail: Vec<(usize, u64)> = Vec::new();
        let mut stack: Vec<Frame> = Vec::new();
        let mut pos = 0;
        let mut nodes = 0u64;
        loop {
            while pos < order.len() && dom[order[pos]].count_ones() == 1 {
                pos += 1;
            }
            if pos == order.len() {
                return Ok(Some(dom));
            }
            stack.push(Frame {
                pos,
                options: dom[order[pos]],
                mark: trail.len(),
            });
            loop {
                let Some(frame) = stack.last_mut() else {
                    return Ok(None);
                };
                while trail.len() > frame.mark {
                    let (t, old) = trail.pop().expect("non-empty trail");
                    dom[t] = old;
                }
                if frame.options == 0 {
                    stack.pop();
                    continue;
                }
                nodes += 1;
                if nodes > budget {
                    return Err(OracleError::Timeout { budget });
                }
                let i = frame.options.trailing_zeros();
                frame.options &= frame.options - 1;
                let p = order[frame.pos];
                trail.push((p, dom[p]));
                dom[p] = 1 << i;
                if self.propagate(&mut dom, vec![p], &mut trail) {
                    pos = frame.pos + 1;
                    break;
                }
            }
        }
    }
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Convenience wrapper: is there a deterministic rule of ratio at most `gamma`?
pub fn propagate_feasible(
    rho: &Ratios,
    ord: &LineOrdering,
    gamma: &Q,
    pins: &[(usize, usize)],
    budget: u64,
) -> Result<Search, OracleError> {
    Propagator::new(rho, ord, gamma)?.solve(pins, budget)
}

/// Optimal deterministic ratio by binary search over propagation decisions.
pub fn propagation_search(rho: &Ratios, ord: &LineOrdering, budget: u64) -> Result<SolveReport, OracleError> {
    let mut failure = None;
    let found = crate::search::min_feasible(&rho.candidate_gammas(), |g| {
        match propagate_feasible(rho, ord, g, &[], budget) {
            Ok(Search::Feasible(x)) => Some(x),
            Ok(Search::Infeasible) => None,
            Err(e) => {
                failure = Some(e);
                None
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (ratio, witness) = found.expect("the largest candidate is always feasible");
    Ok(SolveReport {
        kind: RatioKind::Det,
        ratio,
        witness,
        certificate: Certificate::Trivial,
        path: SolverPath::Propagation,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Mismatch {
    #[error("witness dimensions differ from the instance")]
    Dimensions,
    #[error("witness is not truthful: {0}")]
    NotTruthful(MonotonicityViolation),
    #[error("deterministic report with a randomized witness")]
    NotDeterministic,
    #[error("ratio mismatch: claimed {claimed}, witness achieves {actual}")]
    RatioMismatch { claimed: String, actual: String },
    #[error("invalid certificate: {0}")]
    Certificate(String),
}

fn objective_of(kind: RatioKind) -> Objective {
    match kind {
        RatioKind::Cost => Objective::Cost,
        RatioKind::Value | RatioKind::Det => Objective::Value,
    }
}

/// Re-checks a report from scratch: witness, ratio and certificate.
pub fn verify_report(rho: &Ratios, ord: &LineOrdering, report: &SolveReport) -> Result<(), Mismatch> {
    let dims = rho.dims();
    let x = &report.witness;
    if x.dims() != dims || ord.dims() != dims {
        return Err(Mismatch::Dimensions);
    }
    check_truthful(x, ord).map_err(Mismatch::NotTruthful)?;
    if report.kind == RatioKind::Det && !x.is_deterministic() {
        return Err(Mismatch::NotDeterministic);
    }
    let actual = eval_ratio(rho, x, objective_of(report.kind));
    if actual != report.ratio {
        return Err(Mismatch::RatioMismatch {
            claimed: fmt_q(&report.ratio),
            actual: fmt_q(&actual),
        });
    }
    let bad = |m: &str| Err(Mismatch::Certificate(m.to_string()));
    match &report.certificate {
        Certificate::Trivial | Certificate::Exhaustive { .. } => Ok(()),
        Certificate::ConflictPair(cp) => {
            if dims.n() != 2 || !dims.valid_profile(&cp.source) || !dims.valid_profile(&cp.sink) {
                return bad("conflict pair outside a two-agent instance");
            }
            let (s, t) = (dims.index(&cp.source), dims.index(&cp.sink));
            if !precedence_closure(ord)[s][t] {
                return bad("source does not precede sink");
            }
            let bound = pair_bound(cp.kind, rho.get(1, s), rho.get(0, t));
            if bound != cp.bound || cp.kind != report.kind || bound != report.ratio {
                return bad("bound does not match the pair or the ratio");
            }
            Ok(())
        }
        Certificate::Matching {
            gamma,
            edges,
            must_match,
        } => {
            if *gamma != report.ratio || edges.len() != must_match.len() {
                return bad("matching does not cover the must-match set");
            }
            let threshold = gamma.recip();
            for e in edges {
                if !dims.valid_profile(&e.must_match) || !dims.valid_profile(&e.partner) || e.agent >= dims.n() {
                    return bad("edge out of range");
                }
                let (a, b) = (dims.index(&e.must_match), dims.index(&e.partner));
                let differ = (0..dims.n()).filter(|&i| dims.signal(a, i) != dims.signal(b, i)).collect::<Vec<_>>();
                if differ != [e.agent] {
                    return bad("edge endpoints do not share a line of its agent");
                }
                if *rho.get(e.agent, a) < threshold || *rho.get(e.agent, b) < threshold {
                    return bad("edge agent is not acceptable at an endpoint");
                }
                if !x.get(e.agent, a).is_one() || !x.get(e.agent, b).is_one() {
                    return bad("witness does not follow the matching");
                }
                if !must_match.contains(&e.must_match) {
                    return bad("edge does not start at a must-match profile");
                }
            }
            Ok(())
        }
        Certificate::LpBasis { basis, objective } => {
            let expected = match report.kind {
                RatioKind::Value => report.ratio.recip(),
                RatioKind::Cost => report.ratio.clone(),
                RatioKind::Det => qi(dims.profiles() as i64),
            };
            if *objective != expected {
                return bad("objective does not match the ratio");
            }
            if basis.windows(2).any(|w| w[0] >= w[1]) {
                return bad("basis indices are not distinct and sorted");
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duo::Duo;
    use crate::gen::fixtures;
    use crate::model::{orderings_from_instance, ratios_from_values, values_from_ratios, Mode};
    use crate::rational::{one, q};

    fn parts(inst: &crate::model::Instance) -> (Ratios, LineOrdering) {
        (ratios_from_values(inst), orderings_from_instance(inst))
    }

    #[test]
    fn pair_instance() {
        let (rho, ord) = parts(&fixtures::fig5_pair());
        let bf = brute_force_det(&rho, &ord, Some(DEFAULT_SIZE_CAP)).unwrap();
        assert_eq!(bf.ratio, qi(2));
        assert!(matches!(
            propagate_feasible(&rho, &ord, &q(3, 2), &[], DEFAULT_BUDGET),
            Ok(Search::Infeasible)
        ));
        assert!(matches!(
            propagate_feasible(&rho, &ord, &qi(2), &[], DEFAULT_BUDGET),
            Ok(Search::Feasible(_))
        ));
        assert_eq!(propagation_search(&rho, &ord, DEFAULT_BUDGET).unwrap().ratio, qi(2));
    }

    #[test]
    fn unit_ratios() {
        for (n, k) in [(2, 2), (2, 3), (3, 2)] {
            let dims = Dims::new(n, k).unwrap();
            let rho = Ratios::ones(dims);
            let ord = orderings_from_instance(&values_from_ratios(&rho, Mode::Good));
            assert_eq!(brute_force_det(&rho, &ord, None).unwrap().ratio, one());
            assert!(matches!(
                propagate_feasible(&rho, &ord, &one(), &[], 1),
                Ok(Search::Feasible(_)) | Err(OracleError::Timeout { .. })
            ));
            assert!(matches!(propagate_feasible(&rho, &ord, &one(), &[], 100), Ok(Search::Feasible(_))));
        }
    }

    #[test]
    fn size_guard() {
        let dims = Dims::new(3, 3).unwrap();
        let rho = Ratios::ones(dims);
        let ord = orderings_from_instance(&values_from_ratios(&rho, Mode::Good));
        assert_eq!(
            brute_force_det(&rho, &ord, Some(DEFAULT_SIZE_CAP)).unwrap_err(),
            OracleError::TooLarge { cap: DEFAULT_SIZE_CAP }
        );
    }

    #[test]
    fn matching_example_agrees() {
        let (rho, ord) = parts(&fixtures::fig3_instance());
        let bf = brute_force_det(&rho, &ord, Some(DEFAULT_SIZE_CAP)).unwrap();
        let fast = crate::binary::solve_det_k2(&rho, &ord).unwrap();
        assert_eq!(bf.ratio, fast.ratio);
        assert!(bf.ratio <= qi(2));
    }

    #[test]
    fn verifies_and_rejects_reports() {
        let (rho, ord) = parts(&fixtures::fig5_pair());
        let duo = Duo::new(rho.clone(), ord.clone()).unwrap();
        for kind in [RatioKind::Value, RatioKind::Cost, RatioKind::Det] {
            let r = duo.solve(kind).unwrap();
            assert_eq!(verify_report(&rho, &ord, &r), Ok(()));
            let mut tampered = r.clone();
            tampered.ratio = q(7, 5);
            assert!(matches!(verify_report(&rho, &ord, &tampered), Err(Mismatch::RatioMismatch { .. })));
        }
        let mut r = duo.solve(RatioKind::Det).unwrap();
        // Agent 0 wins only at (1,1): breaks monotonicity along the chain.
        let dims = rho.dims();
        let winners: Vec<usize> = (0..4).map(|p| if p == dims.index_of(&[1, 1]) { 0 } else { 1 }).collect();
        r.witness = AllocationRule::from_winners(dims, &winners).unwrap();
        assert!(matches!(verify_report(&rho, &ord, &r), Err(Mismatch::NotTruthful(_))));
        let lp = crate::lp::solve_val(&rho, &ord).unwrap();
        assert_eq!(verify_report(&rho, &ord, &lp), Ok(()));
    }

    #[test]
    fn closure_forces_along_chains() {
        let (rho, ord) = parts(&fixtures::fig2_chain());
        let dims = rho.dims();
        let prop = Propagator::new(&rho, &ord, &qi(2)).unwrap();
        // ρ2(2,1) < 1/2 already forces agent 0 there, hence along the chain up to (1,3).
        assert!(prop.closure(&[]).unwrap().is_none());
        let prop = Propagator::new(&rho, &ord, &q(10, 3)).unwrap();
        let dom = prop.closure(&[(dims.index_of(&[2, 1]), 0)]).unwrap().unwrap();
        for s in [[2, 1], [2, 2], [1, 2], [1, 3]] {
            assert_eq!(dom[dims.index_of(&s)], 1);
        }
    }
}
