//! Two-signal fast path: deterministic feasibility as bipartite matching.

use crate::model::{AllocationRule, Dims, LineOrdering, ModelError, Ratios, SignalProfile};
use crate::rational::Q;
use crate::report::{Certificate, MatchEdge, RatioKind, SolveReport, SolverPath};
use crate::search::min_feasible;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BinaryError {
    #[error("this path needs exactly two signals, got {0}")]
    WrongArity(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Edge from a must-match profile to the profile above it in `agent`'s order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub must_match: usize,
    pub partner: usize,
    pub agent: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchGraph {
    pub dims: Dims,
    pub gamma: Q,
    /// Bit `i` set when agent `i` is within ratio `gamma` at the profile.
    pub acceptable: Vec<u64>,
    /// Bit `i` set when the profile sits in the lower block of agent `i`'s line.
    pub constrained: Vec<u64>,
    pub edges: Vec<GraphEdge>,
}

impl MatchGraph {
    /// Profiles where every acceptable agent is constrained.
    pub fn is_must_match(&self, p: usize) -> bool {
        self.acceptable[p] & !self.constrained[p] == 0
    }

    pub fn must_match(&self) -> Vec<usize> {
        (0..self.dims.profiles()).filter(|&p| self.is_must_match(p)).collect()
    }

    /// Profiles that can be served alone (the singleton edges).
    pub fn singletons(&self) -> Vec<usize> {
        (0..self.dims.profiles()).filter(|&p| !self.is_must_match(p)).collect()
    }

    pub fn parity(&self, p: usize) -> usize {
        self.dims.level(p) % 2
    }

    /// Maximum matching over the edge set, sides split by parity.
    pub fn max_matching(&self) -> Matching {
        let np = self.dims.profiles();
        let side: Vec<usize> = (0..np).map(|p| self.parity(p)).collect();
        let mut pos = vec![0; np];
        let (mut left, mut right) = (0, 0);
        for p in 0..np {
            if side[p] == 0 {
                pos[p] = left;
                left += 1;
            } else {
                pos[p] = right;
                right += 1;
            }
        }
        let mut adj = vec![Vec::new(); left];
        for e in &self.edges {
            let (l, r) = if side[e.must_match] == 0 {
                (e.must_match, e.partner)
            } else {
                (e.partner, e.must_match)
            };
            adj[pos[l]].push(pos[r]);
        }
        let inner = hopcroft_karp(left, right, &adj);
        let mut by_pos = [vec![0; left], vec![0; right]];
        for p in 0..np {
            by_pos[side[p]][pos[p]] = p;
        }
        let mut mate = vec![None; np];
        for (l, r) in inner.left_to_right.iter().enumerate() {
            if let Some(r) = r {
                let (a, b) = (by_pos[0][l], by_pos[1][*r]);
                mate[a] = Some(b);
                mate[b] = Some(a);
            }
        }
        Matching {
            mate,
            size: inner.size,
        }
    }
}

/// Matching on profiles: `mate[p]` is the profile matched to `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub mate: Vec<Option<usize>>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMatching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
    pub size: usize,
}

/// Maximum-cardinality bipartite matching by shortest augmenting paths in phases.
pub fn hopcroft_karp(left: usize, right: usize, adj: &[Vec<usize>]) -> BipartiteMatching {
    const FREE: usize = usize::MAX;
    let mut l2r = vec![FREE; left];
    let mut r2l = vec![FREE; right];
    let mut dist = vec![0usize; left];
    let mut size = 0;
    loop {
        // Layer the free left vertices.
        let mut queue = VecDeque::new();
        for u in 0..left {
            if l2r[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = FREE;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match r2l[v] {
                    FREE => found = true,
                    w if dist[w] == FREE => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut next_edge = vec![0; left];
        for u in 0..left {
            if l2r[u] == FREE && augment(u, adj, &mut l2r, &mut r2l, &mut dist, &mut next_edge) {
                size += 1;
            }
        }
    }
    let wrap = |v: Vec<usize>| v.into_iter().map(|x| (x != FREE).then_some(x)).collect();
    BipartiteMatching {
        left_to_right: wrap(l2r),
        right_to_left: wrap(r2l),
        size,
    }
}

fn augment(
    root: usize,
    adj: &[Vec<usize>],
    l2r: &mut [usize],
    r2l: &mut [usize],
    dist: &mut [usize],
    next_edge: &mut [usize],
) -> bool {
    const FREE: usize = usize::MAX;
    // Iterative depth-first search along the layering.
    let mut path = vec![root];
    while let Some(&u) = path.last() {
        if next_edge[u] == adj[u].len() {
            dist[u] = FREE;
            path.pop();
            continue;
        }
        let v = adj[u][next_edge[u]];
        next_edge[u] += 1;
        let w = r2l[v];
        if w == FREE {
            // Flip the path; each left vertex takes the right vertex it last tried.
            for &a in path.iter().rev() {
                let b = adj[a][next_edge[a] - 1];
                r2l[b] = a;
                l2r[a] = b;
            }
            return true;
        }
        if dist[w] == dist[u] + 1 {
            path.push(w);
        }
    }
    false
}

fn check_k2(rho: &Ratios) -> Result<(), BinaryError> {
    if rho.dims().k() != 2 {
        return Err(BinaryError::WrongArity(rho.dims().k()));
    }
    Ok(())
}

/// The profile with agent `i`'s signal switched.
fn flip(dims: Dims, p: usize, i: usize) -> usize {
    dims.with_signal(p, i, 3 - dims.signal(p, i))
}

pub fn build_match_graph(rho: &Ratios, ord: &LineOrdering, gamma: &Q) -> Result<MatchGraph, BinaryError> {
    check_k2(rho)?;
    let dims = rho.dims();
    if ord.dims() != dims {
        return Err(ModelError::DimensionMismatch.into());
    }
    let threshold = gamma.recip();
    let np = dims.profiles();
    let mut acceptable = vec![0u64; np];
    let mut constrained = vec![0u64; np];
    for p in 0..np {
        for i in 0..dims.n() {
            if *rho.get(i, p) >= threshold {
                acceptable[p] |= 1 << i;
            }
            if ord.precedes(i, p, flip(dims, p, i)) {
                constrained[p] |= 1 << i;
            }
        }
    }
    let mut g = MatchGraph {
        dims,
        gamma: gamma.clone(),
        acceptable,
        constrained,
        edges: Vec::new(),
    };
    for p in 0..np {
        if !g.is_must_match(p) {
            continue;
        }
        for i in 0..dims.n() {
            let up = flip(dims, p, i);
            if g.acceptable[p] & g.constrained[p] & (1 << i) != 0 && g.acceptable[up] & (1 << i) != 0 {
                g.edges.push(GraphEdge {
                    must_match: p,
                    partner: up,
                    agent: i,
                });
            }
        }
    }
    Ok(g)
}

/// Feasible decision at `gamma`: the rule and the matched edges.
#[derive(Debug, Clone, PartialEq)]
pub struct K2Decision {
    pub rule: AllocationRule,
    pub edges: Vec<GraphEdge>,
    pub must_match: Vec<usize>,
}

pub fn decide_k2(rho: &Ratios, ord: &LineOrdering, gamma: &Q) -> Result<Option<K2Decision>, BinaryError> {
    let g = build_match_graph(rho, ord, gamma)?;
    let must_match = g.must_match();
    let m = g.max_matching();
    if m.size < must_match.len() {
        return Ok(None);
    }
    let dims = g.dims;
    let mut winner = vec![usize::MAX; dims.profiles()];
    let mut used = Vec::new();
    for &p in &must_match {
        let mate = m.mate[p].expect("every must-match profile is covered");
        let e = *g
            .edges
            .iter()
            .find(|e| e.must_match == p && e.partner == mate)
            .expect("matched pair is an edge");
        winner[p] = e.agent;
        winner[mate] = e.agent;
        used.push(e);
    }
    for p in 0..dims.profiles() {
        if winner[p] == usize::MAX {
            let free = g.acceptable[p] & !g.constrained[p];
            winner[p] = free.trailing_zeros() as usize;
        }
    }
    Ok(Some(K2Decision {
        rule: AllocationRule::from_winners(dims, &winner)?,
        edges: used,
        must_match,
    }))
}

fn profiles(dims: Dims, ps: &[usize]) -> Vec<SignalProfile> {
    ps.iter().map(|&p| dims.profile(p)).collect()
}

/// Optimal deterministic ratio for two signals by binary search over matchings.
pub fn solve_det_k2(rho: &Ratios, ord: &LineOrdering) -> Result<SolveReport, BinaryError> {
    check_k2(rho)?;
    let dims = rho.dims();
    let mut failure = None;
    let found = min_feasible(&rho.candidate_gammas(), |g| match decide_k2(rho, ord, g) {
        Ok(d) => d,
        Err(e) => {
            failure = Some(e);
            None
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (gamma, d) = found.expect("the largest candidate is always feasible");
    let edges = d
        .edges
        .iter()
        .map(|e| MatchEdge {
            must_match: dims.profile(e.must_match),
            partner: dims.profile(e.partner),
            agent: e.agent,
        })
        .collect();
    Ok(SolveReport {
        kind: RatioKind::Det,
        ratio: gamma.clone(),
        witness: d.rule,
        certificate: Certificate::Matching {
            gamma,
            edges,
            must_match: profiles(dims, &d.must_match),
        },
        path: SolverPath::Binary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::fixtures;
    use crate::model::{eval_ratio, is_truthful, orderings_from_instance, values_from_ratios, Mode, Objective};
    use crate::rational::{one, qi};

    #[test]
    fn matching_basics() {
        let empty = hopcroft_karp(3, 3, &[vec![], vec![], vec![]]);
        assert_eq!(empty.size, 0);
        let full = hopcroft_karp(2, 2, &[vec![0, 1], vec![0, 1]]);
        assert_eq!(full.size, 2);
        // Needs an augmenting path through a matched vertex.
        let chain = hopcroft_karp(3, 3, &[vec![0], vec![0, 1], vec![1, 2]]);
        assert_eq!(chain.size, 3);
    }

    #[test]
    fn figure_three_graph() {
        let inst = fixtures::fig3_instance();
        let rho = fixtures::fig3_ratios();
        let ord = orderings_from_instance(&inst);
        let dims = rho.dims();
        let g = build_match_graph(&rho, &ord, &qi(2)).unwrap();
        let at = |s: [usize; 3]| dims.index_of(&s);
        let mut must = g.must_match();
        must.sort_unstable();
        let mut want = vec![at([1, 1, 1]), at([1, 2, 1]), at([1, 1, 2]), at([2, 1, 2])];
        want.sort_unstable();
        assert_eq!(must, want);
        let mut edges: Vec<(usize, usize, usize)> = g.edges.iter().map(|e| (e.must_match, e.partner, e.agent)).collect();
        edges.sort_unstable();
        let mut want = vec![
            (at([1, 1, 1]), at([2, 1, 1]), 0),
            (at([1, 2, 1]), at([2, 2, 1]), 0),
            (at([1, 2, 1]), at([1, 2, 2]), 2),
            (at([1, 1, 2]), at([1, 2, 2]), 1),
            (at([2, 1, 2]), at([2, 2, 2]), 1),
        ];
        want.sort_unstable();
        assert_eq!(edges, want);
        for e in &g.edges {
            assert!(g.is_must_match(e.must_match) && !g.is_must_match(e.partner));
            assert_ne!(g.parity(e.must_match), g.parity(e.partner));
        }
        assert_eq!(g.max_matching().size, 4);
        let d = decide_k2(&rho, &ord, &qi(2)).unwrap().unwrap();
        assert!(is_truthful(&d.rule, &ord));
        assert!(eval_ratio(&rho, &d.rule, Objective::Value) <= qi(2));
    }

    #[test]
    fn unit_ratios() {
        let dims = Dims::new(3, 2).unwrap();
        let rho = Ratios::ones(dims);
        let flat = crate::model::Instance::from_fn(dims, Mode::Good, |_, _| one()).unwrap();
        let g = build_match_graph(&rho, &orderings_from_instance(&flat), &one()).unwrap();
        assert!(g.must_match().is_empty() && g.edges.is_empty());
        assert_eq!(g.singletons().len(), 8);
        // Strict orders leave (1,1,1) with every agent constrained.
        let ord = orderings_from_instance(&values_from_ratios(&rho, Mode::Good));
        let g = build_match_graph(&rho, &ord, &one()).unwrap();
        assert_eq!(g.must_match(), vec![0]);
        assert_eq!(solve_det_k2(&rho, &ord).unwrap().ratio, one());
    }

    #[test]
    fn wrong_arity() {
        let dims = Dims::new(2, 3).unwrap();
        let rho = Ratios::ones(dims);
        let ord = orderings_from_instance(&values_from_ratios(&rho, Mode::Good));
        assert_eq!(build_match_graph(&rho, &ord, &one()).unwrap_err(), BinaryError::WrongArity(3));
    }

    #[test]
    fn pair_instance() {
        let inst = fixtures::fig5_pair();
        let rho = crate::model::ratios_from_values(&inst);
        let r = solve_det_k2(&rho, &orderings_from_instance(&inst)).unwrap();
        assert_eq!(r.ratio, qi(2));
    }
}
