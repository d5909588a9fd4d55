//! Dependency graph over two-agent profiles and its condensation.

use crate::model::{Dims, LineOrdering, Ratios};
use crate::rational::Q;

/// Strongly connected components, numbered in topological order (every edge
/// goes from a lower or equal id to a higher or equal id).
pub fn strongly_connected(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut emitted = vec![UNSEEN; n];
    let mut next_index = 0;
    let mut count = 0;
    // Explicit call stack of (vertex, next edge position).
    let mut calls: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    emitted[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    // Tarjan emits sinks first.
    let comp = emitted.into_iter().map(|c| count - 1 - c).collect();
    (comp, count)
}

/// A dummy vertex sits between two consecutive blocks of one line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dummy {
    pub agent: usize,
    /// Any profile on the line.
    pub line: usize,
    /// Index of the lower block.
    pub block: usize,
}

/// Directed graph whose first `k^2` vertices are the profiles; a path from `s`
/// to `t` means agent 0's share at `s` may not exceed its share at `t`.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    pub dims: Dims,
    pub adj: Vec<Vec<usize>>,
    pub dummies: Vec<Dummy>,
}

impl DependencyGraph {
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn is_profile(&self, v: usize) -> bool {
        v < self.dims.profiles()
    }

    /// Profiles reachable from `from` by a non-empty path.
    pub fn reachable_profiles(&self, from: usize) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count()];
        let mut todo = self.adj[from].clone();
        while let Some(v) = todo.pop() {
            if !seen[v] {
                seen[v] = true;
                todo.extend(&self.adj[v]);
            }
        }
        (0..self.dims.profiles()).filter(|&p| seen[p]).collect()
    }
}

/// Builds the graph from a two-agent ordering: agent 0's chains point up its
/// blocks, agent 1's chains point down (raising agent 1 lowers agent 0).
pub fn build_dependency_graph(ord: &LineOrdering) -> DependencyGraph {
    let dims = ord.dims();
    debug_assert_eq!(dims.n(), 2);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); dims.profiles()];
    let mut dummies = Vec::new();
    for agent in 0..2 {
        for base in dims.line_bases(agent) {
            let blocks = ord.blocks(agent, base);
            for (j, w) in blocks.windows(2).enumerate() {
                let d = adj.len();
                adj.push(Vec::new());
                dummies.push(Dummy {
                    agent,
                    line: base,
                    block: j,
                });
                let (from, to) = if agent == 0 { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
                for &p in from {
                    adj[p].push(d);
                }
                adj[d].extend(to.iter().copied());
            }
        }
    }
    DependencyGraph { dims, adj, dummies }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondensedDag {
    /// Component of every graph vertex; ids are in topological order.
    pub component: Vec<usize>,
    /// Profiles (not dummies) of every component.
    pub profiles: Vec<Vec<usize>>,
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
    /// Per-component minimum ratio and its profile, for each agent.
    pub min_first: Vec<Option<(Q, usize)>>,
    pub min_second: Vec<Option<(Q, usize)>>,
}

impl CondensedDag {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

fn argmin(rho: &Ratios, agent: usize, members: &[usize]) -> Option<(Q, usize)> {
    members
        .iter()
        .map(|&p| (rho.get(agent, p).clone(), p))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)))
}

pub fn condense(dg: &DependencyGraph, rho: &Ratios) -> CondensedDag {
    let (component, count) = strongly_connected(&dg.adj);
    let mut profiles = vec![Vec::new(); count];
    for p in 0..dg.dims.profiles() {
        profiles[component[p]].push(p);
    }
    let mut succ = vec![Vec::new(); count];
    let mut pred = vec![Vec::new(); count];
    for (v, out) in dg.adj.iter().enumerate() {
        for &w in out {
            let (a, b) = (component[v], component[w]);
            if a != b {
                succ[a].push(b);
                pred[b].push(a);
            }
        }
    }
    for list in succ.iter_mut().chain(pred.iter_mut()) {
        list.sort_unstable();
        list.dedup();
    }
    let min_first = profiles.iter().map(|m| argmin(rho, 0, m)).collect();
    let min_second = profiles.iter().map(|m| argmin(rho, 1, m)).collect();
    CondensedDag {
        component,
        profiles,
        succ,
        pred,
        min_first,
        min_second,
    }
}

/// Transitive closure of the monotonicity constraints on profiles, computed
/// directly from the ordering (reference for the graph's reachability).
pub fn precedence_closure(ord: &LineOrdering) -> Vec<Vec<bool>> {
    let dims = ord.dims();
    let np = dims.profiles();
    let mut rel = vec![vec![false; np]; np];
    for a in 0..np {
        for b in 0..np {
            if dims.signal(a, 1) == dims.signal(b, 1) && ord.precedes(0, a, b) {
                rel[a][b] = true;
            }
            if dims.signal(a, 0) == dims.signal(b, 0) && ord.precedes(1, b, a) {
                rel[a][b] = true;
            }
        }
    }
    for m in 0..np {
        for a in 0..np {
            if rel[a][m] {
                for b in 0..np {
                    if rel[m][b] {
                        rel[a][b] = true;
                    }
                }
            }
        }
    }
    rel
}
