//! Deterministic feasibility for two agents as 2-SAT over the dependency graph.

use super::graph::strongly_connected;
use super::Duo;
use crate::model::AllocationRule;
use crate::report::{Certificate, RatioKind, SolveReport, SolverPath};
use crate::search::min_feasible;

/// Literal `2v` is "variable v true", `2v + 1` is its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lit(usize);

impl Lit {
    pub fn pos(v: usize) -> Self {
        Lit(2 * v)
    }

    pub fn neg(v: usize) -> Self {
        Lit(2 * v + 1)
    }

    pub fn negated(self) -> Self {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone)]
pub struct TwoSat {
    vars: usize,
    implications: Vec<Vec<usize>>,
}

impl TwoSat {
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            implications: vec![Vec::new(); 2 * vars],
        }
    }

    /// Adds the clause `a or b`.
    pub fn clause(&mut self, a: Lit, b: Lit) {
        self.implications[a.negated().0].push(b.0);
        self.implications[b.negated().0].push(a.0);
    }

    pub fn unit(&mut self, a: Lit) {
        self.clause(a, a);
    }

    /// A satisfying assignment, if any.
    pub fn solve(&self) -> Option<Vec<bool>> {
        let (comp, _) = strongly_connected(&self.implications);
        (0..self.vars)
            .map(|v| {
                let (t, f) = (comp[2 * v], comp[2 * v + 1]);
                // The literal later in topological order is the one that holds.
                (t != f).then_some(t > f)
            })
            .collect()
    }
}

/// Deterministic rule of ratio at most `alpha`, if one exists.
pub fn twosat_feasible(duo: &Duo, alpha: &crate::rational::Q) -> Option<AllocationRule> {
    let graph = duo.graph();
    let rho = duo.ratios();
    let dims = rho.dims();
    let threshold = alpha.recip();
    let mut sat = TwoSat::new(graph.vertex_count());
    for (u, out) in graph.adj.iter().enumerate() {
        for &v in out {
            sat.clause(Lit::neg(u), Lit::pos(v));
        }
    }
    for p in 0..dims.profiles() {
        if *rho.get(0, p) < threshold {
            sat.unit(Lit::neg(p));
        }
        if *rho.get(1, p) < threshold {
            sat.unit(Lit::pos(p));
        }
    }
    let assignment = sat.solve()?;
    let winners: Vec<usize> = (0..dims.profiles()).map(|p| if assignment[p] { 0 } else { 1 }).collect();
    Some(AllocationRule::from_winners(dims, &winners).expect("two agents"))
}

/// Optimal deterministic ratio by binary search over 2-SAT decisions.
pub fn twosat_search(duo: &Duo) -> SolveReport {
    let (ratio, witness) = min_feasible(&duo.ratios().candidate_gammas(), |g| twosat_feasible(duo, g))
        .expect("the largest candidate is always feasible");
    let certificate = match duo.optimal_ratios().det_pair {
        Some(cp) if cp.bound == ratio => Certificate::ConflictPair(cp),
        _ => Certificate::Trivial,
    };
    SolveReport {
        kind: RatioKind::Det,
        ratio,
        witness,
        certificate,
        path: SolverPath::TwoSat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::fixtures;
    use crate::model::{eval_ratio, is_truthful, Objective};
    use crate::rational::{q, qi};

    #[test]
    fn tiny_formulas() {
        let mut s = TwoSat::new(2);
        s.clause(Lit::pos(0), Lit::pos(1));
        s.unit(Lit::neg(0));
        assert_eq!(s.solve(), Some(vec![false, true]));
        s.unit(Lit::neg(1));
        assert_eq!(s.solve(), None);
    }

    #[test]
    fn pair_decisions() {
        let duo = Duo::from_instance(&fixtures::fig5_pair()).unwrap();
        let x = twosat_feasible(&duo, &qi(2)).unwrap();
        assert!(is_truthful(&x, duo.ordering()));
        assert!(eval_ratio(duo.ratios(), &x, Objective::Value) <= qi(2));
        assert!(twosat_feasible(&duo, &q(3, 2)).is_none());
        assert_eq!(twosat_search(&duo).ratio, qi(2));
    }

    #[test]
    fn chain_of_figure_two() {
        let duo = Duo::from_instance(&fixtures::fig2_chain()).unwrap();
        let dims = duo.ratios().dims();
        let reach = duo.graph().reachable_profiles(dims.index_of(&[2, 1]));
        assert!(reach.contains(&dims.index_of(&[1, 3])));
        for g in [qi(2), q(12, 5), q(249, 100)] {
            assert!(twosat_feasible(&duo, &g).is_none(), "gamma {g}");
        }
        assert!(twosat_feasible(&duo, &q(5, 2)).is_some());
        assert_eq!(twosat_search(&duo).ratio, q(5, 2));
    }
}
