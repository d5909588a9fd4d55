//! Two-phase dense-tableau simplex over exact rationals with Bland's rule.

use crate::rational::{zero, Q};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub relation: Relation,
    pub rhs: Q,
}

impl Constraint {
    pub fn slack_at(&self, point: &[Q]) -> Q {
        let lhs: Q = self
            .coeffs
            .iter()
            .zip(point)
            .filter(|(a, _)| !a.is_zero())
            .map(|(a, x)| a * x)
            .sum();
        &self.rhs - lhs
    }

    pub fn holds_at(&self, point: &[Q]) -> bool {
        let s = self.slack_at(point);
        match self.relation {
            Relation::Le => !s.is_negative(),
            Relation::Eq => s.is_zero(),
            Relation::Ge => !s.is_positive(),
        }
    }
}

/// Linear program over non-negative variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalLP {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
    pub objective: Vec<Q>,
}

impl RationalLP {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            num_vars,
            constraints: Vec::new(),
            sense,
            objective: vec![zero(); num_vars],
        }
    }

    /// Adds `sum coeffs[j] * x_j  rel  rhs` from sparse `(j, coeff)` terms.
    pub fn add(&mut self, terms: &[(usize, Q)], relation: Relation, rhs: Q) {
        let mut coeffs = vec![zero(); self.num_vars];
        for (j, a) in terms {
            coeffs[*j] += a;
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Every constraint and every sign bound holds exactly.
    pub fn is_feasible(&self, point: &[Q]) -> bool {
        point.len() == self.num_vars
            && point.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.holds_at(point))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPSolution {
    pub status: LpStatus,
    pub objective: Option<Q>,
    pub point: Vec<Q>,
    /// Basic columns at the optimum: structural variables first, then one
    /// slack column per inequality in constraint order.
    pub basis: Vec<usize>,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    obj: Vec<Q>,
    obj_val: Q,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for v in self.rows[r].iter_mut().filter(|v| !v.is_zero()) {
                *v *= &inv;
            }
            self.rhs[r] *= &inv;
        }
        let support: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for &j in &support {
                let d = &f * &prow[j];
                self.rows[i][j] -= d;
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &support {
                let d = &f * &prow[j];
                self.obj[j] -= d;
            }
            self.obj_val -= &f * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Sets the reduced-cost row for maximizing `cost`.
    fn load_objective(&mut self, cost: &[Q]) {
        self.obj = cost.iter().map(|c| -c).collect();
        self.obj_val = zero();
        for i in 0..self.rows.len() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    self.obj[j] += cb * a;
                }
            }
            self.obj_val += cb * &self.rhs[i];
        }
    }

    /// Bland's rule: lowest-index improving column, lowest-basis-index tie break.
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        loop {
            let Some(c) = (0..self.obj.len()).find(|&j| allowed[j] && self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Solves `lp` exactly; the returned point is a basic feasible solution.
pub fn simplex_solve(lp: &RationalLP) -> LPSolution {
    let nv = lp.num_vars;
    let m = lp.constraints.len();
    let mut rel = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for c in &lp.constraints {
        let flip = c.rhs.is_negative();
        let sign = |v: &Q| if flip { -v } else { v.clone() };
        rows.push(c.coeffs.iter().map(sign).collect::<Vec<Q>>());
        rhs.push(sign(&c.rhs));
        rel.push(match (c.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        });
    }
    // Slack columns keep the caller's constraint order so basis ids are stable.
    let slack_of: Vec<Option<usize>> = {
        let mut next = nv;
        lp.constraints
            .iter()
            .map(|c| {
                (c.relation != Relation::Eq).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let n_slack = slack_of.iter().flatten().count();
    let art_start = nv + n_slack;
    let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
    let ncols = art_start + n_art;
    let mut basis = Vec::with_capacity(m);
    let mut next_art = art_start;
    for i in 0..m {
        rows[i].resize(ncols, zero());
        if let Some(s) = slack_of[i] {
            rows[i][s] = if rel[i] == Relation::Le { Q::one() } else { -Q::one() };
        }
        if rel[i] == Relation::Le {
            basis.push(slack_of[i].expect("inequality"));
        } else {
            rows[i][next_art] = Q::one();
            basis.push(next_art);
            next_art += 1;
        }
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        obj: Vec::new(),
        obj_val: zero(),
    };

    let mut allowed = vec![true; ncols];
    if n_art > 0 {
        let mut cost = vec![zero(); ncols];
        for c in cost.iter_mut().skip(art_start) {
            *c = -Q::one();
        }
        t.load_objective(&cost);
        t.optimize(&allowed);
        if t.obj_val.is_negative() {
            return LPSolution {
                status: LpStatus::Infeasible,
                objective: None,
                point: Vec::new(),
                basis: Vec::new(),
            };
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for a in allowed.iter_mut().skip(art_start) {
            *a = false;
        }
    }

    let mut cost = vec![zero(); ncols];
    for (j, c) in lp.objective.iter().enumerate() {
        cost[j] = match lp.sense {
            Sense::Maximize => c.clone(),
            Sense::Minimize => -c,
        };
    }
    t.load_objective(&cost);
    if !t.optimize(&allowed) {
        return LPSolution {
            status: LpStatus::Unbounded,
            objective: None,
            point: Vec::new(),
            basis: t.basis,
        };
    }
    let mut point = vec![zero(); nv];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < nv {
            point[b] = t.rhs[i].clone();
        }
    }
    let value = match lp.sense {
        Sense::Maximize => t.obj_val.clone(),
        Sense::Minimize => -t.obj_val.clone(),
    };
    let mut basis = t.basis;
    basis.sort_unstable();
    LPSolution {
        status: LpStatus::Optimal,
        objective: Some(value),
        point,
        basis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, q, qi};

    #[test]
    fn single_bound() {
        let mut lp = RationalLP::new(1, Sense::Maximize);
        lp.objective[0] = one();
        lp.add(&[(0, one())], Relation::Le, qi(3));
        let sol = simplex_solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective, Some(qi(3)));
        assert_eq!(sol.point, vec![qi(3)]);
    }

    #[test]
    fn degenerate_optimum_is_a_vertex() {
        let mut lp = RationalLP::new(2, Sense::Maximize);
        lp.objective = vec![one(), one()];
        lp.add(&[(0, one()), (1, one())], Relation::Le, one());
        let sol = simplex_solve(&lp);
        assert_eq!(sol.objective, Some(one()));
        assert!(sol.point == vec![one(), zero()] || sol.point == vec![zero(), one()]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = RationalLP::new(1, Sense::Maximize);
        lp.add(&[(0, one())], Relation::Ge, qi(2));
        lp.add(&[(0, one())], Relation::Le, one());
        assert_eq!(simplex_solve(&lp).status, LpStatus::Infeasible);

        let mut lp = RationalLP::new(2, Sense::Maximize);
        lp.objective = vec![one(), zero()];
        lp.add(&[(0, one()), (1, -one())], Relation::Le, one());
        assert_eq!(simplex_solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn equalities_and_negative_rhs() {
        // minimize x + 2y  s.t.  x + y = 3/2,  -x <= -1/2
        let mut lp = RationalLP::new(2, Sense::Minimize);
        lp.objective = vec![one(), qi(2)];
        lp.add(&[(0, one()), (1, one())], Relation::Eq, q(3, 2));
        lp.add(&[(0, -one())], Relation::Le, q(-1, 2));
        let sol = simplex_solve(&lp);
        assert_eq!(sol.objective, Some(q(3, 2)));
        assert!(lp.is_feasible(&sol.point));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = RationalLP::new(2, Sense::Maximize);
        lp.objective = vec![one(), zero()];
        lp.add(&[(0, one()), (1, one())], Relation::Eq, one());
        lp.add(&[(0, qi(2)), (1, qi(2))], Relation::Eq, qi(2));
        let sol = simplex_solve(&lp);
        assert_eq!(sol.objective, Some(one()));
    }
}
