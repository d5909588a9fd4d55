//! Linear-programming formulations over the truthful polytope.

pub mod dump;
pub mod simplex;

pub use simplex::{simplex_solve, Constraint, LPSolution, LpStatus, RationalLP, Relation, Sense};

use crate::model::{AllocationRule, LineOrdering, ModelError, Ratios};
use crate::rational::{is_integral_01, one, qi, zero, Q};
use crate::report::{Certificate, RatioKind, SolveReport, SolverPath};
use crate::search::min_feasible;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("integral vertices are only guaranteed for n = 2 or k = 2 (got n = {n}, k = {k})")]
    IntegralityNotGuaranteed { n: usize, k: usize },
    #[error("point violates a constraint of the region")]
    NotFeasible,
    #[error("solver returned {0:?}")]
    Solver(LpStatus),
    #[error("dimension mismatch between inputs")]
    DimensionMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn add_polytope(lp: &mut RationalLP, ord: &LineOrdering) {
    let dims = ord.dims();
    let n = dims.n();
    for p in 0..dims.profiles() {
        let terms: Vec<(usize, Q)> = (0..n).map(|i| (p * n + i, one())).collect();
        lp.add(&terms, Relation::Eq, one());
    }
    for (i, lo, hi) in ord.chain_pairs() {
        lp.add(&[(lo * n + i, one()), (hi * n + i, -one())], Relation::Le, zero());
    }
}

/// The truthful polytope as a constraint system over `x` alone.
pub fn truthful_polytope(ord: &LineOrdering) -> RationalLP {
    let mut lp = RationalLP::new(ord.dims().entries(), Sense::Maximize);
    add_polytope(&mut lp, ord);
    lp
}

fn check_dims(rho: &Ratios, ord: &LineOrdering) -> Result<(), LpError> {
    if rho.dims() != ord.dims() {
        return Err(LpError::DimensionMismatch);
    }
    Ok(())
}

/// maximize beta s.t. beta <= <x(s), rho(s)> for all s, x truthful.
pub fn val_lp(rho: &Ratios, ord: &LineOrdering) -> RationalLP {
    let dims = rho.dims();
    let n = dims.n();
    let beta = dims.entries();
    let mut lp = RationalLP::new(beta + 1, Sense::Maximize);
    lp.objective[beta] = one();
    add_polytope(&mut lp, ord);
    for p in 0..dims.profiles() {
        let mut terms: Vec<(usize, Q)> = (0..n).map(|i| (p * n + i, -rho.get(i, p).clone())).collect();
        terms.push((beta, one()));
        lp.add(&terms, Relation::Le, zero());
    }
    lp
}

/// minimize alpha s.t. alpha >= <x(s), 1/rho(s)> for all s, x truthful.
pub fn cst_lp(rho: &Ratios, ord: &LineOrdering) -> RationalLP {
    let dims = rho.dims();
    let n = dims.n();
    let alpha = dims.entries();
    let mut lp = RationalLP::new(alpha + 1, Sense::Minimize);
    lp.objective[alpha] = one();
    add_polytope(&mut lp, ord);
    for p in 0..dims.profiles() {
        let mut terms: Vec<(usize, Q)> = (0..n).map(|i| (p * n + i, rho.get(i, p).recip())).collect();
        terms.push((alpha, -one()));
        lp.add(&terms, Relation::Le, zero());
    }
    lp
}

/// maximize the number of profiles won by an agent within ratio `gamma`.
pub fn det_lp(rho: &Ratios, ord: &LineOrdering, gamma: &Q) -> RationalLP {
    let dims = rho.dims();
    let mut lp = truthful_polytope(ord);
    let threshold = gamma.recip();
    for p in 0..dims.profiles() {
        for i in 0..dims.n() {
            if *rho.get(i, p) >= threshold {
                lp.objective[p * dims.n() + i] = one();
            }
        }
    }
    lp
}

fn witness_from(rho: &Ratios, point: &[Q]) -> Result<AllocationRule, LpError> {
    let dims = rho.dims();
    Ok(AllocationRule::new(dims, point[..dims.entries()].to_vec())?)
}

fn optimal(sol: LPSolution) -> Result<(LPSolution, Q), LpError> {
    match (sol.status, sol.objective.clone()) {
        (LpStatus::Optimal, Some(v)) => Ok((sol, v)),
        (status, _) => Err(LpError::Solver(status)),
    }
}

/// Optimal randomized value ratio and a witness rule attaining it.
pub fn solve_val(rho: &Ratios, ord: &LineOrdering) -> Result<SolveReport, LpError> {
    check_dims(rho, ord)?;
    let (sol, beta) = optimal(simplex_solve(&val_lp(rho, ord)))?;
    Ok(SolveReport {
        kind: RatioKind::Value,
        ratio: beta.recip(),
        witness: witness_from(rho, &sol.point)?,
        certificate: Certificate::LpBasis {
            basis: sol.basis,
            objective: beta,
        },
        path: SolverPath::Lp,
    })
}

/// Optimal randomized cost ratio and a witness rule attaining it.
pub fn solve_cst(rho: &Ratios, ord: &LineOrdering) -> Result<SolveReport, LpError> {
    check_dims(rho, ord)?;
    let (sol, alpha) = optimal(simplex_solve(&cst_lp(rho, ord)))?;
    Ok(SolveReport {
        kind: RatioKind::Cost,
        ratio: alpha.clone(),
        witness: witness_from(rho, &sol.point)?,
        certificate: Certificate::LpBasis {
            basis: sol.basis,
            objective: alpha,
        },
        path: SolverPath::Lp,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetLpOutcome {
    /// Optimum of the counting objective; `k^n` means every profile is covered.
    pub optimum: Q,
    pub point: Vec<Q>,
    pub basis: Vec<usize>,
    pub integral: bool,
    /// The deterministic rule, when the optimum covers every profile and the
    /// vertex is integral.
    pub rule: Option<AllocationRule>,
}

impl DetLpOutcome {
    pub fn feasible(&self) -> bool {
        self.rule.is_some()
    }
}

/// Decides whether a deterministic truthful rule within `gamma` exists by
/// optimizing over the (integral) truthful polytope.
pub fn solve_det_integral(rho: &Ratios, ord: &LineOrdering, gamma: &Q) -> Result<DetLpOutcome, LpError> {
    check_dims(rho, ord)?;
    let dims = rho.dims();
    if dims.n() != 2 && dims.k() != 2 && dims.n() != 1 && dims.k() != 1 {
        return Err(LpError::IntegralityNotGuaranteed {
            n: dims.n(),
            k: dims.k(),
        });
    }
    let (sol, optimum) = optimal(simplex_solve(&det_lp(rho, ord, gamma)))?;
    let integral = sol.point.iter().all(is_integral_01);
    let full = optimum == qi(dims.profiles() as i64);
    let rule = if full && integral {
        Some(AllocationRule::new(dims, sol.point.clone())?)
    } else {
        None
    };
    Ok(DetLpOutcome {
        optimum,
        point: sol.point,
        basis: sol.basis,
        integral,
        rule,
    })
}

/// Optimal deterministic ratio via binary search over integral-LP decisions.
pub fn solve_det_lp(rho: &Ratios, ord: &LineOrdering) -> Result<SolveReport, LpError> {
    check_dims(rho, ord)?;
    let mut failure = None;
    let found = min_feasible(&rho.candidate_gammas(), |g| match solve_det_integral(rho, ord, g) {
        Ok(out) => out.rule.map(|r| (r, out.basis, out.optimum)),
        Err(e) => {
            failure = Some(e);
            None
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (gamma, (rule, basis, optimum)) = found.ok_or(LpError::Solver(LpStatus::Infeasible))?;
    Ok(SolveReport {
        kind: RatioKind::Det,
        ratio: gamma,
        witness: rule,
        certificate: Certificate::LpBasis {
            basis,
            objective: optimum,
        },
        path: SolverPath::Lp,
    })
}

/// Rank of a dense rational matrix by fraction-exact Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = rows[r][c].recip();
        let prow: Vec<Q> = rows[r].iter().map(|v| v * &inv).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow).skip(c) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        rows[r] = prow;
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// True iff the constraints active at `point` (including tight sign bounds)
/// have full column rank, i.e. `point` is a vertex of the region.
pub fn verify_vertex(region: &RationalLP, point: &[Q]) -> Result<bool, LpError> {
    if !region.is_feasible(point) {
        return Err(LpError::NotFeasible);
    }
    let nv = region.num_vars;
    let mut active: Vec<Vec<Q>> = region
        .constraints
        .iter()
        .filter(|c| c.slack_at(point).is_zero())
        .map(|c| c.coeffs.clone())
        .collect();
    for (j, v) in point.iter().enumerate() {
        if v.is_zero() || v.is_negative() {
            let mut row = vec![zero(); nv];
            row[j] = one();
            active.push(row);
        }
    }
    Ok(rank(active) == nv)
}
