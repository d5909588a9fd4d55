//! Payment synthesis for monotone rules and exhaustive IC / IR verification.

use crate::model::{
    check_truthful, orderings_from_instance, AllocationRule, Dims, Instance, LineOrdering, Mode,
    ModelError, MonotonicityViolation, SignalProfile,
};
use crate::rational::{zero, Q};
use num_traits::Signed;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaymentError {
    #[error("allocation is not monotone: {0}")]
    NotMonotone(MonotonicityViolation),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Non-negative payment `p_i(b)` for every agent and bid profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentRule {
    dims: Dims,
    p: Vec<Q>,
}

impl PaymentRule {
    pub fn new(dims: Dims, p: Vec<Q>) -> Result<Self, ModelError> {
        if p.len() != dims.entries() {
            return Err(ModelError::TableSize {
                expected: dims.entries(),
                got: p.len(),
            });
        }
        Ok(Self { dims, p })
    }

    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            p: vec![zero(); dims.entries()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn get(&self, agent: usize, b: usize) -> &Q {
        &self.p[b * self.dims.n() + agent]
    }

    pub fn as_slice(&self) -> &[Q] {
        &self.p
    }
}

/// Own signals of `agent`'s line through `p`, sorted into a total order that
/// is monotone in `x` and extends the block order.
fn extension_order(x: &AllocationRule, ord: &LineOrdering, agent: usize, p: usize) -> Vec<usize> {
    let dims = ord.dims();
    let mut line: Vec<usize> = dims.line(p, agent).collect();
    line.sort_by(|&a, &b| {
        x.get(agent, a)
            .cmp(x.get(agent, b))
            .then(ord.block(agent, a).cmp(&ord.block(agent, b)))
            .then(dims.signal(a, agent).cmp(&dims.signal(b, agent)))
    });
    line
}

/// Increments `dx_i(t) = x_i(t) - max(0, x_i(pred))` along the extension order.
fn increments(x: &AllocationRule, agent: usize, order: &[usize]) -> Vec<Q> {
    let mut prev = zero();
    order
        .iter()
        .map(|&t| {
            let cur = x.get(agent, t).clone();
            let d = &cur - &prev;
            prev = cur;
            d
        })
        .collect()
}

/// Builds the payment rule charging each agent the increments of its allocation
/// weighted by its own value (good) or cost (chore) at the predecessors.
pub fn synthesize_payments(inst: &Instance, x: &AllocationRule) -> Result<PaymentRule, PaymentError> {
    let dims = inst.dims();
    if x.dims() != dims {
        return Err(ModelError::DimensionMismatch.into());
    }
    let ord = orderings_from_instance(inst);
    check_truthful(x, &ord).map_err(PaymentError::NotMonotone)?;
    let mut p = vec![zero(); dims.entries()];
    for i in 0..dims.n() {
        for base in dims.line_bases(i) {
            let order = extension_order(x, &ord, i, base);
            let deltas = increments(x, i, &order);
            let mut acc = zero();
            for (t, d) in order.iter().zip(&deltas) {
                let weight = match inst.mode() {
                    Mode::Good => inst.value(i, *t),
                    Mode::Chore => inst.cost(i, *t),
                };
                acc += d * weight;
                p[t * dims.n() + i] = acc.clone();
            }
        }
    }
    Ok(PaymentRule { dims, p })
}

/// Sum of increments over the predecessors of `p` on `agent`'s line; equals `x_i(p)`.
pub fn reconstruct_share(inst: &Instance, x: &AllocationRule, agent: usize, p: usize) -> Q {
    let ord = orderings_from_instance(inst);
    let order = extension_order(x, &ord, agent, p);
    let deltas = increments(x, agent, &order);
    let mut acc = zero();
    for (t, d) in order.iter().zip(deltas) {
        acc += d;
        if *t == p {
            break;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncentiveKind {
    /// A misreport strictly improves utility.
    Compatibility,
    /// Truthful utility is negative.
    Rationality,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?} violated for agent {} at true profile {truth} when bidding {bid}", agent + 1)]
pub struct IncentiveViolation {
    pub kind: IncentiveKind,
    pub agent: usize,
    pub truth: SignalProfile,
    pub bid: usize,
}

fn utility(inst: &Instance, x: &AllocationRule, pay: &PaymentRule, agent: usize, bid: usize, truth: usize) -> Q {
    match inst.mode() {
        Mode::Good => x.get(agent, bid) * inst.value(agent, truth) - pay.get(agent, bid),
        Mode::Chore => pay.get(agent, bid) - x.get(agent, bid) * inst.cost(agent, truth),
    }
}

/// Checks every unilateral deviation at every profile; returns the first failure.
pub fn verify_ic_ir(inst: &Instance, x: &AllocationRule, pay: &PaymentRule) -> Result<(), IncentiveViolation> {
    let dims = inst.dims();
    for s in 0..dims.profiles() {
        for i in 0..dims.n() {
            let honest = utility(inst, x, pay, i, s, s);
            if honest.is_negative() {
                return Err(IncentiveViolation {
                    kind: IncentiveKind::Rationality,
                    agent: i,
                    truth: dims.profile(s),
                    bid: dims.signal(s, i),
                });
            }
            for b in dims.line(s, i) {
                if utility(inst, x, pay, i, b, s) > honest {
                    return Err(IncentiveViolation {
                        kind: IncentiveKind::Compatibility,
                        agent: i,
                        truth: dims.profile(s),
                        bid: dims.signal(b, i),
                    });
                }
            }
        }
    }
    Ok(())
}
