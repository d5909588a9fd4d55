//! Instances, performance ratios, signal orderings and allocation rules.
//!
//! Every table is a flat array indexed by `profile * n + agent`. Profiles use the
//! canonical index `sum (s_i - 1) * k^i` with agent 0 least significant; signals
//! are 1-based and agents are 0-based.

use crate::rational::{one, pow, q, zero, Q};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dimensions n = {n}, k = {k} are empty or too large")]
    BadDimensions { n: usize, k: usize },
    #[error("table has {got} entries, expected {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("entry for agent {agent} at profile {profile} is not strictly positive")]
    NonPositive { agent: usize, profile: SignalProfile },
    #[error("ratio for agent {agent} at profile {profile} is outside (0, 1]")]
    RatioOutOfRange { agent: usize, profile: SignalProfile },
    #[error("ratios at profile {0} have no entry equal to 1")]
    NotNormalized(SignalProfile),
    #[error("allocation for agent {agent} at profile {profile} is outside [0, 1]")]
    ProbabilityOutOfRange { agent: usize, profile: SignalProfile },
    #[error("allocation at profile {0} does not sum to 1")]
    SumNotOne(SignalProfile),
    #[error("dimension mismatch between inputs")]
    DimensionMismatch,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
}

/// A signal vector with 1-based coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignalProfile(pub Vec<usize>);

impl fmt::Display for SignalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (j, s) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

/// Number of agents and signals, plus profile index arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    n: usize,
    k: usize,
    count: usize,
}

impl Dims {
    pub fn new(n: usize, k: usize) -> Result<Self, ModelError> {
        let bad = ModelError::BadDimensions { n, k };
        if n == 0 || k == 0 || n > 63 {
            return Err(bad);
        }
        let count = k
            .checked_pow(n as u32)
            .filter(|c| c.checked_mul(n).is_some_and(|t| t <= 1 << 32))
            .ok_or(bad)?;
        Ok(Self { n, k, count })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of signal profiles, `k^n`.
    pub fn profiles(&self) -> usize {
        self.count
    }

    /// Number of table entries, `n * k^n`.
    pub fn entries(&self) -> usize {
        self.count * self.n
    }

    pub fn stride(&self, agent: usize) -> usize {
        self.k.pow(agent as u32)
    }

    pub fn signal(&self, p: usize, agent: usize) -> usize {
        (p / self.stride(agent)) % self.k + 1
    }

    pub fn with_signal(&self, p: usize, agent: usize, signal: usize) -> usize {
        let stride = self.stride(agent);
        p + (signal - 1) * stride - (self.signal(p, agent) - 1) * stride
    }

    pub fn index(&self, s: &SignalProfile) -> usize {
        debug_assert_eq!(s.0.len(), self.n);
        s.0.iter()
            .enumerate()
            .map(|(i, &si)| (si - 1) * self.stride(i))
            .sum()
    }

    pub fn index_of(&self, signals: &[usize]) -> usize {
        self.index(&SignalProfile(signals.to_vec()))
    }

    pub fn profile(&self, p: usize) -> SignalProfile {
        SignalProfile((0..self.n).map(|i| self.signal(p, i)).collect())
    }

    /// `sum_i s_i`.
    pub fn level(&self, p: usize) -> usize {
        (0..self.n).map(|i| self.signal(p, i)).sum()
    }

    /// Profiles along agent `agent`'s line through `p`, ordered by own signal.
    pub fn line(&self, p: usize, agent: usize) -> impl Iterator<Item = usize> {
        let base = self.with_signal(p, agent, 1);
        let stride = self.stride(agent);
        (0..self.k).map(move |t| base + t * stride)
    }

    /// One representative (own signal 1) per line of `agent`.
    pub fn line_bases(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.count).filter(move |&p| self.signal(p, agent) == 1)
    }

    pub fn valid_profile(&self, s: &SignalProfile) -> bool {
        s.0.len() == self.n && s.0.iter().all(|&v| (1..=self.k).contains(&v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Good,
    Chore,
}

/// Value (good) or cost (chore) table over every agent and profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    dims: Dims,
    mode: Mode,
    table: Vec<Q>,
}

impl Instance {
    pub fn new(dims: Dims, mode: Mode, table: Vec<Q>) -> Result<Self, ModelError> {
        check_len(dims, table.len())?;
        for (e, v) in table.iter().enumerate() {
            if !v.is_positive() {
                return Err(ModelError::NonPositive {
                    agent: e % dims.n,
                    profile: dims.profile(e / dims.n),
                });
            }
        }
        Ok(Self { dims, mode, table })
    }

    pub fn from_fn(
        dims: Dims,
        mode: Mode,
        mut f: impl FnMut(usize, &SignalProfile) -> Q,
    ) -> Result<Self, ModelError> {
        let mut table = Vec::with_capacity(dims.entries());
        for p in 0..dims.profiles() {
            let s = dims.profile(p);
            for i in 0..dims.n {
                table.push(f(i, &s));
            }
        }
        Self::new(dims, mode, table)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Stored entry: a value in good mode, a cost in chore mode.
    pub fn entry(&self, agent: usize, p: usize) -> &Q {
        &self.table[p * self.dims.n + agent]
    }

    pub fn table(&self) -> &[Q] {
        &self.table
    }

    pub fn value(&self, agent: usize, p: usize) -> Q {
        match self.mode {
            Mode::Good => self.entry(agent, p).clone(),
            Mode::Chore => self.entry(agent, p).recip(),
        }
    }

    pub fn cost(&self, agent: usize, p: usize) -> Q {
        match self.mode {
            Mode::Good => self.entry(agent, p).recip(),
            Mode::Chore => self.entry(agent, p).clone(),
        }
    }
}

fn check_len(dims: Dims, got: usize) -> Result<(), ModelError> {
    if got != dims.entries() {
        return Err(ModelError::TableSize {
            expected: dims.entries(),
            got,
        });
    }
    Ok(())
}

/// Normalized performance ratios, each in (0, 1] with a 1 at every profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Ratios {
    dims: Dims,
    rho: Vec<Q>,
}

impl Ratios {
    pub fn new(dims: Dims, rho: Vec<Q>) -> Result<Self, ModelError> {
        check_len(dims, rho.len())?;
        for p in 0..dims.profiles() {
            let row = &rho[p * dims.n..(p + 1) * dims.n];
            for (i, r) in row.iter().enumerate() {
                if !r.is_positive() || *r > one() {
                    return Err(ModelError::RatioOutOfRange {
                        agent: i,
                        profile: dims.profile(p),
                    });
                }
            }
            if !row.iter().any(One::is_one) {
                return Err(ModelError::NotNormalized(dims.profile(p)));
            }
        }
        Ok(Self { dims, rho })
    }

    pub fn from_fn(
        dims: Dims,
        mut f: impl FnMut(usize, &SignalProfile) -> Q,
    ) -> Result<Self, ModelError> {
        let mut rho = Vec::with_capacity(dims.entries());
        for p in 0..dims.profiles() {
            let s = dims.profile(p);
            for i in 0..dims.n {
                rho.push(f(i, &s));
            }
        }
        Self::new(dims, rho)
    }

    /// Every entry equal to one.
    pub fn ones(dims: Dims) -> Self {
        Self {
            dims,
            rho: vec![one(); dims.entries()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn get(&self, agent: usize, p: usize) -> &Q {
        &self.rho[p * self.dims.n + agent]
    }

    pub fn as_slice(&self) -> &[Q] {
        &self.rho
    }

    /// Smallest entry, `r*`.
    pub fn min_entry(&self) -> Q {
        self.rho.iter().min().cloned().unwrap_or_else(one)
    }

    /// Sorted distinct `1 / rho` values together with 1; every optimal
    /// deterministic ratio is one of these.
    pub fn candidate_gammas(&self) -> Vec<Q> {
        let mut c: Vec<Q> = self.rho.iter().map(Q::recip).collect();
        c.push(one());
        c.sort();
        c.dedup();
        c
    }
}

/// Per-line block chains: `block(i, p)` is the rank of `p`'s own-signal value
/// among the distinct values on agent `i`'s line through `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineOrdering {
    dims: Dims,
    block: Vec<usize>,
}

impl LineOrdering {
    /// The ordering of any instance whose lines strictly increase in value.
    pub fn increasing(dims: Dims) -> Self {
        let block = (0..dims.profiles())
            .flat_map(|p| (0..dims.n).map(move |i| dims.signal(p, i) - 1))
            .collect();
        LineOrdering { dims, block }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn block(&self, agent: usize, p: usize) -> usize {
        self.block[p * self.dims.n + agent]
    }

    /// `(s_i, s_i') in sigma_i(s_-i)` for two profiles on the same line.
    pub fn precedes(&self, agent: usize, p: usize, p2: usize) -> bool {
        self.block(agent, p) < self.block(agent, p2)
    }

    /// Blocks of the line of `agent` through `p`, lowest block first.
    pub fn blocks(&self, agent: usize, p: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for t in self.dims.line(p, agent) {
            let b = self.block(agent, t);
            if out.len() <= b {
                out.resize(b + 1, Vec::new());
            }
            out[b].push(t);
        }
        out
    }

    /// Every `(agent, low, high)` with `low` in one block and `high` in the next.
    pub fn chain_pairs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.dims.n {
            for base in self.dims.line_bases(i) {
                let blocks = self.blocks(i, base);
                for w in blocks.windows(2) {
                    for &lo in &w[0] {
                        for &hi in &w[1] {
                            out.push((i, lo, hi));
                        }
                    }
                }
            }
        }
        out
    }

    /// True when no line has two signals in the same block.
    pub fn is_total(&self) -> bool {
        (0..self.dims.n).all(|i| {
            self.dims
                .line_bases(i)
                .all(|b| self.blocks(i, b).len() == self.dims.k)
        })
    }
}

/// Randomized allocation rule `x_i(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationRule {
    dims: Dims,
    x: Vec<Q>,
}

impl AllocationRule {
    pub fn new(dims: Dims, x: Vec<Q>) -> Result<Self, ModelError> {
        check_len(dims, x.len())?;
        for p in 0..dims.profiles() {
            let row = &x[p * dims.n..(p + 1) * dims.n];
            let mut sum = zero();
            for (i, v) in row.iter().enumerate() {
                if v.is_negative() || *v > one() {
                    return Err(ModelError::ProbabilityOutOfRange {
                        agent: i,
                        profile: dims.profile(p),
                    });
                }
                sum += v;
            }
            if !sum.is_one() {
                return Err(ModelError::SumNotOne(dims.profile(p)));
            }
        }
        Ok(Self { dims, x })
    }

    /// Deterministic rule selecting `winners[p]` at profile `p`.
    pub fn from_winners(dims: Dims, winners: &[usize]) -> Result<Self, ModelError> {
        check_len(dims, winners.len() * dims.n)?;
        let mut x = vec![zero(); dims.entries()];
        for (p, &w) in winners.iter().enumerate() {
            if w >= dims.n {
                return Err(ModelError::DimensionMismatch);
            }
            x[p * dims.n + w] = one();
        }
        Ok(Self { dims, x })
    }

    /// Two-agent rule from agent 0's share at every profile.
    pub fn from_first_share(dims: Dims, share: &[Q]) -> Result<Self, ModelError> {
        if dims.n != 2 {
            return Err(ModelError::DimensionMismatch);
        }
        let x = share
            .iter()
            .flat_map(|v| [v.clone(), one() - v])
            .collect();
        Self::new(dims, x)
    }

    pub fn uniform(dims: Dims) -> Self {
        let share = q(1, dims.n as i64);
        Self {
            dims,
            x: vec![share; dims.entries()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn get(&self, agent: usize, p: usize) -> &Q {
        &self.x[p * self.dims.n + agent]
    }

    pub fn as_slice(&self) -> &[Q] {
        &self.x
    }

    pub fn is_deterministic(&self) -> bool {
        self.x.iter().all(crate::rational::is_integral_01)
    }

    /// The selected agent when the rule is deterministic at `p`.
    pub fn winner(&self, p: usize) -> Option<usize> {
        (0..self.dims.n).find(|&i| self.get(i, p).is_one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Value,
    Cost,
}

/// Normalizes values (good) or costs (chore) into performance ratios.
pub fn ratios_from_values(inst: &Instance) -> Ratios {
    let dims = inst.dims;
    let n = dims.n;
    let mut rho = Vec::with_capacity(dims.entries());
    for p in 0..dims.profiles() {
        let row = &inst.table[p * n..(p + 1) * n];
        match inst.mode {
            Mode::Good => {
                let best = row.iter().max().expect("n >= 1");
                rho.extend(row.iter().map(|v| v / best));
            }
            Mode::Chore => {
                let best = row.iter().min().expect("n >= 1");
                rho.extend(row.iter().map(|c| best / c));
            }
        }
    }
    Ratios { dims, rho }
}

/// Sorts every line ascending by value (descending by cost) and merges ties.
pub fn orderings_from_instance(inst: &Instance) -> LineOrdering {
    let dims = inst.dims;
    let mut block = vec![0; dims.entries()];
    for i in 0..dims.n {
        for base in dims.line_bases(i) {
            let mut line: Vec<(Q, usize)> = dims.line(base, i).map(|p| (inst.value(i, p), p)).collect();
            line.sort_by(|a, b| a.0.cmp(&b.0));
            let mut rank = 0;
            for j in 0..line.len() {
                if j > 0 && line[j].0 != line[j - 1].0 {
                    rank += 1;
                }
                block[line[j].1 * dims.n + i] = rank;
            }
        }
    }
    LineOrdering { dims, block }
}

/// Strictly monotone instance inducing exactly `rho`: values `rho / (r*/2)^l`
/// (good) or costs `(r*/2)^l / rho` (chore) with `l = sum_i s_i`.
pub fn values_from_ratios(rho: &Ratios, mode: Mode) -> Instance {
    let dims = rho.dims;
    let base = rho.min_entry() / crate::rational::qi(2);
    let mut table = Vec::with_capacity(dims.entries());
    for p in 0..dims.profiles() {
        let scale = pow(&base, dims.level(p));
        for i in 0..dims.n {
            let r = rho.get(i, p);
            table.push(match mode {
                Mode::Good => r / &scale,
                Mode::Chore => &scale / r,
            });
        }
    }
    Instance { dims, mode, table }
}

/// Like [`values_from_ratios`] but with every line strictly decreasing in
/// value (increasing in cost): the construction runs on reflected signals.
pub fn reflected_values_from_ratios(rho: &Ratios, mode: Mode) -> Instance {
    let dims = rho.dims;
    let k = dims.k;
    let reflect = |p: usize| -> usize {
        let s: Vec<usize> = (0..dims.n).map(|i| k + 1 - dims.signal(p, i)).collect();
        dims.index_of(&s)
    };
    let mut flipped = Vec::with_capacity(dims.entries());
    for p in 0..dims.profiles() {
        let r = reflect(p);
        flipped.extend((0..dims.n).map(|i| rho.get(i, r).clone()));
    }
    let inner = values_from_ratios(&Ratios { dims, rho: flipped }, mode);
    let mut table = Vec::with_capacity(dims.entries());
    for p in 0..dims.profiles() {
        let r = reflect(p);
        table.extend((0..dims.n).map(|i| inner.entry(i, r).clone()));
    }
    Instance { dims, mode, table }
}

/// Lower bound on `r*` under which the SOS construction applies.
pub fn sos_threshold(dims: Dims) -> Q {
    let nk = (dims.n * dims.k) as i64;
    one() - q(1, nk * nk + 1)
}

/// Monotone instance with submodularity over signals inducing `rho`:
/// values `rho * (a_l + 1)` with `a_l = l (2nk - l)`; costs are reciprocals.
pub fn sos_values_from_ratios(rho: &Ratios, mode: Mode) -> Result<Instance, ModelError> {
    let dims = rho.dims;
    let threshold = sos_threshold(dims);
    if rho.min_entry() < threshold {
        return Err(ModelError::PreconditionViolation(format!(
            "smallest ratio {} is below {}",
            crate::rational::fmt_q(&rho.min_entry()),
            crate::rational::fmt_q(&threshold)
        )));
    }
    let two_nk = 2 * dims.n * dims.k;
    let mut table = Vec::with_capacity(dims.entries());
    for p in 0..dims.profiles() {
        let l = dims.level(p);
        let scale = crate::rational::qi((l * (two_nk - l) + 1) as i64);
        for i in 0..dims.n {
            let v = rho.get(i, p) * &scale;
            table.push(match mode {
                Mode::Good => v,
                Mode::Chore => v.recip(),
            });
        }
    }
    Ok(Instance { dims, mode, table })
}

/// Worst-profile approximation ratio of `x`; always at least 1.
pub fn eval_ratio(rho: &Ratios, x: &AllocationRule, objective: Objective) -> Q {
    let dims = rho.dims;
    let mut worst = one();
    for p in 0..dims.profiles() {
        let mut acc = zero();
        for i in 0..dims.n {
            let xi = x.get(i, p);
            if xi.is_zero() {
                continue;
            }
            match objective {
                Objective::Value => acc += xi * rho.get(i, p),
                Objective::Cost => acc += xi / rho.get(i, p),
            }
        }
        let r = match objective {
            Objective::Value => acc.recip(),
            Objective::Cost => acc,
        };
        if r > worst {
            worst = r;
        }
    }
    worst
}

/// A pair `(low, high)` in `sigma_agent` with `x(low) > x(high)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub agent: usize,
    pub low: SignalProfile,
    pub high: SignalProfile,
}

impl fmt::Display for MonotonicityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "agent {} gets more at {} than at {}",
            self.agent + 1,
            self.low,
            self.high
        )
    }
}

/// Checks monotonicity along every ordered line; reports the first violation.
pub fn check_truthful(x: &AllocationRule, ord: &LineOrdering) -> Result<(), MonotonicityViolation> {
    let dims = ord.dims;
    for i in 0..dims.n {
        for base in dims.line_bases(i) {
            let line: Vec<usize> = dims.line(base, i).collect();
            for &a in &line {
                for &b in &line {
                    if ord.precedes(i, a, b) && x.get(i, a) > x.get(i, b) {
                        return Err(MonotonicityViolation {
                            agent: i,
                            low: dims.profile(a),
                            high: dims.profile(b),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn is_truthful(x: &AllocationRule, ord: &LineOrdering) -> bool {
    check_truthful(x, ord).is_ok()
}

/// Direction of a line check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    NonDecreasing,
    NonIncreasing,
}

/// Whether every agent's stored entries follow `trend` along its own signal.
pub fn lines_follow(inst: &Instance, trend: Trend) -> bool {
    let dims = inst.dims;
    (0..dims.n).all(|i| {
        dims.line_bases(i).all(|b| {
            let line: Vec<usize> = dims.line(b, i).collect();
            line.windows(2).all(|w| {
                let (a, c) = (inst.entry(i, w[0]), inst.entry(i, w[1]));
                match trend {
                    Trend::Increasing => a < c,
                    Trend::Decreasing => a > c,
                    Trend::NonDecreasing => a <= c,
                    Trend::NonIncreasing => a >= c,
                }
            })
        })
    })
}

/// Whether the instance is monotone in the sense used by single crossing:
/// values non-decreasing (good) or costs non-increasing (chore).
pub fn is_monotone(inst: &Instance) -> bool {
    match inst.mode {
        Mode::Good => lines_follow(inst, Trend::NonDecreasing),
        Mode::Chore => lines_follow(inst, Trend::NonIncreasing),
    }
}

/// A quadruple breaking the diminishing-increment inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SosViolation {
    pub owner: usize,
    pub raised: usize,
    pub low: SignalProfile,
    pub high: SignalProfile,
    pub step: usize,
}

/// Exhaustive check of submodularity over signals: raising `s_j` by `step`
/// increases `v_i` (decreases `c_i`) no more when the other signals are higher.
pub fn check_sos(inst: &Instance) -> Result<(), SosViolation> {
    let dims = inst.dims;
    let gain = |i: usize, from: usize, to: usize| -> Q {
        match inst.mode {
            Mode::Good => inst.entry(i, to) - inst.entry(i, from),
            Mode::Chore => inst.entry(i, from) - inst.entry(i, to),
        }
    };
    for j in 0..dims.n {
        let bases: Vec<usize> = dims.line_bases(j).collect();
        for &lo in &bases {
            for &hi in &bases {
                if !(0..dims.n).all(|t| dims.signal(lo, t) <= dims.signal(hi, t)) {
                    continue;
                }
                for sj in 1..dims.k {
                    for step in 1..=(dims.k - sj) {
                        for i in 0..dims.n {
                            let g_lo = gain(
                                i,
                                dims.with_signal(lo, j, sj),
                                dims.with_signal(lo, j, sj + step),
                            );
                            let g_hi = gain(
                                i,
                                dims.with_signal(hi, j, sj),
                                dims.with_signal(hi, j, sj + step),
                            );
                            if g_lo < g_hi {
                                return Err(SosViolation {
                                    owner: i,
                                    raised: j,
                                    low: dims.profile(dims.with_signal(lo, j, sj)),
                                    high: dims.profile(dims.with_signal(hi, j, sj)),
                                    step,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
