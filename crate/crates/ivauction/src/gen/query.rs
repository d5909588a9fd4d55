//! Query lower-bound adversaries: families of ratio tables that differ in a
//! single entry yet force different winners at a fixed focal profile.

use super::GenError;
use crate::model::{Dims, LineOrdering, Ratios, SignalProfile};
use crate::oracle::Propagator;
use crate::rational::{one, Q};
use num_traits::One;

/// Largest profile count for which the plant sets are enumerated.
pub const MAX_PROFILES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plant {
    None,
    /// Lower the indexed entry of the set forcing agent 0 at the focal profile.
    First(usize),
    /// Same for the set forcing agent 1.
    Second(usize),
}

#[derive(Debug, Clone)]
pub struct QueryAdversary {
    pub ratios: Ratios,
    pub focal: SignalProfile,
    pub focal_index: usize,
    /// Entries `(profile, agent)` whose lowering forces agent 0 at the focal profile.
    pub first_set: Vec<(usize, usize)>,
    /// Entries whose lowering forces agent 1 there.
    pub second_set: Vec<(usize, usize)>,
}

impl QueryAdversary {
    pub fn ordering(&self) -> LineOrdering {
        LineOrdering::increasing(self.ratios.dims())
    }
}

fn focal(dims: Dims) -> Vec<usize> {
    let (n, k) = (dims.n(), dims.k());
    (0..n)
        .map(|i| match i {
            0 | 1 => 1 + k / 2,
            // 1-based index i + 1 odd
            _ if i % 2 == 0 => 1,
            _ => k,
        })
        .collect()
}

/// Base table: at most two agents with ratio 1 per profile, the rest `epsilon`.
fn base_ratios(dims: Dims, fs: &[usize], epsilon: &Q) -> Result<Ratios, GenError> {
    let n = dims.n();
    if n == 2 {
        return Ok(Ratios::ones(dims));
    }
    Ratios::from_fn(dims, |i, s| {
        let s = &s.0;
        let up = match (2..n).rev().find(|&j| s[j] != fs[j]) {
            Some(j) => i == j || i == j + 1,
            None => match i {
                0 => s[1] >= fs[1],
                1 => s[0] >= fs[0],
                2 => s[0] < fs[0] || s[1] < fs[1],
                _ => false,
            },
        };
        if up {
            one()
        } else {
            epsilon.clone()
        }
    })
    .map_err(GenError::from)
}

/// Builds the base table, enumerates both plant sets by propagation and
/// applies `plant`.
pub fn gen_query_adversary(n: usize, k: usize, plant: Plant, epsilon: &Q) -> Result<QueryAdversary, GenError> {
    let dims = Dims::new(n, k)?;
    if n < 2 || k < 2 {
        return Err(GenError::BadParameter("need n >= 2 and k >= 2".into()));
    }
    if dims.profiles() > MAX_PROFILES {
        return Err(GenError::BadParameter(format!("more than {MAX_PROFILES} profiles")));
    }
    if !(*epsilon > Q::from_integer(0.into()) && *epsilon < one()) {
        return Err(GenError::BadParameter("epsilon must lie in (0, 1)".into()));
    }
    let fs = focal(dims);
    let focal_index = dims.index_of(&fs);
    let base = base_ratios(dims, &fs, epsilon)?;
    let ord = LineOrdering::increasing(dims);
    let prop = Propagator::new(&base, &ord, &one())?;
    let (mut first_set, mut second_set) = (Vec::new(), Vec::new());
    for p in 0..dims.profiles() {
        let up: Vec<usize> = (0..n).filter(|&i| base.get(i, p).is_one()).collect();
        let [a, b] = up[..] else { continue };
        for (lowered, kept) in [(a, b), (b, a)] {
            let Some(dom) = prop.closure(&[(p, kept)])? else { continue };
            match dom[focal_index] {
                1 => first_set.push((p, lowered)),
                2 => second_set.push((p, lowered)),
                _ => {}
            }
        }
    }
    let ratios = match plant {
        Plant::None => base,
        Plant::First(idx) | Plant::Second(idx) => {
            let set = if matches!(plant, Plant::First(_)) { &first_set } else { &second_set };
            let &(p, agent) = set.get(idx).ok_or(GenError::IndexOutOfRange {
                index: idx,
                len: set.len(),
            })?;
            let mut rho = base.as_slice().to_vec();
            rho[p * n + agent] = epsilon.clone();
            Ratios::new(dims, rho)?
        }
    };
    Ok(QueryAdversary {
        ratios,
        focal: SignalProfile(fs),
        focal_index,
        first_set,
        second_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{propagate_feasible, Search};
    use crate::rational::q;
    use std::collections::HashSet;

    const BUDGET: u64 = 100_000;

    fn feasible(adv: &QueryAdversary, winner: usize) -> bool {
        let pins = [(adv.focal_index, winner)];
        matches!(
            propagate_feasible(&adv.ratios, &adv.ordering(), &one(), &pins, BUDGET).unwrap(),
            Search::Feasible(_)
        )
    }

    #[test]
    fn two_agent_sets_are_quadrants() {
        for k in [3, 5, 7] {
            let adv = gen_query_adversary(2, k, Plant::None, &q(1, 2)).unwrap();
            let c = 1 + k / 2;
            assert_eq!(adv.first_set.len(), c * (k - c + 1), "k={k}");
            assert_eq!(adv.second_set.len(), c * (k - c + 1), "k={k}");
            let dims = adv.ratios.dims();
            for &(p, agent) in &adv.first_set {
                assert_eq!(agent, 1);
                assert!(dims.signal(p, 0) <= c && dims.signal(p, 1) >= c);
            }
            let a: HashSet<usize> = adv.first_set.iter().map(|e| e.0).collect();
            let b: HashSet<usize> = adv.second_set.iter().map(|e| e.0).collect();
            assert_eq!(a.intersection(&b).count(), 1, "only the focal profile is shared");
            assert!(feasible(&adv, 0) && feasible(&adv, 1));
        }
    }

    #[test]
    fn plants_force_opposite_winners() {
        let k = 5;
        let adv = gen_query_adversary(2, k, Plant::None, &q(1, 2)).unwrap();
        for idx in 0..adv.first_set.len() {
            let a = gen_query_adversary(2, k, Plant::First(idx), &q(1, 2)).unwrap();
            assert!(feasible(&a, 0) && !feasible(&a, 1), "first {idx}");
        }
        for idx in 0..adv.second_set.len() {
            let a = gen_query_adversary(2, k, Plant::Second(idx), &q(1, 2)).unwrap();
            assert!(feasible(&a, 1) && !feasible(&a, 0), "second {idx}");
        }
        assert_eq!(
            gen_query_adversary(2, k, Plant::First(99), &q(1, 2)).unwrap_err(),
            GenError::IndexOutOfRange {
                index: 99,
                len: adv.first_set.len()
            }
        );
    }

    #[test]
    fn three_agent_base() {
        let adv = gen_query_adversary(3, 3, Plant::None, &q(1, 2)).unwrap();
        let dims = adv.ratios.dims();
        for p in 0..dims.profiles() {
            let ones = (0..3).filter(|&i| adv.ratios.get(i, p).is_one()).count();
            assert!((1..=2).contains(&ones));
        }
        assert!(!adv.first_set.is_empty() && !adv.second_set.is_empty());
        let a: HashSet<usize> = adv.first_set.iter().map(|e| e.0).collect();
        let b: HashSet<usize> = adv.second_set.iter().map(|e| e.0).collect();
        assert!(a.intersection(&b).all(|&p| p == adv.focal_index));
        let planted = gen_query_adversary(3, 3, Plant::Second(0), &q(1, 2)).unwrap();
        assert!(feasible(&planted, 1) && !feasible(&planted, 0));
    }
}
