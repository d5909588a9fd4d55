//! Small named instances used across tests, the CLI and the acceptance suite.

use crate::model::{reflected_values_from_ratios, values_from_ratios, Dims, Instance, Mode, Ratios};
use crate::rational::{one, q, qi, Q};

fn ratios_2x2(entries: [(usize, usize, Q, Q); 4]) -> Ratios {
    let dims = Dims::new(2, 2).expect("2x2");
    let mut rho = vec![one(); 8];
    for (s1, s2, r1, r2) in entries {
        let p = dims.index_of(&[s1, s2]);
        rho[2 * p] = r1;
        rho[2 * p + 1] = r2;
    }
    Ratios::new(dims, rho).expect("valid ratios")
}

/// Ratios of the two-by-two conflict-pair example: `(2,1)` has agent 1 at
/// 2/5 and `(1,2)` has agent 0 at 1/2.
pub fn fig5_ratios() -> Ratios {
    ratios_2x2([
        (1, 1, one(), one()),
        (2, 1, one(), q(2, 5)),
        (1, 2, q(1, 2), one()),
        (2, 2, one(), one()),
    ])
}

/// The two-by-two conflict-pair instance. Lines are strictly decreasing so
/// that `(2,1)` precedes `(1,2)` and the pair binds.
pub fn fig5_pair() -> Instance {
    reflected_values_from_ratios(&fig5_ratios(), Mode::Good)
}

/// Three-signal two-agent instance with the forced chain
/// `(2,1) -> (2,2) -> (1,2) -> (1,3)`, infeasible below ratio 5/2.
pub fn fig2_chain() -> Instance {
    let dims = Dims::new(2, 3).expect("2x3");
    let rho = Ratios::from_fn(dims, |i, s| match (i, s.0.as_slice()) {
        (1, [2, 1]) => q(2, 5),
        (0, [1, 3]) => q(3, 10),
        _ => one(),
    })
    .expect("valid ratios");
    reflected_values_from_ratios(&rho, Mode::Good)
}

/// Ratios of the three-agent two-signal matching example.
pub fn fig3_ratios() -> Ratios {
    let dims = Dims::new(3, 2).expect("3x2");
    let table: [([usize; 3], [Q; 3]); 8] = [
        ([1, 1, 1], [q(4, 5), one(), q(1, 5)]),
        ([2, 1, 1], [q(7, 10), one(), q(9, 10)]),
        ([1, 2, 1], [q(1, 2), q(2, 5), one()]),
        ([1, 1, 2], [one(), q(9, 10), q(3, 10)]),
        ([2, 2, 1], [q(7, 10), one(), one()]),
        ([2, 1, 2], [q(1, 5), one(), q(1, 10)]),
        ([1, 2, 2], [q(7, 10), q(3, 5), one()]),
        ([2, 2, 2], [one(), q(3, 5), q(1, 5)]),
    ];
    let mut rho = vec![one(); dims.entries()];
    for (s, r) in table {
        let p = dims.index_of(&s);
        for (i, v) in r.into_iter().enumerate() {
            rho[3 * p + i] = v;
        }
    }
    Ratios::new(dims, rho).expect("valid ratios")
}

/// The matching example realized with strictly increasing values.
pub fn fig3_instance() -> Instance {
    values_from_ratios(&fig3_ratios(), Mode::Good)
}

/// Alice's value is 1 or 100 depending on Bob's signal; Bob's value is 10.
pub fn intro_good() -> Instance {
    let dims = Dims::new(2, 2).expect("2x2");
    Instance::from_fn(dims, Mode::Good, |i, s| {
        if i == 0 {
            qi(1 + 99 * (s.0[1] as i64 - 1))
        } else {
            qi(10)
        }
    })
    .expect("positive")
}

/// Chore version: Alice's cost is 100 or 1 depending on Bob's signal; Bob's cost is 10.
pub fn intro_chore() -> Instance {
    let dims = Dims::new(2, 2).expect("2x2");
    Instance::from_fn(dims, Mode::Chore, |i, s| {
        if i == 0 {
            qi(1 + 99 * (2 - s.0[1] as i64))
        } else {
            qi(10)
        }
    })
    .expect("positive")
}

/// Monotone two-agent instance that is not 2-single crossing yet admits a
/// deterministic rule of ratio 1.
pub fn single_crossing_counterexample() -> Instance {
    let dims = Dims::new(2, 2).expect("2x2");
    Instance::from_fn(dims, Mode::Good, |i, s| match (i, s.0[0], s.0[1]) {
        (0, _, 1) => q(1, 2),
        (0, _, 2) => one(),
        (1, 1, _) => q(1, 4),
        (1, 2, 1) => q(1, 2),
        _ => one(),
    })
    .expect("positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{eval_ratio, lines_follow, ratios_from_values, AllocationRule, Objective, Trend};

    #[test]
    fn pair_ratios_survive_realization() {
        let inst = fig5_pair();
        assert_eq!(ratios_from_values(&inst), fig5_ratios());
        assert!(lines_follow(&inst, Trend::Decreasing));
        let rho = ratios_from_values(&inst);
        let dims = rho.dims();
        assert_eq!(rho.get(1, dims.index_of(&[2, 1])), &q(2, 5));
        assert_eq!(rho.get(0, dims.index_of(&[1, 2])), &q(1, 2));
    }

    #[test]
    fn matching_example_is_increasing() {
        let inst = fig3_instance();
        assert!(lines_follow(&inst, Trend::Increasing));
        assert_eq!(ratios_from_values(&inst), fig3_ratios());
    }

    #[test]
    fn intro_uniform_cost() {
        let inst = intro_chore();
        let rho = ratios_from_values(&inst);
        let unif = AllocationRule::uniform(inst.dims());
        assert_eq!(eval_ratio(&rho, &unif, Objective::Cost), q(11, 2));
        let p = inst.dims().index_of(&[1, 2]);
        let at = (inst.cost(0, p) + inst.cost(1, p)) / qi(2);
        assert_eq!(at, q(11, 2));
    }
}
