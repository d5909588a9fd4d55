//! Random search for non-integral vertices of the truthful polytope.

use super::GenError;
use crate::lp::{simplex_solve, truthful_polytope, verify_vertex, LpStatus};
use crate::model::{AllocationRule, Dims, LineOrdering};
use crate::rational::{is_integral_01, qi, zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maximizes random objectives over the truthful polytope of a strictly
/// increasing instance and returns the first optimal vertex with a
/// coordinate outside `{0, 1}`.
///
/// Each objective is a random positive combination of outward normals of
/// chain constraints and sign bounds, so it lands inside the normal cone of
/// some vertex with few active constraints. Uniform objectives almost never
/// select a fractional vertex.
pub fn find_fractional_vertex(dims: Dims, trials: usize, seed: u64) -> Result<AllocationRule, GenError> {
    let n = dims.n();
    let ord = LineOrdering::increasing(dims);
    let pairs = ord.chain_pairs();
    let mut region = truthful_polytope(&ord);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut c = vec![zero(); dims.entries()];
        for &(i, lo, hi) in &pairs {
            if rng.random_bool(0.5) {
                let w = qi(rng.random_range(1..=5));
                c[lo * n + i] += &w;
                c[hi * n + i] -= w;
            }
        }
        for cj in c.iter_mut() {
            if rng.random_bool(0.2) {
                *cj -= qi(rng.random_range(1..=5));
            }
        }
        region.objective = c;
        let sol = simplex_solve(&region);
        if sol.status != LpStatus::Optimal || sol.point.iter().all(is_integral_01) {
            continue;
        }
        let point = sol.point[..dims.entries()].to_vec();
        if verify_vertex(&region, &point).unwrap_or(false) {
            return Ok(AllocationRule::new(dims, point)?);
        }
    }
    Err(GenError::NotFound { trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn three_by_three_has_fractional_vertices() {
        let x = find_fractional_vertex(Dims::new(3, 3).unwrap(), 2000, 1).unwrap();
        assert!(!x.is_deterministic());
        assert!(x
            .as_slice()
            .iter()
            .any(|v| *v == q(1, 2) || *v == q(1, 3) || *v == q(2, 3)));
    }

    #[test]
    fn two_agents_stay_integral() {
        let err = find_fractional_vertex(Dims::new(2, 3).unwrap(), 300, 1).unwrap_err();
        assert_eq!(err, GenError::NotFound { trials: 300 });
    }
}
