//! Binary search over the finite set of candidate deterministic ratios.

use crate::rational::Q;

/// Smallest candidate accepted by `decide`, assuming acceptance is monotone in
/// the candidate and the largest candidate is accepted.
pub fn min_feasible<T>(candidates: &[Q], mut decide: impl FnMut(&Q) -> Option<T>) -> Option<(Q, T)> {
    let last = candidates.last()?;
    let mut best = (last.clone(), decide(last)?);
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match decide(&candidates[mid]) {
            Some(found) => {
                best = (candidates[mid].clone(), found);
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Some(best)
}
