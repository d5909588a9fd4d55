//! The single-crossing condition, for any number of agents.

use super::DuoError;
use crate::model::{is_monotone, Instance, Mode};
use crate::rational::Q;

/// Raising an agent's own signal moves its value at least `1/alpha` times as
/// much as anyone else's (costs: at least as much in the falling direction).
pub fn is_single_crossing(inst: &Instance, alpha: &Q) -> Result<bool, DuoError> {
    if !is_monotone(inst) {
        return Err(DuoError::NotMonotone);
    }
    let dims = inst.dims();
    for i in 0..dims.n() {
        for base in dims.line_bases(i) {
            let line: Vec<usize> = dims.line(base, i).collect();
            for (a, &low) in line.iter().enumerate() {
                for &high in &line[a + 1..] {
                    let own = inst.entry(i, high) - inst.entry(i, low);
                    for j in (0..dims.n()).filter(|&j| j != i) {
                        let other = inst.entry(j, high) - inst.entry(j, low);
                        let ok = match inst.mode() {
                            Mode::Good => alpha * &own >= other,
                            Mode::Chore => alpha * &own <= other,
                        };
                        if !ok {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}
