//! Seeded random instances.

use crate::model::{Dims, Instance, Mode, Ratios};
use crate::rational::{one, q, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DENOM: i64 = 12;

fn random_positive(rng: &mut ChaCha8Rng) -> Q {
    q(rng.random_range(1..=4 * DENOM), DENOM)
}

/// Reproducible positive table; with probability `tie_prob` an entry copies
/// the previous entry of the same line, so `tie_prob = 1` gives constant lines.
pub fn gen_random(dims: Dims, mode: Mode, seed: u64, tie_prob: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dims.n();
    let mut table = vec![one(); dims.entries()];
    for p in 0..dims.profiles() {
        for i in 0..n {
            let own = dims.signal(p, i);
            let tie = own > 1 && rng.random_bool(tie_prob.clamp(0.0, 1.0));
            table[p * n + i] = if tie {
                table[dims.with_signal(p, i, own - 1) * n + i].clone()
            } else {
                random_positive(&mut rng)
            };
        }
    }
    if tie_prob <= 0.0 {
        // Break accidental ties so every line is totally ordered.
        for i in 0..n {
            for base in dims.line_bases(i) {
                let line: Vec<usize> = dims.line(base, i).collect();
                for (t, &a) in line.iter().enumerate() {
                    let bump = q(t as i64, DENOM * 1000);
                    table[a * n + i] += bump;
                }
            }
        }
    }
    Instance::new(dims, mode, table).expect("positive entries")
}

/// Random normalized ratios drawn from a small grid, with one 1 per profile.
pub fn gen_random_ratios(dims: Dims, seed: u64) -> Ratios {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dims.n();
    let mut rho = Vec::with_capacity(dims.entries());
    for _ in 0..dims.profiles() {
        let best = rng.random_range(0..n);
        for i in 0..n {
            rho.push(if i == best || rng.random_bool(0.3) {
                one()
            } else {
                q(rng.random_range(1..DENOM), DENOM)
            });
        }
    }
    Ratios::new(dims, rho).expect("valid ratios")
}
