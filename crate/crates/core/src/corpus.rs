//! Seeded test corpora. The same seed always yields the same functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::measure::{Piece, StepFunction};
use crate::operators::RadialFunction;

pub const DEFAULT_SEED: u64 = 0x5eed_1a57;

/// Random step functions with 1 to 8 pieces, lengths in `[0.05, 5)` and
/// values in `[0, 10)`. About a quarter of the values repeat a small set so
/// that merging and ties are exercised.
pub fn random_step_functions(seed: u64, count: usize) -> Vec<StepFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=8);
            let pieces = (0..k)
                .map(|_| {
                    let len = rng.gen_range(0.05..5.0);
                    let value = if rng.gen_bool(0.25) {
                        [0.0, 1.0, 2.0, 0.5][rng.gen_range(0..4)]
                    } else {
                        rng.gen_range(0.0..10.0)
                    };
                    Piece::new(len, value)
                })
                .collect();
            StepFunction::new(pieces).expect("generated pieces are valid")
        })
        .collect()
}

/// `χ_{B(0, ρ_k)}` with `ρ_k = 2^{(k − count/2)/4}`.
pub fn ball_dilates(n: u32, count: usize) -> Result<Vec<RadialFunction>> {
    (0..count).map(|k| RadialFunction::ball(n, 2f64.powf((k as f64 - count as f64 / 2.0) / 4.0), 1.0)).collect()
}

/// `χ_{B(0, 1/j)}` for `j = 1..=count`.
pub fn shrinking_balls(n: u32, count: usize) -> Result<Vec<RadialFunction>> {
    (1..=count).map(|j| RadialFunction::ball(n, 1.0 / j as f64, 1.0)).collect()
}

/// Nonincreasing two-level profiles `h χ_{B(0,r₁)} + χ_{B(0,r₂)}`.
pub fn two_ball_profiles(seed: u64, n: u32, count: usize) -> Result<Vec<RadialFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r1 = rng.gen_range(0.1..2.0);
            let r2 = r1 * rng.gen_range(1.1..4.0);
            let h = rng.gen_range(0.2..5.0);
            RadialFunction::new(n, StepFunction::from_pairs(&[(r1, 1.0 + h), (r2 - r1, 1.0)])?)
        })
        .collect()
}
