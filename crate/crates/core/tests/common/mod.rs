#![allow(dead_code)]

use parma::{check_causality, validate_model, ModelSpec, ParmaModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SWEEP_PERIODS: [usize; 4] = [1, 2, 4, 12];
pub const SWEEP_MAX_RADIUS: f64 = 0.9;

/// Draws a model with the given shape whose monodromy radius is at most
/// `max_radius`, rejecting and shrinking the AR coefficient range until one fits.
pub fn random_causal_model(
    rng: &mut ChaCha8Rng,
    s: usize,
    p: usize,
    q: usize,
    max_radius: f64,
) -> ParmaModel {
    let mut spread: f64 = rng.random_range(0.3..1.2);
    loop {
        for _ in 0..50 {
            let spec = ModelSpec {
                period: s,
                p,
                q,
                phi: (0..s)
                    .map(|_| (0..p).map(|_| rng.random_range(-spread..spread)).collect())
                    .collect(),
                theta: (0..s)
                    .map(|_| (0..q).map(|_| rng.random_range(-0.9..0.9)).collect())
                    .collect(),
                sigma2: (0..s).map(|_| rng.random_range(0.25..4.0)).collect(),
            };
            let model = validate_model(&spec).unwrap();
            if check_causality(&model).spectral_radius <= max_radius {
                return model;
            }
        }
        spread *= 0.8;
    }
}

/// Deterministic sweep of `count` models: periods cycle through
/// [`SWEEP_PERIODS`], orders are drawn from `0..=4`.
pub fn sweep_models(count: usize, seed: u64) -> Vec<ParmaModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let s = SWEEP_PERIODS[i % SWEEP_PERIODS.len()];
            let p = rng.random_range(0..=4);
            let q = rng.random_range(0..=4);
            random_causal_model(&mut rng, s, p, q, SWEEP_MAX_RADIUS)
        })
        .collect()
}
