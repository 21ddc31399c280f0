//! Independent oracles for advantage estimation and loss gradients.

mod common;

use common::{gae_oracle, gradient_error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabletop::ppo::gae;

#[test]
fn gae_matches_quadratic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = 100;
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.1)).collect();
        let boot = rng.gen_range(-1.0..1.0);
        let (g, l) = (rng.gen_range(0.8..1.0), rng.gen_range(0.8..1.0));
        let (adv, ret) = gae(&r, &v, &d, boot, g, l).unwrap();
        let oracle = gae_oracle(&r, &v, &d, boot, g, l);
        for t in 0..n {
            worst = worst.max((adv[t] - oracle[t]).abs());
            assert!((ret[t] - adv[t] - v[t]).abs() < 1e-12);
        }
    }
    assert!(worst < 1e-9, "max abs diff {worst}");
}

#[test]
fn loss_gradient_matches_central_differences() {
    for seed in 0..10 {
        let err = gradient_error(seed);
        assert!(err < 1e-4, "config {seed}: relative error {err}");
    }
}
