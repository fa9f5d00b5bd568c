mod common;

use common::props::{check_zero_gradient_fixed_point, oracle_gap};
use common::random_config;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparsity_lab::optim::{step, OptimizerConfig, OptimizerKind, ParamState};

fn kind() -> impl Strategy<Value = OptimizerKind> {
    prop::sample::select(OptimizerKind::ALL.to_vec())
}

fn config() -> impl Strategy<Value = OptimizerConfig> {
    (kind(), any::<u64>()).prop_map(|(k, seed)| random_config(k, &mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn every_rule_matches_its_scalar_recursion(
        cfg in config(),
        theta0 in -2.0..2.0f64,
        grads in prop::collection::vec(-1.0..1.0f64, 10),
    ) {
        let gap = oracle_gap(&cfg, theta0, &grads).unwrap();
        prop_assert!(gap < 1e-12, "{:?}: gap {gap}", cfg.kind);
    }

    #[test]
    fn zero_gradients_are_a_fixed_point(
        cfg in config(),
        theta in prop::collection::vec(-5.0..5.0f64, 1..8),
        steps in 1usize..6,
    ) {
        prop_assert_eq!(check_zero_gradient_fixed_point(&cfg, &theta, steps), Ok(()));
    }

    #[test]
    fn adagrad_accumulator_never_shrinks(grads in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 4), 1..15)) {
        let cfg = OptimizerConfig::baseline(OptimizerKind::Adagrad);
        let mut state = ParamState::new(cfg.kind, 4);
        let mut theta = vec![0.5; 4];
        for g in &grads {
            let before = state.sq_grad.clone();
            step(&mut state, &mut theta, g, &cfg).unwrap();
            prop_assert!(state.sq_grad.iter().zip(&before).all(|(a, b)| a >= b));
        }
    }

    #[test]
    fn decay_enters_through_the_gradient(
        cfg in config(),
        theta in prop::collection::vec(-2.0..2.0f64, 1..6),
        lambda in 1e-4..1.0f64,
    ) {
        let mut decayed = cfg;
        decayed.weight_decay = lambda;
        let mut plain = cfg;
        plain.weight_decay = 0.0;
        let mut t1 = theta.clone();
        let mut s1 = ParamState::new(cfg.kind, theta.len());
        step(&mut s1, &mut t1, &vec![0.0; theta.len()], &decayed).unwrap();
        let as_grad: Vec<f64> = theta.iter().map(|t| lambda * t).collect();
        let mut t2 = theta.clone();
        let mut s2 = ParamState::new(cfg.kind, theta.len());
        step(&mut s2, &mut t2, &as_grad, &plain).unwrap();
        prop_assert_eq!(t1, t2);
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn buffers_keep_their_shape(cfg in config(), len in 1usize..10, n in 1usize..5) {
        let mut state = ParamState::new(cfg.kind, len);
        let shapes = |s: &ParamState| [s.velocity.len(), s.sq_grad.len(), s.sq_update.len(), s.first_moment.len(), s.second_moment.len()];
        let before = shapes(&state);
        let mut theta = vec![0.1; len];
        for _ in 0..n {
            step(&mut state, &mut theta, &vec![0.3; len], &cfg).unwrap();
        }
        prop_assert_eq!(shapes(&state), before);
        prop_assert_eq!(theta.len(), len);
    }
}

#[test]
fn mismatched_lengths_are_rejected() {
    let cfg = OptimizerConfig::baseline(OptimizerKind::Adam);
    let mut state = ParamState::new(cfg.kind, 2);
    assert!(step(&mut state, &mut [0.0, 0.0], &[1.0], &cfg).is_err());
}
