mod common;

use dbnsep::error_analysis::{bound_quantities, error_bound, run_error_decomposition, TypoReading};
use dbnsep::filtering::sample_trajectory;
use dbnsep::model::{generate_two_chain_system, TwoChainConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_separable_model, random_uncoupled_model};

#[test]
fn separable_models_have_no_propagation_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for i in 0..100 {
        let model = random_separable_model(&mut rng, false);
        let traj = sample_trajectory(&model, 25, i).unwrap();
        let d = run_error_decomposition(&model, &traj).unwrap();
        for (t, s) in d.steps.iter().enumerate() {
            assert!(s.propagation <= 1e-9, "model {i}, step {}: {}", t + 1, s.propagation);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uncoupled_chains_have_no_error(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_uncoupled_model(&mut rng);
        let traj = sample_trajectory(&model, 20, seed).unwrap();
        let d = run_error_decomposition(&model, &traj).unwrap();
        for s in &d.steps {
            prop_assert!(s.total <= 1e-12);
            prop_assert!(s.propagation <= 1e-12);
            prop_assert!(s.conditioning <= 1e-12);
        }
    }

    #[test]
    fn influences_are_probabilities(seed in any::<u64>()) {
        let (sys, _) = generate_two_chain_system(seed, &TwoChainConfig::default()).unwrap();
        for reading in [TypoReading::AsPrinted, TypoReading::Symmetric] {
            let q = bound_quantities(&sys, reading);
            for v in [q.x_on_x, q.y_on_x, q.x_on_y, q.y_on_y, q.evidence, q.x_on_both, q.y_on_both] {
                prop_assert!((0.0..=1.0).contains(&v), "{v}");
            }
            prop_assert!(q.x_retention >= 0.0 && q.y_retention >= 0.0);
            if let Some(b) = error_bound(&q).bound() {
                prop_assert!(b.joint >= 0.0 && b.x_marginal >= 0.0 && b.y_marginal >= 0.0);
            }
        }
    }
}
