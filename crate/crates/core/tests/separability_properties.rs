mod common;

use dbnsep::prob::Cpd;
use dbnsep::separability::{degree, degree_lp, persistence, sufficiency_witness, Grouping};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_rows, scope};

/// Random table over parents `A-` (card `ka`) and `B-` (card `kb`).
fn random_table(rng: &mut ChaCha8Rng, ka: usize, kb: usize, child: usize) -> Cpd {
    Cpd::new(
        scope(&[("Z", child)]),
        scope(&[("A-", ka), ("B-", kb)]),
        random_rows(rng, ka * kb, child),
    )
    .unwrap()
}

/// `w·P(z | a) + (1 − w)·P(z | b)` with `w` possibly outside `[0, 1]`.
fn separable_table(rng: &mut ChaCha8Rng, ka: usize, kb: usize, child: usize) -> Cpd {
    loop {
        let w: f64 = rng.gen_range(-0.3..1.3);
        let pa = random_rows(rng, ka, child);
        let pb = random_rows(rng, kb, child);
        let rows: Vec<Vec<f64>> = (0..ka * kb)
            .map(|r| (0..child).map(|z| w * pa[r / kb][z] + (1.0 - w) * pb[r % kb][z]).collect())
            .collect();
        if rows.iter().flatten().all(|&v| v >= 0.0) {
            return Cpd::new(scope(&[("Z", child)]), scope(&[("A-", ka), ("B-", kb)]), rows).unwrap();
        }
    }
}

fn shape() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 2usize..=3, 2usize..=3, 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_decomposition_reconstructs((seed, ka, kb, child) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cpd = random_table(&mut rng, ka, kb, child);
        let d = degree_lp(&cpd, &Grouping::singletons(cpd.parents())).unwrap();
        prop_assert!((d.group_weights.iter().sum::<f64>() + d.residual_weight - 1.0).abs() <= 1e-9);
        prop_assert!(d.residual_weight >= -1e-12);
        prop_assert!(d.recombination_error(&cpd).unwrap() <= 1e-6);
        for c in d.components.iter().chain(d.residual.as_ref()) {
            for row in c.rows() {
                prop_assert!(row.iter().all(|&v| (-1e-9..=1.0 + 1e-9).contains(&v)));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn binary_degree_is_one_minus_half_interaction(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cpd = random_table(&mut rng, 2, 2, 2);
        let a = cpd.prob(3, 1) - cpd.prob(2, 1) - cpd.prob(1, 1) + cpd.prob(0, 1);
        let d = degree(&cpd, &Grouping::singletons(cpd.parents())).unwrap();
        prop_assert!((d - (1.0 - a.abs() / 2.0)).abs() <= 1e-9);
    }

    #[test]
    fn degree_invariant_under_relabeling_and_swap((seed, ka, kb, child) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cpd = random_table(&mut rng, ka, kb, child);
        let base = degree(&cpd, &Grouping::singletons(cpd.parents())).unwrap();

        let mut perm_a: Vec<usize> = (0..ka).collect();
        let mut perm_b: Vec<usize> = (0..kb).collect();
        perm_a.rotate_left(1);
        perm_b.reverse();
        let relabeled: Vec<Vec<f64>> = (0..ka * kb)
            .map(|r| cpd.row(perm_a[r / kb] * kb + perm_b[r % kb]).to_vec())
            .collect();
        let relabeled = Cpd::new(cpd.child().clone(), cpd.parents().clone(), relabeled).unwrap();
        let d = degree(&relabeled, &Grouping::singletons(relabeled.parents())).unwrap();
        prop_assert!((d - base).abs() <= 1e-9);

        let swapped: Vec<Vec<f64>> = (0..ka * kb)
            .map(|r| cpd.row((r % ka) * kb + r / ka).to_vec())
            .collect();
        let swapped = Cpd::new(cpd.child().clone(), scope(&[("B-", kb), ("A-", ka)]), swapped).unwrap();
        let d = degree(&swapped, &Grouping::singletons(swapped.parents())).unwrap();
        prop_assert!((d - base).abs() <= 1e-9);
    }

    #[test]
    fn witness_absent_iff_fully_separable((seed, ka, kb, child) in shape(), separable in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cpd = if separable {
            separable_table(&mut rng, ka, kb, child)
        } else {
            random_table(&mut rng, ka, kb, child)
        };
        let g = Grouping::singletons(cpd.parents());
        let d = degree(&cpd, &g).unwrap();
        let witness = sufficiency_witness(&cpd, &g).unwrap();
        prop_assert_eq!(d >= 1.0 - 1e-9, witness.is_none(), "degree {}", d);
        if separable {
            prop_assert!(d >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn persistence_bounds_degree(seed in any::<u64>(), kappa in 0.0f64..1.0, card in 2usize..=3, other in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = random_rows(&mut rng, card * other, card);
        let rows: Vec<Vec<f64>> = (0..card * other)
            .map(|r| {
                (0..card)
                    .map(|z| kappa * f64::from(u8::from(z == r / other)) + (1.0 - kappa) * noise[r][z])
                    .collect()
            })
            .collect();
        let cpd = Cpd::new(scope(&[("X", card)]), scope(&[("X-", card), ("Y-", other)]), rows).unwrap();
        let p = persistence(&cpd).unwrap();
        prop_assert!(p.kappa >= kappa - 1e-12);
        prop_assert!(p.reconstruction_error(&cpd).unwrap() <= 1e-12);
        let d = degree(&cpd, &Grouping::singletons(cpd.parents())).unwrap();
        prop_assert!(d >= p.kappa - 1e-6, "degree {} below kappa {}", d, p.kappa);
    }
}

#[test]
fn three_group_tables_reconstruct() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let cpd = Cpd::new(
            scope(&[("Z", 2)]),
            scope(&[("A-", 2), ("B-", 2), ("C-", 2)]),
            random_rows(&mut rng, 8, 2),
        )
        .unwrap();
        let d = degree_lp(&cpd, &Grouping::singletons(cpd.parents())).unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&d.alpha));
        assert!(d.recombination_error(&cpd).unwrap() <= 1e-6);
    }
}
