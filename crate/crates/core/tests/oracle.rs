use mfm_core::mfm::{build_vn_table, stats_of};
use mfm_core::oracle::{enumerate_partitions, exact_posterior};
use mfm_core::special::ln_rising;
use mfm_core::{CollapsedLikelihood, ConjugateNormalGamma, ConstantLikelihood, Dataset, KPrior};
use proptest::prelude::*;

fn variants() -> Vec<KPrior> {
    vec![
        KPrior::loss_based_default(),
        KPrior::loss_based(2.5, 0.7).unwrap(),
        KPrior::loss_based_finite(1.0, 1.0, 12).unwrap(),
        KPrior::fixed_rate(0.5).unwrap(),
        KPrior::uniform(50).unwrap(),
        KPrior::truncated_poisson(1.0).unwrap(),
        KPrior::shifted_poisson(2.0).unwrap(),
        KPrior::geometric(0.3).unwrap(),
    ]
}

#[test]
fn partition_law_sums_to_one() {
    for prior in variants() {
        for gamma in [0.5, 1.0, 2.0] {
            for n in 1..=8 {
                let data = Dataset::from_column(&vec![0.0; n]).unwrap();
                let post = exact_posterior(&data, &ConstantLikelihood { dim: 1 }, &prior, gamma).unwrap();
                assert!(
                    post.ln_evidence.abs() < 1e-10,
                    "{} gamma {gamma} n {n}: {}",
                    prior.spec(),
                    post.ln_evidence
                );
            }
        }
    }
}

#[test]
fn three_points_by_hand() {
    let xs = [0.2, 1.9, -0.7];
    let data = Dataset::from_column(&xs).unwrap();
    let model = ConjugateNormalGamma::new(1, 0.5, 0.3, 2.0, 1.5).unwrap();
    let prior = KPrior::truncated_poisson(2.0).unwrap();
    let gamma = 0.8;
    let vn = build_vn_table(&prior, 3, gamma, 1e-13).unwrap();
    let block = |idx: &[usize]| ln_rising(gamma, idx.len() as f64) + model.log_marginal(&stats_of(&data, idx));
    let weights = [
        vn.ln_v(1) + block(&[0, 1, 2]),
        vn.ln_v(2) + block(&[0, 1]) + block(&[2]),
        vn.ln_v(2) + block(&[0, 2]) + block(&[1]),
        vn.ln_v(2) + block(&[0]) + block(&[1, 2]),
        vn.ln_v(3) + block(&[0]) + block(&[1]) + block(&[2]),
    ];
    let z: f64 = weights.iter().map(|w| w.exp()).sum();
    let post = exact_posterior(&data, &model, &prior, gamma).unwrap();
    let want = [weights[0].exp() / z, (weights[1].exp() + weights[2].exp() + weights[3].exp()) / z, weights[4].exp() / z];
    for (got, want) in post.t_pmf.iter().zip(want) {
        assert!((got - want).abs() < 1e-13);
    }
    assert!((post.ln_evidence - z.ln()).abs() < 1e-12);
    assert!((post.co_cluster_prob(0, 1) - (weights[0].exp() + weights[1].exp()) / z).abs() < 1e-13);
}

#[test]
fn reported_mass_is_complete_for_light_tails() {
    let data = Dataset::from_column(&[0.1, 0.5, 3.0, 3.4, 6.0]).unwrap();
    let model = ConjugateNormalGamma::unit(1);
    for prior in [KPrior::truncated_poisson(1.0).unwrap(), KPrior::uniform(50).unwrap(), KPrior::geometric(0.3).unwrap()] {
        let post = exact_posterior(&data, &model, &prior, 1.0).unwrap();
        let (pmf, overflow) = post.k_pmf(50);
        let mass: f64 = pmf.iter().sum();
        assert!(mass >= 1.0 - 1e-10, "{}: {mass}", prior.spec());
        assert!(overflow <= 1e-10);
        assert!(pmf.iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn n_beyond_ten_is_refused() {
    let data = Dataset::from_column(&[0.0; 11]).unwrap();
    assert!(exact_posterior(&data, &ConjugateNormalGamma::unit(1), &KPrior::loss_based_default(), 1.0).is_err());
    assert!(enumerate_partitions(0).is_err());
}

fn data_and_order() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    prop::collection::vec(-5.0f64..5.0, 1..=6).prop_flat_map(|xs| {
        let n = xs.len();
        (Just(xs), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relabelling_leaves_posterior_bitwise_equal((xs, order) in data_and_order()) {
        let data = Dataset::from_column(&xs).unwrap();
        let model = ConjugateNormalGamma::unit(1);
        let prior = KPrior::loss_based_default();
        let a = exact_posterior(&data, &model, &prior, 1.0).unwrap();
        let b = exact_posterior(&data.permuted(&order), &model, &prior, 1.0).unwrap();
        prop_assert_eq!(&a.t_pmf, &b.t_pmf);
        prop_assert_eq!(a.k_pmf(20), b.k_pmf(20));
    }

    #[test]
    fn posterior_probabilities_are_normalised(xs in prop::collection::vec(-3.0f64..3.0, 1..=6), gamma in 0.3f64..3.0) {
        let data = Dataset::from_column(&xs).unwrap();
        let post = exact_posterior(&data, &ConjugateNormalGamma::unit(1), &KPrior::uniform(10).unwrap(), gamma).unwrap();
        let total: f64 = post.probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!((post.t_pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let (pmf, overflow) = post.k_pmf(10);
        prop_assert!(overflow < 1e-12);
        prop_assert!(pmf.iter().sum::<f64>() > 1.0 - 1e-12);
    }
}
