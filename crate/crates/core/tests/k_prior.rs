use mfm_core::k_prior::{elicit_beta, finite_support_pmf, prior_moments};
use mfm_core::{KPrior, KPriorSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn any_prior() -> impl Strategy<Value = KPrior> {
    prop_oneof![
        (0.2f64..8.0, 0.2f64..8.0).prop_map(|(a, b)| KPrior::loss_based(a, b).unwrap()),
        (0.05f64..3.0).prop_map(|c| KPrior::fixed_rate(c).unwrap()),
        (1u64..200).prop_map(|k| KPrior::uniform(k).unwrap()),
        (0.05f64..20.0).prop_map(|l| KPrior::truncated_poisson(l).unwrap()),
        (0.05f64..20.0).prop_map(|l| KPrior::shifted_poisson(l).unwrap()),
        (0.01f64..0.95).prop_map(|p| KPrior::geometric(p).unwrap()),
        (0.5f64..4.0, 0.5f64..4.0, 1u64..40)
            .prop_map(|(a, b, k)| KPrior::loss_based_finite(a, b, k).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_sum_and_tail_bracket_one(prior in any_prior(), cut in 1u64..400) {
        let mut sum = 0.0;
        for k in 1..=cut {
            let p = prior.pmf(k).unwrap_or(0.0);
            prop_assert!(p >= 0.0);
            sum += p;
        }
        let tail = prior.tail_mass(cut);
        prop_assert!(tail >= 0.0);
        prop_assert!((sum + tail - 1.0).abs() < 1e-10, "{} + {} for {}", sum, tail, prior.spec());
    }

    #[test]
    fn log_pmf_is_log_of_pmf(prior in any_prior(), k in 1u64..60) {
        if prior.in_support(k) {
            let p = prior.pmf(k).unwrap();
            let lp = prior.log_pmf(k).unwrap();
            prop_assert!((lp.exp() - p).abs() <= 1e-14 + 1e-12 * p);
        }
    }

    #[test]
    fn finite_support_sums_to_one(alpha in 0.3f64..6.0, beta in 0.3f64..6.0, max_k in 1u64..60) {
        let total: f64 = (1..=max_k).map(|k| finite_support_pmf(alpha, beta, max_k, k).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn spec_strings_round_trip(prior in any_prior()) {
        let text = prior.spec().to_string();
        let back: KPriorSpec = text.parse().unwrap();
        prop_assert_eq!(&back, prior.spec());
    }
}

#[test]
fn default_prior_is_one_over_k_k_plus_one() {
    let prior = KPrior::loss_based_default();
    let mut partial = 0.0;
    for k in 1..=10_000u64 {
        let p = prior.pmf(k).unwrap();
        let kf = k as f64;
        assert!((p - 1.0 / (kf * (kf + 1.0))).abs() < 1e-12);
        partial += p;
        assert!((partial - kf / (kf + 1.0)).abs() < 1e-12);
    }
}

#[test]
fn compositional_draws_fit_the_pmf() {
    let prior = KPrior::loss_based(2.0, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draws = 1_000_000;
    let mut counts = [0u64; 21];
    for _ in 0..draws {
        let k = prior.sample(&mut rng) as usize;
        counts[k.min(21) - 1] += 1;
    }
    let mut chi2 = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let p = if i < 20 {
            prior.pmf(i as u64 + 1).unwrap()
        } else {
            prior.tail_mass(20)
        };
        let expected = p * draws as f64;
        chi2 += (c as f64 - expected).powi(2) / expected;
    }
    let p_value = 1.0 - ChiSquared::new(20.0).unwrap().cdf(chi2);
    assert!(p_value > 1e-3, "chi-square {chi2}, p = {p_value}");
}

#[test]
fn moments_match_monte_carlo() {
    let (alpha, beta) = (4.0, 2.0);
    let prior = KPrior::loss_based(alpha, beta).unwrap();
    let m = prior_moments(&prior).unwrap();
    let (am, av) = (m.mean.unwrap(), m.variance.unwrap());
    let n = 1_000_000;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mean = (0..n).map(|_| prior.sample(&mut rng) as f64).sum::<f64>() / n as f64;
    assert!((mean - am).abs() < 0.01 * am, "mean {mean} vs {am}");

    // k has no fourth moment at alpha = 4, so the variance is estimated
    // from the rate draws with the geometric stage averaged out:
    // E[k | q] = 1/q and E[k^2 | q] = (2 - q)/q^2.
    let rate = Beta::new(alpha, beta).unwrap();
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let q = rate.sample(&mut rng);
        s1 += 1.0 / q;
        s2 += (2.0 - q) / (q * q);
    }
    let (m1, m2) = (s1 / n as f64, s2 / n as f64);
    let var = m2 - m1 * m1;
    assert!((m1 - am).abs() < 0.01 * am, "conditional mean {m1} vs {am}");
    assert!((var - av).abs() < 0.01 * av, "variance {var} vs {av}");
}

#[test]
fn elicitation_inverts_the_mean() {
    for alpha in [1.1, 1.5, 2.0, 3.0, 7.5] {
        for target in [1.01, 1.5, 2.0, 4.0, 12.0] {
            let beta = elicit_beta(target, alpha).unwrap();
            let mean = KPrior::loss_based(alpha, beta).unwrap().moments().unwrap().mean.unwrap();
            assert!((mean - target).abs() < 1e-12 * target, "alpha {alpha}, target {target}");
        }
    }
    assert!(elicit_beta(2.0, 1.0).is_err());
    assert!(elicit_beta(1.0, 2.0).is_err());
}

#[test]
fn finite_support_converges_to_infinite() {
    let (alpha, beta) = (1.5, 2.0);
    let inf = KPrior::loss_based(alpha, beta).unwrap();
    let mut prev = f64::INFINITY;
    for max_k in [20u64, 200, 2_000, 20_000] {
        let gap = (1..=10u64)
            .map(|k| (finite_support_pmf(alpha, beta, max_k, k).unwrap() - inf.pmf(k).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(gap < prev, "K = {max_k}: {gap} vs {prev}");
        prev = gap;
    }
    assert!(prev < 1e-3);
}

#[test]
fn moments_that_do_not_exist_are_reported() {
    let m = KPrior::loss_based_default().moments().unwrap();
    assert_eq!(m.mean, None);
    assert_eq!(m.variance, None);
    let m = KPrior::loss_based(1.5, 1.0).unwrap().moments().unwrap();
    assert!(m.mean.is_some() && m.variance.is_none());
    let m = KPrior::loss_based(3.0, 1.0).unwrap().moments().unwrap();
    assert!((m.mean.unwrap() - 1.5).abs() < 1e-12);
    assert!((m.variance.unwrap() - 2.25).abs() < 1e-12);
}
