use mfm_core::mfm::{run_auxiliary_chain, run_chain, run_collapsed_chain, tv_distance, ModelChoice, SamplerConfig};
use mfm_core::oracle::exact_posterior;
use mfm_core::{ConjugateNormalGamma, ConstantLikelihood, Dataset, KPrior, RichardsonGreenModel};

const K_MAX: u64 = 15;

fn config(retained: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        iterations: retained + 2_000,
        burn_in: 2_000,
        thin: 1,
        seed,
        k_report_max: K_MAX,
        vn_tol: 1e-13,
        record_trace: false,
        ..SamplerConfig::desk()
    }
}

fn priors() -> Vec<KPrior> {
    vec![
        KPrior::loss_based_default(),
        KPrior::uniform(50).unwrap(),
        KPrior::truncated_poisson(1.0).unwrap(),
        KPrior::loss_based(3.0, 1.0).unwrap(),
        KPrior::loss_based_finite(1.0, 1.0, 20).unwrap(),
        KPrior::geometric(0.4).unwrap(),
    ]
}

#[test]
fn collapsed_chain_matches_enumeration() {
    let data = Dataset::from_column(&[-0.9, 0.3, 0.5, 2.8, 3.9, 4.2, -1.6]).unwrap();
    let model = ConjugateNormalGamma::unit(1);
    for (i, prior) in priors().into_iter().enumerate() {
        let exact = exact_posterior(&data, &model, &prior, 1.0).unwrap();
        let out = run_collapsed_chain(&data, &model, &prior, &config(50_000, 40 + i as u64)).unwrap();
        let (k_exact, _) = exact.k_pmf(K_MAX);
        let tv_k = tv_distance(&out.posterior.pmf, &k_exact);
        let tv_t = tv_distance(&out.posterior.t_pmf, &exact.t_pmf);
        assert!(tv_k < 0.02 && tv_t < 0.02, "{}: TV(k) {tv_k}, TV(t) {tv_t}", prior.spec());
    }
}

#[test]
fn collapsed_chain_matches_enumeration_in_two_dimensions() {
    let rows = vec![
        vec![0.1, -0.2],
        vec![0.4, 0.3],
        vec![2.5, 2.9],
        vec![3.1, 2.2],
        vec![-0.5, 0.2],
    ];
    let data = Dataset::from_rows(&rows).unwrap();
    let model = ConjugateNormalGamma::unit(2);
    let prior = KPrior::loss_based_default();
    for gamma in [0.5, 2.0] {
        let exact = exact_posterior(&data, &model, &prior, gamma).unwrap();
        let cfg = SamplerConfig {
            gamma,
            ..config(50_000, 9)
        };
        let out = run_collapsed_chain(&data, &model, &prior, &cfg).unwrap();
        let tv_t = tv_distance(&out.posterior.t_pmf, &exact.t_pmf);
        assert!(tv_t < 0.02, "gamma {gamma}: TV(t) {tv_t}");
    }
}

#[test]
fn constant_likelihood_recovers_the_prior() {
    let data = Dataset::from_column(&[0.0, 1.0, 2.0, 3.0]).unwrap();
    for prior in [KPrior::loss_based_default(), KPrior::truncated_poisson(1.0).unwrap()] {
        let out = run_collapsed_chain(&data, &ConstantLikelihood { dim: 1 }, &prior, &config(60_000, 3)).unwrap();
        let want: Vec<f64> = (1..=K_MAX).map(|k| prior.pmf(k).unwrap()).collect();
        let (empirical, _) = out.posterior.empirical_pmf();
        assert!(tv_distance(&out.posterior.pmf, &want) < 0.01, "{}", prior.spec());
        assert!(tv_distance(&empirical, &want) < 0.01, "{} draws", prior.spec());
    }
}

#[test]
fn every_draw_has_at_least_as_many_components_as_clusters() {
    let data = Dataset::from_column(&[0.0, 0.2, 5.0, 5.1, 9.8, 10.4, 3.3]).unwrap();
    let model = ConjugateNormalGamma::new(1, 5.0, 0.05, 2.0, 0.5).unwrap();
    let out = run_collapsed_chain(&data, &model, &KPrior::uniform(8).unwrap(), &config(5_000, 1)).unwrap();
    assert!(out.posterior.t_draws.iter().zip(&out.posterior.k_draws).all(|(&t, &k)| k >= t as u64));
    let rg = RichardsonGreenModel::from_data(&data.column(0)).unwrap();
    let out = run_auxiliary_chain(&data, &rg, &KPrior::loss_based_default(), &config(5_000, 1)).unwrap();
    assert!(out.posterior.t_draws.iter().zip(&out.posterior.k_draws).all(|(&t, &k)| k >= t as u64));
}

#[test]
fn same_seed_same_draws() {
    let data = Dataset::from_column(&[0.3, 1.1, -2.0, 4.4, 4.0, 0.0]).unwrap();
    let prior = KPrior::loss_based_default();
    let models = [
        ModelChoice::Conjugate(ConjugateNormalGamma::unit(1)),
        ModelChoice::RichardsonGreen(RichardsonGreenModel::from_data(&data.column(0)).unwrap()),
    ];
    for model in models {
        let cfg = SamplerConfig {
            record_trace: true,
            ..config(2_000, 77)
        };
        let a = run_chain(&data, &model, &prior, &cfg).unwrap();
        let b = run_chain(&data, &model, &prior, &cfg).unwrap();
        assert_eq!(a, b);
        let c = run_chain(&data, &model, &prior, &SamplerConfig { seed: 78, ..cfg }).unwrap();
        assert_ne!(a.posterior.t_draws, c.posterior.t_draws);
    }
}

#[test]
fn incremental_statistics_stay_exact() {
    let data = Dataset::from_column(&(0..40).map(|i| (i as f64 * 0.37).sin() * 5.0 + 1e4).collect::<Vec<_>>()).unwrap();
    let cfg = SamplerConfig {
        iterations: 3_000,
        burn_in: 1_000,
        stats_check_interval: 1_000,
        ..SamplerConfig::desk()
    };
    let model = ConjugateNormalGamma::new(1, 1e4, 0.01, 2.0, 1.0).unwrap();
    run_collapsed_chain(&data, &model, &KPrior::loss_based_default(), &cfg).unwrap();
    let rg = RichardsonGreenModel::from_data(&data.column(0)).unwrap();
    run_auxiliary_chain(&data, &rg, &KPrior::loss_based_default(), &cfg).unwrap();
}

#[test]
fn observation_order_does_not_matter() {
    let xs = [-1.2, 0.4, 0.1, 3.3, 2.9, 3.6, 7.7, 0.9];
    let order = [5, 2, 7, 0, 3, 6, 1, 4];
    let data = Dataset::from_column(&xs).unwrap();
    let permuted = data.permuted(&order);
    let model = ConjugateNormalGamma::unit(1);
    let prior = KPrior::loss_based_default();
    let a = run_collapsed_chain(&data, &model, &prior, &config(100_000, 5)).unwrap();
    let b = run_collapsed_chain(&permuted, &model, &prior, &config(100_000, 6)).unwrap();
    assert!(tv_distance(&a.posterior.pmf, &b.posterior.pmf) < 0.01);
}

// P(two clusters | x = {0, 3}) under the data-dependent Richardson-Green
// hyperparameters and the default loss-based prior, from numerical
// integration over the shared rate, the precisions and the means.
const TWO_POINT_SPLIT: f64 = 0.939_205;

#[test]
fn instantiated_sampler_matches_two_point_integral() {
    let xs = [0.0, 3.0];
    let data = Dataset::from_column(&xs).unwrap();
    let model = RichardsonGreenModel::from_data(&xs).unwrap();
    let prior = KPrior::loss_based_default();
    for (moves, seed) in [(0, 21), (1, 22)] {
        let cfg = SamplerConfig {
            split_merge_per_iteration: moves,
            ..config(400_000, seed)
        };
        let out = run_auxiliary_chain(&data, &model, &prior, &cfg).unwrap();
        let p = out.posterior.t_pmf[1];
        assert!((p - TWO_POINT_SPLIT).abs() < 0.006, "{moves} split-merge moves: {p}");
    }
}
