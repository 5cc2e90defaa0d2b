//! Sampler output against exact posteriors on series small enough to enumerate.

use cpseg_core::analysis::{enumerate_exact_posterior, total_variation, total_variation_segmentations, ExactPosterior};
use cpseg_core::math::log_sum_exp;
use cpseg_core::models::log_marginal_poisson;
use cpseg_core::sampler::{run_chain, ChainOutput, GibbsSchedule, Sampler, SamplerConfig};
use cpseg_core::{
    build_stats, BernoulliBeta, BernoulliBetaParams, DataKind, GaussianCommonVar, GaussianCommonVarParams, KPrior,
    PoissonGamma, PoissonGammaParams, PoissonHyperprior, SegPrior, SegmentModel, Segmentation, SufficientStats,
    TimeSeries,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config<H: Default>(kmax: usize, sweeps: usize, seed: u64) -> SamplerConfig<H> {
    let mut c = SamplerConfig::new(kmax);
    c.sweeps = sweeps;
    c.burn_in = 1000;
    c.thin = 1;
    c.seed = seed;
    c
}

fn chain_tv(exact: &ExactPosterior, chain: &ChainOutput) -> f64 {
    total_variation_segmentations(exact, chain.records.iter().map(|r| r.taus.as_slice()))
}

fn check_all_priors<M: SegmentModel>(st: &SufficientStats, model: M, label: &str) {
    let n = st.n();
    let priors = [SegPrior::geometric(0.15).unwrap(), SegPrior::EvenOrderStats];
    for (i, prior) in priors.into_iter().enumerate() {
        for (j, gibbs) in [
            GibbsSchedule::InverseSqrt,
            GibbsSchedule::Constant(0.0),
            GibbsSchedule::Constant(1.0),
        ]
        .into_iter()
        .enumerate()
        {
            let k_prior = KPrior::uniform(n - 1);
            let exact = enumerate_exact_posterior(st, &model, &prior, &k_prior, n - 1).unwrap();
            let mut cfg = config(n - 1, 1_000_000, 10 * i as u64 + j as u64);
            cfg.gibbs = gibbs;
            cfg.move_window = 2;
            let chain = run_chain(st, model.clone(), prior, k_prior, cfg).unwrap();
            let tv = chain_tv(&exact, &chain);
            assert!(tv < 0.02, "{label} {prior:?} {gibbs:?}: TV {tv}");
        }
    }
}

#[test]
fn poisson_chain_matches_enumeration() {
    let st = build_stats(&TimeSeries::new(vec![1.0, 0.0, 2.0, 7.0, 9.0, 6.0, 1.0, 0.0], DataKind::Counts).unwrap());
    let model = PoissonGamma::new(PoissonGammaParams::new(2.0, 0.5).unwrap(), &st).unwrap();
    check_all_priors(&st, model, "poisson");
}

#[test]
fn bernoulli_chain_matches_enumeration() {
    let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
    let st = build_stats(&TimeSeries::new(y.to_vec(), DataKind::Binary).unwrap());
    let model = BernoulliBeta::new(BernoulliBetaParams::new(0.5, 0.5).unwrap(), &st).unwrap();
    check_all_priors(&st, model, "bernoulli");
}

#[test]
fn gaussian_chain_matches_enumeration() {
    let y = [0.1, -0.3, 0.2, 3.1, 2.8, 3.3, -0.1, 0.4];
    let st = build_stats(&TimeSeries::new(y.to_vec(), DataKind::Real).unwrap());
    let model = GaussianCommonVar::new(GaussianCommonVarParams::new(0.5, 1.0, 3.0).unwrap(), &st).unwrap();
    check_all_priors(&st, model, "gaussian");
}

#[test]
fn p_updates_integrate_p_out() {
    // with p ~ Beta(1, 1) the marginal prior of z is B(k + 1, n − k)
    let st = build_stats(&TimeSeries::new(vec![1.0, 0.0, 2.0, 7.0, 9.0, 6.0, 1.0, 0.0], DataKind::Counts).unwrap());
    let n = st.n();
    let model = PoissonGamma::new(PoissonGammaParams::new(2.0, 0.5).unwrap(), &st).unwrap();
    let weights: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b) = ((k + 1) as f64, (n - k) as f64);
            statrs::function::beta::ln_beta(a, b).exp()
        })
        .collect();
    // geometric p = 1/2 is flat over z, so the k prior carries the whole weight
    let k_prior = KPrior::custom(&weights).unwrap();
    let exact = enumerate_exact_posterior(&st, &model, &SegPrior::geometric(0.5).unwrap(), &k_prior, n - 1).unwrap();
    let mut cfg = config(n - 1, 300_000, 5);
    cfg.update_p = true;
    let chain = run_chain(
        &st,
        model,
        SegPrior::geometric(0.3).unwrap(),
        KPrior::uniform(n - 1),
        cfg,
    )
    .unwrap();
    let tv = chain_tv(&exact, &chain);
    assert!(tv < 0.02, "TV {tv}");
}

#[test]
fn lambda_updates_integrate_lambda_out() {
    let y = vec![1.0, 0.0, 2.0, 7.0, 9.0, 6.0, 1.0];
    let st = build_stats(&TimeSeries::new(y, DataKind::Counts).unwrap());
    let n = st.n();
    let rho = 2.0;
    let (shape, rate): (f64, f64) = (2.0, 2.0);
    let prior = SegPrior::geometric(0.2).unwrap();
    // ∫ Π_j m_j(λ) Gamma(λ | shape, rate) dλ per segmentation, over v = ln λ
    let log_integrated = |seg: &Segmentation| {
        let h = |v: f64| {
            let params = PoissonGammaParams::new(rho, v.exp()).unwrap();
            let lik: f64 = seg
                .segments()
                .map(|(s, t)| log_marginal_poisson(&st, s, t, &params).unwrap())
                .sum();
            lik + shape * rate.ln() - statrs::function::gamma::ln_gamma(shape) + shape * v - rate * v.exp()
        };
        let peak = (-120..=120)
            .map(|i| h(f64::from(i) / 10.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = (-24..24)
            .map(|i| {
                let a = f64::from(i) / 2.0;
                quadrature::integrate(|v| (h(v) - peak).exp(), a, a + 0.5, 1e-14).integral
            })
            .sum();
        peak + total.ln() + prior.log_prob(seg)
    };
    let segs: Vec<Segmentation> = (0u32..1 << (n - 1))
        .map(|mask| Segmentation::new((1..n).filter(|t| mask & (1 << (t - 1)) != 0).collect(), n).unwrap())
        .collect();
    let logs: Vec<f64> = segs.iter().map(log_integrated).collect();
    let z = log_sum_exp(&logs);
    let mut k_exact = vec![0.0; n];
    for (s, l) in segs.iter().zip(&logs) {
        k_exact[s.k()] += (l - z).exp();
    }

    let model = PoissonGamma::new(PoissonGammaParams::new(rho, 1.0).unwrap(), &st).unwrap();
    let mut cfg = config(n - 1, 400_000, 8);
    cfg.update_gamma = true;
    cfg.hyperprior = PoissonHyperprior {
        lambda_shape: shape,
        lambda_rate: rate,
    };
    let chain = run_chain(&st, model, prior, KPrior::uniform(n - 1), cfg).unwrap();
    let mut k_chain = vec![0.0; n];
    let mut seg_freq = std::collections::HashMap::new();
    for r in &chain.records {
        k_chain[r.k()] += 1.0 / chain.records.len() as f64;
        *seg_freq.entry(r.taus.clone()).or_insert(0.0) += 1.0 / chain.records.len() as f64;
    }
    let seg_tv: f64 = segs
        .iter()
        .zip(&logs)
        .map(|(s, l)| (seg_freq.get(s.taus()).copied().unwrap_or(0.0) - (l - z).exp()).abs())
        .sum::<f64>()
        / 2.0;
    assert!(
        total_variation(&k_exact, &k_chain) < 0.015,
        "k TV {}",
        total_variation(&k_exact, &k_chain)
    );
    assert!(seg_tv < 0.03, "segmentation TV {seg_tv}");
}

#[test]
fn flat_data_keeps_mass_at_zero_changepoints() {
    let y = [3.0, 2.0, 4.0, 3.0, 2.0, 3.0, 4.0, 3.0, 2.0, 3.0];
    let st = build_stats(&TimeSeries::new(y.to_vec(), DataKind::Counts).unwrap());
    let n = st.n();
    let model = PoissonGamma::new(PoissonGammaParams::new(3.0, 1.0).unwrap(), &st).unwrap();
    let prior = SegPrior::geometric(0.05).unwrap();
    let k_prior = KPrior::uniform(n - 1);
    let exact = enumerate_exact_posterior(&st, &model, &prior, &k_prior, n - 1).unwrap();
    assert!(exact.k_dist[0] > 0.7, "{:?}", exact.k_dist);
    let chain = run_chain(&st, model, prior, k_prior, config(n - 1, 200_000, 4)).unwrap();
    let zero = chain.records.iter().filter(|r| r.k() == 0).count() as f64 / chain.records.len() as f64;
    assert!((zero - exact.k_dist[0]).abs() < 0.01, "{zero} vs {}", exact.k_dist[0]);
    let add_rate = chain.move_stats.add.rate().unwrap();
    assert!(add_rate < 0.2, "add acceptance {add_rate}");
}

#[test]
fn moves_alone_preserve_the_fixed_k_posterior() {
    let y = [1.0, 0.0, 2.0, 6.0, 8.0, 7.0, 1.0, 2.0, 0.0, 1.0];
    let st = build_stats(&TimeSeries::new(y.to_vec(), DataKind::Counts).unwrap());
    let n = st.n();
    let model = PoissonGamma::new(PoissonGammaParams::new(1.0, 0.5).unwrap(), &st).unwrap();
    for prior in [SegPrior::geometric(0.2).unwrap(), SegPrior::EvenOrderStats] {
        let exact = enumerate_exact_posterior(&st, &model, &prior, &KPrior::uniform(n - 1), n - 1).unwrap();
        let with_k: Vec<(Vec<usize>, f64)> = exact
            .segmentations
            .iter()
            .filter(|(s, _)| s.k() == 2)
            .map(|(s, p)| (s.taus().to_vec(), *p))
            .collect();
        let total: f64 = with_k.iter().map(|(_, p)| p).sum();
        for gibbs in [GibbsSchedule::Constant(0.0), GibbsSchedule::InverseSqrt] {
            let mut cfg = config(n - 1, 0, 0);
            cfg.gibbs = gibbs;
            cfg.move_window = 2;
            let mut sampler = Sampler::new(&st, model.clone(), prior, KPrior::uniform(n - 1), cfg).unwrap();
            sampler
                .set_segmentation(Segmentation::new(vec![3, 6], n).unwrap())
                .unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            let mut counts = std::collections::HashMap::new();
            let steps = 1_000_000;
            for _ in 0..steps {
                sampler.move_step(&mut rng).unwrap();
                *counts.entry(sampler.state().seg.taus().to_vec()).or_insert(0usize) += 1;
            }
            assert!(counts.keys().all(|t| t.len() == 2));
            let tv = 0.5
                * with_k
                    .iter()
                    .map(|(t, p)| (p / total - *counts.get(t).unwrap_or(&0) as f64 / steps as f64).abs())
                    .sum::<f64>();
            assert!(tv < 0.02, "{prior:?} {gibbs:?}: TV {tv}");
        }
    }
}
