//! Exact enumeration for small series, chain summaries and sensitivity sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::log_sum_exp;
use crate::models::SegmentModel;
use crate::priors::{KPrior, SegPrior};
use crate::recursions::{compute_recursions, sample_changepoints, DurationPrior, RecursionOptions};
use crate::sampler::{log_collapsed_posterior, ChainOutput};
use crate::series::{Segmentation, SufficientStats};

/// Largest number of segmentations the oracle will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone)]
pub struct ExactPosterior {
    pub n: usize,
    /// Every segmentation with `k ≤ k̄` and its posterior probability.
    pub segmentations: Vec<(Segmentation, f64)>,
    /// `Pr(k | y)` for `k = 0..=k̄`.
    pub k_dist: Vec<f64>,
    /// `Pr(changepoint at t | y)` for `t = 1..n−1`, stored at index `t − 1`.
    pub pos_prob: Vec<f64>,
    /// Log normalising constant of the unnormalised collapsed posterior.
    pub log_normalizer: f64,
}

impl ExactPosterior {
    /// Probability of a segmentation given by its changepoints, zero if absent.
    pub fn prob(&self, taus: &[usize]) -> f64 {
        self.segmentations
            .binary_search_by(|(s, _)| s.taus().cmp(taus))
            .map(|i| self.segmentations[i].1)
            .unwrap_or(0.0)
    }
}

/// Number of segmentations of `n` points with at most `kmax` changepoints,
/// saturating at `u128::MAX`.
pub fn segmentation_count(n: usize, kmax: usize) -> u128 {
    let m = n as u128 - 1;
    let mut total = 0u128;
    let mut c = 1u128;
    for k in 0..=kmax.min(n - 1) as u128 {
        total = total.saturating_add(c);
        // C(m, k+1) = (c / g) · ((m − k) / ((k + 1) / g)) with g = gcd(c, k + 1)
        let g = gcd(c, k + 1);
        match (c / g).checked_mul((m - k) / ((k + 1) / g)) {
            Some(x) => c = x,
            None => return u128::MAX,
        }
    }
    total
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Visits every `k`-subset of `1..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let m = n - 1;
    let mut idx: Vec<usize> = (1..=k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < m - (k - 1 - i) {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Normalised collapsed posterior over every segmentation with at most
/// `kmax` changepoints.
pub fn enumerate_exact_posterior<M: SegmentModel>(
    stats: &SufficientStats,
    model: &M,
    seg_prior: &SegPrior,
    k_prior: &KPrior,
    kmax: usize,
) -> Result<ExactPosterior> {
    let n = stats.n();
    let kmax = kmax.min(n - 1);
    let count = segmentation_count(n, kmax);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut entries: Vec<(Segmentation, f64)> = Vec::with_capacity(count as usize);
    for k in 0..=kmax {
        let mut failure = None;
        for_each_combination(n, k, |taus| {
            let seg = Segmentation::from_sorted_unchecked(taus.to_vec(), n);
            match log_collapsed_posterior(&seg, seg_prior, k_prior, model, stats) {
                Ok(lp) => entries.push((seg, lp)),
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    let logs: Vec<f64> = entries.iter().map(|(_, l)| *l).collect();
    let log_normalizer = log_sum_exp(&logs);
    if !log_normalizer.is_finite() {
        return Err(Error::Numerical("every segmentation has zero posterior mass".into()));
    }
    let mut k_dist = vec![0.0; kmax + 1];
    let mut pos_prob = vec![0.0; n - 1];
    for (seg, l) in entries.iter_mut() {
        *l = (*l - log_normalizer).exp();
        k_dist[seg.k()] += *l;
        for &t in seg.taus() {
            pos_prob[t - 1] += *l;
        }
    }
    entries.sort_by(|a, b| a.0.taus().cmp(b.0.taus()));
    Ok(ExactPosterior {
        n,
        segmentations: entries,
        k_dist,
        pos_prob,
        log_normalizer,
    })
}

/// `½ Σ |p_i − q_i|`, treating missing entries of the shorter vector as zero.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    (0..len)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}

/// Total variation between an empirical distribution over segmentations and
/// the exact posterior.
pub fn total_variation_segmentations<'a>(exact: &ExactPosterior, draws: impl IntoIterator<Item = &'a [usize]>) -> f64 {
    let mut counts = vec![0u64; exact.segmentations.len()];
    let mut outside = 0u64;
    let mut total = 0u64;
    for taus in draws {
        total += 1;
        match exact.segmentations.binary_search_by(|(s, _)| s.taus().cmp(taus)) {
            Ok(i) => counts[i] += 1,
            Err(_) => outside += 1,
        }
    }
    let total = total as f64;
    let inside: f64 = exact
        .segmentations
        .iter()
        .zip(&counts)
        .map(|((_, p), c)| (*c as f64 / total - p).abs())
        .sum();
    (inside + outside as f64 / total) / 2.0
}

/// Most probable `k`; ties go to the smaller `k` and set the flag.
pub fn modal_k(k_dist: &[f64]) -> Result<(usize, bool)> {
    if k_dist.is_empty() {
        return Err(Error::Empty("k distribution"));
    }
    let best = k_dist.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut modes = k_dist.iter().enumerate().filter(|(_, &p)| p == best).map(|(k, _)| k);
    let first = modes.next().expect("nonempty");
    Ok((first, modes.next().is_some()))
}

/// Biased sample autocorrelation at lags `0..=max_lag`. A constant series
/// has autocorrelation 1 at every lag.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let m = x.len();
    let mean = x.iter().sum::<f64>() / m as f64;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum::<f64>() / m as f64;
    let max_lag = max_lag.min(m.saturating_sub(1));
    if c0 <= 0.0 {
        return vec![1.0; max_lag + 1];
    }
    (0..=max_lag)
        .map(|lag| {
            let c: f64 = dev[..m - lag].iter().zip(&dev[lag..]).map(|(a, b)| a * b).sum::<f64>() / m as f64;
            c / c0
        })
        .collect()
}

/// `1 + 2 Σ acf[lag]` over lags before the first one with `acf < 2/√M`.
/// Returns the estimate and whether the window ran out before that lag.
pub fn integrated_autocorrelation_time(acf: &[f64], samples: usize) -> (f64, bool) {
    let threshold = 2.0 / (samples as f64).sqrt();
    let mut iact = 1.0;
    for &a in acf.iter().skip(1) {
        if a < threshold {
            return (iact, false);
        }
        iact += 2.0 * a;
    }
    (iact, true)
}

#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub samples: usize,
    /// `Pr(k)` for `k = 0..=max observed k`.
    pub k_dist: Vec<f64>,
    /// Changepoint frequency at `t = 1..n−1`, stored at index `t − 1`.
    pub pos_prob: Vec<f64>,
    pub mean_k: f64,
    /// Ergodic means of `p` (when recorded) followed by the entries of `γ`.
    pub hyper_means: Vec<(String, f64)>,
    pub acf: Vec<f64>,
    pub iact: f64,
    pub iact_capped: bool,
}

/// Default maximum ACF lag: `min(200, M/5)`.
pub fn default_max_lag(samples: usize) -> usize {
    200.min(samples / 5)
}

pub fn summarize(chain: &ChainOutput, max_lag: Option<usize>) -> Result<PosteriorSummary> {
    let records = &chain.records;
    if records.is_empty() {
        return Err(Error::Empty("chain"));
    }
    let m = records.len();
    let n = chain.n;
    let max_k = records.iter().map(|r| r.k()).max().unwrap_or(0);
    let mut k_counts = vec![0u64; max_k + 1];
    let mut pos_counts = vec![0u64; n.saturating_sub(1)];
    for r in records {
        k_counts[r.k()] += 1;
        for &t in &r.taus {
            pos_counts[t - 1] += 1;
        }
    }
    let k_dist: Vec<f64> = k_counts.iter().map(|&c| c as f64 / m as f64).collect();
    let pos_prob: Vec<f64> = pos_counts.iter().map(|&c| c as f64 / m as f64).collect();
    let ks: Vec<f64> = records.iter().map(|r| r.k() as f64).collect();
    let mean_k = ks.iter().sum::<f64>() / m as f64;

    let mut hyper_means = Vec::new();
    if records.iter().all(|r| r.p.is_some()) {
        let mean = records.iter().filter_map(|r| r.p).sum::<f64>() / m as f64;
        hyper_means.push(("p".to_string(), mean));
    }
    for (i, name) in chain.gamma_names.iter().enumerate() {
        let mean = records.iter().map(|r| r.gamma[i]).sum::<f64>() / m as f64;
        hyper_means.push((name.clone(), mean));
    }

    let acf = autocorrelation(&ks, max_lag.unwrap_or_else(|| default_max_lag(m)));
    let (iact, iact_capped) = integrated_autocorrelation_time(&acf, m);
    Ok(PosteriorSummary {
        samples: m,
        k_dist,
        pos_prob,
        mean_k,
        hyper_means,
        acf,
        iact,
        iact_capped,
    })
}

/// Quantity varied by a sensitivity sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepParam {
    /// The success probability of the duration distribution(s).
    P,
    /// A named model parameter, e.g. `sigma`.
    Model(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub modal_k: Vec<usize>,
    pub ties: Vec<bool>,
    pub k_dists: Vec<Vec<f64>>,
}

/// Recursions plus `draws` exact samples at each grid value, recording the
/// modal `k`. Grid points run concurrently; point `i` samples from ChaCha8
/// stream `i` of `seed`, so results do not depend on scheduling.
pub fn sensitivity_sweep<M: SegmentModel>(
    stats: &SufficientStats,
    model: &M,
    prior: DurationPrior,
    param: &SweepParam,
    grid: &[f64],
    draws: usize,
    seed: u64,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    let mut setups = Vec::with_capacity(grid.len());
    for &value in grid {
        let mut m = model.clone();
        let mut pr = prior;
        match param {
            SweepParam::P => {
                pr.duration = pr.duration.with_p(value)?;
                pr.first = pr.first.map(|f| f.with_p(value)).transpose()?;
            }
            SweepParam::Model(name) => m.set_param(name, value)?,
        }
        setups.push((m, pr));
    }
    let run = |i: usize, m: &M, pr: DurationPrior| -> Result<Vec<f64>> {
        let table = compute_recursions(stats, m, pr, RecursionOptions::default())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        Ok(sample_changepoints(&table, stats, m, draws, &mut rng)?.k_distribution())
    };
    let results: Vec<Result<Vec<f64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = setups
            .iter()
            .enumerate()
            .map(|(i, (m, pr))| scope.spawn(move || run(i, m, *pr)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut out = SweepResult {
        grid: grid.to_vec(),
        modal_k: Vec::with_capacity(grid.len()),
        ties: Vec::with_capacity(grid.len()),
        k_dists: Vec::with_capacity(grid.len()),
    };
    for r in results {
        let k_dist = r?;
        let (k, tie) = modal_k(&k_dist)?;
        out.modal_k.push(k);
        out.ties.push(tie);
        out.k_dists.push(k_dist);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GaussianCommonVar, GaussianCommonVarParams, PoissonGamma, PoissonGammaParams};
    use crate::priors::PointProcess;
    use crate::sampler::ChainRecord;
    use crate::series::{build_stats, DataKind, TimeSeries};
    use rand::Rng;

    fn chain_of(n: usize, taus: Vec<Vec<usize>>) -> ChainOutput {
        ChainOutput {
            n,
            seed: 0,
            gamma_names: vec!["lambda".into()],
            records: taus
                .into_iter()
                .enumerate()
                .map(|(i, t)| ChainRecord {
                    sweep: i,
                    taus: t,
                    p: Some(0.1),
                    gamma: vec![i as f64],
                    log_post: 0.0,
                })
                .collect(),
            move_stats: Default::default(),
        }
    }

    #[test]
    fn enumeration_sizes_and_normalisation() {
        let st = build_stats(&TimeSeries::new(vec![1.0, 4.0, 0.0], DataKind::Counts).unwrap());
        let model = PoissonGamma::new(PoissonGammaParams::new(1.0, 1.0).unwrap(), &st).unwrap();
        let exact =
            enumerate_exact_posterior(&st, &model, &SegPrior::geometric(0.5).unwrap(), &KPrior::uniform(2), 2).unwrap();
        assert_eq!(exact.segmentations.len(), 4);
        let total: f64 = exact.segmentations.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(segmentation_count(11, 10), 1024);
        assert_eq!(segmentation_count(11, 2), 1 + 10 + 45);
        assert_eq!(segmentation_count(5793, 30), u128::MAX);
        assert_eq!(segmentation_count(129, 128), u128::MAX);
        assert_eq!(segmentation_count(128, 127), 1u128 << 127);
        assert!((exact.k_dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mean_k: f64 = exact.k_dist.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((exact.pos_prob.iter().sum::<f64>() - mean_k).abs() < 1e-12);
    }

    #[test]
    fn enumeration_respects_kmax_and_limit() {
        let st = build_stats(&TimeSeries::new(vec![1.0; 9], DataKind::Counts).unwrap());
        let model = PoissonGamma::new(PoissonGammaParams::new(1.0, 1.0).unwrap(), &st).unwrap();
        let exact = enumerate_exact_posterior(&st, &model, &SegPrior::EvenOrderStats, &KPrior::uniform(2), 2).unwrap();
        assert_eq!(exact.segmentations.len(), 1 + 8 + 28);
        let big = build_stats(&TimeSeries::new(vec![1.0; 40], DataKind::Counts).unwrap());
        let model = PoissonGamma::new(PoissonGammaParams::new(1.0, 1.0).unwrap(), &big).unwrap();
        assert!(matches!(
            enumerate_exact_posterior(&big, &model, &SegPrior::EvenOrderStats, &KPrior::uniform(39), 39),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn flat_data_with_strong_prior_has_no_changepoints() {
        let st = build_stats(&TimeSeries::new(vec![2.0; 8], DataKind::Counts).unwrap());
        let model = PoissonGamma::new(PoissonGammaParams::new(1.0, 1.0).unwrap(), &st).unwrap();
        let exact = enumerate_exact_posterior(&st, &model, &SegPrior::geometric(1e-4).unwrap(), &KPrior::uniform(7), 7)
            .unwrap();
        assert!(exact.k_dist[0] > 0.99);
        assert!(exact.prob(&[]) > 0.99);
    }

    #[test]
    fn combination_order() {
        let mut seen = Vec::new();
        for_each_combination(5, 2, |c| seen.push(c.to_vec()));
        assert_eq!(
            seen,
            vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]
        );
        let mut empty = Vec::new();
        for_each_combination(5, 0, |c| empty.push(c.to_vec()));
        assert_eq!(empty, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn summary_of_fixed_chain() {
        let chain = chain_of(10, vec![vec![5]; 50]);
        let s = summarize(&chain, None).unwrap();
        let mut expected = vec![0.0; 9];
        expected[4] = 1.0;
        assert_eq!(s.pos_prob, expected);
        assert_eq!(s.k_dist, vec![0.0, 1.0]);
        assert!(s.acf.iter().all(|&a| a == 1.0));
        assert!(s.iact_capped);
        assert_eq!(s.hyper_means[0].0, "p");
        assert!((s.hyper_means[0].1 - 0.1).abs() < 1e-12);
        assert!((s.hyper_means[1].1 - 24.5).abs() < 1e-12);
        assert!(summarize(&chain_of(10, vec![]), None).is_err());
    }

    #[test]
    fn iid_chain_has_unit_iact() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let taus: Vec<Vec<usize>> = (0..100_000)
            .map(|_| (1..20).filter(|_| rng.random_bool(0.2)).collect())
            .collect();
        let s = summarize(&chain_of(20, taus), None).unwrap();
        assert!((s.iact - 1.0).abs() < 0.1, "{}", s.iact);
        assert!(!s.iact_capped);
        assert_eq!(s.acf[0], 1.0);
        assert!((s.pos_prob.iter().sum::<f64>() - s.mean_k).abs() < 1e-9);
    }

    #[test]
    fn modal_ties_go_low() {
        assert_eq!(modal_k(&[0.1, 0.45, 0.45]).unwrap(), (1, true));
        assert_eq!(modal_k(&[0.1, 0.6, 0.3]).unwrap(), (1, false));
        assert!(modal_k(&[]).is_err());
    }

    #[test]
    fn sweep_single_point_and_determinism() {
        let st =
            build_stats(&TimeSeries::new(vec![0.0, 1.0, 0.0, 9.0, 8.0, 10.0, 9.0, 0.0], DataKind::Counts).unwrap());
        let model = PoissonGamma::new(PoissonGammaParams::new(1.0, 1.0).unwrap(), &st).unwrap();
        let prior = DurationPrior::new(PointProcess::geometric(0.1).unwrap());
        let one = sensitivity_sweep(&st, &model, prior, &SweepParam::P, &[0.1], 1000, 3).unwrap();
        assert_eq!(one.modal_k.len(), 1);
        let a = sensitivity_sweep(
            &st,
            &model,
            prior,
            &SweepParam::Model("lambda".into()),
            &[0.5, 1.0, 2.0],
            5000,
            3,
        )
        .unwrap();
        let b = sensitivity_sweep(
            &st,
            &model,
            prior,
            &SweepParam::Model("lambda".into()),
            &[0.5, 1.0, 2.0],
            5000,
            3,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(sensitivity_sweep(&st, &model, prior, &SweepParam::Model("nope".into()), &[1.0], 10, 3).is_err());
        assert!(sensitivity_sweep(&st, &model, prior, &SweepParam::P, &[1.5], 10, 3).is_err());
    }

    #[test]
    fn strong_shift_gives_one_changepoint_for_every_p() {
        let mut y = vec![0.1, -0.2, 0.0, 0.3, -0.1, 0.2, -0.3, 0.1];
        y.extend([10.2, 9.9, 10.1, 9.8, 10.0, 10.3, 9.7, 10.1]);
        let st = build_stats(&TimeSeries::new(y, DataKind::Real).unwrap());
        let model = GaussianCommonVar::new(GaussianCommonVarParams::new(0.5, 5.0, 10.0).unwrap(), &st).unwrap();
        let grid = [0.01, 0.05, 0.1, 0.2, 0.3];
        let prior = DurationPrior::new(PointProcess::geometric(0.1).unwrap());
        let sweep = sensitivity_sweep(&st, &model, prior, &SweepParam::P, &grid, 20_000, 5).unwrap();
        assert_eq!(sweep.modal_k, vec![1; grid.len()]);
        for &p in &grid {
            let exact =
                enumerate_exact_posterior(&st, &model, &SegPrior::geometric(p).unwrap(), &KPrior::uniform(15), 15)
                    .unwrap();
            assert_eq!(modal_k(&exact.k_dist).unwrap(), (1, false), "p = {p}");
            assert!(exact.prob(&[8]) > 0.5);
        }
    }

    #[test]
    fn tv_helpers() {
        assert_eq!(total_variation(&[0.5, 0.5], &[1.0]), 0.5);
        let st = build_stats(&TimeSeries::new(vec![1.0, 4.0, 0.0], DataKind::Counts).unwrap());
        let model = PoissonGamma::new(PoissonGammaParams::new(1.0, 1.0).unwrap(), &st).unwrap();
        let exact =
            enumerate_exact_posterior(&st, &model, &SegPrior::geometric(0.5).unwrap(), &KPrior::uniform(2), 2).unwrap();
        let draws: Vec<&[usize]> = vec![&[1], &[1]];
        let expected = (1.0 - exact.prob(&[1]) + (1.0 - exact.prob(&[1]))) / 2.0;
        assert!((total_variation_segmentations(&exact, draws) - expected).abs() < 1e-12);
    }
}
