//! Backward filtering recursions for a fixed `γ`, exact forward sampling of
//! changepoints from them, and an independence-proposal sampler that reuses
//! a pool of such draws.
//!
//! With `R(t) = Pr(y_{t:n} | changepoint at t − 1)` and `R(n + 1) = 1`,
//!
//! ```text
//! R(t) = Σ_{s=t}^{n−1} π(y_{t:s}) R(s+1) g(s−t+1) + π(y_{t:n}) (1 − G(n−t))
//! ```
//!
//! where `g`, `G` are the pmf and cdf of the distance between successive
//! changepoints. The first segment may use its own distribution `g_0`.
//! Under geometric durations this reproduces the geometric segmentation
//! prior `p^k (1 − p)^{n−1−k}` exactly.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::LogSumExp;
use crate::models::SegmentModel;
use crate::priors::{KPrior, PointProcess, SegPrior};
use crate::sampler::{ChainOutput, Sampler, SamplerConfig};
use crate::series::{Segmentation, SufficientStats};

/// Tolerance on the total mass of each next-changepoint distribution.
pub const MASS_TOLERANCE: f64 = 1e-8;

/// Duration distributions: `duration` between changepoints and `first` for
/// the distance from the start of the series to the first changepoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationPrior {
    pub duration: PointProcess,
    pub first: Option<PointProcess>,
}

impl DurationPrior {
    pub fn new(duration: PointProcess) -> Self {
        Self { duration, first: None }
    }

    pub fn with_first(duration: PointProcess, first: PointProcess) -> Self {
        Self {
            duration,
            first: Some(first),
        }
    }

    /// Distribution of the gap that starts after changepoint (or origin) `t`.
    fn from(&self, t: usize) -> &PointProcess {
        match (&self.first, t) {
            (Some(first), 0) => first,
            _ => &self.duration,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RecursionOptions {
    /// Drop the rest of the inner sum once the prior tail bound falls below
    /// this fraction of the running total. `None` sums every term.
    pub truncate_below: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RecursionTable {
    n: usize,
    // log_r[t] for t = 1..=n+1; log_r[n+1] = 0
    log_r: Vec<f64>,
    prior: DurationPrior,
    gamma: Vec<f64>,
}

impl RecursionTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `ln R(t)` for `t = 1..=n+1`.
    pub fn log_r(&self, t: usize) -> f64 {
        self.log_r[t]
    }

    /// `ln Pr(y_{1:n})` under the point-process prior.
    pub fn log_evidence(&self) -> f64 {
        self.log_r[1]
    }

    pub fn prior(&self) -> &DurationPrior {
        &self.prior
    }

    /// Model parameter values the table was built with.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }
}

/// Fills `ln R(t)` backwards from `t = n` to 1 in `O(n²)` marginal evaluations.
pub fn compute_recursions<M: SegmentModel>(
    stats: &SufficientStats,
    model: &M,
    prior: DurationPrior,
    options: RecursionOptions,
) -> Result<RecursionTable> {
    if model.kind() != stats.kind() {
        return Err(Error::KindMismatch {
            expected: model.kind(),
            found: stats.kind(),
        });
    }
    let n = stats.n();
    let mut log_r = vec![0.0; n + 2];
    let log_eps = options.truncate_below.map(f64::ln);
    for t in (1..=n).rev() {
        let g = prior.from(t - 1);
        let mut acc = LogSumExp::new();
        let mut largest_data_term = f64::NEG_INFINITY;
        let mut truncated = false;
        for s in t..n {
            let d = s - t + 1;
            let data = model.log_marginal(stats, t, s) + log_r[s + 1];
            acc.add(data + g.log_pmf(d));
            if let Some(log_eps) = log_eps {
                largest_data_term = largest_data_term.max(data);
                if g.log_survival(d) + largest_data_term < log_eps + acc.value() {
                    truncated = true;
                    break;
                }
            }
        }
        if !truncated {
            acc.add(model.log_marginal(stats, t, n) + g.log_survival(n - t));
        }
        let value = acc.value();
        if value.is_nan() {
            return Err(Error::Numerical(format!("recursion value at t = {t} is NaN")));
        }
        log_r[t] = value;
    }
    Ok(RecursionTable {
        n,
        log_r,
        prior,
        gamma: model.param_values(),
    })
}

/// Log probabilities of the next changepoint after `t`, for `τ = t+1..=n−1`
/// followed by the "no further changepoint" entry.
pub fn next_changepoint_log_probs<M: SegmentModel>(
    table: &RecursionTable,
    stats: &SufficientStats,
    model: &M,
    t: usize,
) -> Vec<f64> {
    let n = table.n;
    let g = table.prior.from(t);
    let norm = table.log_r[t + 1];
    let mut out: Vec<f64> = (t + 1..n)
        .map(|tau| model.log_marginal(stats, t + 1, tau) + table.log_r[tau + 1] + g.log_pmf(tau - t) - norm)
        .collect();
    out.push(model.log_marginal(stats, t + 1, n) + g.log_survival(n - t - 1) - norm);
    out
}

/// `N` independent draws from the changepoint posterior at fixed `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionSampleSet {
    n: usize,
    draws: Vec<Segmentation>,
}

impl RecursionSampleSet {
    pub fn new(n: usize, draws: Vec<Segmentation>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::Empty("sample set"));
        }
        if draws.iter().any(|d| d.n() != n) {
            return Err(Error::Config("draws must share the series length".into()));
        }
        Ok(Self { n, draws })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draws(&self) -> &[Segmentation] {
        &self.draws
    }

    /// Frequency of each distinct segmentation.
    pub fn counts(&self) -> BTreeMap<Vec<usize>, u64> {
        let mut map = BTreeMap::new();
        for d in &self.draws {
            *map.entry(d.taus().to_vec()).or_insert(0) += 1;
        }
        map
    }

    /// Empirical distribution of `k` over `0..=n−1`.
    pub fn k_distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; self.n];
        for d in &self.draws {
            dist[d.k()] += 1.0;
        }
        let total = self.draws.len() as f64;
        dist.iter_mut().for_each(|x| *x /= total);
        dist
    }
}

/// Exact forward simulation. Samples are grouped by their most recent
/// changepoint `t`; each next-changepoint distribution is built once per `t`
/// and shared by every sample currently sitting there.
pub fn sample_changepoints<M: SegmentModel, R: Rng + ?Sized>(
    table: &RecursionTable,
    stats: &SufficientStats,
    model: &M,
    count: usize,
    rng: &mut R,
) -> Result<RecursionSampleSet> {
    let n = table.n;
    if stats.n() != n {
        return Err(Error::Config("recursion table and series differ in length".into()));
    }
    if count == 0 {
        return Err(Error::Empty("sample set"));
    }
    let mut paths: Vec<Vec<usize>> = vec![Vec::new(); count];
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
    buckets[0] = (0..count).collect();
    for t in 0..n.saturating_sub(1) {
        let members = std::mem::take(&mut buckets[t]);
        if members.is_empty() {
            continue;
        }
        let probs: Vec<f64> = next_changepoint_log_probs(table, stats, model, t)
            .into_iter()
            .map(f64::exp)
            .collect();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > MASS_TOLERANCE || acc.is_nan() {
            return Err(Error::Numerical(format!(
                "next-changepoint distribution after t = {t} has mass {acc}"
            )));
        }
        for i in members {
            let u: f64 = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|c| *c <= u).min(cdf.len() - 1);
            if idx + 1 < cdf.len() {
                let tau = t + 1 + idx;
                paths[i].push(tau);
                buckets[tau].push(i);
            }
        }
    }
    let draws = paths
        .into_iter()
        .map(|taus| Segmentation::from_sorted_unchecked(taus, n))
        .collect();
    RecursionSampleSet::new(n, draws)
}

#[derive(Debug, Clone)]
pub struct IndependenceOutput {
    pub chain: ChainOutput,
    /// Distinct segmentations visited over the post-burn-in iterations.
    pub unique_visited: usize,
}

/// Metropolis-Hastings over segmentations whose proposal is a uniform pick
/// from `pool`, so a segmentation is proposed with probability equal to its
/// pool frequency. Each iteration is followed by the `p` and `γ` updates
/// enabled in `config`; burn-in and thinning work as in the collapsed sampler.
pub fn independence_mcmc<M: SegmentModel, R: Rng + ?Sized>(
    pool: &RecursionSampleSet,
    stats: &SufficientStats,
    model: M,
    seg_prior: SegPrior,
    k_prior: KPrior,
    config: SamplerConfig<M::Hyperprior>,
    rng: &mut R,
) -> Result<IndependenceOutput> {
    if pool.is_empty() {
        return Err(Error::Empty("proposal pool"));
    }
    let mut multiplicity: HashMap<&[usize], u64> = HashMap::new();
    for d in pool.draws() {
        *multiplicity.entry(d.taus()).or_insert(0) += 1;
    }
    let (burn_in, sweeps, thin) = (config.burn_in, config.sweeps, config.thin);
    let mut sampler = Sampler::new(stats, model, seg_prior, k_prior, config)?;
    let start = pool.draws()[0].clone();
    sampler.set_segmentation(start)?;

    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut records = Vec::with_capacity(sweeps / thin);
    for i in 1..=burn_in + sweeps {
        let proposal = &pool.draws()[rng.random_range(0..pool.len())];
        let current = sampler.state().seg.taus();
        let log_q = |taus: &[usize]| (multiplicity[taus] as f64).ln();
        let lp_new = sampler.log_posterior_of(proposal)?;
        let log_a = lp_new - sampler.state().log_post + log_q(current) - log_q(proposal.taus());
        let accepted = if log_a.is_nan() {
            return Err(Error::Numerical("NaN acceptance ratio".into()));
        } else if log_a >= 0.0 {
            true
        } else if log_a == f64::NEG_INFINITY {
            false
        } else {
            rng.random::<f64>() < log_a.exp()
        };
        if accepted {
            sampler.replace_segmentation(proposal.clone(), lp_new);
        }
        sampler.tally_independence(accepted);
        sampler.hyper_step(rng)?;
        if i > burn_in {
            visited.insert(sampler.state().seg.taus().to_vec());
            if (i - burn_in) % thin == 0 {
                records.push(sampler.record(i));
            }
        }
    }
    Ok(IndependenceOutput {
        chain: sampler.output(records),
        unique_visited: visited.len(),
    })
}
