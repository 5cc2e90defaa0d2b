//! Collapsed Metropolis-Hastings sampler over segmentations.
//!
//! Each sweep does, in order:
//!
//! 1. an add-or-delete attempt, choosing add with probability `a_k`;
//! 2. if `k ≥ 1`, a move of one uniformly chosen changepoint, by a Gibbs
//!    draw from its full conditional with probability `g_k` and otherwise
//!    by a local random walk of half-width `l`;
//! 3. if enabled and the segmentation prior is geometric, a Gibbs draw of
//!    `p` from `Beta(α1 + k, α2 + n − 1 − k)`;
//! 4. if enabled, a draw of every segment parameter `θ_j`, then of `γ | θ`.
//!
//! Random draws happen in a fixed order so that a seed determines the whole
//! chain: the add/delete selector uniform, then the proposal position, then
//! the acceptance uniform (only drawn when `−∞ < ln A < 0`); then the
//! changepoint index and the Gibbs/random-walk selector uniform, the move
//! draws; then `p`; then `θ` and `γ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::models::SegmentModel;
use crate::priors::{KPrior, SegPrior};
use crate::series::{Edit, Segmentation, SufficientStats};

/// Probability `g_k` of using the Gibbs update for a move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GibbsSchedule {
    /// `g_k = 1/√k`.
    InverseSqrt,
    /// The same probability for every `k`; 0 is a pure random walk, 1 pure Gibbs.
    Constant(f64),
}

impl GibbsSchedule {
    pub fn prob(&self, k: usize) -> f64 {
        match *self {
            GibbsSchedule::InverseSqrt => 1.0 / (k as f64).sqrt(),
            GibbsSchedule::Constant(g) => g,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SamplerConfig<H> {
    /// Maximum number of changepoints `k̄`; clamped to `n − 1`.
    pub kmax: usize,
    /// `a_k` for `k = 0..=k̄`. `None` gives `a_0 = 1`, `a_k̄ = 0`, `a_k = 0.5` otherwise.
    pub add_probs: Option<Vec<f64>>,
    /// Random-walk half-width `l`.
    pub move_window: usize,
    pub gibbs: GibbsSchedule,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub update_p: bool,
    /// `Beta(α1, α2)` hyperprior on `p`.
    pub p_hyperprior: (f64, f64),
    pub update_gamma: bool,
    pub hyperprior: H,
}

impl<H: Default> SamplerConfig<H> {
    pub fn new(kmax: usize) -> Self {
        Self {
            kmax,
            add_probs: None,
            move_window: 10,
            gibbs: GibbsSchedule::InverseSqrt,
            sweeps: 500_000,
            burn_in: 10_000,
            thin: 50,
            seed: 0,
            update_p: false,
            p_hyperprior: (1.0, 1.0),
            update_gamma: false,
            hyperprior: H::default(),
        }
    }
}

impl<H> SamplerConfig<H> {
    /// Checks the configuration for a series of length `n` and returns the
    /// effective add probabilities `a_0..=a_k̄`.
    pub fn resolve_add_probs(&self, n: usize) -> Result<Vec<f64>> {
        let kmax = self.kmax.min(n - 1);
        if self.move_window < 1 {
            return Err(Error::Config("move window l must be at least 1".into()));
        }
        if self.thin < 1 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if let GibbsSchedule::Constant(g) = self.gibbs {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::parameter("gibbs probability", g, "must lie in [0, 1]"));
            }
        }
        let (a1, a2) = self.p_hyperprior;
        if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
            return Err(Error::Config(format!(
                "p hyperprior Beta({a1}, {a2}) must have positive parameters"
            )));
        }
        match &self.add_probs {
            None => Ok((0..=kmax)
                .map(|k| {
                    if k == kmax {
                        0.0
                    } else if k == 0 {
                        1.0
                    } else {
                        0.5
                    }
                })
                .collect()),
            Some(probs) => {
                if probs.len() != kmax + 1 {
                    return Err(Error::Config(format!(
                        "add probability schedule needs {} entries (k = 0..={kmax}), got {}",
                        kmax + 1,
                        probs.len()
                    )));
                }
                if probs.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    return Err(Error::Config("add probabilities must lie in [0, 1]".into()));
                }
                if kmax > 0 && probs[0] != 1.0 {
                    return Err(Error::Config("a_0 must be 1".into()));
                }
                if probs[kmax] != 0.0 {
                    return Err(Error::Config("a_kmax must be 0".into()));
                }
                Ok(probs.clone())
            }
        }
    }
}

/// Proposal and acceptance counts for one move type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub proposed: u64,
    pub accepted: u64,
}

impl Tally {
    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }

    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub add: Tally,
    pub delete: Tally,
    pub gibbs: Tally,
    pub random_walk: Tally,
    pub independence: Tally,
    /// Add/delete attempts with no legal proposal.
    pub skipped: u64,
}

impl MoveStats {
    pub fn rates(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("add", self.add.rate()),
            ("delete", self.delete.rate()),
            ("gibbs", self.gibbs.rate()),
            ("random_walk", self.random_walk.rate()),
            ("independence", self.independence.rate()),
        ]
    }

    pub fn merge(&mut self, other: &MoveStats) {
        for (a, b) in [
            (&mut self.add, other.add),
            (&mut self.delete, other.delete),
            (&mut self.gibbs, other.gibbs),
            (&mut self.random_walk, other.random_walk),
            (&mut self.independence, other.independence),
        ] {
            a.proposed += b.proposed;
            a.accepted += b.accepted;
        }
        self.skipped += other.skipped;
    }
}

/// A proposed elementary edit with its Metropolis-Hastings log ratio and the
/// change it would make to the log posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub edit: Edit,
    pub log_accept_ratio: f64,
    pub log_post_delta: f64,
}

#[derive(Debug, Clone)]
pub struct SamplerState<M> {
    pub seg: Segmentation,
    pub seg_prior: SegPrior,
    pub model: M,
    /// Cached unnormalised log posterior of `seg` under the current `p` and `γ`.
    pub log_post: f64,
    pub move_stats: MoveStats,
}

/// One stored iteration of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    pub sweep: usize,
    pub taus: Vec<usize>,
    pub p: Option<f64>,
    pub gamma: Vec<f64>,
    pub log_post: f64,
}

impl ChainRecord {
    pub fn k(&self) -> usize {
        self.taus.len()
    }
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub n: usize,
    pub seed: u64,
    pub gamma_names: Vec<String>,
    pub records: Vec<ChainRecord>,
    pub move_stats: MoveStats,
}

/// `ln π(k) + ln π(z | k, ξ) + Σ_j ln π(y_{segment j} | γ)`, unnormalised.
/// `-inf` is a legitimate value; NaN is reported as an error.
pub fn log_collapsed_posterior<M: SegmentModel>(
    seg: &Segmentation,
    seg_prior: &SegPrior,
    k_prior: &KPrior,
    model: &M,
    stats: &SufficientStats,
) -> Result<f64> {
    let prior = k_prior.log_prob(seg.k()) + seg_prior.log_prob(seg);
    if prior == f64::NEG_INFINITY {
        return Ok(prior);
    }
    let lik: f64 = seg.segments().map(|(s, t)| model.log_marginal(stats, s, t)).sum();
    let total = prior + lik;
    if total.is_nan() {
        return Err(Error::Numerical(format!("log posterior is NaN for {:?}", seg.taus())));
    }
    Ok(total)
}

/// Integer window `max(τ − l, left + 1) ..= min(τ + l, right − 1)` of the
/// random-walk proposal centred at `center`.
pub fn random_walk_window(center: usize, left: usize, right: usize, l: usize) -> (usize, usize) {
    let lo = center.saturating_sub(l).max(left + 1);
    let hi = (center + l).min(right - 1);
    (lo, hi)
}

/// Log Hastings correction `ln q(from | to) − ln q(to | from)` for the
/// random-walk move, i.e. the log ratio of window sizes at `from` and `to`.
/// Zero when neither window is clipped; when the window at `from` is clipped
/// by the left neighbour and `to < from` this is
/// `ln[(from − left + l) / (to − left + l)]`.
pub fn random_walk_log_correction(left: usize, right: usize, l: usize, from: usize, to: usize) -> f64 {
    let size = |c: usize| {
        let (lo, hi) = random_walk_window(c, left, right, l);
        (hi - lo + 1) as f64
    };
    size(from).ln() - size(to).ln()
}

/// Draws an index from unnormalised log weights by inverse CDF after max
/// subtraction, overwriting `w` with the weights `exp(w − max)`.
pub(crate) fn sample_log_weights<R: Rng + ?Sized>(w: &mut [f64], rng: &mut R) -> usize {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in w.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, x) in w.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    // u rounded onto the upper edge: take the last positive-weight entry
    w.iter().rposition(|x| *x > 0.0).unwrap_or(w.len() - 1)
}

/// Whether to accept given `ln A`, drawing a uniform only when `−∞ < ln A < 0`.
fn metropolis<R: Rng + ?Sized>(log_a: f64, rng: &mut R) -> Result<bool> {
    if log_a.is_nan() {
        return Err(Error::Numerical("NaN acceptance ratio".into()));
    }
    if log_a >= 0.0 {
        return Ok(true);
    }
    if log_a == f64::NEG_INFINITY {
        return Ok(false);
    }
    let u: f64 = rng.random();
    Ok(u < log_a.exp())
}

/// The collapsed sampler for one chain over a fixed series.
#[derive(Debug, Clone)]
pub struct Sampler<'a, M: SegmentModel> {
    stats: &'a SufficientStats,
    k_prior: KPrior,
    config: SamplerConfig<M::Hyperprior>,
    add_probs: Vec<f64>,
    state: SamplerState<M>,
    // occupied[t] for t = 0..=n
    occupied: Vec<bool>,
    scratch: Vec<f64>,
    // ln d for d = 0..=n
    ln_int: Vec<f64>,
}

impl<'a, M: SegmentModel> Sampler<'a, M> {
    /// Starts from the segmentation with no changepoints.
    pub fn new(
        stats: &'a SufficientStats,
        model: M,
        seg_prior: SegPrior,
        k_prior: KPrior,
        config: SamplerConfig<M::Hyperprior>,
    ) -> Result<Self> {
        if model.kind() != stats.kind() {
            return Err(Error::KindMismatch {
                expected: model.kind(),
                found: stats.kind(),
            });
        }
        let n = stats.n();
        let add_probs = config.resolve_add_probs(n)?;
        let seg = Segmentation::empty(n);
        let log_post = log_collapsed_posterior(&seg, &seg_prior, &k_prior, &model, stats)?;
        if log_post == f64::NEG_INFINITY {
            return Err(Error::Config(
                "the empty segmentation has zero prior probability".into(),
            ));
        }
        Ok(Self {
            stats,
            k_prior,
            config,
            add_probs,
            state: SamplerState {
                seg,
                seg_prior,
                model,
                log_post,
                move_stats: MoveStats::default(),
            },
            occupied: vec![false; n + 1],
            scratch: Vec::new(),
            ln_int: (0..=n).map(|d| (d as f64).ln()).collect(),
        })
    }

    pub fn state(&self) -> &SamplerState<M> {
        &self.state
    }

    pub fn config(&self) -> &SamplerConfig<M::Hyperprior> {
        &self.config
    }

    pub fn stats(&self) -> &SufficientStats {
        self.stats
    }

    pub fn k_prior(&self) -> &KPrior {
        &self.k_prior
    }

    fn n(&self) -> usize {
        self.stats.n()
    }

    fn kmax(&self) -> usize {
        self.add_probs.len() - 1
    }

    /// `a_k`; zero beyond `k̄`.
    pub fn add_prob(&self, k: usize) -> f64 {
        self.add_probs.get(k).copied().unwrap_or(0.0)
    }

    /// Replaces the current segmentation; it must have positive posterior mass.
    pub fn set_segmentation(&mut self, seg: Segmentation) -> Result<()> {
        if seg.n() != self.n() {
            return Err(Error::Config("segmentation length does not match the series".into()));
        }
        let lp = self.log_posterior_of(&seg)?;
        if lp == f64::NEG_INFINITY {
            return Err(Error::Config(
                "initial segmentation has zero posterior probability".into(),
            ));
        }
        self.occupied.iter_mut().for_each(|o| *o = false);
        for &t in seg.taus() {
            self.occupied[t] = true;
        }
        self.state.seg = seg;
        self.state.log_post = lp;
        Ok(())
    }

    /// Swaps in a segmentation whose log posterior the caller already knows.
    pub(crate) fn replace_segmentation(&mut self, seg: Segmentation, log_post: f64) {
        for &t in self.state.seg.taus() {
            self.occupied[t] = false;
        }
        for &t in seg.taus() {
            self.occupied[t] = true;
        }
        self.state.seg = seg;
        self.state.log_post = log_post;
    }

    pub(crate) fn tally_independence(&mut self, accepted: bool) {
        self.state.move_stats.independence.record(accepted);
    }

    pub fn log_posterior_of(&self, seg: &Segmentation) -> Result<f64> {
        log_collapsed_posterior(seg, &self.state.seg_prior, &self.k_prior, &self.state.model, self.stats)
    }

    /// From-scratch recomputation of the cached log posterior.
    pub fn recomputed_log_post(&self) -> Result<f64> {
        self.log_posterior_of(&self.state.seg)
    }

    #[inline]
    fn marginal(&self, s: usize, t: usize) -> f64 {
        self.state.model.log_marginal(self.stats, s, t)
    }

    /// Change in log posterior from inserting `t` into the gap `(left, right)`
    /// of a segmentation with `k` changepoints.
    fn add_delta(&self, k: usize, left: usize, right: usize, t: usize) -> f64 {
        let n = self.n();
        let k_ratio = self.k_prior.log_prob(k + 1) - self.k_prior.log_prob(k);
        if k_ratio == f64::NEG_INFINITY {
            return k_ratio;
        }
        let prior_ratio = self.state.seg_prior.log_ratio_add(n, k, left, right, t);
        if prior_ratio == f64::NEG_INFINITY {
            return prior_ratio;
        }
        k_ratio + prior_ratio + self.marginal(left + 1, t) + self.marginal(t + 1, right)
            - self.marginal(left + 1, right)
    }

    /// `ln P(k+1 → k) − ln P(k → k+1) = ln[d_{k+1}/(k+1)] − ln[a_k/(n−k−1)]`.
    fn add_hastings(&self, k: usize) -> f64 {
        let n = self.n();
        let d_next = 1.0 - self.add_prob(k + 1);
        (d_next / (k + 1) as f64).ln() - (self.add_prob(k) / (n - k - 1) as f64).ln()
    }

    /// Log acceptance ratio and log posterior change for adding a changepoint at `t`.
    pub fn log_add_ratio(&self, t: usize) -> (f64, f64) {
        let k = self.state.seg.k();
        let (left, right) = self.state.seg.enclosing_gap(t);
        let delta = self.add_delta(k, left, right, t);
        (delta + self.add_hastings(k), delta)
    }

    /// Log acceptance ratio and log posterior change for deleting the changepoint at `t`:
    /// the negation of the matching add ratio.
    pub fn log_delete_ratio(&self, t: usize) -> (f64, f64) {
        let k = self.state.seg.k();
        let j = self.state.seg.taus().binary_search(&t).expect("t is a changepoint");
        let (left, right) = self.state.seg.neighbours(j);
        let delta = -self.add_delta(k - 1, left, right, t);
        (delta - self.add_hastings(k - 1), delta)
    }

    /// Uniform choice of a free position in `1..n`; `None` when every position is taken.
    pub fn propose_add<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Proposal> {
        let n = self.n();
        let k = self.state.seg.k();
        if n - 1 - k == 0 {
            return None;
        }
        let t = loop {
            let t = rng.random_range(1..n);
            if !self.occupied[t] {
                break t;
            }
        };
        let (log_accept_ratio, log_post_delta) = self.log_add_ratio(t);
        Some(Proposal {
            edit: Edit::Add { t },
            log_accept_ratio,
            log_post_delta,
        })
    }

    /// Uniform choice of an existing changepoint; `None` when `k = 0`.
    pub fn propose_delete<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Proposal> {
        let k = self.state.seg.k();
        if k == 0 {
            return None;
        }
        let t = self.state.seg.taus()[rng.random_range(0..k)];
        let (log_accept_ratio, log_post_delta) = self.log_delete_ratio(t);
        Some(Proposal {
            edit: Edit::Delete { t },
            log_accept_ratio,
            log_post_delta,
        })
    }

    fn apply(&mut self, proposal: &Proposal) {
        match proposal.edit {
            Edit::Add { t } => {
                self.state.seg.insert(t);
                self.occupied[t] = true;
            }
            Edit::Delete { t } => {
                self.state.seg.remove(t);
                self.occupied[t] = false;
            }
            Edit::Move { from, to } => {
                let j = self
                    .state
                    .seg
                    .taus()
                    .binary_search(&from)
                    .expect("moving a changepoint");
                self.state.seg.set(j, to);
                self.occupied[from] = false;
                self.occupied[to] = true;
            }
        }
        self.state.log_post += proposal.log_post_delta;
    }

    /// Step (i): add with probability `a_k`, otherwise delete.
    pub fn birth_death<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        if self.kmax() == 0 {
            return Ok(());
        }
        let k = self.state.seg.k();
        let u: f64 = rng.random();
        let adding = u < self.add_prob(k);
        let proposal = if adding {
            self.propose_add(rng)
        } else {
            self.propose_delete(rng)
        };
        let Some(proposal) = proposal else {
            self.state.move_stats.skipped += 1;
            return Ok(());
        };
        let accepted = metropolis(proposal.log_accept_ratio, rng)?;
        if accepted {
            self.apply(&proposal);
        }
        let tally = if adding {
            &mut self.state.move_stats.add
        } else {
            &mut self.state.move_stats.delete
        };
        tally.record(accepted);
        Ok(())
    }

    /// Log posterior of a changepoint at `t` inside the gap `(left, right)`,
    /// less the prior terms shared by every position. `base` is the
    /// even-order-statistics term at the current position.
    #[inline]
    fn gibbs_log_weight(&self, left: usize, right: usize, base: f64, t: usize) -> f64 {
        let prior = match self.state.seg_prior {
            SegPrior::Geometric { .. } => 0.0,
            // ln (t − left − 1) + ln (right − t − 1)
            SegPrior::EvenOrderStats => self.ln_int[t - left - 1] + self.ln_int[right - t - 1] - base,
        };
        prior + self.marginal(left + 1, t) + self.marginal(t + 1, right)
    }

    fn gibbs_base(&self, left: usize, right: usize, current: usize) -> f64 {
        match self.state.seg_prior {
            SegPrior::Geometric { .. } => 0.0,
            SegPrior::EvenOrderStats => self.ln_int[current - left - 1] + self.ln_int[right - current - 1],
        }
    }

    /// Log full-conditional weights of changepoint `j` over `left+1 ..= right−1`,
    /// relative to the current position.
    fn gibbs_log_weights(&mut self, j: usize) -> (usize, Vec<f64>) {
        let (left, right) = self.state.seg.neighbours(j);
        let current = self.state.seg.taus()[j];
        let base = self.gibbs_base(left, right, current);
        let mut weights = std::mem::take(&mut self.scratch);
        weights.clear();
        weights.extend((left + 1..right).map(|t| self.gibbs_log_weight(left, right, base, t)));
        (left + 1, weights)
    }

    /// The exact full conditional of changepoint `j`: `(first position, probabilities)`.
    pub fn gibbs_conditional(&mut self, j: usize) -> (usize, Vec<f64>) {
        let (start, mut w) = self.gibbs_log_weights(j);
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        w.iter_mut().for_each(|x| *x = (*x - max).exp());
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        (start, w)
    }

    /// Draws changepoint `j` from its full conditional; always accepted.
    pub fn move_gibbs<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) -> Result<()> {
        let current = self.state.seg.taus()[j];
        let (start, mut weights) = self.gibbs_log_weights(j);
        let from = weights[current - start];
        let idx = sample_log_weights(&mut weights, rng);
        self.scratch = weights;
        let t = start + idx;
        let (left, right) = self.state.seg.neighbours(j);
        let base = self.gibbs_base(left, right, current);
        let delta = self.gibbs_log_weight(left, right, base, t) - from;
        if delta.is_nan() {
            return Err(Error::Numerical("NaN in Gibbs full conditional".into()));
        }
        if t != current {
            self.apply(&Proposal {
                edit: Edit::Move { from: current, to: t },
                log_accept_ratio: 0.0,
                log_post_delta: delta,
            });
        }
        self.state.move_stats.gibbs.record(true);
        Ok(())
    }

    /// Local random-walk move of changepoint `j` with the configured half-width.
    pub fn move_random_walk<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) -> Result<()> {
        let l = self.config.move_window;
        let (left, right) = self.state.seg.neighbours(j);
        let current = self.state.seg.taus()[j];
        let (lo, hi) = random_walk_window(current, left, right, l);
        let t = rng.random_range(lo..=hi);
        if t == current {
            self.state.move_stats.random_walk.record(true);
            return Ok(());
        }
        let delta = self.state.seg_prior.log_ratio_move(left, right, current, t)
            + self.marginal(left + 1, t)
            + self.marginal(t + 1, right)
            - self.marginal(left + 1, current)
            - self.marginal(current + 1, right);
        let log_b = delta + random_walk_log_correction(left, right, l, current, t);
        let accepted = metropolis(log_b, rng)?;
        if accepted {
            self.apply(&Proposal {
                edit: Edit::Move { from: current, to: t },
                log_accept_ratio: log_b,
                log_post_delta: delta,
            });
        }
        self.state.move_stats.random_walk.record(accepted);
        Ok(())
    }

    /// Step (ii): pick a changepoint uniformly and move it. No-op when `k = 0`.
    pub fn move_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let k = self.state.seg.k();
        if k == 0 {
            return Ok(());
        }
        let j = rng.random_range(0..k);
        let u: f64 = rng.random();
        if u < self.config.gibbs.prob(k) {
            self.move_gibbs(j, rng)
        } else {
            self.move_random_walk(j, rng)
        }
    }

    /// Step (iii): `p | z ~ Beta(α1 + k, α2 + n − 1 − k)` under a geometric prior.
    pub fn update_p<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let SegPrior::Geometric { .. } = self.state.seg_prior else {
            return Ok(());
        };
        let k = self.state.seg.k() as f64;
        let n = self.n() as f64;
        let (a1, a2) = self.config.p_hyperprior;
        let p: f64 = Beta::new(a1 + k, a2 + n - 1.0 - k)
            .map_err(|e| Error::Numerical(format!("p update: {e}")))?
            .sample(rng);
        if p > 0.0 && p < 1.0 {
            let old = self.state.seg_prior.log_prob(&self.state.seg);
            self.state.seg_prior = SegPrior::Geometric { p };
            let new = self.state.seg_prior.log_prob(&self.state.seg);
            self.state.log_post += new - old;
        }
        Ok(())
    }

    /// Step (iv): draw `θ`, then `γ | θ`, then refresh the cached posterior.
    pub fn update_gamma<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let hyper = self.config.hyperprior.clone();
        self.state
            .model
            .resample_hyperparams(self.stats, &self.state.seg, &hyper, rng)?;
        self.state.log_post = self.recomputed_log_post()?;
        Ok(())
    }

    /// Steps (iii) and (iv) as enabled by the configuration.
    pub fn hyper_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        if self.config.update_p {
            self.update_p(rng)?;
        }
        if self.config.update_gamma {
            self.update_gamma(rng)?;
        }
        Ok(())
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        self.birth_death(rng)?;
        self.move_step(rng)?;
        self.hyper_step(rng)
    }

    pub fn record(&self, sweep: usize) -> ChainRecord {
        ChainRecord {
            sweep,
            taus: self.state.seg.taus().to_vec(),
            p: self.state.seg_prior.p(),
            gamma: self.state.model.param_values(),
            log_post: self.state.log_post,
        }
    }

    /// Burn-in, then `sweeps` sweeps keeping every `thin`-th state, so the
    /// output has `⌊sweeps / thin⌋` records.
    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<ChainOutput> {
        for _ in 0..self.config.burn_in {
            self.sweep(rng)?;
        }
        let thin = self.config.thin;
        let mut records = Vec::with_capacity(self.config.sweeps / thin);
        for i in 1..=self.config.sweeps {
            self.sweep(rng)?;
            if i % thin == 0 {
                records.push(self.record(self.config.burn_in + i));
            }
        }
        Ok(self.output(records))
    }

    pub fn output(&self, records: Vec<ChainRecord>) -> ChainOutput {
        ChainOutput {
            n: self.n(),
            seed: self.config.seed,
            gamma_names: self.state.model.param_names().iter().map(|s| s.to_string()).collect(),
            records,
            move_stats: self.state.move_stats,
        }
    }
}

/// Runs one chain from the empty segmentation with an RNG seeded from `config.seed`.
pub fn run_chain<M: SegmentModel>(
    stats: &SufficientStats,
    model: M,
    seg_prior: SegPrior,
    k_prior: KPrior,
    config: SamplerConfig<M::Hyperprior>,
) -> Result<ChainOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sampler = Sampler::new(stats, model, seg_prior, k_prior, config)?;
    sampler.run(&mut rng)
}
