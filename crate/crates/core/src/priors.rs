//! Segmentation priors `π(z | k, ξ)`, priors on the number of changepoints,
//! and the duration distributions used by the filtering recursions.

use crate::error::{Error, Result};
use crate::math::{ln_binomial, ln_gamma, log_sum_exp};
use crate::series::{Edit, Segmentation};

/// Prior on changepoint positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegPrior {
    /// Independent Bernoulli(p) indicators: `p^k (1 − p)^{n−1−k}`.
    /// The final segment is censored at `n`.
    Geometric { p: f64 },
    /// Changepoints at the even order statistics of `2k + 1` draws without
    /// replacement from `1..=n−1`:
    /// `C(n−1, 2k+1)^{-1} Π_{j=0}^{k} (τ_{j+1} − τ_j − 1)`.
    EvenOrderStats,
}

impl SegPrior {
    pub fn geometric(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(SegPrior::Geometric { p })
        } else {
            Err(Error::parameter("p", p, "must lie in (0, 1)"))
        }
    }

    pub fn p(&self) -> Option<f64> {
        match *self {
            SegPrior::Geometric { p } => Some(p),
            SegPrior::EvenOrderStats => None,
        }
    }

    /// `ln π(z | k)`; `-inf` for zero-probability configurations.
    pub fn log_prob(&self, seg: &Segmentation) -> f64 {
        let n = seg.n();
        let k = seg.k();
        match *self {
            SegPrior::Geometric { p } => k as f64 * p.ln() + (n - 1 - k) as f64 * (-p).ln_1p(),
            SegPrior::EvenOrderStats => {
                if 2 * k + 1 > n - 1 {
                    return f64::NEG_INFINITY;
                }
                let mut acc = -ln_binomial((n - 1) as u64, (2 * k + 1) as u64);
                for (s, t) in seg.segments() {
                    // (τ_{j+1} − τ_j − 1) = segment length − 1
                    acc += ((t - s) as f64).ln();
                }
                acc
            }
        }
    }

    /// `ln π(z' | k+1) − ln π(z | k)` for inserting `t` into the gap
    /// `(left, right)` of a segmentation with `k` changepoints.
    #[inline]
    pub fn log_ratio_add(&self, n: usize, k: usize, left: usize, right: usize, t: usize) -> f64 {
        match *self {
            SegPrior::Geometric { p } => p.ln() - (-p).ln_1p(),
            SegPrior::EvenOrderStats => {
                if 2 * k + 3 > n - 1 {
                    return f64::NEG_INFINITY;
                }
                ln_gap(t - left) + ln_gap(right - t) - ln_gap(right - left)
                    + ln_binomial((n - 1) as u64, (2 * k + 1) as u64)
                    - ln_binomial((n - 1) as u64, (2 * k + 3) as u64)
            }
        }
    }

    /// `ln π(z') − ln π(z)` for moving a changepoint from `from` to `to`
    /// inside the gap `(left, right)`.
    #[inline]
    pub fn log_ratio_move(&self, left: usize, right: usize, from: usize, to: usize) -> f64 {
        match *self {
            SegPrior::Geometric { .. } => 0.0,
            SegPrior::EvenOrderStats => {
                ln_gap(to - left) + ln_gap(right - to) - ln_gap(from - left) - ln_gap(right - from)
            }
        }
    }
}

/// `ln(d − 1)` for a segment spanning `d` positions.
#[inline]
fn ln_gap(d: usize) -> f64 {
    ((d - 1) as f64).ln()
}

pub fn log_seg_prior(seg: &Segmentation, prior: &SegPrior) -> f64 {
    prior.log_prob(seg)
}

/// `ln π(to) − ln π(from)` computed from the gaps touched by a single add,
/// delete or move. Moves that jump over other changepoints are handled as a
/// delete followed by an add.
pub fn log_seg_prior_ratio(from: &Segmentation, to: &Segmentation, prior: &SegPrior) -> Result<f64> {
    let n = from.n();
    let edit = from.edit_to(to)?;
    let ratio = match edit {
        Edit::Add { t } => {
            let (l, r) = from.enclosing_gap(t);
            prior.log_ratio_add(n, from.k(), l, r, t)
        }
        Edit::Delete { t } => {
            let (l, r) = to.enclosing_gap(t);
            -prior.log_ratio_add(n, to.k(), l, r, t)
        }
        Edit::Move { from: a, to: b } => {
            let mut mid = from.clone();
            mid.remove(a);
            let (l, r) = mid.enclosing_gap(a);
            let del = -prior.log_ratio_add(n, mid.k(), l, r, a);
            let (l, r) = mid.enclosing_gap(b);
            del + prior.log_ratio_add(n, mid.k(), l, r, b)
        }
    };
    if ratio.is_nan() {
        return Err(Error::Numerical(
            "prior ratio between two zero-probability segmentations".into(),
        ));
    }
    Ok(ratio)
}

/// Prior on the number of changepoints.
#[derive(Debug, Clone, PartialEq)]
pub enum KPrior {
    DiscreteUniform {
        kmax: usize,
    },
    /// Normalised log weights for `k = 0..weights.len()`.
    Custom {
        log_weights: Vec<f64>,
    },
}

impl KPrior {
    pub fn uniform(kmax: usize) -> Self {
        KPrior::DiscreteUniform { kmax }
    }

    /// Nonnegative weights for `k = 0, 1, …`; normalised internally.
    pub fn custom(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("k prior weight list"));
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::parameter("k prior weight", w, "must be nonnegative and finite"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::parameter("k prior weight total", total, "must be positive"));
        }
        Ok(KPrior::Custom {
            log_weights: weights.iter().map(|w| (w / total).ln()).collect(),
        })
    }

    /// Poisson(mean) truncated to `0..=kmax`.
    pub fn truncated_poisson(mean: f64, kmax: usize) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::parameter("k prior mean", mean, "must be positive"));
        }
        let logs: Vec<f64> = (0..=kmax)
            .map(|k| k as f64 * mean.ln() - mean - ln_gamma(k as f64 + 1.0))
            .collect();
        let norm = log_sum_exp(&logs);
        Ok(KPrior::Custom {
            log_weights: logs.into_iter().map(|l| l - norm).collect(),
        })
    }

    pub fn kmax(&self) -> usize {
        match self {
            KPrior::DiscreteUniform { kmax } => *kmax,
            KPrior::Custom { log_weights } => log_weights.len() - 1,
        }
    }

    #[inline]
    pub fn log_prob(&self, k: usize) -> f64 {
        match self {
            KPrior::DiscreteUniform { kmax } => {
                if k <= *kmax {
                    -((*kmax + 1) as f64).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            KPrior::Custom { log_weights } => log_weights.get(k).copied().unwrap_or(f64::NEG_INFINITY),
        }
    }
}

/// Distribution of the distance between successive changepoints, on `d ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointProcess {
    /// `g(d) = p (1 − p)^{d−1}`.
    Geometric { p: f64 },
    /// Number of trials up to the `r`-th success, shifted to start at 1:
    /// `g(d) = Γ(d − 1 + r) / (Γ(r) (d − 1)!) p^r (1 − p)^{d−1}`.
    NegativeBinomial { r: f64, p: f64 },
}

impl PointProcess {
    pub fn geometric(p: f64) -> Result<Self> {
        if p > 0.0 && p <= 1.0 {
            Ok(PointProcess::Geometric { p })
        } else {
            Err(Error::parameter("p", p, "must lie in (0, 1]"))
        }
    }

    pub fn negative_binomial(r: f64, p: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::parameter("r", r, "must be positive"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::parameter("p", p, "must lie in (0, 1]"));
        }
        Ok(PointProcess::NegativeBinomial { r, p })
    }

    pub fn p(&self) -> f64 {
        match *self {
            PointProcess::Geometric { p } | PointProcess::NegativeBinomial { p, .. } => p,
        }
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        match *self {
            PointProcess::Geometric { .. } => Self::geometric(p),
            PointProcess::NegativeBinomial { r, .. } => Self::negative_binomial(r, p),
        }
    }

    pub fn pmf(&self, d: usize) -> Result<f64> {
        if d < 1 {
            return Err(Error::parameter("duration", d as f64, "must be at least 1"));
        }
        Ok(self.log_pmf(d).exp())
    }

    /// `G(d) = Σ_{i ≤ d} g(i)`.
    pub fn cdf(&self, d: usize) -> Result<f64> {
        if d < 1 {
            return Err(Error::parameter("duration", d as f64, "must be at least 1"));
        }
        Ok(-self.log_survival(d).exp_m1())
    }

    /// `ln g(d)` for `d ≥ 1`.
    pub fn log_pmf(&self, d: usize) -> f64 {
        debug_assert!(d >= 1);
        let failures = (d - 1) as f64;
        match *self {
            PointProcess::Geometric { p } => p.ln() + xlog1m(failures, p),
            PointProcess::NegativeBinomial { r, p } => {
                ln_gamma(failures + r) - ln_gamma(r) - ln_gamma(failures + 1.0) + r * p.ln() + xlog1m(failures, p)
            }
        }
    }

    /// `ln(1 − G(d))` for `d ≥ 0`, with `G(0) = 0`.
    pub fn log_survival(&self, d: usize) -> f64 {
        if d == 0 {
            return 0.0;
        }
        match *self {
            PointProcess::Geometric { p } => xlog1m(d as f64, p),
            PointProcess::NegativeBinomial { r, p } => {
                // P(D > d) = P(fewer than r successes in d trials) = I_{1−p}(d, r)
                if p >= 1.0 {
                    return if (d as f64) < r { 0.0 } else { f64::NEG_INFINITY };
                }
                statrs::function::beta::beta_reg(d as f64, r, 1.0 - p).ln()
            }
        }
    }
}

/// `x ln(1 − p)` with `0 · ln 0 = 0`.
#[inline]
fn xlog1m(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (-p).ln_1p()
    }
}
