//! Conjugate segment models.
//!
//! Each model integrates its segment parameter out analytically, giving a
//! closed-form log marginal likelihood `ln π(y_{s:t} | γ)` for any segment,
//! and can draw the segment parameter from its conjugate posterior. Bound
//! models ([`PoissonGamma`], [`BernoulliBeta`], [`GaussianCommonVar`])
//! precompute per-series tables so the sampler's inner loops only do
//! lookups; the free `log_marginal_*` functions evaluate the formulas
//! directly with range checks.

use std::fmt::Debug;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::math::ln_gamma;
use crate::series::{DataKind, Segmentation, SufficientStats};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A draw of one segment's parameter: an intensity, a success probability or a mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentParamDraw {
    pub theta: f64,
}

/// Interface shared by the sampler, the recursions and the analysis tools.
///
/// Implementations are bound to one series; `log_marginal` takes 1-based
/// inclusive bounds and does not range-check (callers guarantee
/// `1 ≤ s ≤ t ≤ n`).
pub trait SegmentModel: Clone + Debug + Send + Sync {
    /// Hyperprior used when the sampler updates `γ`.
    type Hyperprior: Clone + Debug + Default + Send + Sync;

    fn kind(&self) -> DataKind;

    fn log_marginal(&self, stats: &SufficientStats, s: usize, t: usize) -> f64;

    fn sample_segment_param<R: Rng + ?Sized>(
        &self,
        stats: &SufficientStats,
        s: usize,
        t: usize,
        rng: &mut R,
    ) -> SegmentParamDraw;

    /// Draws `θ` for every segment of `seg`, then `γ | θ`, then discards `θ`.
    fn resample_hyperparams<R: Rng + ?Sized>(
        &mut self,
        stats: &SufficientStats,
        seg: &Segmentation,
        hyperprior: &Self::Hyperprior,
        rng: &mut R,
    ) -> Result<()>;

    /// Names of the entries of `γ`, in output order.
    fn param_names(&self) -> &'static [&'static str];

    fn param_values(&self) -> Vec<f64>;

    fn set_param(&mut self, name: &str, value: f64) -> Result<()>;
}

fn check_kind(stats: &SufficientStats, expected: DataKind) -> Result<()> {
    if stats.kind() != expected {
        return Err(Error::KindMismatch {
            expected,
            found: stats.kind(),
        });
    }
    Ok(())
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::parameter(name, value, "must be positive and finite"))
    }
}

/// `σ²`-style draw from an inverse gamma with the given shape and scale.
fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    let g: f64 = Gamma::new(shape, 1.0)
        .expect("inverse gamma shape must be positive")
        .sample(rng);
    scale / g
}

// ---------------------------------------------------------------------------
// Poisson segments with a Gamma prior on the intensity
// ---------------------------------------------------------------------------

/// Gamma(shape ρ, rate λ) prior on a Poisson intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonGammaParams {
    pub rho: f64,
    pub lambda: f64,
}

impl PoissonGammaParams {
    pub fn new(rho: f64, lambda: f64) -> Result<Self> {
        Ok(Self {
            rho: positive("rho", rho)?,
            lambda: positive("lambda", lambda)?,
        })
    }
}

/// `ρ ln λ − ln Γ(ρ) − ln F + ln Γ(S + ρ) − (S + ρ) ln(m + λ)` for the segment
/// `s..=t`, where `S` is the segment total, `F = Π y_i!` and `m = t − s + 1`.
pub fn log_marginal_poisson(stats: &SufficientStats, s: usize, t: usize, params: &PoissonGammaParams) -> Result<f64> {
    check_kind(stats, DataKind::Counts)?;
    stats.check_range(s, t)?;
    let total = stats.segment_count(s, t) as f64;
    let m = (t - s + 1) as f64;
    let PoissonGammaParams { rho, lambda } = *params;
    Ok(
        rho * lambda.ln() - ln_gamma(rho) - stats.segment_logfact(s, t) + ln_gamma(total + rho)
            - (total + rho) * (m + lambda).ln(),
    )
}

/// Gamma hyperprior `λ ~ Gamma(shape, rate)` on the prior rate; `ρ` stays fixed.
/// The default `shape = rate = 0` is the scale-invariant `π(λ) ∝ 1/λ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoissonHyperprior {
    pub lambda_shape: f64,
    pub lambda_rate: f64,
}

#[derive(Debug, Clone)]
pub struct PoissonGamma {
    params: PoissonGammaParams,
    log_norm: f64,
    // ln Γ(S + ρ) for S = 0..=total count
    ln_gamma_shape: Vec<f64>,
    // ln(m + λ) for m = 0..=n
    ln_len_rate: Vec<f64>,
}

impl PoissonGamma {
    pub fn new(params: PoissonGammaParams, stats: &SufficientStats) -> Result<Self> {
        check_kind(stats, DataKind::Counts)?;
        let total = stats.total_count() as usize;
        let mut model = Self {
            params,
            log_norm: 0.0,
            ln_gamma_shape: Vec::with_capacity(total + 1),
            ln_len_rate: Vec::with_capacity(stats.n() + 1),
        };
        model.ln_gamma_shape.resize(total + 1, 0.0);
        model.ln_len_rate.resize(stats.n() + 1, 0.0);
        model.refresh();
        Ok(model)
    }

    pub fn params(&self) -> PoissonGammaParams {
        self.params
    }

    fn refresh(&mut self) {
        let PoissonGammaParams { rho, lambda } = self.params;
        self.log_norm = rho * lambda.ln() - ln_gamma(rho);
        for (s, v) in self.ln_gamma_shape.iter_mut().enumerate() {
            *v = ln_gamma(s as f64 + rho);
        }
        for (m, v) in self.ln_len_rate.iter_mut().enumerate() {
            *v = (m as f64 + lambda).ln();
        }
    }
}

impl SegmentModel for PoissonGamma {
    type Hyperprior = PoissonHyperprior;

    fn kind(&self) -> DataKind {
        DataKind::Counts
    }

    #[inline]
    fn log_marginal(&self, stats: &SufficientStats, s: usize, t: usize) -> f64 {
        let total = stats.segment_count(s, t) as usize;
        self.log_norm - stats.segment_logfact(s, t) + self.ln_gamma_shape[total]
            - (total as f64 + self.params.rho) * self.ln_len_rate[t - s + 1]
    }

    fn sample_segment_param<R: Rng + ?Sized>(
        &self,
        stats: &SufficientStats,
        s: usize,
        t: usize,
        rng: &mut R,
    ) -> SegmentParamDraw {
        let shape = stats.segment_sum(s, t) + self.params.rho;
        let rate = (t - s + 1) as f64 + self.params.lambda;
        let theta = Gamma::new(shape, 1.0 / rate)
            .expect("posterior gamma parameters are positive")
            .sample(rng);
        SegmentParamDraw { theta }
    }

    fn resample_hyperparams<R: Rng + ?Sized>(
        &mut self,
        stats: &SufficientStats,
        seg: &Segmentation,
        hyperprior: &PoissonHyperprior,
        rng: &mut R,
    ) -> Result<()> {
        let intensity_total: f64 = seg
            .segments()
            .map(|(s, t)| self.sample_segment_param(stats, s, t, rng).theta)
            .sum();
        let shape = hyperprior.lambda_shape + (seg.k() + 1) as f64 * self.params.rho;
        let rate = hyperprior.lambda_rate + intensity_total;
        if rate < 1e-300 {
            return Ok(());
        }
        let lambda = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::Numerical(format!("lambda update: {e}")))?
            .sample(rng);
        if lambda > 0.0 && lambda.is_finite() {
            self.params.lambda = lambda;
            self.refresh();
        }
        Ok(())
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["rho", "lambda"]
    }

    fn param_values(&self) -> Vec<f64> {
        vec![self.params.rho, self.params.lambda]
    }

    fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "rho" => self.params.rho = positive(name, value)?,
            "lambda" => self.params.lambda = positive(name, value)?,
            _ => return Err(Error::UnknownParameter(name.to_string())),
        }
        self.refresh();
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Bernoulli segments with a Beta prior on the success probability
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliBetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BernoulliBetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self {
            alpha: positive("alpha", alpha)?,
            beta: positive("beta", beta)?,
        })
    }
}

/// `ln B(S + α, m − S + β) − ln B(α, β)` for the segment `s..=t`.
pub fn log_marginal_bernoulli(
    stats: &SufficientStats,
    s: usize,
    t: usize,
    params: &BernoulliBetaParams,
) -> Result<f64> {
    check_kind(stats, DataKind::Binary)?;
    stats.check_range(s, t)?;
    let successes = stats.segment_count(s, t) as f64;
    let m = (t - s + 1) as f64;
    let BernoulliBetaParams { alpha, beta } = *params;
    Ok(ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta)
        + ln_gamma(successes + alpha)
        + ln_gamma(m - successes + beta)
        - ln_gamma(m + alpha + beta))
}

/// Independent `Gamma(shape, rate)` hyperpriors on `α` and `β`, updated by
/// log-scale random-walk Metropolis with the given step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliHyperprior {
    pub shape: f64,
    pub rate: f64,
    pub step: f64,
}

impl Default for BernoulliHyperprior {
    fn default() -> Self {
        Self {
            shape: 1.0,
            rate: 1.0,
            step: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BernoulliBeta {
    params: BernoulliBetaParams,
    log_norm: f64,
    // ln Γ(j + α), ln Γ(j + β), ln Γ(j + α + β) for j = 0..=n
    ln_gamma_alpha: Vec<f64>,
    ln_gamma_beta: Vec<f64>,
    ln_gamma_sum: Vec<f64>,
}

impl BernoulliBeta {
    pub fn new(params: BernoulliBetaParams, stats: &SufficientStats) -> Result<Self> {
        check_kind(stats, DataKind::Binary)?;
        let len = stats.n() + 1;
        let mut model = Self {
            params,
            log_norm: 0.0,
            ln_gamma_alpha: vec![0.0; len],
            ln_gamma_beta: vec![0.0; len],
            ln_gamma_sum: vec![0.0; len],
        };
        model.refresh();
        Ok(model)
    }

    pub fn params(&self) -> BernoulliBetaParams {
        self.params
    }

    fn refresh(&mut self) {
        let BernoulliBetaParams { alpha, beta } = self.params;
        self.log_norm = ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta);
        for j in 0..self.ln_gamma_alpha.len() {
            let x = j as f64;
            self.ln_gamma_alpha[j] = ln_gamma(x + alpha);
            self.ln_gamma_beta[j] = ln_gamma(x + beta);
            self.ln_gamma_sum[j] = ln_gamma(x + alpha + beta);
        }
    }

    fn log_conditional(alpha: f64, beta: f64, sum_ln: f64, sum_ln1m: f64, groups: f64, h: &BernoulliHyperprior) -> f64 {
        groups * (ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta))
            + (alpha - 1.0) * sum_ln
            + (beta - 1.0) * sum_ln1m
            + (h.shape - 1.0) * alpha.ln()
            - h.rate * alpha
            + (h.shape - 1.0) * beta.ln()
            - h.rate * beta
    }
}

impl SegmentModel for BernoulliBeta {
    type Hyperprior = BernoulliHyperprior;

    fn kind(&self) -> DataKind {
        DataKind::Binary
    }

    #[inline]
    fn log_marginal(&self, stats: &SufficientStats, s: usize, t: usize) -> f64 {
        let successes = stats.segment_count(s, t) as usize;
        let m = t - s + 1;
        self.log_norm + self.ln_gamma_alpha[successes] + self.ln_gamma_beta[m - successes] - self.ln_gamma_sum[m]
    }

    fn sample_segment_param<R: Rng + ?Sized>(
        &self,
        stats: &SufficientStats,
        s: usize,
        t: usize,
        rng: &mut R,
    ) -> SegmentParamDraw {
        let successes = stats.segment_sum(s, t);
        let m = (t - s + 1) as f64;
        let theta = Beta::new(successes + self.params.alpha, m - successes + self.params.beta)
            .expect("posterior beta parameters are positive")
            .sample(rng);
        SegmentParamDraw { theta }
    }

    fn resample_hyperparams<R: Rng + ?Sized>(
        &mut self,
        stats: &SufficientStats,
        seg: &Segmentation,
        hyperprior: &BernoulliHyperprior,
        rng: &mut R,
    ) -> Result<()> {
        let (mut sum_ln, mut sum_ln1m) = (0.0, 0.0);
        for (s, t) in seg.segments() {
            // Clamped away from {0, 1}: extreme Beta draws round to the boundary.
            let phi = self
                .sample_segment_param(stats, s, t, rng)
                .theta
                .clamp(1e-300, 1.0 - f64::EPSILON);
            sum_ln += phi.ln();
            sum_ln1m += (1.0 - phi).ln();
        }
        let groups = (seg.k() + 1) as f64;
        let h = hyperprior;
        let BernoulliBetaParams { mut alpha, mut beta } = self.params;
        for which in 0..2 {
            let z: f64 = rng.sample(StandardNormal);
            let factor = (h.step * z).exp();
            let (a_new, b_new) = if which == 0 {
                (alpha * factor, beta)
            } else {
                (alpha, beta * factor)
            };
            // log-scale proposal: Jacobian term ln(x'/x)
            let log_ratio = Self::log_conditional(a_new, b_new, sum_ln, sum_ln1m, groups, h)
                - Self::log_conditional(alpha, beta, sum_ln, sum_ln1m, groups, h)
                + factor.ln();
            let u: f64 = rng.random();
            if log_ratio >= 0.0 || u.ln() < log_ratio {
                alpha = a_new;
                beta = b_new;
            }
        }
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(Error::Numerical("alpha/beta update left the support".into()));
        }
        self.params = BernoulliBetaParams { alpha, beta };
        self.refresh();
        Ok(())
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["alpha", "beta"]
    }

    fn param_values(&self) -> Vec<f64> {
        vec![self.params.alpha, self.params.beta]
    }

    fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "alpha" => self.params.alpha = positive(name, value)?,
            "beta" => self.params.beta = positive(name, value)?,
            _ => return Err(Error::UnknownParameter(name.to_string())),
        }
        self.refresh();
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Gaussian segments with a common error variance
// ---------------------------------------------------------------------------

/// `y_i ~ N(μ_j, σ²)` within segment `j`, `μ_j ~ N(μ0, ν²σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCommonVarParams {
    pub sigma: f64,
    pub mu0: f64,
    pub nu: f64,
}

impl GaussianCommonVarParams {
    pub fn new(sigma: f64, mu0: f64, nu: f64) -> Result<Self> {
        if !mu0.is_finite() {
            return Err(Error::parameter("mu0", mu0, "must be finite"));
        }
        Ok(Self {
            sigma: positive("sigma", sigma)?,
            mu0,
            nu: positive("nu", nu)?,
        })
    }
}

/// `−m/2 ln 2π − m ln σ − ln ν − ½ ln(m + 1/ν²) − Q/(2σ²)` with
/// `Q = ss + μ0²/ν² − (s + μ0/ν²)²/(m + 1/ν²)`.
///
/// `Q` is evaluated in the algebraically equal form
/// `W + m(ȳ − μ0)²/(1 + mν²)`, `W = Σ (y_i − ȳ)²`, which avoids
/// cancellation for data far from zero.
pub fn log_marginal_gaussian(
    stats: &SufficientStats,
    s: usize,
    t: usize,
    params: &GaussianCommonVarParams,
) -> Result<f64> {
    check_kind(stats, DataKind::Real)?;
    stats.check_range(s, t)?;
    Ok(GaussianCommonVar::from_params(*params).log_marginal(stats, s, t))
}

/// Hyperpriors for `γ = (σ², ν², μ0)`.
///
/// `σ² ~ InvGamma(sigma2_shape, sigma2_scale)` and likewise for `ν²`;
/// zero shape and scale give the improper `π(σ) ∝ 1/σ`, `π(ν) ∝ 1/ν`.
/// `mu0 = None` is the flat `π(μ0) ∝ 1`, `Some((mean, variance))` a normal prior.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaussianHyperprior {
    pub sigma2_shape: f64,
    pub sigma2_scale: f64,
    pub nu2_shape: f64,
    pub nu2_scale: f64,
    pub mu0: Option<(f64, f64)>,
}

/// Below this the `ν²` full conditional is treated as degenerate and the
/// update is skipped.
pub const MIN_NU2_SCALE: f64 = 1e-300;

/// Full-conditional draws of `(σ², ν², μ0)` given the segment means, in
/// the fixed order `σ²`, `ν²`, `μ0`.
///
/// With `k + 1` segments of lengths `m_j`:
/// `σ² | · ~ InvGamma(a_σ + (n+k+1)/2, b_σ + ½[Σ_j Σ_i (y_i − μ_j)² + Σ_j (μ_j − μ0)²/ν²])`,
/// `ν² | · ~ InvGamma(a_ν + (k+1)/2, b_ν + Σ_j (μ_j − μ0)²/(2σ²))`,
/// `μ0 | · ~ N(mean(μ_j), ν²σ²/(k+1))` under the flat prior.
pub fn update_gaussian_hyperparams<R: Rng + ?Sized>(
    stats: &SufficientStats,
    seg: &Segmentation,
    thetas: &[f64],
    params: &GaussianCommonVarParams,
    hyperprior: &GaussianHyperprior,
    rng: &mut R,
) -> Result<GaussianCommonVarParams> {
    check_kind(stats, DataKind::Real)?;
    let groups = seg.k() + 1;
    if thetas.len() != groups {
        return Err(Error::Config(format!(
            "expected {groups} segment means, got {}",
            thetas.len()
        )));
    }
    let n = stats.n() as f64;
    let GaussianCommonVarParams { sigma, mut mu0, nu } = *params;
    let mut sigma2 = sigma * sigma;
    let mut nu2 = nu * nu;

    let mut residual = 0.0;
    for ((s, t), &mu) in seg.segments().zip(thetas) {
        let m = (t - s + 1) as f64;
        let d = stats.segment_mean(s, t) - mu;
        residual += stats.segment_sse(s, t) + m * d * d;
    }
    let spread = |mu0: f64| thetas.iter().map(|mu| (mu - mu0).powi(2)).sum::<f64>();

    let shape = hyperprior.sigma2_shape + 0.5 * (n + groups as f64);
    let scale = hyperprior.sigma2_scale + 0.5 * (residual + spread(mu0) / nu2);
    if scale > 0.0 {
        sigma2 = sample_inverse_gamma(shape, scale, rng);
    }

    let shape = hyperprior.nu2_shape + 0.5 * groups as f64;
    let scale = hyperprior.nu2_scale + spread(mu0) / (2.0 * sigma2);
    if scale >= MIN_NU2_SCALE {
        nu2 = sample_inverse_gamma(shape, scale, rng);
    }

    let prior_var = nu2 * sigma2;
    let sum: f64 = thetas.iter().sum();
    let (mean, var) = match hyperprior.mu0 {
        None => (sum / groups as f64, prior_var / groups as f64),
        Some((m0, v0)) => {
            let precision = groups as f64 / prior_var + 1.0 / v0;
            ((sum / prior_var + m0 / v0) / precision, 1.0 / precision)
        }
    };
    let z: f64 = rng.sample(StandardNormal);
    mu0 = mean + var.sqrt() * z;

    let updated = GaussianCommonVarParams {
        sigma: sigma2.sqrt(),
        mu0,
        nu: nu2.sqrt(),
    };
    if !(updated.sigma.is_finite()
        && updated.sigma > 0.0
        && updated.nu.is_finite()
        && updated.nu > 0.0
        && mu0.is_finite())
    {
        return Err(Error::Numerical(format!(
            "gaussian hyperparameter update produced {updated:?}"
        )));
    }
    Ok(updated)
}

#[derive(Debug, Clone)]
pub struct GaussianCommonVar {
    params: GaussianCommonVarParams,
    prior_precision: f64,
    ln_sigma: f64,
    ln_nu: f64,
    half_inv_sigma2: f64,
}

impl GaussianCommonVar {
    pub fn new(params: GaussianCommonVarParams, stats: &SufficientStats) -> Result<Self> {
        check_kind(stats, DataKind::Real)?;
        Ok(Self::from_params(params))
    }

    fn from_params(params: GaussianCommonVarParams) -> Self {
        let mut model = Self {
            params,
            prior_precision: 0.0,
            ln_sigma: 0.0,
            ln_nu: 0.0,
            half_inv_sigma2: 0.0,
        };
        model.refresh();
        model
    }

    pub fn params(&self) -> GaussianCommonVarParams {
        self.params
    }

    fn refresh(&mut self) {
        let GaussianCommonVarParams { sigma, nu, .. } = self.params;
        self.prior_precision = 1.0 / (nu * nu);
        self.ln_sigma = sigma.ln();
        self.ln_nu = nu.ln();
        self.half_inv_sigma2 = 0.5 / (sigma * sigma);
    }
}

impl SegmentModel for GaussianCommonVar {
    type Hyperprior = GaussianHyperprior;

    fn kind(&self) -> DataKind {
        DataKind::Real
    }

    #[inline]
    fn log_marginal(&self, stats: &SufficientStats, s: usize, t: usize) -> f64 {
        let m = (t - s + 1) as f64;
        let a = self.prior_precision;
        let dev = stats.segment_mean(s, t) - self.params.mu0;
        let q = stats.segment_sse(s, t) + a * m * dev * dev / (m + a);
        -0.5 * m * LN_2PI - m * self.ln_sigma - self.ln_nu - 0.5 * (m + a).ln() - q * self.half_inv_sigma2
    }

    fn sample_segment_param<R: Rng + ?Sized>(
        &self,
        stats: &SufficientStats,
        s: usize,
        t: usize,
        rng: &mut R,
    ) -> SegmentParamDraw {
        let m = (t - s + 1) as f64;
        let a = self.prior_precision;
        let mu0 = self.params.mu0;
        let mean = mu0 + m * (stats.segment_mean(s, t) - mu0) / (m + a);
        let sd = self.params.sigma / (m + a).sqrt();
        let theta = Normal::new(mean, sd)
            .expect("posterior normal parameters are finite")
            .sample(rng);
        SegmentParamDraw { theta }
    }

    fn resample_hyperparams<R: Rng + ?Sized>(
        &mut self,
        stats: &SufficientStats,
        seg: &Segmentation,
        hyperprior: &GaussianHyperprior,
        rng: &mut R,
    ) -> Result<()> {
        let thetas: Vec<f64> = seg
            .segments()
            .map(|(s, t)| self.sample_segment_param(stats, s, t, rng).theta)
            .collect();
        self.params = update_gaussian_hyperparams(stats, seg, &thetas, &self.params, hyperprior, rng)?;
        self.refresh();
        Ok(())
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["sigma", "mu0", "nu"]
    }

    fn param_values(&self) -> Vec<f64> {
        vec![self.params.sigma, self.params.mu0, self.params.nu]
    }

    fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "sigma" => self.params.sigma = positive(name, value)?,
            "nu" => self.params.nu = positive(name, value)?,
            "mu0" if value.is_finite() => self.params.mu0 = value,
            "mu0" => return Err(Error::parameter(name, value, "must be finite")),
            _ => return Err(Error::UnknownParameter(name.to_string())),
        }
        self.refresh();
        Ok(())
    }
}
