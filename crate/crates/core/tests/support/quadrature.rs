//! Segment marginal likelihoods by numerical integration over the segment
//! parameter, computed from the raw observations.
//!
//! Each integrand is mapped to the real line (log for an intensity, logit for
//! a probability) so that it is smooth with exponentially decaying tails,
//! scaled by its value at the mode, and integrated piecewise around the mode.

use statrs::function::gamma::ln_gamma;

fn ln_factorial_direct(y: u64) -> f64 {
    (2..=y).map(|i| (i as f64).ln()).sum()
}

/// `ln ∫ exp(h(v)) dv` given the mode and a scale of the peak.
fn log_integrate(h: impl Fn(f64) -> f64, mode: f64, scale: f64, lo: f64, hi: f64) -> f64 {
    let peak = h(mode);
    let f = |v: f64| (h(v) - peak).exp();
    let mut cuts = vec![lo];
    for m in [-40.0, -12.0, -4.0, -1.0, 0.0, 1.0, 4.0, 12.0, 40.0] {
        let c = mode + m * scale;
        if c > lo && c < hi {
            cuts.push(c);
        }
    }
    cuts.push(hi);
    let total: f64 = cuts
        .windows(2)
        .map(|w| quadrature::integrate(f, w[0], w[1], 1e-15 * scale).integral)
        .sum();
    peak + total.ln()
}

pub fn poisson(y: &[f64], rho: f64, lambda: f64) -> f64 {
    let m = y.len() as f64;
    let s: f64 = y.iter().sum();
    let log_fact: f64 = y.iter().map(|&v| ln_factorial_direct(v as u64)).sum();
    // μ = e^v, including the Jacobian e^v
    let h = |v: f64| {
        let mu = v.exp();
        let lik: f64 = y.iter().map(|&yi| yi * v - mu).sum::<f64>() - log_fact;
        let prior = rho * lambda.ln() - ln_gamma(rho) + (rho - 1.0) * v - lambda * mu;
        lik + prior + v
    };
    let a = s + rho;
    let b = m + lambda;
    let mode = (a / b).ln();
    let scale = 1.0 / a.sqrt();
    log_integrate(h, mode, scale, mode - 60.0 / a - 20.0 * scale, mode + 6.0)
}

pub fn bernoulli(y: &[f64], alpha: f64, beta: f64) -> f64 {
    let ones: f64 = y.iter().sum();
    let zeros = y.len() as f64 - ones;
    let ln_beta_fn = ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta);
    // π = 1/(1 + e^{−v}), including the Jacobian π(1 − π)
    let h = |v: f64| {
        let ln_p = -(-v).exp().ln_1p();
        let ln_q = -v.exp().ln_1p();
        let lik: f64 = y.iter().map(|&yi| if yi == 1.0 { ln_p } else { ln_q }).sum();
        lik + (alpha - 1.0) * ln_p + (beta - 1.0) * ln_q - ln_beta_fn + ln_p + ln_q
    };
    let a = ones + alpha;
    let b = zeros + beta;
    let mode = (a / b).ln();
    let scale = ((a + b) / (a * b)).sqrt();
    log_integrate(
        h,
        mode,
        scale,
        mode - 60.0 / a - 20.0 * scale,
        mode + 60.0 / b + 20.0 * scale,
    )
}

pub fn gaussian(y: &[f64], sigma: f64, mu0: f64, nu: f64) -> f64 {
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    let var = sigma * sigma;
    let prior_var = nu * nu * var;
    let h = |mu: f64| {
        let lik: f64 = y
            .iter()
            .map(|&yi| -0.5 * ln_2pi - sigma.ln() - (yi - mu).powi(2) / (2.0 * var))
            .sum();
        lik - 0.5 * ln_2pi - 0.5 * prior_var.ln() - (mu - mu0).powi(2) / (2.0 * prior_var)
    };
    let precision = y.len() as f64 / var + 1.0 / prior_var;
    let mode = (y.iter().sum::<f64>() / var + mu0 / prior_var) / precision;
    let scale = precision.sqrt().recip();
    log_integrate(h, mode, scale, mode - 60.0 * scale, mode + 60.0 * scale)
}
