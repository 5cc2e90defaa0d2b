//! Log-space arithmetic shared by the models, priors and recursions.

/// Natural log of the gamma function.
///
/// Backed by the Lanczos approximation in `statrs` (g = 10.900511, 11 terms),
/// which is accurate to about 1e-15 relative over the positive reals.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln(n!)`.
#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `ln Σ exp(x_i)` over a slice, two-pass with max subtraction.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Streaming log-sum-exp with a running maximum. When a new maximum
/// arrives the accumulated sum is rescaled, so one pass suffices.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_integers_match_factorials() {
        let mut fact = 1.0f64;
        for n in 1..25u32 {
            fact *= f64::from(n);
            let lg = ln_gamma(f64::from(n) + 1.0);
            assert!((lg - fact.ln()).abs() <= 1e-13 * fact.ln().max(1.0), "n = {n}");
        }
        assert!(ln_gamma(1.0).abs() < 1e-15);
        assert!(ln_gamma(2.0).abs() < 1e-15);
        // Γ(1/2) = √π
        let half = 0.5 * std::f64::consts::PI.ln();
        assert!((ln_gamma(0.5) - half).abs() < 1e-14);
    }

    #[test]
    fn ln_binomial_small_values() {
        assert!((ln_binomial(9, 3) - 84f64.ln()).abs() < 1e-13);
        assert_eq!(ln_binomial(3, 4), f64::NEG_INFINITY);
        assert!(ln_binomial(7, 0).abs() < 1e-15);
    }

    #[test]
    fn streaming_matches_two_pass() {
        let xs = [-1000.0, 3.0, -2.5, 700.0, 699.0, f64::NEG_INFINITY, 12.0];
        let mut acc = LogSumExp::new();
        for &x in &xs {
            acc.add(x);
        }
        assert!((acc.value() - log_sum_exp(&xs)).abs() < 1e-12);
        assert_eq!(LogSumExp::new().value(), f64::NEG_INFINITY);
        assert!((log_add_exp(1234.0, 1232.0) - 1_234.126_928_011_043).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::default();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }
}
