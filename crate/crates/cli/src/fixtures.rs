//! Bundled datasets and the defaults that go with them.

use std::str::FromStr;

use crate::error::CliError;

/// Dates of serious coal-mining disasters in Great Britain, 1851 to 1962.
pub const COAL_DISASTERS: &str = include_str!("../fixtures/coal_disasters.txt");
/// Synthetic binary record with a weak change in success rate.
pub const STREAKINESS: &str = include_str!("../fixtures/streakiness_synthetic.txt");
/// Synthetic 4050-point series with large level shifts.
pub const WELL_LOG: &str = include_str!("../fixtures/well_log_synthetic.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Coal,
    Streakiness,
    WellLogSynthetic,
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "coal" => Ok(Preset::Coal),
            "streakiness" => Ok(Preset::Streakiness),
            "well-log-synthetic" => Ok(Preset::WellLogSynthetic),
            other => Err(CliError::Config(format!("unknown preset `{other}`"))),
        }
    }
}

impl Preset {
    pub fn data(self) -> &'static str {
        match self {
            Preset::Coal => COAL_DISASTERS,
            Preset::Streakiness => STREAKINESS,
            Preset::WellLogSynthetic => WELL_LOG,
        }
    }

    /// Keys filled in when absent from the configuration.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            // weekly counts; Gamma(1, 200/7) intensities with 200/7 as the rate
            Preset::Coal => &[
                ("format", "event-dates"),
                ("kind", "counts"),
                ("start", "1851-03-15"),
                ("end", "1962-03-22"),
                ("bin_days", "7"),
                ("model", "poisson-gamma"),
                ("rho", "1"),
                ("lambda", "28.571428571428573"),
                ("prior", "even-order-stats"),
                ("k_prior", "poisson"),
                ("k_prior_mean", "3"),
                ("kmax", "30"),
                ("sweeps", "500000"),
                ("burn_in", "10000"),
                ("thin", "50"),
            ],
            Preset::Streakiness => &[
                ("format", "values"),
                ("kind", "binary"),
                ("model", "bernoulli-beta"),
                ("alpha", "1"),
                ("beta", "1"),
                ("prior", "geometric"),
                ("p", "0.02"),
                ("update_p", "true"),
                ("k_prior", "uniform"),
                ("kmax", "10"),
                ("sweeps", "1000000"),
                ("burn_in", "100000"),
                ("thin", "100"),
                ("draws", "100000"),
                ("process", "geometric"),
                ("sweep_param", "p"),
                ("grid_from", "0.005"),
                ("grid_to", "0.1"),
                ("grid_steps", "20"),
            ],
            Preset::WellLogSynthetic => &[
                ("format", "values"),
                ("kind", "real"),
                ("model", "gaussian"),
                ("sigma", "2330"),
                ("mu0", "115000"),
                ("nu", "4.3"),
                ("prior", "geometric"),
                ("p", "0.013"),
                ("update_p", "true"),
                ("update_gamma", "true"),
                ("k_prior", "uniform"),
                ("sweeps", "100000"),
                ("burn_in", "10000"),
                ("thin", "10"),
                ("draws", "100000"),
                ("process", "geometric"),
                ("sweep_param", "p"),
                ("grid", "0.005,0.01,0.015,0.02,0.025,0.03"),
            ],
        }
    }
}
