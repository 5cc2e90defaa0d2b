//! Run configuration: a flat `key = value` file, optionally layered over a
//! named preset and overridden from the command line.
//!
//! A `summary.json` written by a previous run is also accepted; its `config`
//! object is the fully resolved configuration of that run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::Value;

use crate::error::{CliError, Result};
use crate::fixtures::Preset;

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    (
        "preset",
        "bundled dataset and defaults: coal, streakiness, well-log-synthetic",
    ),
    ("input", "data file, relative to the config file"),
    (
        "format",
        "values (one number per line) or event-dates (ISO dates binned into counts)",
    ),
    ("kind", "counts, binary or real"),
    ("start", "first day of the first bin (event-dates)"),
    ("end", "last day covered by the bins, inclusive (event-dates)"),
    ("bin_days", "bin width in days (event-dates)"),
    ("model", "poisson-gamma, bernoulli-beta or gaussian"),
    ("rho", "Poisson-Gamma prior shape"),
    ("lambda", "Poisson-Gamma prior rate"),
    ("alpha", "Beta prior first shape"),
    ("beta", "Beta prior second shape"),
    ("sigma", "Gaussian noise standard deviation"),
    ("mu0", "mean of the segment-mean prior"),
    ("nu", "segment-mean prior standard deviation in units of sigma"),
    ("prior", "segmentation prior: geometric or even-order-stats"),
    ("p", "changepoint probability (geometric prior and point process)"),
    ("k_prior", "prior on the number of changepoints: uniform or poisson"),
    ("k_prior_mean", "mean of the truncated Poisson k prior"),
    ("kmax", "largest number of changepoints"),
    ("sweeps", "sweeps kept after burn-in"),
    ("burn_in", "sweeps discarded first"),
    ("thin", "keep every thin-th sweep"),
    ("seed", "random seed"),
    ("move_window", "random-walk half-width"),
    (
        "gibbs",
        "probability of a Gibbs move: inverse-sqrt or a number in [0, 1]",
    ),
    ("add_probs", "comma-separated add probabilities for k = 0..kmax"),
    ("update_p", "Gibbs update of p under the geometric prior"),
    ("p_alpha", "Beta hyperprior on p, first shape"),
    ("p_beta", "Beta hyperprior on p, second shape"),
    ("update_gamma", "update the model hyperparameters"),
    ("lambda_shape", "Gamma hyperprior on lambda, shape"),
    ("lambda_rate", "Gamma hyperprior on lambda, rate"),
    ("hyper_shape", "Gamma hyperprior on alpha and beta, shape"),
    ("hyper_rate", "Gamma hyperprior on alpha and beta, rate"),
    ("hyper_step", "log-scale random-walk step for alpha and beta"),
    ("sigma2_shape", "inverse-gamma hyperprior on sigma^2, shape"),
    ("sigma2_scale", "inverse-gamma hyperprior on sigma^2, scale"),
    ("nu2_shape", "inverse-gamma hyperprior on nu^2, shape"),
    ("nu2_scale", "inverse-gamma hyperprior on nu^2, scale"),
    ("mu0_mean", "normal hyperprior on mu0, mean (flat when absent)"),
    ("mu0_var", "normal hyperprior on mu0, variance"),
    ("draws", "number of exact draws from the recursions"),
    ("process", "duration distribution: geometric or negative-binomial"),
    ("r", "negative-binomial shape"),
    ("first_process", "duration distribution before the first changepoint"),
    ("first_p", "success probability of the first duration"),
    ("first_r", "negative-binomial shape of the first duration"),
    ("truncate", "drop recursion terms below this relative size"),
    (
        "independence_sweeps",
        "iterations of the independence sampler seeded by the draws",
    ),
    ("sweep_param", "quantity varied by a sweep: p or a model parameter name"),
    ("grid", "comma-separated sweep values"),
    ("grid_from", "first sweep value"),
    ("grid_to", "last sweep value"),
    ("grid_steps", "number of evenly spaced sweep values"),
];

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

/// Resolved key-value configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{origin}:{}: expected `key = value`", i + 1)));
        };
        let key = key.trim();
        if !known(key) {
            return Err(CliError::Config(format!("{origin}:{}: unknown key `{key}`", i + 1)));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("{origin}:{}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

/// Reads a JSON object of scalars, or the `config` member of a run summary.
pub fn parse_json(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}: invalid JSON: {e}")))?;
    let object = match value.get("config") {
        Some(Value::Object(inner)) => inner,
        _ => value
            .as_object()
            .ok_or_else(|| CliError::Config(format!("{origin}: expected a JSON object")))?,
    };
    let mut out = BTreeMap::new();
    for (key, v) in object {
        if !known(key) {
            return Err(CliError::Config(format!("{origin}: unknown key `{key}`")));
        }
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            _ => return Err(CliError::Config(format!("{origin}: `{key}` must be a scalar"))),
        };
        out.insert(key.clone(), text);
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_map(values: BTreeMap<String, String>, base_dir: PathBuf) -> Self {
        Self { values, base_dir }
    }

    /// Loads a config file, detecting JSON by a leading `{`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let origin = path.display().to_string();
        let values = if text.trim_start().starts_with('{') {
            parse_json(&text, &origin)?
        } else {
            parse_text(&text, &origin)?
        };
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { values, base_dir })
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
            let key = key.trim();
            if !known(key) {
                return Err(CliError::Config(format!("unknown key `{key}`")));
            }
            self.values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(known(key));
        self.values.insert(key.to_string(), value.into());
    }

    /// Fills in the preset's defaults and makes `input` absolute, giving the
    /// configuration that is echoed into the run summary.
    pub fn resolve(mut self) -> Result<Self> {
        if let Some(name) = self.values.get("preset").cloned() {
            let preset = Preset::from_str(&name)?;
            for (key, value) in preset.defaults() {
                self.values.entry(key.to_string()).or_insert_with(|| value.to_string());
            }
        }
        if let Some(input) = self.values.get("input").cloned() {
            let path = self.base_dir.join(&input);
            let absolute = std::path::absolute(&path).map_err(|e| CliError::io(&path, e))?;
            self.values.insert("input".into(), absolute.display().to_string());
        }
        self.values.entry("seed".into()).or_insert_with(|| "0".into());
        Ok(self)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require_str(&self, key: &str) -> Result<&str> {
        self.str(key)
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        self.str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Config(format!("`{key}` must be {what}, got `{v}`")))
            })
            .transpose()
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.parse::<f64>(key, "a number")? {
            Some(v) if !v.is_finite() => Err(CliError::Config(format!("`{key}` must be finite"))),
            other => Ok(other),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse(key, "a nonnegative integer")
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.usize(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.parse(key, "a nonnegative integer")?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self.parse(key, "true or false")?.unwrap_or(default))
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.str(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| CliError::Config(format!("`{key}` must be a list of numbers, got `{v}`")))
                    })
                    .collect()
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format() {
        let map = parse_text("# comment\nsweeps = 100\n\nkind=counts # trailing\n", "t").unwrap();
        assert_eq!(map["sweeps"], "100");
        assert_eq!(map["kind"], "counts");
        assert!(parse_text("nonsense = 1", "t").is_err());
        assert!(parse_text("sweeps 100", "t").is_err());
        assert!(parse_text("seed = 1\nseed = 2", "t").is_err());
    }

    #[test]
    fn json_formats() {
        let direct = parse_json(r#"{"sweeps": 10, "kind": "real", "update_p": true}"#, "j").unwrap();
        assert_eq!(direct["sweeps"], "10");
        assert_eq!(direct["update_p"], "true");
        let nested = parse_json(r#"{"k_dist": [1.0], "config": {"seed": "7"}}"#, "j").unwrap();
        assert_eq!(nested["seed"], "7");
        assert!(parse_json(r#"{"bogus": 1}"#, "j").is_err());
    }

    #[test]
    fn typed_getters() {
        let mut map = BTreeMap::new();
        map.insert("sweeps".to_string(), "12".to_string());
        map.insert("p".to_string(), "abc".to_string());
        map.insert("grid".to_string(), "0.1, 0.2,0.3".to_string());
        let cfg = RunConfig::from_map(map, PathBuf::new());
        assert_eq!(cfg.usize_or("sweeps", 1).unwrap(), 12);
        assert_eq!(cfg.usize_or("thin", 3).unwrap(), 3);
        assert!(cfg.f64("p").is_err());
        assert_eq!(cfg.f64_list("grid").unwrap().unwrap(), vec![0.1, 0.2, 0.3]);
        assert!(cfg.require_f64("sigma").is_err());
    }

    #[test]
    fn overrides_and_presets() {
        let mut cfg = RunConfig::from_map(BTreeMap::new(), PathBuf::new());
        cfg.apply_overrides(&["preset=coal".into(), "sweeps = 5".into()])
            .unwrap();
        let cfg = cfg.resolve().unwrap();
        assert_eq!(cfg.str("sweeps"), Some("5"));
        assert_eq!(cfg.str("prior"), Some("even-order-stats"));
        assert_eq!(cfg.str("seed"), Some("0"));
        let mut bad = RunConfig::default();
        assert!(bad.apply_overrides(&["nope=1".into()]).is_err());
    }
}
