//! Executes one run mode and writes its artifacts.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use cpseg_core::analysis::{
    enumerate_exact_posterior, modal_k, segmentation_count, sensitivity_sweep, summarize, PosteriorSummary, SweepParam,
};
use cpseg_core::recursions::{
    compute_recursions, independence_mcmc, sample_changepoints, DurationPrior, RecursionOptions, RecursionSampleSet,
};
use cpseg_core::sampler::{run_chain, ChainOutput, GibbsSchedule, MoveStats, SamplerConfig};
use cpseg_core::{
    build_stats, BernoulliBeta, BernoulliBetaParams, BernoulliHyperprior, DataKind, GaussianCommonVar,
    GaussianCommonVarParams, GaussianHyperprior, KPrior, PointProcess, PoissonGamma, PoissonGammaParams,
    PoissonHyperprior, SegPrior, SegmentModel, SufficientStats,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::fixtures::Preset;
use crate::ingest;
use crate::output::{fmt_f64, join_usize, json_f64, json_f64s, pos_prob_csv, write_file, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sample,
    Recurse,
    Sweep,
    Enumerate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sample => "sample",
            Mode::Recurse => "recurse",
            Mode::Sweep => "sweep",
            Mode::Enumerate => "enumerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModelName {
    Poisson,
    Bernoulli,
    Gaussian,
}

impl ModelName {
    fn parse(cfg: &RunConfig) -> Result<Self> {
        match cfg.require_str("model")? {
            "poisson-gamma" => Ok(ModelName::Poisson),
            "bernoulli-beta" => Ok(ModelName::Bernoulli),
            "gaussian" => Ok(ModelName::Gaussian),
            other => Err(CliError::Config(format!("unknown model `{other}`"))),
        }
    }

    fn kind(self) -> DataKind {
        match self {
            ModelName::Poisson => DataKind::Counts,
            ModelName::Bernoulli => DataKind::Binary,
            ModelName::Gaussian => DataKind::Real,
        }
    }
}

fn parse_kind(text: &str) -> Result<DataKind> {
    match text {
        "counts" => Ok(DataKind::Counts),
        "binary" => Ok(DataKind::Binary),
        "real" => Ok(DataKind::Real),
        other => Err(CliError::Config(format!("unknown data kind `{other}`"))),
    }
}

/// Reads the series named by `input`, or the preset's bundled data.
pub fn load_series(cfg: &RunConfig) -> Result<SufficientStats> {
    let model = ModelName::parse(cfg)?;
    let kind = match cfg.str("kind") {
        Some(k) => parse_kind(k)?,
        None => model.kind(),
    };
    let (text, origin) = match (cfg.str("input"), cfg.str("preset")) {
        (Some(path), _) => (
            std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
            path.to_string(),
        ),
        (None, Some(name)) => (Preset::from_str(name)?.data().to_string(), format!("preset {name}")),
        (None, None) => return Err(CliError::Config("no `input` file or `preset` given".into())),
    };
    let values = match cfg.str("format").unwrap_or("values") {
        "values" => ingest::parse_values(&text, &origin)?,
        "event-dates" => {
            let dates = ingest::parse_dates(&text, &origin)?;
            let start = ingest::parse_date(cfg.require_str("start")?, "start")?;
            let end = ingest::parse_date(cfg.require_str("end")?, "end")?;
            let bin_days = cfg.usize_or("bin_days", 7)?;
            let bin_days = u32::try_from(bin_days).map_err(|_| CliError::Config("bin_days is too large".into()))?;
            ingest::bin_events(&dates, start, end, bin_days)?
        }
        other => return Err(CliError::Config(format!("unknown format `{other}`"))),
    };
    Ok(build_stats(&ingest::to_series(values, kind)?))
}

/// Runs `mode` and writes its artifacts into `out`, which is created if needed.
pub fn execute(mode: Mode, cfg: &RunConfig, out: &Path) -> Result<()> {
    let stats = load_series(cfg)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match ModelName::parse(cfg)? {
        ModelName::Poisson => {
            let params = PoissonGammaParams::new(cfg.require_f64("rho")?, cfg.require_f64("lambda")?)?;
            let hyper = PoissonHyperprior {
                lambda_shape: cfg.f64_or("lambda_shape", 0.0)?,
                lambda_rate: cfg.f64_or("lambda_rate", 0.0)?,
            };
            dispatch(mode, cfg, out, &stats, PoissonGamma::new(params, &stats)?, hyper)
        }
        ModelName::Bernoulli => {
            let params = BernoulliBetaParams::new(cfg.require_f64("alpha")?, cfg.require_f64("beta")?)?;
            let d = BernoulliHyperprior::default();
            let hyper = BernoulliHyperprior {
                shape: cfg.f64_or("hyper_shape", d.shape)?,
                rate: cfg.f64_or("hyper_rate", d.rate)?,
                step: cfg.f64_or("hyper_step", d.step)?,
            };
            dispatch(mode, cfg, out, &stats, BernoulliBeta::new(params, &stats)?, hyper)
        }
        ModelName::Gaussian => {
            let params = GaussianCommonVarParams::new(
                cfg.require_f64("sigma")?,
                cfg.require_f64("mu0")?,
                cfg.require_f64("nu")?,
            )?;
            let mu0 = match (cfg.f64("mu0_mean")?, cfg.f64("mu0_var")?) {
                (None, None) => None,
                (Some(m), Some(v)) => Some((m, v)),
                _ => return Err(CliError::Config("mu0_mean and mu0_var must be given together".into())),
            };
            let hyper = GaussianHyperprior {
                sigma2_shape: cfg.f64_or("sigma2_shape", 0.0)?,
                sigma2_scale: cfg.f64_or("sigma2_scale", 0.0)?,
                nu2_shape: cfg.f64_or("nu2_shape", 0.0)?,
                nu2_scale: cfg.f64_or("nu2_scale", 0.0)?,
                mu0,
            };
            dispatch(mode, cfg, out, &stats, GaussianCommonVar::new(params, &stats)?, hyper)
        }
    }
}

fn dispatch<M: SegmentModel>(
    mode: Mode,
    cfg: &RunConfig,
    out: &Path,
    stats: &SufficientStats,
    model: M,
    hyper: M::Hyperprior,
) -> Result<()> {
    let mut summary = Map::new();
    summary.insert("mode".into(), json!(mode.name()));
    summary.insert("n".into(), json!(stats.n()));
    summary.insert("seed".into(), json!(cfg.u64_or("seed", 0)?));
    match mode {
        Mode::Sample => sample(cfg, out, stats, model, hyper, &mut summary)?,
        Mode::Recurse => recurse(cfg, out, stats, model, hyper, &mut summary)?,
        Mode::Sweep => sweep(cfg, out, stats, model, &mut summary)?,
        Mode::Enumerate => enumerate(cfg, out, stats, model, &mut summary)?,
    }
    summary.insert("config".into(), config_echo(cfg));
    write_json(&out.join("summary.json"), &Value::Object(summary))
}

fn config_echo(cfg: &RunConfig) -> Value {
    Value::Object(cfg.values().iter().map(|(k, v)| (k.clone(), json!(v))).collect())
}

fn kmax(cfg: &RunConfig, n: usize) -> Result<usize> {
    Ok(cfg.usize_or("kmax", n - 1)?.min(n - 1))
}

fn seg_prior(cfg: &RunConfig) -> Result<SegPrior> {
    match cfg.str("prior").unwrap_or("geometric") {
        "geometric" => Ok(SegPrior::geometric(cfg.require_f64("p")?)?),
        "even-order-stats" => Ok(SegPrior::EvenOrderStats),
        other => Err(CliError::Config(format!("unknown segmentation prior `{other}`"))),
    }
}

fn k_prior(cfg: &RunConfig, kmax: usize) -> Result<KPrior> {
    match cfg.str("k_prior").unwrap_or("uniform") {
        "uniform" => Ok(KPrior::uniform(kmax)),
        "poisson" => Ok(KPrior::truncated_poisson(cfg.require_f64("k_prior_mean")?, kmax)?),
        other => Err(CliError::Config(format!("unknown k prior `{other}`"))),
    }
}

fn point_process(cfg: &RunConfig, kind_key: &str, p_key: &str, r_key: &str) -> Result<PointProcess> {
    match cfg.str(kind_key).unwrap_or("geometric") {
        "geometric" => Ok(PointProcess::geometric(cfg.require_f64(p_key)?)?),
        "negative-binomial" => Ok(PointProcess::negative_binomial(
            cfg.require_f64(r_key)?,
            cfg.require_f64(p_key)?,
        )?),
        other => Err(CliError::Config(format!("unknown point process `{other}`"))),
    }
}

fn duration_prior(cfg: &RunConfig) -> Result<DurationPrior> {
    let duration = point_process(cfg, "process", "p", "r")?;
    if cfg.contains("first_process") || cfg.contains("first_p") || cfg.contains("first_r") {
        let first = match cfg.str("first_process").unwrap_or("geometric") {
            "geometric" => PointProcess::geometric(cfg.f64_or("first_p", duration.p())?)?,
            "negative-binomial" => {
                PointProcess::negative_binomial(cfg.require_f64("first_r")?, cfg.f64_or("first_p", duration.p())?)?
            }
            other => return Err(CliError::Config(format!("unknown point process `{other}`"))),
        };
        Ok(DurationPrior::with_first(duration, first))
    } else {
        Ok(DurationPrior::new(duration))
    }
}

fn sampler_config<H: Default>(cfg: &RunConfig, kmax: usize, hyper: H, sweeps_key: &str) -> Result<SamplerConfig<H>> {
    let mut c = SamplerConfig::new(kmax);
    c.add_probs = cfg.f64_list("add_probs")?;
    c.move_window = cfg.usize_or("move_window", c.move_window)?;
    c.gibbs = match cfg.str("gibbs") {
        None | Some("inverse-sqrt") => GibbsSchedule::InverseSqrt,
        Some(_) => GibbsSchedule::Constant(cfg.require_f64("gibbs")?),
    };
    c.sweeps = cfg.usize_or(sweeps_key, c.sweeps)?;
    c.burn_in = cfg.usize_or("burn_in", c.burn_in)?;
    c.thin = cfg.usize_or("thin", c.thin)?;
    c.seed = cfg.u64_or("seed", 0)?;
    c.update_p = cfg.bool_or("update_p", false)?;
    c.p_hyperprior = (cfg.f64_or("p_alpha", 1.0)?, cfg.f64_or("p_beta", 1.0)?);
    c.update_gamma = cfg.bool_or("update_gamma", false)?;
    c.hyperprior = hyper;
    Ok(c)
}

/// `sweep,k,p,<γ…>,log_post,taus` with changepoints space-separated.
fn trace_csv(chain: &ChainOutput) -> String {
    let mut out = String::from("sweep,k,p");
    for name in &chain.gamma_names {
        write!(out, ",{name}").unwrap();
    }
    out.push_str(",log_post,taus\n");
    for r in &chain.records {
        write!(out, "{},{},", r.sweep, r.k()).unwrap();
        if let Some(p) = r.p {
            out.push_str(&fmt_f64(p));
        }
        for &g in &r.gamma {
            write!(out, ",{}", fmt_f64(g)).unwrap();
        }
        writeln!(out, ",{},{}", fmt_f64(r.log_post), join_usize(&r.taus, " ")).unwrap();
    }
    out
}

fn acceptance_json(stats: &MoveStats) -> Value {
    let mut rates = Map::new();
    for (name, rate) in stats.rates() {
        rates.insert(name.into(), rate.map_or(Value::Null, json_f64));
    }
    Value::Object(rates)
}

fn chain_summary(summary: &mut Map<String, Value>, s: &PosteriorSummary, moves: &MoveStats) {
    summary.insert("samples".into(), json!(s.samples));
    summary.insert("k_dist".into(), json_f64s(&s.k_dist));
    summary.insert("mean_k".into(), json_f64(s.mean_k));
    let hyper: Map<String, Value> = s.hyper_means.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
    summary.insert("hyper_means".into(), Value::Object(hyper));
    summary.insert("acceptance".into(), acceptance_json(moves));
    summary.insert("iact".into(), json_f64(s.iact));
    summary.insert("iact_capped".into(), json!(s.iact_capped));
    summary.insert("acf".into(), json_f64s(&s.acf));
}

fn sample<M: SegmentModel>(
    cfg: &RunConfig,
    out: &Path,
    stats: &SufficientStats,
    model: M,
    hyper: M::Hyperprior,
    summary: &mut Map<String, Value>,
) -> Result<()> {
    let kmax = kmax(cfg, stats.n())?;
    let config = sampler_config(cfg, kmax, hyper, "sweeps")?;
    let chain = run_chain(stats, model, seg_prior(cfg)?, k_prior(cfg, kmax)?, config)?;
    let s = summarize(&chain, None)?;
    chain_summary(summary, &s, &chain.move_stats);
    write_file(&out.join("trace.csv"), &trace_csv(&chain))?;
    write_file(&out.join("pos_prob.csv"), &pos_prob_csv(&s.pos_prob))
}

fn draw_pos_prob(set: &RecursionSampleSet) -> Vec<f64> {
    let mut pos = vec![0.0; set.n() - 1];
    for seg in set.draws() {
        for &t in seg.taus() {
            pos[t - 1] += 1.0;
        }
    }
    let m = set.len() as f64;
    pos.iter_mut().for_each(|x| *x /= m);
    pos
}

fn draws_csv(set: &RecursionSampleSet) -> String {
    let mut out = String::from("draw,k,taus\n");
    for (i, seg) in set.draws().iter().enumerate() {
        writeln!(out, "{},{},{}", i, seg.k(), join_usize(seg.taus(), " ")).unwrap();
    }
    out
}

fn recurse<M: SegmentModel>(
    cfg: &RunConfig,
    out: &Path,
    stats: &SufficientStats,
    model: M,
    hyper: M::Hyperprior,
    summary: &mut Map<String, Value>,
) -> Result<()> {
    let options = RecursionOptions {
        truncate_below: cfg.f64("truncate")?,
    };
    let table = compute_recursions(stats, &model, duration_prior(cfg)?, options)?;
    let draws = cfg.usize_or("draws", 100_000)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64_or("seed", 0)?);
    let set = sample_changepoints(&table, stats, &model, draws, &mut rng)?;
    let k_dist = set.k_distribution();
    let (mode_k, tie) = modal_k(&k_dist)?;
    summary.insert("log_evidence".into(), json_f64(table.log_evidence()));
    summary.insert("draws".into(), json!(set.len()));
    summary.insert("k_dist".into(), json_f64s(&k_dist));
    summary.insert("modal_k".into(), json!(mode_k));
    summary.insert("modal_k_tie".into(), json!(tie));
    let pos = draw_pos_prob(&set);
    summary.insert("mean_k".into(), json_f64(pos.iter().sum()));
    write_file(&out.join("draws.csv"), &draws_csv(&set))?;
    write_file(&out.join("pos_prob.csv"), &pos_prob_csv(&pos))?;

    if let Some(iterations) = cfg.usize("independence_sweeps")? {
        if iterations == 0 {
            return Err(CliError::Config("independence_sweeps must be positive".into()));
        }
        let kmax = stats.n() - 1;
        let config = sampler_config(cfg, kmax, hyper, "independence_sweeps")?;
        let result = independence_mcmc(
            &set,
            stats,
            model,
            seg_prior(cfg)?,
            k_prior(cfg, kmax)?,
            config,
            &mut rng,
        )?;
        let s = summarize(&result.chain, None)?;
        let mut inner = Map::new();
        inner.insert("unique_visited".into(), json!(result.unique_visited));
        chain_summary(&mut inner, &s, &result.chain.move_stats);
        summary.insert("independence".into(), Value::Object(inner));
        write_file(&out.join("trace.csv"), &trace_csv(&result.chain))?;
    }
    Ok(())
}

fn grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    if let Some(g) = cfg.f64_list("grid")? {
        return Ok(g);
    }
    let from = cfg.require_f64("grid_from")?;
    let to = cfg.require_f64("grid_to")?;
    let steps = cfg.usize_or("grid_steps", 10)?;
    match steps {
        0 => Err(CliError::Config("grid_steps must be positive".into())),
        1 => Ok(vec![from]),
        _ => Ok((0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect()),
    }
}

fn sweep<M: SegmentModel>(
    cfg: &RunConfig,
    out: &Path,
    stats: &SufficientStats,
    model: M,
    summary: &mut Map<String, Value>,
) -> Result<()> {
    let param = match cfg.str("sweep_param").unwrap_or("p") {
        "p" => SweepParam::P,
        name => SweepParam::Model(name.to_string()),
    };
    let grid = grid(cfg)?;
    let draws = cfg.usize_or("draws", 100_000)?;
    let seed = cfg.u64_or("seed", 0)?;
    let result = sensitivity_sweep(stats, &model, duration_prior(cfg)?, &param, &grid, draws, seed)?;
    let mut csv = String::from("value,modal_k,tie\n");
    for i in 0..grid.len() {
        writeln!(
            csv,
            "{},{},{}",
            fmt_f64(result.grid[i]),
            result.modal_k[i],
            result.ties[i]
        )
        .unwrap();
    }
    summary.insert("grid".into(), json_f64s(&result.grid));
    summary.insert("modal_k".into(), json!(result.modal_k));
    summary.insert(
        "k_dists".into(),
        Value::Array(result.k_dists.iter().map(|d| json_f64s(d)).collect()),
    );
    write_file(&out.join("sweep.csv"), &csv)
}

fn enumerate<M: SegmentModel>(
    cfg: &RunConfig,
    out: &Path,
    stats: &SufficientStats,
    model: M,
    summary: &mut Map<String, Value>,
) -> Result<()> {
    let kmax = kmax(cfg, stats.n())?;
    let exact = enumerate_exact_posterior(stats, &model, &seg_prior(cfg)?, &k_prior(cfg, kmax)?, kmax)?;
    let mean_k: f64 = exact.k_dist.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    summary.insert(
        "segmentations".into(),
        json!(segmentation_count(stats.n(), kmax).to_string()),
    );
    summary.insert("log_normalizer".into(), json_f64(exact.log_normalizer));
    summary.insert("k_dist".into(), json_f64s(&exact.k_dist));
    summary.insert("mean_k".into(), json_f64(mean_k));
    write_file(&out.join("pos_prob.csv"), &pos_prob_csv(&exact.pos_prob))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use std::path::PathBuf;

    fn cfg(pairs: &[(&str, &str)]) -> RunConfig {
        let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        RunConfig::from_map(map, PathBuf::new())
    }

    #[test]
    fn grid_from_range() {
        let g = grid(&cfg(&[("grid_from", "0"), ("grid_to", "1"), ("grid_steps", "5")])).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = grid(&cfg(&[("grid", "0.1,0.2"), ("grid_from", "5")])).unwrap();
        assert_eq!(g, vec![0.1, 0.2]);
        assert!(grid(&cfg(&[])).is_err());
    }

    #[test]
    fn prior_selection() {
        assert_eq!(
            seg_prior(&cfg(&[("prior", "even-order-stats")])).unwrap(),
            SegPrior::EvenOrderStats
        );
        assert!(seg_prior(&cfg(&[("prior", "geometric")])).is_err());
        assert!(seg_prior(&cfg(&[("prior", "other")])).is_err());
        assert_eq!(k_prior(&cfg(&[]), 4).unwrap(), KPrior::uniform(4));
        assert!(k_prior(&cfg(&[("k_prior", "poisson")]), 4).is_err());
        let d = duration_prior(&cfg(&[("p", "0.2"), ("first_p", "0.5")])).unwrap();
        assert_eq!(d.first.unwrap().p(), 0.5);
    }

    #[test]
    fn coal_preset_loads_weekly_counts() {
        let mut c = cfg(&[("preset", "coal")]);
        c = c.resolve().unwrap();
        let stats = load_series(&c).unwrap();
        assert_eq!(stats.n(), 5793);
        assert_eq!(stats.kind(), DataKind::Counts);
        assert_eq!(stats.total_count(), 191);
    }

    #[test]
    fn kind_follows_model_by_default() {
        let c = cfg(&[("preset", "streakiness"), ("model", "bernoulli-beta")]);
        assert_eq!(load_series(&c).unwrap().kind(), DataKind::Binary);
        let c = cfg(&[
            ("preset", "streakiness"),
            ("model", "bernoulli-beta"),
            ("kind", "bogus"),
        ]);
        assert!(load_series(&c).is_err());
    }
}
