//! Run configuration: a plain `key = value` file with `model.`, `solver.` and
//! `scenario.` sections, overridden by command-line settings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use liability_core::equilibrium::SolverConfig;
use liability_core::model::ModelParams;
use liability_core::scenarios::{
    step_grid, HeterogeneityConfig, SensitivityParameter, ETA_PRESET_NARRATED, ETA_PRESET_TABLE,
};
use liability_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// How the lawmaker's ratio is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioChoice {
    Fixed(f64),
    Strategic,
}

impl RatioChoice {
    pub fn label(self) -> &'static str {
        match self {
            RatioChoice::Fixed(_) => "fixed",
            RatioChoice::Strategic => "strategic",
        }
    }
}

/// Traffic layout for the `sweep` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lanes {
    Mixed,
    Exclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOptions {
    pub p: f64,
    pub k: RatioChoice,
    /// Start of the lawmaker descent.
    pub k0: f64,
    /// `None` selects the command's default grid.
    pub p_grid: Option<Vec<f64>>,
    pub k_grid: Vec<f64>,
    /// Extra ratios compared by `endogenous`; empty means only `k`.
    pub k_compare: Vec<RatioChoice>,
    pub eta: Vec<f64>,
    pub scan_resolution: usize,
    pub parameter: SensitivityParameter,
    pub values: Vec<f64>,
    pub heterogeneity: HeterogeneityConfig<f64>,
    pub lanes: Lanes,
    pub pure_av_baseline: bool,
    pub oracle_resolution: usize,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            p: 0.5,
            k: RatioChoice::Fixed(1.0),
            k0: 1.0,
            p_grid: None,
            k_grid: (1..=50).map(|i| i as f64 / 10.0).collect(),
            k_compare: Vec::new(),
            eta: ETA_PRESET_NARRATED.to_vec(),
            scan_resolution: 49,
            parameter: SensitivityParameter::Alpha,
            values: vec![0.4, 0.3],
            heterogeneity: HeterogeneityConfig::default(),
            lanes: Lanes::Mixed,
            pure_av_baseline: false,
            oracle_resolution: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams<f64>,
    pub solver: SolverConfig<f64>,
    pub scenario: ScenarioOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::base(),
            solver: SolverConfig::default(),
            scenario: ScenarioOptions::default(),
        }
    }
}

/// Every accepted key, in manifest order.
pub const KEYS: &[&str] = &[
    "model.alpha",
    "model.beta",
    "model.a",
    "model.h",
    "model.max_severity",
    "model.s",
    "model.t",
    "model.w_h",
    "model.w_a_sen",
    "model.w_a_loss",
    "model.w_l",
    "model.c_h_max",
    "model.c_a_max",
    "model.k_max",
    "solver.care_tolerance",
    "solver.grid_resolution",
    "solver.max_iterations",
    "solver.fd_step",
    "scenario.p",
    "scenario.k",
    "scenario.k0",
    "scenario.p_grid",
    "scenario.k_grid",
    "scenario.k_compare",
    "scenario.eta",
    "scenario.scan_resolution",
    "scenario.parameter",
    "scenario.values",
    "scenario.mc_mean",
    "scenario.mc_std",
    "scenario.mc_lower",
    "scenario.mc_upper",
    "scenario.mc_samples",
    "scenario.seed",
    "scenario.lanes",
    "scenario.pure_av_baseline",
    "scenario.oracle_resolution",
];

/// Splits `text` into `(line, key, value)` entries.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Splits a `KEY=VALUE` override.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, found `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Reads the file (if any), applies `overrides` in order and validates.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
            path: p.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    // later entries win: file first, then overrides
    let mut merged: BTreeMap<String, String> = BTreeMap::new();
    for (_, k, v) in parse_pairs(text)? {
        merged.insert(k, v);
    }
    for (k, v) in overrides {
        merged.insert(k.clone(), v.clone());
    }
    let unknown: Vec<String> = merged
        .keys()
        .filter(|k| !KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }
    let mut cfg = RunConfig::default();
    let mut errors = Vec::new();
    for (k, v) in &merged {
        if let Err(msg) = apply(&mut cfg, k, v) {
            errors.push(format!("{k} = {v}: {msg}"));
        }
    }
    validate(&cfg, &mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errors))
    }
}

fn num(v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| "not a number".to_string())
}

fn count(v: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| "not a nonnegative integer".to_string())
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|x| num(x.trim())).collect()
}

/// `start:stop:step` or a comma-separated list.
pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.len() {
        1 => list(v),
        3 => {
            let (a, b, c) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            step_grid(a, b, c).map_err(|e| e.to_string())
        }
        _ => Err("expected start:stop:step or a comma-separated list".into()),
    }
}

fn ratio(v: &str) -> Result<RatioChoice, String> {
    if v == "strategic" {
        Ok(RatioChoice::Strategic)
    } else {
        num(v).map(RatioChoice::Fixed)
    }
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn optional_bound(v: &str) -> Result<Option<f64>, String> {
    if v == "auto" {
        Ok(None)
    } else {
        num(v).map(Some)
    }
}

fn apply(cfg: &mut RunConfig, key: &str, v: &str) -> Result<(), String> {
    let m = &mut cfg.model;
    let s = &mut cfg.solver;
    let sc = &mut cfg.scenario;
    match key {
        "model.alpha" => m.alpha = num(v)?,
        "model.beta" => m.beta = num(v)?,
        "model.a" => m.av_env = num(v)?,
        "model.h" => m.hv_env = num(v)?,
        "model.max_severity" => m.max_severity = num(v)?,
        "model.s" => m.av_severity_slope = num(v)?,
        "model.t" => m.hv_severity_slope = num(v)?,
        "model.w_h" => m.w_h = num(v)?,
        "model.w_a_sen" => m.w_a_sen = num(v)?,
        "model.w_a_loss" => m.w_a_loss = num(v)?,
        "model.w_l" => m.w_l = num(v)?,
        "model.c_h_max" => m.c_h_max = optional_bound(v)?,
        "model.c_a_max" => m.c_a_max = optional_bound(v)?,
        "model.k_max" => m.k_max = num(v)?,
        "solver.care_tolerance" => s.care_tolerance = num(v)?,
        "solver.grid_resolution" => s.grid_resolution = count(v)?,
        "solver.max_iterations" => s.max_iterations = count(v)?,
        "solver.fd_step" => s.fd_step = num(v)?,
        "scenario.p" => sc.p = num(v)?,
        "scenario.k" => sc.k = ratio(v)?,
        "scenario.k0" => sc.k0 = num(v)?,
        "scenario.p_grid" => sc.p_grid = if v == "default" { None } else { Some(parse_grid(v)?) },
        "scenario.k_grid" => sc.k_grid = parse_grid(v)?,
        "scenario.k_compare" => {
            sc.k_compare = if v.is_empty() {
                Vec::new()
            } else {
                v.split(',').map(|x| ratio(x.trim())).collect::<Result<_, _>>()?
            }
        }
        "scenario.eta" => {
            sc.eta = match v {
                "narrated" => ETA_PRESET_NARRATED.to_vec(),
                "table" => ETA_PRESET_TABLE.to_vec(),
                _ => list(v)?,
            }
        }
        "scenario.scan_resolution" => sc.scan_resolution = count(v)?,
        "scenario.parameter" => {
            sc.parameter = SensitivityParameter::parse(v)
                .ok_or_else(|| "expected one of alpha, a, h, w_a_sen, w_a_loss".to_string())?
        }
        "scenario.values" => sc.values = list(v)?,
        "scenario.mc_mean" => sc.heterogeneity.mean = num(v)?,
        "scenario.mc_std" => sc.heterogeneity.std_dev = num(v)?,
        "scenario.mc_lower" => sc.heterogeneity.lower = num(v)?,
        "scenario.mc_upper" => sc.heterogeneity.upper = num(v)?,
        "scenario.mc_samples" => sc.heterogeneity.samples = count(v)?,
        "scenario.seed" => sc.heterogeneity.seed = v.parse::<u64>().map_err(|_| "not a u64".to_string())?,
        "scenario.lanes" => {
            sc.lanes = match v {
                "mixed" => Lanes::Mixed,
                "exclusive" => Lanes::Exclusive,
                _ => return Err("expected mixed or exclusive".into()),
            }
        }
        "scenario.pure_av_baseline" => sc.pure_av_baseline = boolean(v)?,
        "scenario.oracle_resolution" => sc.oracle_resolution = count(v)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

fn validate(cfg: &RunConfig, errors: &mut Vec<String>) {
    const MODEL_KEYS: &[(&str, &str)] = &[
        ("alpha", "model.alpha"),
        ("beta", "model.beta"),
        ("a", "model.a"),
        ("h", "model.h"),
        ("max_severity", "model.max_severity"),
        ("s", "model.s"),
        ("t", "model.t"),
        ("w_h", "model.w_h"),
        ("w_l", "model.w_l"),
        ("w_a_sen", "model.w_a_sen"),
        ("w_a_loss", "model.w_a_loss"),
        ("w_a_sen + w_a_loss", "model.w_a_sen + model.w_a_loss"),
        ("c_h_max", "model.c_h_max"),
        ("c_a_max", "model.c_a_max"),
        ("k_max", "model.k_max"),
    ];
    if let Err(CoreError::InvalidParams(v)) = cfg.model.validate() {
        for x in v {
            let key = MODEL_KEYS
                .iter()
                .find(|(k, _)| *k == x.key)
                .map_or(x.key, |(_, full)| full);
            errors.push(format!("{key} = {} violates {}", x.value, x.rule));
        }
    }
    match cfg.solver.validate() {
        // each violation starts with the field name
        Err(CoreError::Config(msg)) => errors.extend(msg.split("; ").map(|m| format!("solver.{m}"))),
        Err(e) => errors.push(format!("solver: {e}")),
        Ok(()) => {}
    }
    let sc = &cfg.scenario;
    if !(sc.p >= 0.0 && sc.p <= 1.0) {
        errors.push(format!("scenario.p = {} violates in [0, 1]", sc.p));
    }
    let check_k = |k: RatioChoice, key: &str, errors: &mut Vec<String>| {
        if let RatioChoice::Fixed(k) = k {
            if !(k > 0.0 && k <= cfg.model.k_max) {
                errors.push(format!("{key} = {k} violates in (0, k_max]"));
            }
        }
    };
    check_k(sc.k, "scenario.k", errors);
    for &k in &sc.k_compare {
        check_k(k, "scenario.k_compare", errors);
    }
    check_k(RatioChoice::Fixed(sc.k0), "scenario.k0", errors);
    if let Some(g) = &sc.p_grid {
        if g.is_empty() || g.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            errors.push("scenario.p_grid violates non-empty with every p in (0, 1)".into());
        }
    }
    if sc.k_grid.is_empty() || sc.k_grid.iter().any(|&k| !(k > 0.0 && k <= cfg.model.k_max)) {
        errors.push("scenario.k_grid violates non-empty with every k in (0, k_max]".into());
    }
    if sc.eta.is_empty() || sc.eta.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
        errors.push("scenario.eta violates non-empty with every eta >= 0".into());
    }
    if sc.scan_resolution < 2 {
        errors.push(format!("scenario.scan_resolution = {} violates >= 2", sc.scan_resolution));
    }
    if sc.values.is_empty() {
        errors.push("scenario.values violates non-empty".into());
    }
    if let Err(e) = sc.heterogeneity.validate() {
        errors.push(format!("scenario.mc_*: {e}"));
    }
    if sc.oracle_resolution < 1 {
        errors.push("scenario.oracle_resolution violates >= 1".into());
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn ratio_str(k: RatioChoice) -> String {
    match k {
        RatioChoice::Fixed(k) => k.to_string(),
        RatioChoice::Strategic => "strategic".into(),
    }
}

fn bound_str(b: Option<f64>) -> String {
    b.map_or_else(|| "auto".into(), |x| x.to_string())
}

impl RunConfig {
    /// The configuration as a config file that parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let m = &self.model;
        let s = &self.solver;
        let sc = &self.scenario;
        let h = &sc.heterogeneity;
        let values: Vec<(&str, String)> = vec![
            ("model.alpha", m.alpha.to_string()),
            ("model.beta", m.beta.to_string()),
            ("model.a", m.av_env.to_string()),
            ("model.h", m.hv_env.to_string()),
            ("model.max_severity", m.max_severity.to_string()),
            ("model.s", m.av_severity_slope.to_string()),
            ("model.t", m.hv_severity_slope.to_string()),
            ("model.w_h", m.w_h.to_string()),
            ("model.w_a_sen", m.w_a_sen.to_string()),
            ("model.w_a_loss", m.w_a_loss.to_string()),
            ("model.w_l", m.w_l.to_string()),
            ("model.c_h_max", bound_str(m.c_h_max)),
            ("model.c_a_max", bound_str(m.c_a_max)),
            ("model.k_max", m.k_max.to_string()),
            ("solver.care_tolerance", s.care_tolerance.to_string()),
            ("solver.grid_resolution", s.grid_resolution.to_string()),
            ("solver.max_iterations", s.max_iterations.to_string()),
            ("solver.fd_step", s.fd_step.to_string()),
            ("scenario.p", sc.p.to_string()),
            ("scenario.k", ratio_str(sc.k)),
            ("scenario.k0", sc.k0.to_string()),
            ("scenario.p_grid", sc.p_grid.as_deref().map_or_else(|| "default".into(), join)),
            ("scenario.k_grid", join(&sc.k_grid)),
            (
                "scenario.k_compare",
                sc.k_compare.iter().map(|&k| ratio_str(k)).collect::<Vec<_>>().join(","),
            ),
            ("scenario.eta", join(&sc.eta)),
            ("scenario.scan_resolution", sc.scan_resolution.to_string()),
            ("scenario.parameter", sc.parameter.name().to_string()),
            ("scenario.values", join(&sc.values)),
            ("scenario.mc_mean", h.mean.to_string()),
            ("scenario.mc_std", h.std_dev.to_string()),
            ("scenario.mc_lower", h.lower.to_string()),
            ("scenario.mc_upper", h.upper.to_string()),
            ("scenario.mc_samples", h.samples.to_string()),
            ("scenario.seed", h.seed.to_string()),
            (
                "scenario.lanes",
                match sc.lanes {
                    Lanes::Mixed => "mixed".into(),
                    Lanes::Exclusive => "exclusive".into(),
                },
            ),
            ("scenario.pure_av_baseline", sc.pure_av_baseline.to_string()),
            ("scenario.oracle_resolution", sc.oracle_resolution.to_string()),
        ];
        debug_assert_eq!(values.len(), KEYS.len());
        let mut out = String::new();
        for (k, v) in values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
