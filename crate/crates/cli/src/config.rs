//! Flat `key = value` configuration and the mapping from algorithm names
//! and setting keys onto run configurations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::Result;
use llmoea::algorithms::{MoeadConfig, Nsga2Config, OperatorChoice};
use llmoea::indicators::IndicatorConfig;
use llmoea::operators::{AblationKind, LoWeights, LO_INPUT_SIZE};
use llmoea::problems::{Problem, ProblemKind};

use crate::error::{usage, UsageError};

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// later keys do not override earlier ones here, callers decide.
pub fn parse_key_values(text: &str) -> std::result::Result<Vec<(String, String)>, UsageError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(UsageError(format!(
                "line {}: expected key = value, got `{}`",
                lineno + 1,
                raw.trim()
            )));
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(UsageError(format!("line {}: empty key", lineno + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a `key=value` command-line override.
pub fn parse_assignment(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Setting keys accepted by runs, named after the symbols of the method
/// where it has one.
pub const SETTING_KEYS: &[&str] = &[
    "N",
    "T",
    "N_max",
    "sigma1",
    "sigma2",
    "sigma3",
    "l",
    "s",
    "eta_c",
    "eta_m",
    "F",
    "CR",
    "mutation_per_var",
    "a",
    "b",
    "c",
    "d",
    "theta",
    "dim_prob",
    "replacement_cap",
    "update_scope",
    "max_retries",
    "decimal_places",
    "mutate_llm",
    "keep_archive",
    "llm_endpoint",
    "llm_model",
    "llm_temperature",
    "llm_min_interval_ms",
    "llm_timeout_s",
];

pub type Settings = BTreeMap<String, String>;

pub fn check_keys(settings: &Settings) -> Result<()> {
    for k in settings.keys() {
        if !SETTING_KEYS.contains(&k.as_str()) {
            return Err(usage(format!(
                "unknown setting `{k}`; valid keys: {}",
                SETTING_KEYS.join(", ")
            )));
        }
    }
    Ok(())
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| usage(format!("setting {key}: `{value}` is not a valid number")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(usage(format!("setting {key}: `{value}` is not a boolean"))),
    }
}

/// Which optimizer a run uses.
#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    Moead(OperatorChoice),
    Nsga2,
}

pub const ALGORITHM_NAMES: &[&str] = &[
    "moead",
    "moead-de",
    "moead-lo",
    "moead-lo<l>",
    "moead-random",
    "moead-equal",
    "moead-linear",
    "moead-llm",
    "nsga2",
];

impl Algorithm {
    pub fn parse(name: &str) -> Result<Self> {
        let op = match name {
            "nsga2" => return Ok(Algorithm::Nsga2),
            "moead" => OperatorChoice::Ga,
            "moead-de" => OperatorChoice::De,
            "moead-lo" => OperatorChoice::Lo(LoWeights::default()),
            "moead-llm" => OperatorChoice::Llm,
            other => {
                let rest = other.strip_prefix("moead-").unwrap_or("");
                if let Some(l) = rest
                    .strip_prefix("lo")
                    .and_then(|l| l.parse::<usize>().ok())
                {
                    if l == 0 {
                        return Err(usage("moead-lo input size must be >= 1"));
                    }
                    OperatorChoice::Lo(LoWeights::default().with_input_size(l))
                } else if let Ok(kind) = rest.parse::<AblationKind>() {
                    OperatorChoice::Ablation(kind, LoWeights::default())
                } else {
                    return Err(usage(format!(
                        "unknown algorithm `{other}`; valid names: {}",
                        ALGORITHM_NAMES.join(", ")
                    )));
                }
            }
        };
        Ok(Algorithm::Moead(op))
    }

    pub fn name(&self) -> String {
        match self {
            Algorithm::Moead(op) => op.label(),
            Algorithm::Nsga2 => "nsga2".into(),
        }
    }

    pub fn needs_backend(&self) -> bool {
        matches!(self, Algorithm::Moead(OperatorChoice::Llm))
    }

    /// Replaces the operator weights of linear-operator variants. A name
    /// that fixes the input size (`moead-lo20`, ablations) keeps it; plain
    /// `moead-lo` takes the size from `w`.
    pub fn with_lo_weights(self, w: LoWeights) -> Self {
        match self {
            Algorithm::Moead(OperatorChoice::Lo(old)) if old.l != LO_INPUT_SIZE => {
                Algorithm::Moead(OperatorChoice::Lo(w.with_input_size(old.l)))
            }
            Algorithm::Moead(OperatorChoice::Lo(_)) => Algorithm::Moead(OperatorChoice::Lo(w)),
            Algorithm::Moead(OperatorChoice::Ablation(k, old)) => {
                Algorithm::Moead(OperatorChoice::Ablation(k, w.with_input_size(old.l)))
            }
            other => other,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Population size and budget used when a run does not set them: 200 or
/// 300 subproblems for two or three objectives, 200k evaluations for ZDT and
/// 300k for UF; the small real-world demonstration setting otherwise.
pub fn suite_defaults(problem: &Problem) -> (usize, Option<usize>, u64) {
    use ProblemKind::*;
    let n = if problem.num_objectives() == 3 {
        300
    } else {
        200
    };
    match problem.kind() {
        Zdt1 | Zdt2 | Zdt3 | Zdt4 | Zdt6 => (n, None, 200_000),
        Re21 | Re22 | Re23 | Re24 | Re25 => (50, Some(10), 1_000),
        _ => (n, None, 300_000),
    }
}

/// A fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum RunConfig {
    Moead(MoeadConfig),
    Nsga2(Nsga2Config),
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        match self {
            RunConfig::Moead(c) => c.seed,
            RunConfig::Nsga2(c) => c.seed,
        }
    }

    pub fn max_evaluations(&self) -> u64 {
        match self {
            RunConfig::Moead(c) => c.max_evaluations,
            RunConfig::Nsga2(c) => c.max_evaluations,
        }
    }
}

/// Builds the configuration of one run from suite defaults and `settings`.
pub fn build_run_config(
    algorithm: &Algorithm,
    problem: &Problem,
    seed: u64,
    settings: &Settings,
) -> Result<RunConfig> {
    check_keys(settings)?;
    let (default_n, default_t, default_evals) = suite_defaults(problem);
    let get = |k: &str| settings.get(k).map(String::as_str);
    let n: usize = get("N").map_or(Ok(default_n), |v| num("N", v))?;
    let max_evaluations: u64 = get("N_max").map_or(Ok(default_evals), |v| num("N_max", v))?;

    let op = match algorithm {
        Algorithm::Nsga2 => {
            let mut cfg = Nsga2Config {
                max_evaluations,
                seed,
                ..Nsga2Config::new(n)
            };
            for (k, v) in settings {
                match k.as_str() {
                    "sigma1" => cfg.ops.sigma1 = num(k, v)?,
                    "sigma2" => cfg.ops.sigma2 = num(k, v)?,
                    "eta_c" => cfg.ops.eta_c = num(k, v)?,
                    "eta_m" => cfg.ops.eta_m = num(k, v)?,
                    "mutation_per_var" => cfg.ops.mutation_per_var = Some(num(k, v)?),
                    _ => {}
                }
            }
            cfg.ops.validate()?;
            return Ok(RunConfig::Nsga2(cfg));
        }
        Algorithm::Moead(op) => op.clone(),
    };

    // operator weights first so that `l` defaults follow them
    let op = match op {
        OperatorChoice::Lo(w) => OperatorChoice::Lo(apply_lo_settings(w, settings)?),
        OperatorChoice::Ablation(k, w) => {
            OperatorChoice::Ablation(k, apply_lo_settings(w, settings)?)
        }
        other => other,
    };
    let mut cfg = MoeadConfig {
        max_evaluations,
        seed,
        ..MoeadConfig::new(n, op)
    };
    if let Some(t) = default_t {
        cfg.t = t.min(n);
    }
    for (k, v) in settings {
        match k.as_str() {
            "T" => cfg.t = num(k, v)?,
            "sigma1" => cfg.ops.sigma1 = num(k, v)?,
            "sigma2" => cfg.ops.sigma2 = num(k, v)?,
            "sigma3" => cfg.sigma3 = num(k, v)?,
            "l" => cfg.l = num(k, v)?,
            "s" => {
                cfg.s = num(k, v)?;
                cfg.ops.s = cfg.s;
            }
            "eta_c" => cfg.ops.eta_c = num(k, v)?,
            "eta_m" => cfg.ops.eta_m = num(k, v)?,
            "F" => cfg.ops.f_scale = num(k, v)?,
            "CR" => cfg.ops.crossover_rate = num(k, v)?,
            "mutation_per_var" => cfg.ops.mutation_per_var = Some(num(k, v)?),
            "replacement_cap" => {
                cfg.replacement_cap = match v.as_str() {
                    "none" => None,
                    _ => Some(num(k, v)?),
                }
            }
            "update_scope" => {
                cfg.update_follows_mating = match v.as_str() {
                    "neighborhood" => false,
                    "mating" => true,
                    _ => {
                        return Err(usage(format!(
                            "update_scope: expected neighborhood or mating, got `{v}`"
                        )))
                    }
                }
            }
            "max_retries" => cfg.max_retries = num(k, v)?,
            "decimal_places" => cfg.decimal_places = num(k, v)?,
            "mutate_llm" => cfg.mutate_llm = flag(k, v)?,
            "keep_archive" => cfg.keep_archive = flag(k, v)?,
            _ => {}
        }
    }
    cfg.validate()?;
    Ok(RunConfig::Moead(cfg))
}

fn apply_lo_settings(mut w: LoWeights, settings: &Settings) -> Result<LoWeights> {
    for (k, v) in settings {
        match k.as_str() {
            "a" => w.a = num(k, v)?,
            "b" => w.b = num(k, v)?,
            "c" => w.c = num(k, v)?,
            "d" => w.d = num(k, v)?,
            "theta" => w.theta = num(k, v)?,
            "dim_prob" => w.dim_prob = num(k, v)?,
            "l" => w.l = num(k, v)?,
            _ => {}
        }
    }
    w.validate()?;
    Ok(w)
}

/// Hypervolume convention of a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HvConvention {
    /// Normalized by the reference box volume, in [0, 1].
    Normalized,
    /// Normalized objectives, unnormalized volume.
    Scaled,
}

impl HvConvention {
    pub fn default_for(problem: &Problem) -> Self {
        if problem.is_real_world() {
            HvConvention::Scaled
        } else {
            HvConvention::Normalized
        }
    }

    pub fn indicator_config(self, problem: &Problem) -> IndicatorConfig {
        match self {
            HvConvention::Normalized => {
                IndicatorConfig::normalized(problem.ideal(), problem.nadir())
            }
            HvConvention::Scaled => IndicatorConfig::scaled(problem.ideal(), problem.nadir()),
        }
    }
}

impl FromStr for HvConvention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "normalized" => Ok(HvConvention::Normalized),
            "scaled" => Ok(HvConvention::Scaled),
            _ => Err(format!("expected normalized or scaled, got `{s}`")),
        }
    }
}

impl fmt::Display for HvConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HvConvention::Normalized => "normalized",
            HvConvention::Scaled => "scaled",
        })
    }
}

/// Which solution set the final indicators are computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndicatorSource {
    Population,
    Archive,
}

impl FromStr for IndicatorSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "population" => Ok(IndicatorSource::Population),
            "archive" => Ok(IndicatorSource::Archive),
            _ => Err(format!("expected population or archive, got `{s}`")),
        }
    }
}

impl fmt::Display for IndicatorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndicatorSource::Population => "population",
            IndicatorSource::Archive => "archive",
        })
    }
}
