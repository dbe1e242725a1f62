//! Language-model backend selection from a `--backend` value.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use anyhow::Result;
use llmoea::llm::{LiveBackend, LiveConfig, LlmBackend, RecordedBackend, ScriptedBackend};

use crate::config::Settings;
use crate::error::usage;

/// `scripted:<name>`, `recorded:<dir>` or `live`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendSpec {
    Scripted(String),
    Recorded(PathBuf),
    Live,
}

impl FromStr for BackendSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "live" {
            return Ok(BackendSpec::Live);
        }
        match s.split_once(':') {
            Some(("scripted", name)) if !name.is_empty() => Ok(BackendSpec::Scripted(name.into())),
            Some(("recorded", dir)) if !dir.is_empty() => Ok(BackendSpec::Recorded(dir.into())),
            _ => Err(format!(
                "expected scripted:<name>, recorded:<dir> or live, got `{s}`"
            )),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Scripted(n) => write!(f, "scripted:{n}"),
            BackendSpec::Recorded(d) => write!(f, "recorded:{}", d.display()),
            BackendSpec::Live => f.write_str("live"),
        }
    }
}

impl BackendSpec {
    /// Creates a fresh backend. The live backend takes its endpoint settings
    /// from `settings` and its token from the environment only.
    pub fn build(&self, settings: &Settings) -> Result<Box<dyn LlmBackend>> {
        Ok(match self {
            BackendSpec::Scripted(name) => Box::new(ScriptedBackend::named(name)?),
            BackendSpec::Recorded(dir) => Box::new(RecordedBackend::new(dir.clone())?),
            BackendSpec::Live => Box::new(LiveBackend::from_env(live_config(settings)?)?),
        })
    }
}

fn live_config(settings: &Settings) -> Result<LiveConfig> {
    let mut cfg = LiveConfig::default();
    let parse = |k: &str, v: &str| -> Result<f64> {
        v.parse()
            .map_err(|_| usage(format!("setting {k}: `{v}` is not a number")))
    };
    for (k, v) in settings {
        match k.as_str() {
            "llm_endpoint" => cfg.endpoint = v.clone(),
            "llm_model" => cfg.model = v.clone(),
            "llm_temperature" => cfg.temperature = parse(k, v)?,
            "llm_min_interval_ms" => cfg.min_interval = Duration::from_secs_f64(parse(k, v)? / 1e3),
            "llm_timeout_s" => cfg.timeout = Duration::from_secs_f64(parse(k, v)?),
            _ => {}
        }
    }
    Ok(cfg)
}
