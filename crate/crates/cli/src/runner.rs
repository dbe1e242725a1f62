//! Executes a single run and writes its output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use llmoea::algorithms::{
    run_moead, run_moead_llm, run_nsga2, OperatorChoice, RunResult, TrajectoryPoint,
};
use llmoea::indicators::{hv, igd, IndicatorConfig};
use llmoea::llm::InteractionSink;
use llmoea::problems::{Problem, DEFAULT_PF_SIZE};

use crate::backend::BackendSpec;
use crate::config::{HvConvention, IndicatorSource, RunConfig, Settings};
use crate::csvio::{fmt_num, write_points, write_summary, write_trajectory};
use crate::error::usage;

pub const POPULATION_FILE: &str = "population.csv";
pub const ARCHIVE_FILE: &str = "archive.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Reference front and indicator settings of one problem.
pub struct Reference {
    pub problem: Problem,
    pub front: Vec<Vec<f64>>,
    pub hv_mode: HvConvention,
    pub indicators: IndicatorConfig,
}

impl Reference {
    pub fn new(problem: Problem, hv_mode: HvConvention) -> Self {
        let front = problem.sample_pf(DEFAULT_PF_SIZE);
        let indicators = hv_mode.indicator_config(&problem);
        Self {
            problem,
            front,
            hv_mode,
            indicators,
        }
    }
}

/// Language-model access for runs that need it.
pub struct LlmAccess<'a> {
    pub backend: &'a BackendSpec,
    pub settings: &'a Settings,
    pub log: Option<&'a Path>,
}

pub fn execute(
    cfg: &RunConfig,
    problem: &Problem,
    llm: Option<&LlmAccess<'_>>,
) -> Result<RunResult> {
    match cfg {
        RunConfig::Nsga2(c) => Ok(run_nsga2(c, problem)?),
        RunConfig::Moead(c) if c.operator == OperatorChoice::Llm => {
            let llm = llm.ok_or_else(|| usage("moead-llm needs --backend"))?;
            let mut backend = llm.backend.build(llm.settings)?;
            let mut sink = match llm.log {
                Some(path) => Some(
                    InteractionSink::open(path)
                        .with_context(|| format!("opening interaction log {}", path.display()))?,
                ),
                None => None,
            };
            Ok(run_moead_llm(c, problem, backend.as_mut(), sink.as_mut())?)
        }
        RunConfig::Moead(c) => Ok(run_moead(c, problem)?),
    }
}

/// A finished run with its indicators.
pub struct Assessed {
    pub result: RunResult,
    pub hv: f64,
    pub igd: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub hv_mode: HvConvention,
    pub source: IndicatorSource,
}

pub fn assess(
    result: RunResult,
    reference: &Reference,
    source: IndicatorSource,
) -> Result<Assessed> {
    let final_set = match source {
        IndicatorSource::Population => result.objectives(),
        IndicatorSource::Archive => result.archive_objectives(),
    };
    let hv_value = hv(&final_set, &reference.indicators)?;
    let igd_value = igd(&final_set, &reference.front)?;
    let trajectory = result.trajectory(&reference.indicators, &reference.front)?;
    Ok(Assessed {
        result,
        hv: hv_value,
        igd: igd_value,
        trajectory,
        hv_mode: reference.hv_mode,
        source,
    })
}

/// Writes population, archive, trajectory and summary files into `dir`.
pub fn write_run_dir(dir: &Path, run: &Assessed, with_x: bool) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let r = &run.result;
    let pop_x: Vec<Vec<f64>> = r.population.iter().map(|i| i.x.clone()).collect();
    let arc_x: Vec<Vec<f64>> = r.archive.iter().map(|i| i.x.clone()).collect();
    write_points(
        &dir.join(POPULATION_FILE),
        &r.objectives(),
        with_x.then_some(pop_x.as_slice()),
    )?;
    write_points(
        &dir.join(ARCHIVE_FILE),
        &r.archive_objectives(),
        with_x.then_some(arc_x.as_slice()),
    )?;
    write_trajectory(&dir.join(TRAJECTORY_FILE), &run.trajectory)?;
    write_summary(&dir.join(SUMMARY_FILE), &summary_fields(run))
}

pub fn summary_fields(run: &Assessed) -> BTreeMap<String, String> {
    let r = &run.result;
    [
        ("algorithm", r.algorithm.clone()),
        ("problem", r.problem.clone()),
        ("seed", r.seed.to_string()),
        ("evaluations", r.evaluations.to_string()),
        ("population_size", r.population.len().to_string()),
        ("archive_size", r.archive.len().to_string()),
        ("hv", fmt_num(run.hv)),
        ("igd", fmt_num(run.igd)),
        ("hv_mode", run.hv_mode.to_string()),
        ("indicator_source", run.source.to_string()),
        ("llm_calls", r.interactions.len().to_string()),
        ("fallbacks", r.fallbacks.to_string()),
        ("wall_time_s", format!("{:.3}", r.wall_time.as_secs_f64())),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}
