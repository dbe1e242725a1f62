//! Subcommands of the `llmoea` binary.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use llmoea::fit::{distill, DistillOptions, FitMode, ResponseChoice};
use llmoea::indicators::{hv, igd};
use llmoea::llm::read_interactions;
use llmoea::operators::LoWeights;
use llmoea::problems::lookup;

use crate::backend::BackendSpec;
use crate::config::{
    build_run_config, parse_assignment, parse_key_values, Algorithm, HvConvention, IndicatorSource,
    Settings,
};
use crate::csvio::{fmt_num, read_points, read_summary, read_trajectory};
use crate::error::usage;
use crate::experiment::{preset, run_experiment, table_text, ExperimentPlan, PRESETS};
use crate::runner::{
    assess, execute, write_run_dir, LlmAccess, Reference, POPULATION_FILE, SUMMARY_FILE,
    TRAJECTORY_FILE,
};

#[derive(Parser, Debug)]
#[command(
    name = "llmoea",
    version,
    about = "Decomposition-based multiobjective optimization with classical, language-model and linear search operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one optimizer on one problem.
    Run(RunArgs),
    /// Run an experiment grid from a plan file or a preset.
    Experiment(ExperimentArgs),
    /// Distill a linear operator from an interaction log.
    Fit(FitArgs),
    /// Compute HV and IGD of an objective-vector CSV.
    Indicators(IndicatorArgs),
    /// Emit tidy CSV for plotting from run directories.
    Plotdata(PlotArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// moead, moead-de, moead-lo, moead-lo<l>, moead-random, moead-equal,
    /// moead-linear, moead-llm or nsga2.
    #[arg(long, default_value = "moead-lo")]
    pub algo: String,
    #[arg(long)]
    pub problem: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluation budget (N_max).
    #[arg(long)]
    pub evals: Option<u64>,
    /// Population size (N).
    #[arg(long)]
    pub pop: Option<usize>,
    /// Settings file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Setting override, repeatable; wins over the settings file.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_assignment)]
    pub set: Vec<(String, String)>,
    /// Operator definition file produced by `fit`.
    #[arg(long)]
    pub lo_file: Option<PathBuf>,
    /// scripted:<name>, recorded:<dir> or live (token from LLM_API_KEY).
    #[arg(long)]
    pub backend: Option<BackendSpec>,
    /// Append every language-model interaction to this JSON-lines file.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, default_value = "llmoea-run")]
    pub out: PathBuf,
    /// Also write decision vectors.
    #[arg(long)]
    pub with_x: bool,
    #[arg(long)]
    pub hv_mode: Option<HvConvention>,
    #[arg(long, default_value = "population")]
    pub indicator_source: IndicatorSource,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Plan file of `key = value` lines.
    pub plan: Option<PathBuf>,
    /// One of the shipped plans instead of a file.
    #[arg(long, conflicts_with = "plan")]
    pub preset: Option<String>,
    /// Run seeds 0..n instead of the plan's seeds.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Evaluation budget for every cell.
    #[arg(long)]
    pub evals: Option<u64>,
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_assignment)]
    pub set: Vec<(String, String)>,
    #[arg(long)]
    pub backend: Option<BackendSpec>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = "llmoea-experiment")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FitModeArg {
    Pooled,
    PerCall,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ResponseArg {
    First,
    Each,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Interaction log (JSON lines).
    pub log: PathBuf,
    /// Operator definition file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Fit report to write; defaults to the operator file plus `.report.txt`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "pooled")]
    pub mode: FitModeArg,
    #[arg(long, value_enum, default_value = "first")]
    pub response: ResponseArg,
    /// Per-dimension application probability stored in the operator.
    #[arg(long)]
    pub dim_prob: Option<f64>,
}

#[derive(Args, Debug)]
pub struct IndicatorArgs {
    /// CSV with `f1..fm` columns, or bare objective rows.
    pub front: PathBuf,
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub hv_mode: Option<HvConvention>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Convergence,
    Front,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// convergence or front.
    #[arg(long)]
    pub kind: String,
    /// Run directories, or directories containing them.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Indicators(a) => cmd_indicators(a),
        Command::Plotdata(a) => cmd_plotdata(a),
    }
}

fn read_settings_file(path: &Path) -> Result<Settings> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_key_values(&text)?.into_iter().collect())
}

fn read_lo_file(path: &Path) -> Result<LoWeights> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    LoWeights::from_definition(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn cmd_run(a: RunArgs) -> Result<()> {
    let problem = lookup(&a.problem)?;
    let mut algorithm = Algorithm::parse(&a.algo)?;
    let mut settings = match &a.config {
        Some(path) => read_settings_file(path)?,
        None => Settings::new(),
    };
    settings.extend(a.set.iter().cloned());
    if let Some(n) = a.pop {
        settings.insert("N".into(), n.to_string());
    }
    if let Some(e) = a.evals {
        settings.insert("N_max".into(), e.to_string());
    }
    if let Some(path) = &a.lo_file {
        algorithm = algorithm.with_lo_weights(read_lo_file(path)?);
    }
    let cfg = build_run_config(&algorithm, &problem, a.seed, &settings)?;
    if algorithm.needs_backend() && a.backend.is_none() {
        return Err(usage(
            "moead-llm needs --backend scripted:<name>, recorded:<dir> or live",
        ));
    }
    let llm = a.backend.as_ref().map(|backend| LlmAccess {
        backend,
        settings: &settings,
        log: a.log.as_deref(),
    });
    // surface configuration problems (such as a missing token) before running
    if let Some(llm) = &llm {
        if algorithm.needs_backend() {
            llm.backend.build(llm.settings)?;
        }
    }
    let hv_mode = a
        .hv_mode
        .unwrap_or_else(|| HvConvention::default_for(&problem));
    let reference = Reference::new(problem.clone(), hv_mode);
    log::info!(
        "{} on {} seed {}: {} evaluations",
        algorithm,
        problem.name(),
        a.seed,
        cfg.max_evaluations()
    );
    let result = execute(&cfg, &problem, llm.as_ref())?;
    let run = assess(result, &reference, a.indicator_source)?;
    write_run_dir(&a.out, &run, a.with_x)?;
    println!("algorithm: {}", run.result.algorithm);
    println!("problem: {}", run.result.problem);
    println!("seed: {}", run.result.seed);
    println!("evaluations: {}", run.result.evaluations);
    println!("hv ({}): {}", hv_mode, fmt_num(run.hv));
    println!("igd: {}", fmt_num(run.igd));
    if run.result.fallbacks > 0 {
        println!("operator fallbacks: {}", run.result.fallbacks);
    }
    println!("output: {}", a.out.display());
    Ok(())
}

pub fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let mut plan = match (&a.plan, &a.preset) {
        (Some(path), None) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentPlan::parse(&text)?
        }
        (None, Some(name)) => preset(name)?,
        _ => {
            return Err(usage(format!(
                "give a plan file or --preset ({})",
                PRESETS.join(", ")
            )))
        }
    };
    if let Some(n) = a.seeds {
        plan.seeds = (0..n).collect();
    }
    if let Some(e) = a.evals {
        plan.settings.insert("N_max".into(), e.to_string());
    }
    plan.settings.extend(a.set.iter().cloned());
    if a.backend.is_some() {
        plan.backend = a.backend.clone();
    }
    if a.threads.is_some() {
        plan.threads = a.threads;
    }
    let report = run_experiment(&plan, &a.out)?;
    print!("{}", table_text(&report, plan.metric));
    println!("tables and cell results written to {}", a.out.display());
    let failed = report.failures();
    if failed > 0 {
        bail!(
            "{failed} of {} runs failed; see {}",
            report.cells.len(),
            a.out.join("cells.csv").display()
        );
    }
    Ok(())
}

pub fn cmd_fit(a: FitArgs) -> Result<()> {
    let file = fs::File::open(&a.log).with_context(|| format!("opening {}", a.log.display()))?;
    let (records, skipped) = read_interactions(BufReader::new(file))?;
    if skipped > 0 {
        eprintln!("skipped {skipped} malformed log lines");
    }
    if records.is_empty() {
        bail!("no usable interaction records in {}", a.log.display());
    }
    let opts = DistillOptions {
        response: match a.response {
            ResponseArg::First => ResponseChoice::First,
            ResponseArg::Each => ResponseChoice::Each,
        },
        mode: match a.mode {
            FitModeArg::Pooled => FitMode::Pooled,
            FitModeArg::PerCall => FitMode::PerCall,
        },
        dim_prob: a.dim_prob,
    };
    let (weights, report) = distill(&records, &opts)?;
    fs::write(&a.out, weights.to_definition())
        .with_context(|| format!("writing {}", a.out.display()))?;
    let report_path = a.report.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".report.txt");
        p.into()
    });
    let mut text = report.to_string();
    if skipped > 0 {
        text.push_str(&format!("skipped lines: {skipped}\n"));
    }
    fs::write(&report_path, &text).with_context(|| format!("writing {}", report_path.display()))?;
    print!("{text}");
    println!("operator written to {}", a.out.display());
    Ok(())
}

pub fn cmd_indicators(a: IndicatorArgs) -> Result<()> {
    let problem = lookup(&a.problem)?;
    let points = read_points(&a.front)?;
    let m = problem.num_objectives();
    if let Some(bad) = points.iter().find(|p| p.len() != m) {
        return Err(usage(format!(
            "{} has {} objectives per row, {} has {m}",
            a.front.display(),
            bad.len(),
            problem.name()
        )));
    }
    let mode = a
        .hv_mode
        .unwrap_or_else(|| HvConvention::default_for(&problem));
    let reference = Reference::new(problem, mode);
    println!("points: {}", points.len());
    println!(
        "hv ({mode}): {}",
        fmt_num(hv(&points, &reference.indicators)?)
    );
    println!("igd: {}", fmt_num(igd(&points, &reference.front)?));
    Ok(())
}

/// Run directories under `root`, which may itself be one, in path order.
fn run_dirs(root: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if root.join(SUMMARY_FILE).is_file() {
        out.push(root.to_path_buf());
        return Ok(());
    }
    let mut children: Vec<PathBuf> = fs::read_dir(root)
        .with_context(|| format!("reading {}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    children.sort();
    for c in children {
        run_dirs(&c, out)?;
    }
    Ok(())
}

pub fn cmd_plotdata(a: PlotArgs) -> Result<()> {
    let kind = match a.kind.as_str() {
        "convergence" => PlotKind::Convergence,
        "front" => PlotKind::Front,
        other => {
            return Err(usage(format!(
                "unknown plot kind `{other}`; expected convergence or front"
            )))
        }
    };
    let mut dirs = Vec::new();
    for root in &a.runs {
        if !root.exists() {
            bail!("missing run directory {}", root.display());
        }
        run_dirs(root, &mut dirs)?;
    }
    if dirs.is_empty() {
        bail!("no run directories (with {SUMMARY_FILE}) found");
    }
    let needed = match kind {
        PlotKind::Convergence => TRAJECTORY_FILE,
        PlotKind::Front => POPULATION_FILE,
    };
    let missing: Vec<String> = dirs
        .iter()
        .map(|d| d.join(needed))
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        bail!("missing files:\n  {}", missing.join("\n  "));
    }

    let mut text = String::new();
    let mut width = None;
    for dir in &dirs {
        let summary = read_summary(&dir.join(SUMMARY_FILE))?;
        let algo = summary.get("algorithm").cloned().unwrap_or_default();
        let seed = summary.get("seed").cloned().unwrap_or_default();
        match kind {
            PlotKind::Convergence => {
                if text.is_empty() {
                    text.push_str("algo,seed,evals,hv\n");
                }
                for p in read_trajectory(&dir.join(TRAJECTORY_FILE))? {
                    text.push_str(&format!(
                        "{algo},{seed},{},{}\n",
                        p.evaluations,
                        fmt_num(p.hv)
                    ));
                }
            }
            PlotKind::Front => {
                let points = read_points(&dir.join(POPULATION_FILE))?;
                let m = points[0].len();
                match width {
                    None => {
                        width = Some(m);
                        let cols: Vec<String> = (1..=m).map(|j| format!("f{j}")).collect();
                        text.push_str(&format!("algo,{}\n", cols.join(",")));
                    }
                    Some(w) if w != m => bail!(
                        "{} has {m} objectives, earlier runs have {w}",
                        dir.display()
                    ),
                    _ => {}
                }
                for p in points {
                    let row: Vec<String> = p.iter().map(|v| fmt_num(*v)).collect();
                    text.push_str(&format!("{algo},{}\n", row.join(",")));
                }
            }
        }
    }
    match &a.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
