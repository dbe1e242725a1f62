//! Experiment grids: algorithms x problems x seeds, run in parallel and
//! aggregated into result tables with rank-sum marks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use llmoea::operators::LoWeights;
use llmoea::problems::lookup;
use rayon::prelude::*;

use crate::backend::BackendSpec;
use crate::config::{
    build_run_config, check_keys, Algorithm, HvConvention, IndicatorSource, Settings, SETTING_KEYS,
};
use crate::csvio::fmt_num;
use crate::error::usage;
use crate::runner::{assess, execute, write_run_dir, LlmAccess, Reference};
use crate::stats::{compare, mean, std_dev, Mark};

/// One table column.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub label: String,
    pub algorithm: Algorithm,
    /// Overrides on top of the plan settings.
    pub settings: Settings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Hv,
    Igd,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Hv => "hv",
            Metric::Igd => "igd",
        }
    }

    pub fn lower_is_better(self) -> bool {
        self == Metric::Igd
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hv" => Ok(Metric::Hv),
            "igd" => Ok(Metric::Igd),
            _ => Err(format!("expected hv or igd, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub columns: Vec<Column>,
    pub problems: Vec<String>,
    pub seeds: Vec<u64>,
    pub settings: Settings,
    /// Label of the column every other column is tested against.
    pub reference: String,
    /// Table printed to the console.
    pub metric: Metric,
    pub source: IndicatorSource,
    /// `None` picks the convention per problem.
    pub hv_mode: Option<HvConvention>,
    pub backend: Option<BackendSpec>,
    pub lo_file: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ExperimentPlan {
    fn empty(name: &str) -> Self {
        Self {
            name: name.into(),
            columns: Vec::new(),
            problems: Vec::new(),
            seeds: Vec::new(),
            settings: Settings::new(),
            reference: String::new(),
            metric: Metric::Hv,
            source: IndicatorSource::Population,
            hv_mode: None,
            backend: None,
            lo_file: None,
            threads: None,
        }
    }

    /// Parses a plan file. Plan keys are `name`, `algorithms`, `problems`,
    /// `seeds`, `reference`, `metric`, `indicator_source`, `hv_mode`,
    /// `backend`, `lo_file` and `threads`; run settings apply to every cell
    /// and `<label>.<setting>` to one column.
    pub fn parse(text: &str) -> Result<Self> {
        let mut plan = Self::empty("experiment");
        let mut per_column: Vec<(String, String, String)> = Vec::new();
        for (k, v) in crate::config::parse_key_values(text)? {
            match k.as_str() {
                "name" => plan.name = v,
                "algorithms" => {
                    plan.columns = split_list(&v)
                        .map(|item| {
                            let (label, name) = item.split_once(':').unwrap_or((item, item));
                            Ok(Column {
                                label: label.trim().to_string(),
                                algorithm: Algorithm::parse(name.trim())?,
                                settings: Settings::new(),
                            })
                        })
                        .collect::<Result<_>>()?
                }
                "problems" => plan.problems = split_list(&v).map(str::to_string).collect(),
                "seeds" => plan.seeds = parse_seeds(&v)?,
                "reference" => plan.reference = v,
                "metric" => plan.metric = v.parse().map_err(usage)?,
                "indicator_source" => plan.source = v.parse().map_err(usage)?,
                "hv_mode" => plan.hv_mode = Some(v.parse().map_err(usage)?),
                "backend" => plan.backend = Some(v.parse().map_err(usage)?),
                "lo_file" => plan.lo_file = Some(v.into()),
                "threads" => {
                    plan.threads = Some(
                        v.parse()
                            .map_err(|_| usage(format!("threads: `{v}` is not a count")))?,
                    )
                }
                key if SETTING_KEYS.contains(&key) => {
                    plan.settings.insert(k, v);
                }
                key => match key.rsplit_once('.') {
                    Some((label, setting)) => per_column.push((label.into(), setting.into(), v)),
                    None => return Err(usage(format!("unknown plan key `{key}`"))),
                },
            }
        }
        for (label, setting, v) in per_column {
            let col = plan
                .columns
                .iter_mut()
                .find(|c| c.label == label)
                .ok_or_else(|| usage(format!("override for unknown column `{label}`")))?;
            col.settings.insert(setting, v);
        }
        if plan.reference.is_empty() {
            if let Some(last) = plan.columns.last() {
                plan.reference = last.label.clone();
            }
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() || self.problems.is_empty() || self.seeds.is_empty() {
            return Err(usage(format!(
                "plan `{}` is empty: it needs algorithms, problems and seeds",
                self.name
            )));
        }
        let labels: BTreeSet<&str> = self.columns.iter().map(|c| c.label.as_str()).collect();
        if labels.len() != self.columns.len() {
            return Err(usage("column labels must be distinct"));
        }
        if !labels.contains(self.reference.as_str()) {
            return Err(usage(format!(
                "reference column `{}` is not in the plan",
                self.reference
            )));
        }
        let seeds: BTreeSet<u64> = self.seeds.iter().copied().collect();
        if seeds.len() != self.seeds.len() {
            return Err(usage("seeds must be distinct"));
        }
        for p in &self.problems {
            lookup(p)?;
        }
        check_keys(&self.settings)?;
        for c in &self.columns {
            check_keys(&c.settings)?;
            if c.algorithm.needs_backend() && self.backend.is_none() {
                return Err(usage(format!(
                    "column `{}` needs a backend (--backend)",
                    c.label
                )));
            }
        }
        Ok(())
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `a..b` (half open) or a comma list.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>> {
    let bad = || usage(format!("seeds: expected `a..b` or a comma list, got `{v}`"));
    if let Some((a, b)) = v.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..b).collect());
    }
    split_list(v)
        .map(|s| s.parse().map_err(|_| bad()))
        .collect()
}

pub const PRESETS: &[&str] = &[
    "table2_hv",
    "table3_igd",
    "table4_ablation",
    "table1_re_demo",
];

const ZDT_UF: &[&str] = &[
    "zdt1", "zdt2", "zdt3", "zdt4", "zdt6", "uf1", "uf2", "uf3", "uf4", "uf5", "uf6", "uf7", "uf8",
    "uf9",
];
const UF: &[&str] = &[
    "uf1", "uf2", "uf3", "uf4", "uf5", "uf6", "uf7", "uf8", "uf9",
];

fn columns(items: &[(&str, &str)]) -> Vec<Column> {
    items
        .iter()
        .map(|(label, name)| Column {
            label: label.to_string(),
            algorithm: Algorithm::parse(name).expect("preset algorithm"),
            settings: Settings::new(),
        })
        .collect()
}

/// The shipped experiment plans, at the full 30 runs per cell.
pub fn preset(name: &str) -> Result<ExperimentPlan> {
    let mut plan = ExperimentPlan::empty(name);
    let baselines = [
        ("NSGA-II", "nsga2"),
        ("MOEA/D", "moead"),
        ("MOEA/D-DE", "moead-de"),
        ("MOEA/D-LO", "moead-lo"),
    ];
    match name {
        "table2_hv" | "table3_igd" => {
            plan.columns = columns(&baselines);
            plan.problems = ZDT_UF.iter().map(|s| s.to_string()).collect();
            plan.seeds = (0..30).collect();
            plan.reference = "MOEA/D-LO".into();
            plan.metric = if name == "table2_hv" {
                Metric::Hv
            } else {
                Metric::Igd
            };
        }
        "table4_ablation" => {
            plan.columns = columns(&[
                ("Random", "moead-random"),
                ("Equal", "moead-equal"),
                ("Linear", "moead-linear"),
                ("LO40", "moead-lo40"),
                ("LO30", "moead-lo30"),
                ("LO20", "moead-lo20"),
                ("LO10", "moead-lo"),
            ]);
            plan.problems = UF.iter().map(|s| s.to_string()).collect();
            plan.seeds = (0..30).collect();
            plan.reference = "LO10".into();
            plan.metric = Metric::Igd;
        }
        "table1_re_demo" => {
            plan.columns = columns(&[("MOEA/D", "moead"), ("MOEA/D-LLM", "moead-llm")]);
            plan.problems = ["re21", "re22", "re23", "re24", "re25"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            plan.seeds = vec![0];
            plan.reference = "MOEA/D-LLM".into();
            plan.metric = Metric::Hv;
        }
        other => {
            return Err(usage(format!(
                "unknown preset `{other}`; valid presets: {}",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(plan)
}

/// Outcome of one grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub label: String,
    pub problem: String,
    pub seed: u64,
    pub outcome: std::result::Result<(f64, f64), String>,
    pub wall_time_s: f64,
}

/// Per-column statistics of one problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnStat {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
    pub failed: usize,
    /// `None` for the reference column.
    pub mark: Option<Mark>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatRow {
    pub problem: String,
    pub m: usize,
    pub d: usize,
    /// One entry per column; `None` when every run failed.
    pub stats: Vec<Option<ColumnStat>>,
}

pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    pub cells: Vec<CellResult>,
    pub hv_rows: Vec<StatRow>,
    pub igd_rows: Vec<StatRow>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    pub fn rows(&self, metric: Metric) -> &[StatRow] {
        match metric {
            Metric::Hv => &self.hv_rows,
            Metric::Igd => &self.igd_rows,
        }
    }
}

fn cell_dir(out: &Path, label: &str, problem: &str, seed: u64) -> PathBuf {
    let safe: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    out.join("runs")
        .join(safe)
        .join(problem)
        .join(format!("seed{seed}"))
}

/// Runs the plan and writes cell directories and tables under `out`.
pub fn run_experiment(plan: &ExperimentPlan, out: &Path) -> Result<ExperimentReport> {
    plan.validate()?;
    let lo_weights = match &plan.lo_file {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(LoWeights::from_definition(&text)?)
        }
        None => None,
    };
    if let Some(spec) = &plan.backend {
        if plan.columns.iter().any(|c| c.algorithm.needs_backend()) {
            // fail fast on missing credentials or fixture directories
            spec.build(&plan.settings)?;
        }
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let references: BTreeMap<&str, Reference> = plan
        .problems
        .iter()
        .map(|p| {
            let problem = lookup(p)?;
            let mode = plan
                .hv_mode
                .unwrap_or_else(|| HvConvention::default_for(&problem));
            Ok((p.as_str(), Reference::new(problem, mode)))
        })
        .collect::<Result<_>>()?;

    let grid: Vec<(&str, &Column, u64)> = plan
        .problems
        .iter()
        .flat_map(|p| {
            plan.columns
                .iter()
                .flat_map(move |c| plan.seeds.iter().map(move |&s| (p.as_str(), c, s)))
        })
        .collect();

    let run_cell = |&(problem, column, seed): &(&str, &Column, u64)| -> CellResult {
        let start = std::time::Instant::now();
        let outcome = (|| -> Result<(f64, f64)> {
            let reference = &references[problem];
            let mut settings = plan.settings.clone();
            settings.extend(column.settings.clone());
            let algorithm = match &lo_weights {
                Some(w) => column.algorithm.clone().with_lo_weights(w.clone()),
                None => column.algorithm.clone(),
            };
            let cfg = build_run_config(&algorithm, &reference.problem, seed, &settings)?;
            let dir = cell_dir(out, &column.label, problem, seed);
            fs::create_dir_all(&dir)?;
            let log = dir.join("interactions.jsonl");
            let llm = plan.backend.as_ref().map(|backend| LlmAccess {
                backend,
                settings: &settings,
                log: Some(log.as_path()),
            });
            let result = execute(&cfg, &reference.problem, llm.as_ref())?;
            let assessed = assess(result, reference, plan.source)?;
            write_run_dir(&dir, &assessed, false)?;
            Ok((assessed.hv, assessed.igd))
        })();
        CellResult {
            label: column.label.clone(),
            problem: problem.to_string(),
            seed,
            outcome: outcome.map_err(|e| format!("{e:#}")),
            wall_time_s: start.elapsed().as_secs_f64(),
        }
    };

    let cells: Vec<CellResult> = match plan.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(|| grid.par_iter().map(run_cell).collect()),
        None => grid.par_iter().map(run_cell).collect(),
    };
    for c in cells.iter().filter(|c| c.outcome.is_err()) {
        log::warn!(
            "{} on {} seed {} failed: {}",
            c.label,
            c.problem,
            c.seed,
            c.outcome.as_ref().unwrap_err()
        );
    }

    let report = ExperimentReport {
        hv_rows: aggregate(plan, &references, &cells, Metric::Hv),
        igd_rows: aggregate(plan, &references, &cells, Metric::Igd),
        plan: plan.clone(),
        cells,
    };
    write_report(&report, out)?;
    Ok(report)
}

fn aggregate(
    plan: &ExperimentPlan,
    references: &BTreeMap<&str, Reference>,
    cells: &[CellResult],
    metric: Metric,
) -> Vec<StatRow> {
    plan.problems
        .iter()
        .map(|problem| {
            let values = |label: &str| -> (Vec<f64>, usize) {
                let mut ok = Vec::new();
                let mut failed = 0;
                for c in cells
                    .iter()
                    .filter(|c| c.problem == *problem && c.label == label)
                {
                    match &c.outcome {
                        Ok((hv, igd)) => ok.push(if metric == Metric::Hv { *hv } else { *igd }),
                        Err(_) => failed += 1,
                    }
                }
                (ok, failed)
            };
            let (ref_values, _) = values(&plan.reference);
            let stats = plan
                .columns
                .iter()
                .map(|col| {
                    let (v, failed) = values(&col.label);
                    if v.is_empty() {
                        return None;
                    }
                    let mark = (col.label != plan.reference && !ref_values.is_empty())
                        .then(|| compare(&v, &ref_values, metric.lower_is_better()));
                    Some(ColumnStat {
                        mean: mean(&v),
                        std: std_dev(&v),
                        runs: v.len(),
                        failed,
                        mark,
                    })
                })
                .collect();
            let p = &references[problem.as_str()].problem;
            StatRow {
                problem: problem.clone(),
                m: p.num_objectives(),
                d: p.num_variables(),
                stats,
            }
        })
        .collect()
}

fn best_index(row: &StatRow, metric: Metric) -> Option<usize> {
    row.stats
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.as_ref().map(|s| (i, s.mean)))
        .reduce(|a, b| {
            let better = if metric.lower_is_better() {
                b.1 < a.1
            } else {
                b.1 > a.1
            };
            if better {
                b
            } else {
                a
            }
        })
        .map(|(i, _)| i)
}

/// Tally of `+ / - / =` per column; `None` for the reference column.
pub fn footer(report: &ExperimentReport, metric: Metric) -> Vec<Option<(usize, usize, usize)>> {
    let rows = report.rows(metric);
    report
        .plan
        .columns
        .iter()
        .enumerate()
        .map(|(i, col)| {
            (col.label != report.plan.reference).then(|| {
                let marks: Vec<Mark> = rows
                    .iter()
                    .filter_map(|r| r.stats[i].as_ref().and_then(|s| s.mark))
                    .collect();
                let count = |m: Mark| marks.iter().filter(|&&x| x == m).count();
                (count(Mark::Better), count(Mark::Worse), count(Mark::Same))
            })
        })
        .collect()
}

/// The table as CSV: per column mean, std, mark and run count, then the
/// best column, and a final `+/-/=` row.
pub fn table_csv(report: &ExperimentReport, metric: Metric) -> String {
    let rows = report.rows(metric);
    let cols = &report.plan.columns;
    let mut out = String::from("problem,m,d");
    for c in cols {
        let l = csv_field(&c.label);
        write!(out, ",{l}_mean,{l}_std,{l}_mark,{l}_runs").unwrap();
    }
    out.push_str(",best\n");
    for row in rows {
        write!(out, "{},{},{}", row.problem, row.m, row.d).unwrap();
        for s in &row.stats {
            match s {
                Some(s) => write!(
                    out,
                    ",{},{},{},{}",
                    fmt_num(s.mean),
                    fmt_num(s.std),
                    s.mark.map(|m| m.to_string()).unwrap_or_default(),
                    s.runs
                )
                .unwrap(),
                None => out.push_str(",,,,0"),
            }
        }
        let best = best_index(row, metric)
            .map(|i| csv_field(&cols[i].label))
            .unwrap_or_default();
        writeln!(out, ",{best}").unwrap();
    }
    out.push_str("+/-/=,,");
    for tally in footer(report, metric) {
        match tally {
            Some((b, w, s)) => write!(out, ",,,{b}/{w}/{s},").unwrap(),
            None => out.push_str(",,,,"),
        }
    }
    out.push_str(",\n");
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The table as aligned text: `mean (std) mark` cells, `*` on the best
/// column of each row, `NA` for cells with no successful run and `!` where
/// some runs failed.
pub fn table_text(report: &ExperimentReport, metric: Metric) -> String {
    let rows = report.rows(metric);
    let cols = &report.plan.columns;
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["Problem".to_string(), "m".into(), "d".into()];
    header.extend(cols.iter().map(|c| c.label.clone()));
    grid.push(header);
    for row in rows {
        let best = best_index(row, metric);
        let mut line = vec![
            row.problem.to_uppercase(),
            row.m.to_string(),
            row.d.to_string(),
        ];
        for (i, s) in row.stats.iter().enumerate() {
            let cell = match s {
                None => "NA".to_string(),
                Some(s) => {
                    let mut cell = format!("{:.4e} ({:.2e})", s.mean, s.std);
                    if let Some(m) = s.mark {
                        write!(cell, " {m}").unwrap();
                    }
                    if s.failed > 0 {
                        cell.push('!');
                    }
                    if best == Some(i) {
                        cell.insert(0, '*');
                    }
                    cell
                }
            };
            line.push(cell);
        }
        grid.push(line);
    }
    let mut foot = vec!["+/-/=".to_string(), String::new(), String::new()];
    foot.extend(footer(report, metric).into_iter().map(|t| {
        t.map(|(b, w, s)| format!("{b}/{w}/{s}"))
            .unwrap_or_default()
    }));
    grid.push(foot);

    let widths: Vec<usize> = (0..grid[0].len())
        .map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = format!(
        "{} ({}, {} runs per cell)\n",
        report.plan.name,
        metric.name(),
        report.plan.seeds.len()
    );
    for r in &grid {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn write_report(report: &ExperimentReport, out: &Path) -> Result<()> {
    let mut cells = String::from("label,problem,seed,hv,igd,status\n");
    let mut timing = String::from("label,problem,seed,wall_time_s\n");
    for c in &report.cells {
        let label = csv_field(&c.label);
        match &c.outcome {
            Ok((hv, igd)) => writeln!(
                cells,
                "{label},{},{},{},{},ok",
                c.problem,
                c.seed,
                fmt_num(*hv),
                fmt_num(*igd)
            ),
            Err(e) => writeln!(
                cells,
                "{label},{},{},,,{}",
                c.problem,
                c.seed,
                csv_field(&format!("error: {e}"))
            ),
        }
        .unwrap();
        writeln!(
            timing,
            "{label},{},{},{:.3}",
            c.problem, c.seed, c.wall_time_s
        )
        .unwrap();
    }
    let files = [
        ("cells.csv", cells),
        ("timing.csv", timing),
        ("hv_table.csv", table_csv(report, Metric::Hv)),
        ("igd_table.csv", table_csv(report, Metric::Igd)),
        ("hv_table.txt", table_text(report, Metric::Hv)),
        ("igd_table.txt", table_text(report, Metric::Igd)),
    ];
    for (name, text) in files {
        let path = out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
