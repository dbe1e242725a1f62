//! Optimizers: the decomposition loop parameterized by its reproduction
//! operator, and NSGA-II as a Pareto-based baseline.

use std::time::{Duration, Instant};

use log::{debug, warn};
use rand::Rng;

use crate::decomp::{
    das_dennis, divisions_for, neighborhoods, tchebycheff, update_neighbors, ExternalArchive,
    Neighborhood, ReferencePoint, WeightVector,
};
use crate::error::{Error, Result};
use crate::indicators::{hv, igd, IndicatorConfig, Snapshot};
use crate::llm::{generate_with_retry, InteractionRecord, InteractionSink, LlmBackend, PromptSpec};
use crate::operators::{
    de_rand_1, polynomial_mutation, sbx_pair, AblationKind, LinearOperator, LoWeights,
    OperatorConfig,
};
use crate::primitives::{DecisionVector, Individual, ObjectiveVector, RngStream};
use crate::problems::Problem;

/// Fraction of the budget between two population snapshots.
pub const SNAPSHOT_FRACTION: f64 = 0.05;

/// Reproduction operator of the decomposition loop.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorChoice {
    /// SBX followed by polynomial mutation.
    Ga,
    /// DE/rand/1 around the incumbent followed by polynomial mutation.
    De,
    /// The linear operator.
    Lo(LoWeights),
    /// The linear operator with naive rank weights.
    Ablation(AblationKind, LoWeights),
    /// A language model queried through a backend.
    Llm,
}

impl OperatorChoice {
    pub fn label(&self) -> String {
        match self {
            OperatorChoice::Ga => "moead".into(),
            OperatorChoice::De => "moead-de".into(),
            OperatorChoice::Lo(w) if w.l == crate::operators::LO_INPUT_SIZE => "moead-lo".into(),
            OperatorChoice::Lo(w) => format!("moead-lo{}", w.l),
            OperatorChoice::Ablation(k, _) => format!("moead-{k}"),
            OperatorChoice::Llm => "moead-llm".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoeadConfig {
    /// Number of subproblems (population size).
    pub n: usize,
    /// Neighborhood size.
    pub t: usize,
    /// Evaluation budget, initial population included.
    pub max_evaluations: u64,
    /// Probability of mating within the neighborhood.
    pub sigma3: f64,
    /// Parents per operator call.
    pub l: usize,
    /// Offspring per operator call.
    pub s: usize,
    pub operator: OperatorChoice,
    pub ops: OperatorConfig,
    /// Apply polynomial mutation to language-model offspring as well.
    pub mutate_llm: bool,
    pub max_retries: usize,
    pub decimal_places: usize,
    pub seed: u64,
    /// Keep the external archive of nondominated solutions.
    pub keep_archive: bool,
    /// At most this many incumbents replaced per offspring, visited in
    /// random order. `None` replaces every incumbent the offspring matches.
    pub replacement_cap: Option<usize>,
    /// Replace within the set the parents were drawn from (neighborhood or
    /// whole population) instead of always the neighborhood.
    pub update_follows_mating: bool,
}

impl MoeadConfig {
    /// Defaults for `operator` with `n` subproblems: `T = n / 10`,
    /// `sigma3 = 0.9`, `l` and `s` per operator.
    pub fn new(n: usize, operator: OperatorChoice) -> Self {
        let (l, s) = match &operator {
            OperatorChoice::Ga => (2, 1),
            OperatorChoice::De => (3, 1),
            OperatorChoice::Lo(w) | OperatorChoice::Ablation(_, w) => (w.l, 2),
            OperatorChoice::Llm => (crate::operators::LO_INPUT_SIZE, 2),
        };
        // the DE baseline follows its reference form: at most two replacements
        let replacement_cap = matches!(operator, OperatorChoice::De).then_some(2);
        Self {
            n,
            t: (n / 10).max(2).min(n),
            max_evaluations: 10_000,
            sigma3: 0.9,
            l,
            s,
            operator,
            ops: OperatorConfig {
                s,
                ..OperatorConfig::default()
            },
            mutate_llm: false,
            max_retries: crate::llm::DEFAULT_MAX_RETRIES,
            decimal_places: crate::llm::DEFAULT_DECIMAL_PLACES,
            seed: 0,
            keep_archive: true,
            replacement_cap,
            update_follows_mating: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "N = {} must be >= 2",
                self.n
            )));
        }
        if self.t < 1 || self.t > self.n {
            return Err(Error::InvalidArgument(format!(
                "T = {} must lie in [1, N = {}]",
                self.t, self.n
            )));
        }
        if self.l < 1 || self.l > self.n {
            return Err(Error::InvalidArgument(format!(
                "l = {} must lie in [1, N = {}]",
                self.l, self.n
            )));
        }
        if self.s < 1 {
            return Err(Error::InvalidArgument("s must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.sigma3) {
            return Err(Error::InvalidArgument(format!(
                "sigma3 = {} outside [0, 1]",
                self.sigma3
            )));
        }
        if self.replacement_cap == Some(0) {
            return Err(Error::InvalidArgument(
                "replacement cap must be >= 1".into(),
            ));
        }
        if self.max_retries < 1 {
            return Err(Error::InvalidArgument("max_retries must be >= 1".into()));
        }
        match &self.operator {
            OperatorChoice::Ga if self.l != 2 => {
                return Err(Error::InvalidArgument("SBX needs l = 2".into()));
            }
            OperatorChoice::Lo(w) | OperatorChoice::Ablation(_, w) => {
                w.validate()?;
                if w.l != self.l {
                    return Err(Error::InvalidArgument(format!(
                        "operator input size {} differs from l = {}",
                        w.l, self.l
                    )));
                }
            }
            _ => {}
        }
        self.ops.validate()
    }
}

/// Population objectives plus the snapshot series of one run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub algorithm: String,
    pub problem: String,
    pub seed: u64,
    pub population: Vec<Individual>,
    pub archive: Vec<Individual>,
    pub snapshots: Vec<Snapshot>,
    pub evaluations: u64,
    pub wall_time: Duration,
    pub interactions: Vec<InteractionRecord>,
    /// Operator calls that fell back to the linear operator.
    pub fallbacks: usize,
}

/// One row of a convergence trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub evaluations: u64,
    pub hv: f64,
    pub igd: f64,
}

impl RunResult {
    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.population.iter().map(|i| i.f.clone()).collect()
    }

    pub fn archive_objectives(&self) -> Vec<ObjectiveVector> {
        self.archive.iter().map(|i| i.f.clone()).collect()
    }

    /// HV and IGD of every snapshot.
    pub fn trajectory(
        &self,
        cfg: &IndicatorConfig,
        reference: &[ObjectiveVector],
    ) -> Result<Vec<TrajectoryPoint>> {
        self.snapshots
            .iter()
            .map(|s| {
                Ok(TrajectoryPoint {
                    evaluations: s.evaluations,
                    hv: hv(&s.objectives, cfg)?,
                    igd: igd(&s.objectives, reference)?,
                })
            })
            .collect()
    }
}

/// Evaluation bookkeeping shared by both optimizers.
struct Evaluator<'a> {
    problem: &'a Problem,
    count: u64,
    budget: u64,
    next_snapshot: u64,
    step: u64,
    snapshots: Vec<Snapshot>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a Problem, budget: u64) -> Self {
        let step = ((budget as f64 * SNAPSHOT_FRACTION).round() as u64).max(1);
        Self {
            problem,
            count: 0,
            budget,
            next_snapshot: step,
            step,
            snapshots: Vec::new(),
        }
    }

    fn exhausted(&self) -> bool {
        self.count >= self.budget
    }

    fn evaluate(&mut self, x: DecisionVector) -> Result<Individual> {
        let f = self.problem.evaluate(&x);
        self.count += 1;
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                evaluation: self.count,
                x,
                f,
            });
        }
        Ok(Individual {
            x,
            f,
            evaluation_index: self.count,
        })
    }

    fn snapshot_now(&mut self, pop: &[Individual]) {
        self.snapshots.push(Snapshot {
            evaluations: self.count,
            objectives: pop.iter().map(|i| i.f.clone()).collect(),
        });
    }

    /// Records a snapshot each time the count crosses a 5% mark.
    fn maybe_snapshot(&mut self, pop: &[Individual]) {
        if self.count >= self.next_snapshot {
            self.snapshot_now(pop);
            while self.next_snapshot <= self.count {
                self.next_snapshot += self.step;
            }
        }
    }

    /// Final snapshot, unless the last one already shows this state.
    fn finish(&mut self, pop: &[Individual]) {
        if self.snapshots.last().map(|s| s.evaluations) != Some(self.count) {
            self.snapshot_now(pop);
        }
    }
}

/// `l` distinct subproblem indices sorted best-first on subproblem `i`.
///
/// With probability `sigma3` they come from the neighborhood, otherwise from
/// the whole population; a neighborhood smaller than `l` is topped up from
/// the population. Ties keep the lower index first.
#[allow(clippy::too_many_arguments)]
pub fn select_mating_pool(
    i: usize,
    population: &[Individual],
    neighborhood: &Neighborhood,
    weights: &[WeightVector],
    z: &[f64],
    l: usize,
    sigma3: f64,
    rng: &mut RngStream,
) -> Vec<usize> {
    let n = population.len();
    let l = l.min(n);
    let local = rng.random::<f64>() < sigma3;
    let mut source: Vec<usize> = if local {
        neighborhood.indices().to_vec()
    } else {
        (0..n).collect()
    };
    let mut pool = draw_distinct(&mut source, l, rng);
    if pool.len() < l {
        let mut rest: Vec<usize> = (0..n).filter(|k| !pool.contains(k)).collect();
        let need = l - pool.len();
        pool.extend(draw_distinct(&mut rest, need, rng));
    }
    let lambda = weights[i].as_slice();
    let mut keyed: Vec<(f64, usize)> = pool
        .into_iter()
        .map(|k| (tchebycheff(&population[k].f, lambda, z), k))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, k)| k).collect()
}

/// Partial Fisher–Yates: up to `k` distinct entries of `items`.
fn draw_distinct(items: &mut [usize], k: usize, rng: &mut RngStream) -> Vec<usize> {
    let k = k.min(items.len());
    for a in 0..k {
        let b = rng.random_range(a..items.len());
        items.swap(a, b);
    }
    items[..k].to_vec()
}

/// Live state of the decomposition loop.
struct Moead<'a> {
    cfg: &'a MoeadConfig,
    problem: &'a Problem,
    weights: Vec<WeightVector>,
    hoods: Vec<Neighborhood>,
    population: Vec<Individual>,
    z: ReferencePoint,
    archive: ExternalArchive,
    eval: Evaluator<'a>,
    rng: RngStream,
    linear: Option<LinearOperator>,
    fallback: LinearOperator,
    interactions: Vec<InteractionRecord>,
    fallbacks: usize,
    /// Whether the latest mating draw came from the neighborhood.
    mated_locally: bool,
}

impl<'a> Moead<'a> {
    fn init(cfg: &'a MoeadConfig, problem: &'a Problem) -> Result<Self> {
        cfg.validate()?;
        let m = problem.num_objectives();
        let h = divisions_for(m, cfg.n).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "N = {} is not the size of any {m}-objective simplex lattice",
                cfg.n
            ))
        })?;
        let weights = das_dennis(m, h)?;
        let hoods = neighborhoods(&weights, cfg.t)?;
        let mut rng = RngStream::new(cfg.seed);
        let mut eval = Evaluator::new(problem, cfg.max_evaluations);
        let mut z = ReferencePoint::new(m);
        let mut archive = ExternalArchive::new(m, None);
        let mut population = Vec::with_capacity(cfg.n);
        for _ in 0..cfg.n {
            let x = problem.bounds().sample(&mut rng);
            let ind = eval.evaluate(x)?;
            z.update(&ind.f);
            if cfg.keep_archive {
                archive.insert(&ind);
            }
            population.push(ind);
        }
        eval.snapshot_now(&population);
        let linear = match &cfg.operator {
            OperatorChoice::Lo(w) => Some(LinearOperator::from_lo(w)?),
            OperatorChoice::Ablation(kind, w) => Some(LinearOperator::ablation(*kind, w)?),
            _ => None,
        };
        let fallback = LinearOperator::from_lo(&LoWeights::default().with_input_size(cfg.l))?;
        Ok(Self {
            cfg,
            problem,
            weights,
            hoods,
            population,
            z,
            archive,
            eval,
            rng,
            linear,
            fallback,
            interactions: Vec::new(),
            fallbacks: 0,
            mated_locally: true,
        })
    }

    fn mutate(&mut self, x: DecisionVector) -> DecisionVector {
        let ops = &self.cfg.ops;
        let problem = self.problem;
        if self.rng.random::<f64>() < ops.sigma2 {
            polynomial_mutation(
                &x,
                ops.per_var_mutation(problem.num_variables()),
                ops.eta_m,
                &mut self.rng,
                problem.bounds(),
            )
        } else {
            x
        }
    }

    fn pool(&mut self, i: usize, l: usize) -> Vec<usize> {
        // peek the locality coin without disturbing the stream
        self.mated_locally = self.rng.clone().random::<f64>() < self.cfg.sigma3;
        select_mating_pool(
            i,
            &self.population,
            &self.hoods[i],
            &self.weights,
            self.z.as_slice(),
            l,
            self.cfg.sigma3,
            &mut self.rng,
        )
    }

    fn linear_offspring(&mut self, op: &LinearOperator, i: usize) -> Result<Vec<DecisionVector>> {
        let mut out = Vec::with_capacity(self.cfg.s);
        for _ in 0..self.cfg.s {
            let pool = self.pool(i, op.input_size());
            let parents: Vec<&[f64]> = pool
                .iter()
                .map(|&k| self.population[k].x.as_slice())
                .collect();
            let problem = self.problem;
            let child = op.offspring(
                &parents,
                &self.population[i].x,
                &mut self.rng,
                problem.bounds(),
            )?;
            out.push(self.mutate(child));
        }
        Ok(out)
    }

    fn offspring(
        &mut self,
        i: usize,
        backend: Option<&mut dyn LlmBackend>,
    ) -> Result<Vec<DecisionVector>> {
        let cfg = self.cfg;
        let bounds = self.problem.bounds();
        let ops = &cfg.ops;
        match &cfg.operator {
            OperatorChoice::Ga => {
                let pool = self.pool(i, 2);
                let (c1, c2) = if self.rng.random::<f64>() < ops.sigma1 {
                    sbx_pair(
                        &self.population[pool[0]].x,
                        &self.population[pool[1]].x,
                        ops.eta_c,
                        &mut self.rng,
                        bounds,
                    )
                } else {
                    (
                        self.population[pool[0]].x.clone(),
                        self.population[pool[1]].x.clone(),
                    )
                };
                let mut out = vec![self.mutate(c1)];
                if self.cfg.s > 1 {
                    out.push(self.mutate(c2));
                }
                Ok(out)
            }
            OperatorChoice::De => {
                let mut out = Vec::with_capacity(self.cfg.s);
                for _ in 0..self.cfg.s {
                    let local = self.rng.random::<f64>() < self.cfg.sigma3;
                    self.mated_locally = local;
                    let mut source: Vec<usize> = if local {
                        self.hoods[i]
                            .indices()
                            .iter()
                            .copied()
                            .filter(|&k| k != i)
                            .collect()
                    } else {
                        (0..self.cfg.n).filter(|&k| k != i).collect()
                    };
                    if source.len() < 2 {
                        source = (0..self.cfg.n).filter(|&k| k != i).collect();
                    }
                    let picked = draw_distinct(&mut source, 2, &mut self.rng);
                    let xi = &self.population[i].x;
                    let child = if self.rng.random::<f64>() < ops.sigma1 {
                        de_rand_1(
                            xi,
                            &self.population[picked[0]].x,
                            &self.population[picked[1]].x,
                            xi,
                            ops.f_scale,
                            ops.crossover_rate,
                            &mut self.rng,
                            bounds,
                        )
                    } else {
                        xi.clone()
                    };
                    out.push(self.mutate(child));
                }
                Ok(out)
            }
            OperatorChoice::Lo(_) | OperatorChoice::Ablation(..) => {
                let op = self.linear.clone().expect("linear operator initialized");
                self.linear_offspring(&op, i)
            }
            OperatorChoice::Llm => {
                let backend = backend.ok_or_else(|| {
                    Error::Config("the language-model operator needs a backend".into())
                })?;
                let pool = self.pool(i, self.cfg.l);
                let lambda = self.weights[i].as_slice();
                let parents: Vec<&[f64]> = pool
                    .iter()
                    .map(|&k| self.population[k].x.as_slice())
                    .collect();
                let values: Vec<f64> = pool
                    .iter()
                    .map(|&k| tchebycheff(&self.population[k].f, lambda, self.z.as_slice()))
                    .collect();
                let mut spec = PromptSpec::from_best_first(&parents, &values, self.cfg.s)?;
                spec.decimal_places = self.cfg.decimal_places;
                match generate_with_retry(backend, &spec, self.cfg.max_retries, i) {
                    Ok((points, record)) => {
                        self.interactions.push(record);
                        let mut out = Vec::with_capacity(points.len());
                        for mut p in points {
                            bounds.clamp(&mut p);
                            out.push(if self.cfg.mutate_llm {
                                self.mutate(p)
                            } else {
                                p
                            });
                        }
                        Ok(out)
                    }
                    Err(Error::OperatorFailure { attempts }) => {
                        warn!("subproblem {i}: no usable reply after {attempts} attempts; using the linear operator");
                        self.fallbacks += 1;
                        let op = self.fallback.clone();
                        self.linear_offspring(&op, i)
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }

    /// Replacement over the mating scope in random order, stopping after
    /// `replacement_cap` replacements.
    fn capped_update(&mut self, i: usize, child: &Individual) {
        let mut scope: Vec<usize> = if self.cfg.update_follows_mating && !self.mated_locally {
            (0..self.cfg.n).collect()
        } else {
            self.hoods[i].indices().to_vec()
        };
        if self.cfg.replacement_cap.is_some() {
            let len = scope.len();
            draw_distinct(&mut scope, len, &mut self.rng);
        }
        let cap = self.cfg.replacement_cap.unwrap_or(usize::MAX);
        let z = self.z.as_slice();
        let mut replaced = 0;
        for j in scope {
            if replaced >= cap {
                break;
            }
            let lambda = self.weights[j].as_slice();
            if tchebycheff(&child.f, lambda, z) <= tchebycheff(&self.population[j].f, lambda, z) {
                self.population[j] = child.clone();
                replaced += 1;
            }
        }
    }

    fn absorb(&mut self, i: usize, x: DecisionVector) -> Result<()> {
        let child = self.eval.evaluate(x)?;
        self.z.update(&child.f);
        if self.cfg.replacement_cap.is_none() && !self.cfg.update_follows_mating {
            update_neighbors(
                &mut self.population,
                &child,
                &self.hoods[i],
                &self.weights,
                &self.z,
            );
        } else {
            self.capped_update(i, &child);
        }
        if self.cfg.keep_archive {
            self.archive.insert(&child);
        }
        self.eval.maybe_snapshot(&self.population);
        Ok(())
    }

    fn run(
        mut self,
        mut backend: Option<&mut dyn LlmBackend>,
        mut sink: Option<&mut InteractionSink>,
    ) -> Result<RunResult> {
        let started = Instant::now();
        'outer: while !self.eval.exhausted() {
            for i in 0..self.cfg.n {
                if self.eval.exhausted() {
                    break 'outer;
                }
                let logged = self.interactions.len();
                let children = match backend {
                    Some(ref mut b) => self.offspring(i, Some(&mut **b))?,
                    None => self.offspring(i, None)?,
                };
                if let Some(sink) = sink.as_deref_mut() {
                    for rec in &self.interactions[logged..] {
                        sink.append(rec);
                    }
                }
                for x in children {
                    self.absorb(i, x)?;
                }
            }
        }
        self.eval.finish(&self.population);
        debug!(
            "{} on {}: {} evaluations in {:?}",
            self.cfg.operator.label(),
            self.problem.name(),
            self.eval.count,
            started.elapsed()
        );
        Ok(RunResult {
            algorithm: self.cfg.operator.label(),
            problem: self.problem.name().to_string(),
            seed: self.cfg.seed,
            population: self.population,
            archive: self.archive.into_members(),
            snapshots: self.eval.snapshots,
            evaluations: self.eval.count,
            wall_time: started.elapsed(),
            interactions: self.interactions,
            fallbacks: self.fallbacks,
        })
    }
}

/// Runs the decomposition loop with a built-in operator.
pub fn run_moead(cfg: &MoeadConfig, problem: &Problem) -> Result<RunResult> {
    if cfg.operator == OperatorChoice::Llm {
        return Err(Error::Config(
            "the language-model operator needs a backend; use run_moead_llm".into(),
        ));
    }
    Moead::init(cfg, problem)?.run(None, None)
}

/// Runs the decomposition loop with a language model as the operator.
/// Every successful call is kept in the result and, if given, appended to
/// `sink`.
pub fn run_moead_llm(
    cfg: &MoeadConfig,
    problem: &Problem,
    backend: &mut dyn LlmBackend,
    sink: Option<&mut InteractionSink>,
) -> Result<RunResult> {
    let cfg = MoeadConfig {
        operator: OperatorChoice::Llm,
        ..cfg.clone()
    };
    Moead::init(&cfg, problem)?.run(Some(backend), sink)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nsga2Config {
    pub n: usize,
    pub max_evaluations: u64,
    pub ops: OperatorConfig,
    pub seed: u64,
}

impl Nsga2Config {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            max_evaluations: 10_000,
            ops: OperatorConfig::default(),
            seed: 0,
        }
    }
}

/// Front index (0 = nondominated) of every point.
pub fn nondominated_sort(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in (a + 1)..n {
            if crate::primitives::dominates(&points[a], &points[b]) {
                dominates_list[a].push(b);
                dominated_by_count[b] += 1;
            } else if crate::primitives::dominates(&points[b], &points[a]) {
                dominates_list[b].push(a);
                dominated_by_count[a] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&k| dominated_by_count[k] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &a in &current {
            for &b in &dominates_list[a] {
                dominated_by_count[b] -= 1;
                if dominated_by_count[b] == 0 {
                    next.push(b);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Canonical generational NSGA-II under an evaluation budget.
pub fn run_nsga2(cfg: &Nsga2Config, problem: &Problem) -> Result<RunResult> {
    if cfg.n < 2 {
        return Err(Error::InvalidArgument("NSGA-II needs N >= 2".into()));
    }
    cfg.ops.validate()?;
    let started = Instant::now();
    let bounds = problem.bounds();
    let d = problem.num_variables();
    let mut rng = RngStream::new(cfg.seed);
    let mut eval = Evaluator::new(problem, cfg.max_evaluations);
    let mut archive = ExternalArchive::new(problem.num_objectives(), None);
    let mut pop = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let ind = eval.evaluate(bounds.sample(&mut rng))?;
        archive.insert(&ind);
        pop.push(ind);
    }
    eval.snapshot_now(&pop);
    let (mut rank, mut crowd) = rank_and_crowding(&pop);
    while !eval.exhausted() {
        let tournament = |rng: &mut RngStream, rank: &[usize], crowd: &[f64]| {
            let a = rng.random_range(0..cfg.n);
            let b = rng.random_range(0..cfg.n);
            if rank[a] != rank[b] {
                if rank[a] < rank[b] {
                    a
                } else {
                    b
                }
            } else if crowd[a] != crowd[b] {
                if crowd[a] > crowd[b] {
                    a
                } else {
                    b
                }
            } else {
                a.min(b)
            }
        };
        let mut children = Vec::with_capacity(cfg.n);
        while children.len() < cfg.n {
            let p1 = tournament(&mut rng, &rank, &crowd);
            let p2 = tournament(&mut rng, &rank, &crowd);
            let (c1, c2) = if rng.random::<f64>() < cfg.ops.sigma1 {
                sbx_pair(&pop[p1].x, &pop[p2].x, cfg.ops.eta_c, &mut rng, bounds)
            } else {
                (pop[p1].x.clone(), pop[p2].x.clone())
            };
            for c in [c1, c2] {
                if children.len() < cfg.n {
                    let c = if rng.random::<f64>() < cfg.ops.sigma2 {
                        polynomial_mutation(
                            &c,
                            cfg.ops.per_var_mutation(d),
                            cfg.ops.eta_m,
                            &mut rng,
                            bounds,
                        )
                    } else {
                        c
                    };
                    children.push(c);
                }
            }
        }
        let mut merged = pop;
        for x in children {
            if eval.exhausted() {
                break;
            }
            let ind = eval.evaluate(x)?;
            archive.insert(&ind);
            merged.push(ind);
        }
        pop = environmental_selection(merged, cfg.n);
        (rank, crowd) = rank_and_crowding(&pop);
        eval.maybe_snapshot(&pop);
    }
    eval.finish(&pop);
    Ok(RunResult {
        algorithm: "nsga2".into(),
        problem: problem.name().to_string(),
        seed: cfg.seed,
        population: pop,
        archive: archive.into_members(),
        snapshots: eval.snapshots,
        evaluations: eval.count,
        wall_time: started.elapsed(),
        interactions: Vec::new(),
        fallbacks: 0,
    })
}

fn rank_and_crowding(pop: &[Individual]) -> (Vec<usize>, Vec<f64>) {
    let objs: Vec<ObjectiveVector> = pop.iter().map(|i| i.f.clone()).collect();
    let mut rank = vec![0; pop.len()];
    let mut crowd = vec![0.0; pop.len()];
    for (r, front) in nondominated_sort(&objs).into_iter().enumerate() {
        let pts: Vec<Vec<f64>> = front.iter().map(|&k| objs[k].clone()).collect();
        let cd = crate::decomp::crowding_distance(&pts);
        for (&k, c) in front.iter().zip(cd) {
            rank[k] = r;
            crowd[k] = c;
        }
    }
    (rank, crowd)
}

/// Best `n` by front, the last front cut by descending crowding distance.
fn environmental_selection(merged: Vec<Individual>, n: usize) -> Vec<Individual> {
    let objs: Vec<ObjectiveVector> = merged.iter().map(|i| i.f.clone()).collect();
    let mut keep = Vec::with_capacity(n);
    for front in nondominated_sort(&objs) {
        if keep.len() + front.len() <= n {
            keep.extend(front);
        } else {
            let pts: Vec<Vec<f64>> = front.iter().map(|&k| objs[k].clone()).collect();
            let cd = crate::decomp::crowding_distance(&pts);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| cd[b].total_cmp(&cd[a]).then(front[a].cmp(&front[b])));
            keep.extend(order.into_iter().take(n - keep.len()).map(|o| front[o]));
        }
        if keep.len() >= n {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = merged.into_iter().map(Some).collect();
    keep.into_iter()
        .map(|k| slots[k].take().expect("each index kept once"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedBackend;
    use crate::primitives::dominates;
    use crate::problems::ProblemKind;

    fn small(operator: OperatorChoice, evals: u64, seed: u64) -> MoeadConfig {
        MoeadConfig {
            max_evaluations: evals,
            seed,
            ..MoeadConfig::new(20, operator)
        }
    }

    #[test]
    fn defaults_follow_settings() {
        let c = MoeadConfig::new(200, OperatorChoice::Lo(LoWeights::default()));
        assert_eq!((c.t, c.l, c.s, c.sigma3), (20, 10, 2, 0.9));
        assert_eq!(c.ops.sigma1, 1.0);
        assert_eq!(c.ops.sigma2, 0.9);
    }

    #[test]
    fn pool_properties() {
        let p = Problem::new(ProblemKind::Zdt1);
        let weights = das_dennis(2, 19).unwrap();
        let hoods = neighborhoods(&weights, 5).unwrap();
        let mut rng = RngStream::new(1);
        let pop: Vec<Individual> = (0..20)
            .map(|k| {
                let x = p.bounds().sample(&mut rng);
                let f = p.evaluate(&x);
                Individual {
                    x,
                    f,
                    evaluation_index: k + 1,
                }
            })
            .collect();
        let z = vec![0.0, 0.0];
        for i in 0..20 {
            let pool = select_mating_pool(i, &pop, &hoods[i], &weights, &z, 5, 1.0, &mut rng);
            assert_eq!(pool.len(), 5);
            assert!(pool.iter().all(|k| hoods[i].contains(*k)));
            let vals: Vec<f64> = pool
                .iter()
                .map(|&k| tchebycheff(&pop[k].f, weights[i].as_slice(), &z))
                .collect();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
        // l > T tops up from the population with distinct indices
        let pool = select_mating_pool(0, &pop, &hoods[0], &weights, &z, 12, 1.0, &mut rng);
        let mut sorted = pool.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 12);
        // sigma3 = 0 reaches outside the neighborhood
        let mut outside = false;
        for _ in 0..50 {
            let pool = select_mating_pool(0, &pop, &hoods[0], &weights, &z, 5, 0.0, &mut rng);
            outside |= pool.iter().any(|k| !hoods[0].contains(*k));
        }
        assert!(outside);
    }

    #[test]
    fn zero_budget_returns_initial_population() {
        let p = Problem::new(ProblemKind::Zdt1);
        let r = run_moead(&small(OperatorChoice::Ga, 0, 1), &p).unwrap();
        assert_eq!(r.population.len(), 20);
        assert_eq!(r.evaluations, 20);
        assert_eq!(r.snapshots.len(), 1);
    }

    #[test]
    fn lattice_size_is_checked() {
        let p = Problem::new(ProblemKind::Uf8);
        let cfg = MoeadConfig::new(20, OperatorChoice::Ga);
        assert!(run_moead(&cfg, &p).is_err());
        let cfg = MoeadConfig {
            max_evaluations: 100,
            ..MoeadConfig::new(21, OperatorChoice::Ga)
        };
        assert!(run_moead(&cfg, &p).is_ok());
    }

    #[test]
    fn every_operator_respects_budget_and_is_deterministic() {
        let p = Problem::new(ProblemKind::Zdt1);
        let ops = [
            OperatorChoice::Ga,
            OperatorChoice::De,
            OperatorChoice::Lo(LoWeights::default()),
            OperatorChoice::Ablation(AblationKind::Random, LoWeights::default()),
            OperatorChoice::Ablation(AblationKind::Linear, LoWeights::default()),
        ];
        for op in ops {
            let cfg = small(op.clone(), 2_000, 5);
            let a = run_moead(&cfg, &p).unwrap();
            let b = run_moead(&cfg, &p).unwrap();
            assert!(a.evaluations >= 2_000 && a.evaluations < 2_000 + (cfg.s * cfg.n) as u64);
            assert_eq!(a.population, b.population, "{}", op.label());
            assert!(a.snapshots.len() >= 20);
            for x in &a.population {
                assert!(p.bounds().contains(&x.x));
            }
            let arch = a.archive_objectives();
            for u in &arch {
                for v in &arch {
                    assert!(!dominates(u, v));
                }
            }
        }
    }

    #[test]
    fn ga_improves_zdt1() {
        let p = Problem::new(ProblemKind::Zdt1);
        let cfg = IndicatorConfig::normalized(p.ideal(), p.nadir());
        let r = run_moead(&small(OperatorChoice::Ga, 10_000, 2), &p).unwrap();
        let first = hv(&r.snapshots[0].objectives, &cfg).unwrap();
        let last = hv(&r.objectives(), &cfg).unwrap();
        assert!(last > first + 0.2, "{first} -> {last}");
    }

    #[test]
    fn llm_echo_backend_stagnates_without_crashing() {
        let p = Problem::new(ProblemKind::Re21);
        let cfg = MoeadConfig {
            t: 10,
            max_evaluations: 1_000,
            ..MoeadConfig::new(50, OperatorChoice::Llm)
        };
        let mut backend = ScriptedBackend::named("echo-best").unwrap();
        let r = run_moead_llm(&cfg, &p, &mut backend, None).unwrap();
        assert!(r.evaluations >= 1_000);
        assert_eq!(r.fallbacks, 0);
        assert_eq!(r.interactions.len(), backend.calls());
        assert!(r.interactions.iter().all(|rec| rec.parents.len() == 10));
    }

    #[test]
    fn llm_failure_falls_back_to_linear_operator() {
        let p = Problem::new(ProblemKind::Zdt1);
        let cfg = MoeadConfig {
            max_evaluations: 200,
            ..MoeadConfig::new(20, OperatorChoice::Llm)
        };
        let mut backend = ScriptedBackend::named("malformed").unwrap();
        let r = run_moead_llm(&cfg, &p, &mut backend, None).unwrap();
        assert!(r.evaluations >= 200);
        assert!(r.fallbacks > 0);
        assert!(r.interactions.is_empty());
    }

    #[test]
    fn llm_needs_backend() {
        let p = Problem::new(ProblemKind::Zdt1);
        assert!(run_moead(&small(OperatorChoice::Llm, 100, 0), &p).is_err());
    }

    #[test]
    fn nondominated_sort_examples() {
        let pts = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]];
        assert_eq!(nondominated_sort(&pts), vec![vec![0, 1, 2]]);
        let layered = vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![2.0, 2.0]];
        assert_eq!(nondominated_sort(&layered), vec![vec![1], vec![0], vec![2]]);
    }

    #[test]
    fn nsga2_front_is_nondominated_and_deterministic() {
        let p = Problem::new(ProblemKind::Zdt3);
        let cfg = Nsga2Config {
            max_evaluations: 3_000,
            seed: 4,
            ..Nsga2Config::new(40)
        };
        let a = run_nsga2(&cfg, &p).unwrap();
        let b = run_nsga2(&cfg, &p).unwrap();
        assert_eq!(a.population, b.population);
        assert_eq!(a.evaluations, 3_000);
        let objs = a.objectives();
        let fronts = nondominated_sort(&objs);
        for &i in &fronts[0] {
            for &j in &fronts[0] {
                assert!(!dominates(&objs[i], &objs[j]));
            }
        }
    }
}
