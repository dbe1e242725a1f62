//! Search operators viewed as maps from selected parents to offspring.
//!
//! The distilled linear operator (LO) forms a child as a rank-weighted sum of
//! `l` parents, with per-parent Gaussian weight noise and a per-dimension
//! application probability. Simulated binary crossover, polynomial mutation
//! and DE/rand/1 are the classical baselines. All outputs are clipped to the
//! problem bounds.
//!
//! Random draw order is part of each operator's contract so that fixed seeds
//! reproduce exactly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::primitives::{Bounds, DecisionVector, RngStream};

/// Cubic-in-rank coefficients fitted to language-model behavior.
pub const LO_A: f64 = -0.111;
pub const LO_B: f64 = 1.037;
pub const LO_C: f64 = -1.291;
pub const LO_D: f64 = 0.445;
pub const LO_THETA: f64 = 0.5;
pub const LO_DIM_PROB: f64 = 0.1;
pub const LO_INPUT_SIZE: usize = 10;

/// Parameters of the linear operator.
#[derive(Clone, Debug, PartialEq)]
pub struct LoWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Standard deviation of the additive weight noise.
    pub theta: f64,
    /// Probability that a given dimension is rewritten.
    pub dim_prob: f64,
    /// Number of parents.
    pub l: usize,
}

impl Default for LoWeights {
    fn default() -> Self {
        Self {
            a: LO_A,
            b: LO_B,
            c: LO_C,
            d: LO_D,
            theta: LO_THETA,
            dim_prob: LO_DIM_PROB,
            l: LO_INPUT_SIZE,
        }
    }
}

impl LoWeights {
    pub fn with_input_size(mut self, l: usize) -> Self {
        self.l = l;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(Error::InvalidArgument(
                "LO input size l must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.dim_prob) {
            return Err(Error::InvalidArgument(format!(
                "dim_prob {} outside [0, 1]",
                self.dim_prob
            )));
        }
        if self.theta.is_nan() || self.theta < 0.0 {
            return Err(Error::InvalidArgument(format!("theta {} < 0", self.theta)));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("coefficient {name} = {v}")));
            }
        }
        Ok(())
    }

    /// The pre-softmax cubic at normalized rank `r`.
    pub fn polynomial(&self, r: f64) -> f64 {
        ((self.a * r + self.b) * r + self.c) * r + self.d
    }

    /// Renders the operator definition file (`key=value` lines).
    pub fn to_definition(&self) -> String {
        format!(
            "a={}\nb={}\nc={}\nd={}\ntheta={}\ndim_prob={}\nl={}\n",
            self.a, self.b, self.c, self.d, self.theta, self.dim_prob, self.l
        )
    }

    /// Parses an operator definition file. Missing keys keep their defaults;
    /// `#` starts a comment.
    pub fn from_definition(text: &str) -> Result<Self> {
        let mut w = LoWeights::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key=value, got `{raw}`",
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let num = || {
                value.parse::<f64>().map_err(|_| {
                    Error::Config(format!("line {}: `{value}` is not a number", lineno + 1))
                })
            };
            match key {
                "a" => w.a = num()?,
                "b" => w.b = num()?,
                "c" => w.c = num()?,
                "d" => w.d = num()?,
                "theta" => w.theta = num()?,
                "dim_prob" => w.dim_prob = num()?,
                "l" => {
                    w.l = value.parse().map_err(|_| {
                        Error::Config(format!("line {}: `{value}` is not a count", lineno + 1))
                    })?
                }
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        w.validate()?;
        Ok(w)
    }
}

/// Settings of the classical operators and the offspring count.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorConfig {
    /// Probability that the primary operator (SBX / DE / LO) fires.
    pub sigma1: f64,
    /// Probability that polynomial mutation is applied to an offspring.
    pub sigma2: f64,
    /// Per-variable mutation probability; `None` means `1/d`.
    pub mutation_per_var: Option<f64>,
    pub eta_c: f64,
    pub eta_m: f64,
    /// DE scale factor.
    pub f_scale: f64,
    /// DE binomial crossover rate.
    pub crossover_rate: f64,
    /// Offspring per operator call.
    pub s: usize,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            sigma1: 1.0,
            sigma2: 0.9,
            mutation_per_var: None,
            eta_c: 20.0,
            eta_m: 20.0,
            f_scale: 0.5,
            crossover_rate: 1.0,
            s: 2,
        }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("crossover_rate", self.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {p} outside [0, 1]"
                )));
            }
        }
        if let Some(p) = self.mutation_per_var {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "mutation_per_var = {p} outside [0, 1]"
                )));
            }
        }
        if !(0.4..=1.0).contains(&self.f_scale) {
            return Err(Error::InvalidArgument(format!(
                "DE scale factor F = {} outside [0.4, 1]",
                self.f_scale
            )));
        }
        if !(self.eta_c > 0.0 && self.eta_m > 0.0) {
            return Err(Error::InvalidArgument(
                "distribution indices eta_c, eta_m must be > 0".into(),
            ));
        }
        if self.s < 1 {
            return Err(Error::InvalidArgument(
                "offspring count s must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn per_var_mutation(&self, d: usize) -> f64 {
        self.mutation_per_var.unwrap_or(1.0 / d as f64)
    }
}

/// One weight per sorted parent (best first).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLinearMap {
    weights: Vec<f64>,
}

impl GeneralLinearMap {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "linear map weights must be non-empty and finite: {weights:?}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `sum_i w_i * parents[i]`, componentwise.
    pub fn apply(&self, parents: &[&[f64]]) -> Result<DecisionVector> {
        if parents.len() != self.weights.len() {
            return Err(Error::ContractViolation(format!(
                "{} weights for {} parents",
                self.weights.len(),
                parents.len()
            )));
        }
        let d = check_dims(parents)?;
        let mut out = vec![0.0; d];
        for (w, p) in self.weights.iter().zip(parents) {
            for (o, v) in out.iter_mut().zip(p.iter()) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}

fn check_dims(parents: &[&[f64]]) -> Result<usize> {
    let d = parents.first().map(|p| p.len()).unwrap_or(0);
    if let Some(p) = parents.iter().find(|p| p.len() != d) {
        return Err(Error::ContractViolation(format!(
            "parent dimensions differ: {} vs {}",
            d,
            p.len()
        )));
    }
    Ok(d)
}

fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Rank weights of the linear operator: the cubic evaluated at `r_i = i/l`
/// for ranks `i = 1..=l` (1 = best), passed through a softmax.
pub fn lo_base_weights(w: &LoWeights) -> Result<GeneralLinearMap> {
    if w.l == 0 {
        return Err(Error::InvalidArgument("input size l must be >= 1".into()));
    }
    let raw: Vec<f64> = (1..=w.l)
        .map(|i| w.polynomial(i as f64 / w.l as f64))
        .collect();
    GeneralLinearMap::new(softmax(&raw))
}

/// The fixed-weight alternatives used to ablate the rank weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AblationKind {
    /// Uniform `[0, 1]` draws normalized to sum to one, fresh on every call.
    Random,
    /// All weights `1/l`.
    Equal,
    /// Arithmetic sequence summing to one, largest weight on rank 1.
    Linear,
}

impl fmt::Display for AblationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AblationKind::Random => "random",
            AblationKind::Equal => "equal",
            AblationKind::Linear => "linear",
        })
    }
}

impl FromStr for AblationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(AblationKind::Random),
            "equal" => Ok(AblationKind::Equal),
            "linear" => Ok(AblationKind::Linear),
            other => Err(Error::InvalidArgument(format!(
                "unknown ablation kind `{other}`"
            ))),
        }
    }
}

pub fn ablation_weights(
    kind: AblationKind,
    l: usize,
    rng: &mut RngStream,
) -> Result<GeneralLinearMap> {
    if l == 0 {
        return Err(Error::InvalidArgument("input size l must be >= 1".into()));
    }
    let weights = match kind {
        AblationKind::Random => {
            let draws: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
            let total: f64 = draws.iter().sum();
            if total > 0.0 {
                draws.into_iter().map(|v| v / total).collect()
            } else {
                vec![1.0 / l as f64; l]
            }
        }
        AblationKind::Equal => vec![1.0 / l as f64; l],
        // (2(l - i) + 1) / l^2 for i = 1..=l: step 2/l^2, total 1
        AblationKind::Linear => (1..=l)
            .map(|i| (2 * (l - i) + 1) as f64 / (l * l) as f64)
            .collect(),
    };
    GeneralLinearMap::new(weights)
}

/// Where the linear operator's per-parent weights come from.
#[derive(Clone, Debug, PartialEq)]
pub enum RankWeights {
    Fixed(GeneralLinearMap),
    /// Fresh normalized uniform weights on every call.
    Random {
        l: usize,
    },
}

/// A configured linear operator: base weights plus noise and the
/// per-dimension application rule.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    weights: RankWeights,
    theta: f64,
    dim_prob: f64,
}

impl LinearOperator {
    pub fn from_lo(w: &LoWeights) -> Result<Self> {
        w.validate()?;
        Ok(Self {
            weights: RankWeights::Fixed(lo_base_weights(w)?),
            theta: w.theta,
            dim_prob: w.dim_prob,
        })
    }

    /// Ablation variant: `kind` replaces the rank weights and the weight
    /// noise is dropped. Input size and the per-dimension rule come from `w`.
    pub fn ablation(kind: AblationKind, w: &LoWeights) -> Result<Self> {
        w.validate()?;
        let weights = match kind {
            AblationKind::Random => RankWeights::Random { l: w.l },
            fixed => RankWeights::Fixed(ablation_weights(fixed, w.l, &mut RngStream::new(0))?),
        };
        Ok(Self {
            weights,
            theta: 0.0,
            dim_prob: w.dim_prob,
        })
    }

    pub fn input_size(&self) -> usize {
        match &self.weights {
            RankWeights::Fixed(m) => m.len(),
            RankWeights::Random { l } => *l,
        }
    }

    /// Draw order: random base weights (if any), one normal per parent, then
    /// one uniform per dimension.
    pub fn offspring(
        &self,
        parents_sorted: &[&[f64]],
        incumbent: &[f64],
        rng: &mut RngStream,
        bounds: &Bounds,
    ) -> Result<DecisionVector> {
        let l = self.input_size();
        if parents_sorted.len() != l {
            return Err(Error::ContractViolation(format!(
                "linear operator expects {l} parents, got {}",
                parents_sorted.len()
            )));
        }
        let d = check_dims(parents_sorted)?;
        if incumbent.len() != d || bounds.dim() != d {
            return Err(Error::ContractViolation(format!(
                "dimension mismatch: parents {d}, incumbent {}, bounds {}",
                incumbent.len(),
                bounds.dim()
            )));
        }
        let base = match &self.weights {
            RankWeights::Fixed(m) => m.clone(),
            RankWeights::Random { l } => ablation_weights(AblationKind::Random, *l, rng)?,
        };
        let noisy: Vec<f64> = base
            .weights()
            .iter()
            .map(|w| w + self.theta * rng.normal())
            .collect();
        let mut child = incumbent.to_vec();
        for (k, slot) in child.iter_mut().enumerate() {
            if rng.random::<f64>() < self.dim_prob {
                *slot = noisy
                    .iter()
                    .zip(parents_sorted)
                    .map(|(w, p)| w * p[k])
                    .sum();
            }
        }
        bounds.clamp(&mut child);
        Ok(child)
    }
}

/// One linear-operator offspring with the weights of `w`.
pub fn lo_offspring(
    parents_sorted: &[&[f64]],
    incumbent: &[f64],
    w: &LoWeights,
    rng: &mut RngStream,
    bounds: &Bounds,
) -> Result<DecisionVector> {
    LinearOperator::from_lo(w)?.offspring(parents_sorted, incumbent, rng, bounds)
}

/// Both SBX children. Per variable the draws are: spread `mu`, exchange
/// coin, crossover coin. Variables whose crossover coin exceeds 0.5 are
/// copied unchanged.
pub fn sbx_pair(
    p1: &[f64],
    p2: &[f64],
    eta_c: f64,
    rng: &mut RngStream,
    bounds: &Bounds,
) -> (DecisionVector, DecisionVector) {
    assert_eq!(
        p1.len(),
        p2.len(),
        "contract violation: SBX parents differ in length"
    );
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for k in 0..p1.len() {
        let mu: f64 = rng.random();
        let flip: bool = rng.random::<f64>() < 0.5;
        let cross: bool = rng.random::<f64>() < 0.5;
        if !cross {
            continue;
        }
        let mut beta = if mu <= 0.5 {
            (2.0 * mu).powf(1.0 / (eta_c + 1.0))
        } else {
            (2.0 - 2.0 * mu).powf(-1.0 / (eta_c + 1.0))
        };
        if flip {
            beta = -beta;
        }
        let mid = 0.5 * (p1[k] + p2[k]);
        let half = 0.5 * (p1[k] - p2[k]);
        c1[k] = mid + beta * half;
        c2[k] = mid - beta * half;
    }
    bounds.clamp(&mut c1);
    bounds.clamp(&mut c2);
    (c1, c2)
}

/// First child of [`sbx_pair`].
pub fn sbx_crossover(
    p1: &[f64],
    p2: &[f64],
    eta_c: f64,
    rng: &mut RngStream,
    bounds: &Bounds,
) -> DecisionVector {
    sbx_pair(p1, p2, eta_c, rng, bounds).0
}

/// Bounded polynomial mutation. Per variable: one uniform decides whether
/// to mutate, a second drives the perturbation when it does.
pub fn polynomial_mutation(
    x: &[f64],
    per_var_prob: f64,
    eta_m: f64,
    rng: &mut RngStream,
    bounds: &Bounds,
) -> DecisionVector {
    let mut y = x.to_vec();
    for (k, v) in y.iter_mut().enumerate() {
        if rng.random::<f64>() >= per_var_prob {
            continue;
        }
        let mu: f64 = rng.random();
        let (lo, hi) = (bounds.lower()[k], bounds.upper()[k]);
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        let power = 1.0 / (eta_m + 1.0);
        let delta = if mu < 0.5 {
            let t = 1.0 - (*v - lo) / span;
            (2.0 * mu + (1.0 - 2.0 * mu) * t.powf(eta_m + 1.0)).powf(power) - 1.0
        } else {
            let t = 1.0 - (hi - *v) / span;
            1.0 - (2.0 * (1.0 - mu) + 2.0 * (mu - 0.5) * t.powf(eta_m + 1.0)).powf(power)
        };
        *v += delta * span;
    }
    bounds.clamp(&mut y);
    y
}

/// DE/rand/1 with binomial crossover against `target`: the mutant is
/// `base + F (diff_a - diff_b)`. Draws: one index for the guaranteed
/// dimension, then one uniform per dimension.
#[allow(clippy::too_many_arguments)]
pub fn de_rand_1(
    base: &[f64],
    diff_a: &[f64],
    diff_b: &[f64],
    target: &[f64],
    f_scale: f64,
    crossover_rate: f64,
    rng: &mut RngStream,
    bounds: &Bounds,
) -> DecisionVector {
    let d = base.len();
    assert!(
        diff_a.len() == d && diff_b.len() == d && target.len() == d,
        "contract violation: DE vectors differ in length"
    );
    let forced = if d > 0 { rng.random_range(0..d) } else { 0 };
    let mut child = target.to_vec();
    for k in 0..d {
        let u: f64 = rng.random();
        if u < crossover_rate || k == forced {
            child[k] = base[k] + f_scale * (diff_a[k] - diff_b[k]);
        }
    }
    bounds.clamp(&mut child);
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unbounded(d: usize) -> Bounds {
        Bounds::uniform(d, -1e9, 1e9).unwrap()
    }

    #[test]
    fn distilled_coefficients_are_the_default() {
        let w = LoWeights::default();
        assert_eq!((w.a, w.b, w.c, w.d), (-0.111, 1.037, -1.291, 0.445));
        assert_eq!((w.theta, w.dim_prob, w.l), (0.5, 0.1, 10));
    }

    #[test]
    fn base_weights_single_parent() {
        let m = lo_base_weights(&LoWeights::default().with_input_size(1)).unwrap();
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn rank_one_polynomial_value() {
        // -0.111e-3 + 1.037e-2 - 0.1291 + 0.445
        let p = LoWeights::default().polynomial(0.1);
        assert!((p - 0.326159).abs() < 1e-12);
    }

    #[test]
    fn base_weight_ordering_l10() {
        let m = lo_base_weights(&LoWeights::default()).unwrap();
        let w = m.weights();
        assert!(w[0] > w[9] && w[9] > w[4]);
    }

    #[test]
    fn base_weights_sum_to_one_and_positive() {
        for l in 1..=100 {
            let m = lo_base_weights(&LoWeights::default().with_input_size(l)).unwrap();
            let s: f64 = m.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "l={l}");
            assert!(m.weights().iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn base_weights_reject_zero_l() {
        assert!(lo_base_weights(&LoWeights::default().with_input_size(0)).is_err());
    }

    #[test]
    fn lo_fixed_point_of_identical_parents() {
        let w = LoWeights {
            theta: 0.0,
            dim_prob: 1.0,
            ..LoWeights::default()
        };
        let xbar = [0.3, -0.7, 2.5];
        let parents: Vec<&[f64]> = vec![&xbar[..]; 10];
        let child = lo_offspring(
            &parents,
            &[9.0, 9.0, 9.0],
            &w,
            &mut RngStream::new(1),
            &unbounded(3),
        )
        .unwrap();
        for (c, x) in child.iter().zip(xbar) {
            assert!((c - x).abs() < 1e-12);
        }
    }

    #[test]
    fn lo_dim_prob_zero_copies_incumbent() {
        let w = LoWeights {
            dim_prob: 0.0,
            ..LoWeights::default()
        };
        let p = [[0.1, 0.2]; 10];
        let parents: Vec<&[f64]> = p.iter().map(|v| &v[..]).collect();
        let child = lo_offspring(
            &parents,
            &[0.5, 0.6],
            &w,
            &mut RngStream::new(3),
            &unbounded(2),
        )
        .unwrap();
        assert_eq!(child, vec![0.5, 0.6]);
    }

    #[test]
    fn lo_two_parents_weighted_sum() {
        let w = LoWeights {
            theta: 0.0,
            dim_prob: 1.0,
            l: 2,
            ..LoWeights::default()
        };
        // independent softmax of p(0.5) and p(1.0)
        let p1: f64 = -0.111 * 0.125 + 1.037 * 0.25 - 1.291 * 0.5 + 0.445;
        let p2: f64 = -0.111 + 1.037 - 1.291 + 0.445;
        let w2 = p2.exp() / (p1.exp() + p2.exp());
        let parents: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 1.0]];
        let child = lo_offspring(
            &parents,
            &[5.0, 5.0],
            &w,
            &mut RngStream::new(0),
            &unbounded(2),
        )
        .unwrap();
        assert!((child[0] - w2).abs() < 1e-12 && (child[1] - w2).abs() < 1e-12);
    }

    #[test]
    fn lo_dimension_mismatch() {
        let parents: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0]];
        let w = LoWeights::default().with_input_size(2);
        assert!(matches!(
            lo_offspring(
                &parents,
                &[0.0, 0.0],
                &w,
                &mut RngStream::new(0),
                &unbounded(2)
            ),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn lo_noise_is_shared_across_dimensions() {
        // all parents share one value per dimension ratio, so a shared noisy
        // weight vector keeps child[1] == 2 * child[0]
        let w = LoWeights {
            theta: 0.5,
            dim_prob: 1.0,
            l: 4,
            ..LoWeights::default()
        };
        let p = [[1.0, 2.0], [3.0, 6.0], [-1.0, -2.0], [0.5, 1.0]];
        let parents: Vec<&[f64]> = p.iter().map(|v| &v[..]).collect();
        for seed in 0..20 {
            let child = lo_offspring(
                &parents,
                &[0.0, 0.0],
                &w,
                &mut RngStream::new(seed),
                &unbounded(2),
            )
            .unwrap();
            assert!((child[1] - 2.0 * child[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn ablation_examples() {
        let mut rng = RngStream::new(5);
        let equal = ablation_weights(AblationKind::Equal, 10, &mut rng).unwrap();
        assert!(equal.weights().iter().all(|w| (w - 0.1).abs() < 1e-15));
        let linear = ablation_weights(AblationKind::Linear, 10, &mut rng).unwrap();
        let expected = [0.19, 0.17, 0.15, 0.13, 0.11, 0.09, 0.07, 0.05, 0.03, 0.01];
        for (w, e) in linear.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-15);
        }
        let random = ablation_weights(AblationKind::Random, 4, &mut rng).unwrap();
        assert!(random.weights().iter().all(|w| *w >= 0.0));
        assert!((random.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let again = ablation_weights(AblationKind::Random, 4, &mut rng).unwrap();
        assert_ne!(random, again);
    }

    #[test]
    fn ablation_operator_is_noise_free() {
        let w = LoWeights {
            dim_prob: 1.0,
            ..LoWeights::default()
        };
        let op = LinearOperator::ablation(AblationKind::Equal, &w).unwrap();
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let parents: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let mut rng = RngStream::new(3);
        for _ in 0..20 {
            let child = op
                .offspring(&parents, &rows[0], &mut rng, &unbounded(2))
                .unwrap();
            assert!((child[0] - 4.5).abs() < 1e-12 && (child[1] - 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_ablation_sums_to_one_for_any_l() {
        for l in 1..50 {
            let m = ablation_weights(AblationKind::Linear, l, &mut RngStream::new(0)).unwrap();
            assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(m.weights().windows(2).all(|p| p[0] > p[1]));
        }
    }

    #[test]
    fn definition_file_round_trip() {
        let w = LoWeights {
            a: -0.123456789012345,
            theta: 0.3,
            l: 20,
            ..LoWeights::default()
        };
        assert_eq!(LoWeights::from_definition(&w.to_definition()).unwrap(), w);
        assert!(LoWeights::from_definition("bogus=1").is_err());
        assert!(LoWeights::from_definition("dim_prob=2").is_err());
    }

    #[test]
    fn operator_config_validation() {
        assert!(OperatorConfig::default().validate().is_ok());
        let bad_f = OperatorConfig {
            f_scale: 0.2,
            ..OperatorConfig::default()
        };
        assert!(bad_f.validate().is_err());
        let bad_s = OperatorConfig {
            s: 0,
            ..OperatorConfig::default()
        };
        assert!(bad_s.validate().is_err());
    }

    #[test]
    fn sbx_identical_parents() {
        let b = Bounds::uniform(5, 0.0, 1.0).unwrap();
        let p = [0.1, 0.2, 0.3, 0.4, 0.5];
        let mut rng = RngStream::new(9);
        for _ in 0..100 {
            assert_eq!(sbx_crossover(&p, &p, 20.0, &mut rng, &b), p.to_vec());
        }
    }

    #[test]
    fn sbx_reproducible() {
        let b = Bounds::uniform(3, 0.0, 1.0).unwrap();
        let a = sbx_crossover(
            &[0.1, 0.5, 0.9],
            &[0.8, 0.2, 0.3],
            20.0,
            &mut RngStream::new(4),
            &b,
        );
        let c = sbx_crossover(
            &[0.1, 0.5, 0.9],
            &[0.8, 0.2, 0.3],
            20.0,
            &mut RngStream::new(4),
            &b,
        );
        assert_eq!(a, c);
    }

    #[test]
    fn mutation_zero_probability_is_identity() {
        let b = Bounds::uniform(4, -1.0, 1.0).unwrap();
        let x = [0.1, -0.2, 0.3, 0.9];
        assert_eq!(
            polynomial_mutation(&x, 0.0, 20.0, &mut RngStream::new(2), &b),
            x.to_vec()
        );
    }

    #[test]
    fn mutation_reproducible() {
        let b = Bounds::uniform(4, -1.0, 1.0).unwrap();
        let x = [0.1, -0.2, 0.3, 0.9];
        let a = polynomial_mutation(&x, 1.0, 20.0, &mut RngStream::new(2), &b);
        let c = polynomial_mutation(&x, 1.0, 20.0, &mut RngStream::new(2), &b);
        assert_eq!(a, c);
        assert_ne!(a, x.to_vec());
    }

    #[test]
    fn de_examples() {
        let b = unbounded(2);
        let mut rng = RngStream::new(0);
        let v = de_rand_1(
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[0.0, 1.0],
            &[7.0, 7.0],
            0.5,
            1.0,
            &mut rng,
            &b,
        );
        assert_eq!(v, vec![0.5, -0.5]);
        let same = de_rand_1(
            &[0.3, 0.4],
            &[1.0, 2.0],
            &[1.0, 2.0],
            &[7.0, 7.0],
            0.5,
            1.0,
            &mut rng,
            &b,
        );
        assert_eq!(same, vec![0.3, 0.4]);
        let zero_f = de_rand_1(
            &[0.3, 0.4],
            &[1.0, 2.0],
            &[5.0, 6.0],
            &[7.0, 7.0],
            0.0,
            1.0,
            &mut rng,
            &b,
        );
        assert_eq!(zero_f, vec![0.3, 0.4]);
    }

    #[test]
    fn de_zero_crossover_rate_changes_exactly_one_dimension() {
        let b = unbounded(6);
        let target = [9.0; 6];
        let v = de_rand_1(
            &[0.0; 6],
            &[1.0; 6],
            &[0.0; 6],
            &target,
            0.5,
            0.0,
            &mut RngStream::new(3),
            &b,
        );
        assert_eq!(v.iter().filter(|x| **x != 9.0).count(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn operators_respect_bounds(seed in any::<u64>(),
                                    p in proptest::collection::vec(-3.0f64..3.0, 40)) {
            let b = Bounds::new(vec![-1.0, 0.0, -2.0, 0.5], vec![1.0, 1.0, 0.0, 0.6]).unwrap();
            let rows: Vec<&[f64]> = p.chunks(4).collect();
            let mut rng = RngStream::new(seed);
            let lo = lo_offspring(&rows, rows[0], &LoWeights { dim_prob: 1.0, ..LoWeights::default() }, &mut rng, &b).unwrap();
            prop_assert!(b.contains(&lo));
            let s = sbx_crossover(rows[0], rows[1], 20.0, &mut rng, &b);
            prop_assert!(b.contains(&s));
            let m = polynomial_mutation(&s, 1.0, 20.0, &mut rng, &b);
            prop_assert!(b.contains(&m));
            let d = de_rand_1(rows[0], rows[1], rows[2], rows[3], 1.0, 1.0, &mut rng, &b);
            prop_assert!(b.contains(&d));
        }
    }
}
