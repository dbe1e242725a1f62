//! Distills logged language-model interactions into a linear operator.
//!
//! Every variable of every call is one regression sample: the sorted
//! parents' values of that variable against the offspring's value. An
//! intercept-free least-squares fit gives one weight per rank, a cubic in
//! normalized rank smooths those weights, and the residual spread gives the
//! noise scale.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::llm::InteractionRecord;
use crate::operators::LoWeights;
use crate::primitives::RngStream;

/// One variable of one call.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionSample {
    /// The variable's value in each parent, best parent first.
    pub s: Vec<f64>,
    /// The variable's value in the offspring.
    pub r: f64,
}

/// Which offspring of a call become responses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResponseChoice {
    /// Only the first parsed offspring.
    #[default]
    First,
    /// Every parsed offspring contributes its own samples.
    Each,
}

/// One pooled regression, or the mean of per-call regressions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FitMode {
    #[default]
    Pooled,
    PerCall,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DistillOptions {
    pub response: ResponseChoice,
    pub mode: FitMode,
    /// Per-dimension probability written into the resulting operator.
    pub dim_prob: Option<f64>,
}

pub fn extract_samples(
    records: &[InteractionRecord],
    choice: ResponseChoice,
) -> Result<Vec<RegressionSample>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let l = first.parents.len();
    let mut out = Vec::new();
    for (idx, rec) in records.iter().enumerate() {
        if rec.parents.len() != l {
            return Err(Error::InvalidDataset(format!(
                "record {idx} has {} parents, expected {l}",
                rec.parents.len()
            )));
        }
        let d = rec.parents.first().map(|p| p.len()).unwrap_or(0);
        if rec.parents.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidDataset(format!(
                "record {idx} has parents of differing dimension"
            )));
        }
        let responses: &[Vec<f64>] = match choice {
            ResponseChoice::First => &rec.offspring[..rec.offspring.len().min(1)],
            ResponseChoice::Each => &rec.offspring,
        };
        if responses.is_empty() {
            return Err(Error::InvalidDataset(format!(
                "record {idx} has no offspring"
            )));
        }
        for child in responses {
            if child.len() != d {
                return Err(Error::InvalidDataset(format!(
                    "record {idx}: offspring of length {} for {d} variables",
                    child.len()
                )));
            }
            for (k, r) in child.iter().enumerate() {
                let s: Vec<f64> = rec.parents.iter().map(|p| p[k]).collect();
                if !r.is_finite() || s.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidDataset(format!(
                        "record {idx} holds a non-finite value"
                    )));
                }
                out.push(RegressionSample { s, r: *r });
            }
        }
    }
    Ok(out)
}

/// Relative tolerance below which a column counts as a combination of the
/// earlier ones.
const RANK_TOL: f64 = 1e-10;

/// Columns that are (numerically) linear combinations of earlier columns,
/// found by modified Gram–Schmidt.
fn dependent_columns(a: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..a.ncols() {
        let col = a.column(j).into_owned();
        let norm = col.norm();
        let mut v = col;
        for q in &basis {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        let rest = v.norm();
        if norm == 0.0 || rest <= RANK_TOL * norm {
            dependent.push(j);
        } else {
            basis.push(v / rest);
        }
    }
    dependent
}

/// Least-squares solution of `a w = b` via Householder QR.
fn least_squares(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() < a.ncols() {
        return Err(Error::InvalidDataset(format!(
            "{} equations for {} unknowns",
            a.nrows(),
            a.ncols()
        )));
    }
    let dependent = dependent_columns(&a);
    if !dependent.is_empty() {
        return Err(Error::Singular { columns: dependent });
    }
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    qr.r().solve_upper_triangular(&qtb).ok_or(Error::Singular {
        columns: Vec::new(),
    })
}

/// Intercept-free least squares: the weights `w` minimizing
/// `sum (s . w - r)^2`.
pub fn fit_linear(samples: &[RegressionSample]) -> Result<Vec<f64>> {
    let l = samples
        .first()
        .map(|s| s.s.len())
        .ok_or_else(|| Error::InvalidDataset("no samples".into()))?;
    if samples.iter().any(|s| s.s.len() != l) {
        return Err(Error::InvalidDataset("samples of differing length".into()));
    }
    let a = DMatrix::from_fn(samples.len(), l, |i, j| samples[i].s[j]);
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.r));
    Ok(least_squares(a, b)?.iter().copied().collect())
}

/// Cubic `(a, b, c, d)` fitted to `raw_weights[i-1]` at `r_i = i / l`.
pub fn fit_rank_polynomial(raw_weights: &[f64], l: usize) -> Result<[f64; 4]> {
    if l < 4 {
        return Err(Error::InvalidArgument(format!(
            "a cubic needs at least 4 ranks, got l = {l}"
        )));
    }
    if raw_weights.len() != l {
        return Err(Error::InvalidArgument(format!(
            "{} weights for l = {l}",
            raw_weights.len()
        )));
    }
    let a = DMatrix::from_fn(l, 4, |i, j| {
        let r = (i + 1) as f64 / l as f64;
        r.powi(3 - j as i32)
    });
    let b = DVector::from_column_slice(raw_weights);
    let coef = least_squares(a, b)?;
    Ok([coef[0], coef[1], coef[2], coef[3]])
}

/// Population standard deviation of the residuals divided by the grand mean
/// of all inputs.
pub fn estimate_theta(samples: &[RegressionSample], raw_weights: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidDataset("no samples".into()));
    }
    let residuals: Vec<f64> = samples
        .iter()
        .map(|s| s.s.iter().zip(raw_weights).map(|(x, w)| x * w).sum::<f64>() - s.r)
        .collect();
    let n = residuals.len() as f64;
    let mean_res = residuals.iter().sum::<f64>() / n;
    let var = residuals
        .iter()
        .map(|e| (e - mean_res).powi(2))
        .sum::<f64>()
        / n;
    let inputs = samples.iter().map(|s| s.s.len()).sum::<usize>() as f64;
    let mean_x = samples.iter().flat_map(|s| s.s.iter()).sum::<f64>() / inputs;
    if mean_x == 0.0 || !mean_x.is_finite() {
        return Err(Error::UndefinedScale(format!(
            "mean input value is {mean_x}"
        )));
    }
    Ok(var.sqrt() / mean_x.abs())
}

/// Summary of one distillation.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub record_count: usize,
    pub sample_count: usize,
    pub l: usize,
    pub mode: FitMode,
    pub raw_weights: Vec<f64>,
    /// `(a, b, c, d)`.
    pub coefficients: [f64; 4],
    pub theta: f64,
    /// `||S w - r||_2` over all samples.
    pub residual_norm: f64,
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records: {}", self.record_count)?;
        writeln!(f, "samples: {}", self.sample_count)?;
        writeln!(f, "input size l: {}", self.l)?;
        writeln!(f, "fit: {:?}", self.mode)?;
        writeln!(f, "residual norm: {:.6e}", self.residual_norm)?;
        writeln!(f, "rank  r_i     weight")?;
        for (i, w) in self.raw_weights.iter().enumerate() {
            let r = (i + 1) as f64 / self.l as f64;
            writeln!(f, "{:>4}  {r:.4}  {w:+.6}", i + 1)?;
        }
        let [a, b, c, d] = self.coefficients;
        writeln!(f, "cubic: a={a:.6} b={b:.6} c={c:.6} d={d:.6}")?;
        writeln!(f, "theta: {:.6}", self.theta)
    }
}

/// Extracts samples, fits rank weights, a cubic over rank and the noise
/// scale, and returns the resulting operator parameters.
pub fn distill(
    records: &[InteractionRecord],
    opts: &DistillOptions,
) -> Result<(LoWeights, FitReport)> {
    let samples = extract_samples(records, opts.response)?;
    if samples.is_empty() {
        return Err(Error::InvalidDataset("no usable samples".into()));
    }
    let l = samples[0].s.len();
    let raw_weights = match opts.mode {
        FitMode::Pooled => fit_linear(&samples)?,
        FitMode::PerCall => {
            let mut sum = vec![0.0; l];
            for (idx, rec) in records.iter().enumerate() {
                let own = extract_samples(std::slice::from_ref(rec), opts.response)?;
                let w = fit_linear(&own).map_err(|e| {
                    Error::InvalidDataset(format!("record {idx} cannot be fitted alone: {e}"))
                })?;
                for (acc, v) in sum.iter_mut().zip(w) {
                    *acc += v;
                }
            }
            sum.into_iter().map(|v| v / records.len() as f64).collect()
        }
    };
    let coefficients = fit_rank_polynomial(&raw_weights, l)?;
    let theta = estimate_theta(&samples, &raw_weights)?;
    let residual_norm = samples
        .iter()
        .map(|s| {
            let pred: f64 = s.s.iter().zip(&raw_weights).map(|(x, w)| x * w).sum();
            (pred - s.r).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let [a, b, c, d] = coefficients;
    let weights = LoWeights {
        a,
        b,
        c,
        d,
        theta,
        dim_prob: opts.dim_prob.unwrap_or(crate::operators::LO_DIM_PROB),
        l,
    };
    let report = FitReport {
        record_count: records.len(),
        sample_count: samples.len(),
        l,
        mode: opts.mode,
        raw_weights,
        coefficients,
        theta,
        residual_norm,
    };
    Ok((weights, report))
}

/// Settings of [`synthetic_log`].
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub records: usize,
    pub d: usize,
    /// Parent variables are drawn uniformly from `[0, 2 * input_mean]`.
    pub input_mean: f64,
    /// Standard deviation of additive Gaussian noise on every response.
    pub response_noise: f64,
}

/// Interaction log whose responses are exact linear maps of the parents,
/// using the cubic `w.polynomial(i / l)` itself as rank weights (the softmax
/// would hide the constant term, which the fit must recover).
pub fn synthetic_log(
    w: &LoWeights,
    spec: &SyntheticSpec,
    rng: &mut RngStream,
) -> Vec<InteractionRecord> {
    let l = w.l;
    let weights: Vec<f64> = (1..=l).map(|i| w.polynomial(i as f64 / l as f64)).collect();
    (0..spec.records)
        .map(|idx| {
            let parents: Vec<Vec<f64>> = (0..l)
                .map(|_| {
                    (0..spec.d)
                        .map(|_| 2.0 * spec.input_mean * rng.random::<f64>())
                        .collect()
                })
                .collect();
            let child: Vec<f64> = (0..spec.d)
                .map(|k| {
                    let clean: f64 = weights.iter().zip(&parents).map(|(wi, p)| wi * p[k]).sum();
                    if spec.response_noise > 0.0 {
                        clean + spec.response_noise * rng.normal()
                    } else {
                        clean
                    }
                })
                .collect();
            InteractionRecord {
                subproblem_index: idx,
                parent_values: (0..l).map(|i| i as f64).collect(),
                parents,
                response: String::new(),
                offspring: vec![child],
                attempts: 1,
                unix_time_ms: 0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn record(parents: Vec<Vec<f64>>, child: Vec<f64>) -> InteractionRecord {
        InteractionRecord {
            subproblem_index: 0,
            parent_values: vec![0.0; parents.len()],
            parents,
            response: String::new(),
            offspring: vec![child],
            attempts: 1,
            unix_time_ms: 0,
        }
    }

    #[test]
    fn extract_counts() {
        let rec = record(vec![vec![0.5; 4]; 10], vec![0.1; 4]);
        assert_eq!(
            extract_samples(std::slice::from_ref(&rec), ResponseChoice::First)
                .unwrap()
                .len(),
            4
        );
        let seven = record(vec![vec![0.5; 7]; 10], vec![0.1; 7]);
        assert_eq!(
            extract_samples(&[seven], ResponseChoice::First)
                .unwrap()
                .len(),
            7
        );
        assert!(extract_samples(&[], ResponseChoice::First)
            .unwrap()
            .is_empty());
        let mut two = rec.clone();
        two.offspring.push(vec![0.2; 4]);
        assert_eq!(
            extract_samples(&[two], ResponseChoice::Each).unwrap().len(),
            8
        );
        let other_l = record(vec![vec![0.5; 4]; 9], vec![0.1; 4]);
        assert!(matches!(
            extract_samples(&[rec, other_l], ResponseChoice::First),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn extract_layout() {
        let rec = record(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![5.0, 6.0]);
        let s = extract_samples(&[rec], ResponseChoice::First).unwrap();
        assert_eq!(
            s[0],
            RegressionSample {
                s: vec![1.0, 3.0],
                r: 5.0
            }
        );
        assert_eq!(
            s[1],
            RegressionSample {
                s: vec![2.0, 4.0],
                r: 6.0
            }
        );
    }

    #[test]
    fn linear_examples() {
        let samples = vec![
            RegressionSample {
                s: vec![2.0],
                r: 4.0,
            },
            RegressionSample {
                s: vec![3.0],
                r: 6.0,
            },
        ];
        let w = fit_linear(&samples).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-12);

        let dup = vec![
            RegressionSample {
                s: vec![1.0, 1.0, 2.0],
                r: 1.0,
            },
            RegressionSample {
                s: vec![2.0, 2.0, 1.0],
                r: 2.0,
            },
            RegressionSample {
                s: vec![3.0, 3.0, 5.0],
                r: 3.0,
            },
            RegressionSample {
                s: vec![4.0, 4.0, 0.0],
                r: 4.0,
            },
        ];
        match fit_linear(&dup) {
            Err(Error::Singular { columns }) => assert_eq!(columns, vec![1]),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn linear_recovers_planted_weights() {
        let mut rng = RngStream::new(12);
        let truth: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let samples: Vec<RegressionSample> = (0..500)
            .map(|_| {
                let s: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
                let r = s.iter().zip(&truth).map(|(a, b)| a * b).sum();
                RegressionSample { s, r }
            })
            .collect();
        let w = fit_linear(&samples).unwrap();
        for (a, b) in w.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn polynomial_examples() {
        let l = 10;
        let planted = [-0.111, 1.037, -1.291, 0.445];
        let raw: Vec<f64> = (1..=l)
            .map(|i| {
                let r = i as f64 / l as f64;
                planted[0] * r * r * r + planted[1] * r * r + planted[2] * r + planted[3]
            })
            .collect();
        let got = fit_rank_polynomial(&raw, l).unwrap();
        for (a, b) in got.iter().zip(planted) {
            assert!((a - b).abs() < 1e-9);
        }

        let flat = fit_rank_polynomial(&[0.3; 6], 6).unwrap();
        assert!(flat[..3].iter().all(|v| v.abs() < 1e-9));
        assert!((flat[3] - 0.3).abs() < 1e-9);

        // l = 4 interpolates exactly
        let raw4 = [0.9, -0.2, 0.4, 1.5];
        let c = fit_rank_polynomial(&raw4, 4).unwrap();
        for (i, v) in raw4.iter().enumerate() {
            let r = (i + 1) as f64 / 4.0;
            let fit = ((c[0] * r + c[1]) * r + c[2]) * r + c[3];
            assert!((fit - v).abs() < 1e-9);
        }

        assert!(matches!(
            fit_rank_polynomial(&[1.0; 3], 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn theta_examples() {
        let exact = vec![
            RegressionSample {
                s: vec![1.0, 2.0],
                r: 5.0,
            },
            RegressionSample {
                s: vec![3.0, 1.0],
                r: 5.0,
            },
        ];
        assert_eq!(estimate_theta(&exact, &[1.0, 2.0]).unwrap(), 0.0);
        let zero = vec![RegressionSample {
            s: vec![1.0, -1.0],
            r: 0.0,
        }];
        assert!(matches!(
            estimate_theta(&zero, &[1.0, 1.0]),
            Err(Error::UndefinedScale(_))
        ));
    }

    #[test]
    fn theta_recovers_planted_noise() {
        // residual sd 0.3 on inputs of mean 1
        let mut rng = RngStream::new(21);
        let samples: Vec<RegressionSample> = (0..100_000)
            .map(|_| {
                let s = vec![2.0 * rng.random::<f64>(), 2.0 * rng.random::<f64>()];
                let r = 0.5 * s[0] + 0.25 * s[1] + 0.3 * rng.normal();
                RegressionSample { s, r }
            })
            .collect();
        let theta = estimate_theta(&samples, &[0.5, 0.25]).unwrap();
        assert!((theta - 0.3).abs() < 0.015, "{theta}");
    }

    #[test]
    fn closed_loop() {
        let w = LoWeights {
            theta: 0.0,
            ..LoWeights::default()
        };
        let spec = SyntheticSpec {
            records: 50,
            d: 4,
            input_mean: 1.0,
            response_noise: 0.0,
        };
        let log = synthetic_log(&w, &spec, &mut RngStream::new(2));
        let (got, report) = distill(&log, &DistillOptions::default()).unwrap();
        assert_eq!(report.raw_weights.len(), 10);
        assert_eq!(report.sample_count, 200);
        for (a, b) in [(got.a, w.a), (got.b, w.b), (got.c, w.c), (got.d, w.d)] {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(got.theta < 1e-9);
        assert_eq!(got.dim_prob, 0.1);

        let per_call = distill(
            &synthetic_log(&w, &SyntheticSpec { d: 12, ..spec }, &mut RngStream::new(3)),
            &DistillOptions {
                mode: FitMode::PerCall,
                ..Default::default()
            },
        )
        .unwrap()
        .0;
        assert!((per_call.b - w.b).abs() < 1e-6);
    }

    #[test]
    fn report_lists_every_rank() {
        let w = LoWeights::default();
        let spec = SyntheticSpec {
            records: 5,
            d: 4,
            input_mean: 1.0,
            response_noise: 0.0,
        };
        let (_, report) = distill(
            &synthetic_log(&w, &spec, &mut RngStream::new(1)),
            &DistillOptions::default(),
        )
        .unwrap();
        let text = report.to_string();
        assert!(text.contains("samples: 20"));
        let rank_rows = text
            .lines()
            .filter(|l| {
                l.split_whitespace()
                    .next()
                    .is_some_and(|t| t.parse::<usize>().is_ok())
            })
            .count();
        assert_eq!(rank_rows, 10);
    }

    proptest! {
        #[test]
        fn fit_linear_is_scale_equivariant(c in 0.01f64..100.0, seed in 0u64..1000) {
            let mut rng = RngStream::new(seed);
            let samples: Vec<RegressionSample> = (0..30)
                .map(|_| RegressionSample {
                    s: (0..4).map(|_| rng.random::<f64>()).collect(),
                    r: rng.random::<f64>(),
                })
                .collect();
            let scaled: Vec<RegressionSample> = samples
                .iter()
                .map(|x| RegressionSample { s: x.s.iter().map(|v| v * c).collect(), r: x.r * c })
                .collect();
            let a = fit_linear(&samples).unwrap();
            let b = fit_linear(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn theta_ignores_sample_order(seed in 0u64..1000) {
            let mut rng = RngStream::new(seed);
            let mut samples: Vec<RegressionSample> = (0..50)
                .map(|_| RegressionSample {
                    s: (0..3).map(|_| rng.random::<f64>()).collect(),
                    r: rng.random::<f64>(),
                })
                .collect();
            let w = [0.2, 0.3, 0.5];
            let before = estimate_theta(&samples, &w).unwrap();
            samples.reverse();
            samples.rotate_left(7);
            let after = estimate_theta(&samples, &w).unwrap();
            prop_assert!((before - after).abs() < 1e-12);
        }
    }
}
