//! Benchmark problems: ZDT1–4 and ZDT6, UF1–UF9 from the CEC 2009 suite and
//! the bi-objective engineering problems RE21–RE25, each with box bounds and
//! a Pareto-front sampler used as the indicator reference.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use crate::decomp::{das_dennis, divisions_at_most};
use crate::error::{Error, Result};
use crate::primitives::{Bounds, ObjectiveVector};

/// Default size of the sampled reference front.
pub const DEFAULT_PF_SIZE: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
    Uf1,
    Uf2,
    Uf3,
    Uf4,
    Uf5,
    Uf6,
    Uf7,
    Uf8,
    Uf9,
    Re21,
    Re22,
    Re23,
    Re24,
    Re25,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 19] = [
        ProblemKind::Zdt1,
        ProblemKind::Zdt2,
        ProblemKind::Zdt3,
        ProblemKind::Zdt4,
        ProblemKind::Zdt6,
        ProblemKind::Uf1,
        ProblemKind::Uf2,
        ProblemKind::Uf3,
        ProblemKind::Uf4,
        ProblemKind::Uf5,
        ProblemKind::Uf6,
        ProblemKind::Uf7,
        ProblemKind::Uf8,
        ProblemKind::Uf9,
        ProblemKind::Re21,
        ProblemKind::Re22,
        ProblemKind::Re23,
        ProblemKind::Re24,
        ProblemKind::Re25,
    ];

    pub fn name(self) -> &'static str {
        use ProblemKind::*;
        match self {
            Zdt1 => "zdt1",
            Zdt2 => "zdt2",
            Zdt3 => "zdt3",
            Zdt4 => "zdt4",
            Zdt6 => "zdt6",
            Uf1 => "uf1",
            Uf2 => "uf2",
            Uf3 => "uf3",
            Uf4 => "uf4",
            Uf5 => "uf5",
            Uf6 => "uf6",
            Uf7 => "uf7",
            Uf8 => "uf8",
            Uf9 => "uf9",
            Re21 => "re21",
            Re22 => "re22",
            Re23 => "re23",
            Re24 => "re24",
            Re25 => "re25",
        }
    }

    fn is_re(self) -> bool {
        matches!(
            self,
            ProblemKind::Re21
                | ProblemKind::Re22
                | ProblemKind::Re23
                | ProblemKind::Re24
                | ProblemKind::Re25
        )
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A box-bounded test problem.
#[derive(Clone, Debug)]
pub struct Problem {
    name: String,
    kind: ProblemKind,
    m: usize,
    d: usize,
    bounds: Bounds,
    ideal: ObjectiveVector,
    nadir: ObjectiveVector,
}

impl Problem {
    /// Problem with its default dimension (30 for ZDT/UF, the published one
    /// for RE).
    pub fn new(kind: ProblemKind) -> Self {
        let d = match kind {
            ProblemKind::Re21 => 4,
            ProblemKind::Re22 => 3,
            ProblemKind::Re23 => 4,
            ProblemKind::Re24 => 2,
            ProblemKind::Re25 => 3,
            _ => 30,
        };
        Self::with_dim(kind, d).expect("default dimensions are valid")
    }

    /// Problem with `d` variables. RE problems only accept their published
    /// dimension.
    pub fn with_dim(kind: ProblemKind, d: usize) -> Result<Self> {
        use ProblemKind::*;
        let m = match kind {
            Uf8 | Uf9 => 3,
            _ => 2,
        };
        let min_d = match kind {
            Uf8 | Uf9 => 5,
            Zdt1 | Zdt2 | Zdt3 | Zdt4 | Zdt6 => 2,
            _ => 3,
        };
        let bounds = match kind {
            Zdt1 | Zdt2 | Zdt3 | Zdt6 | Uf3 => {
                check_dim(kind, d, min_d)?;
                Bounds::uniform(d, 0.0, 1.0)?
            }
            Zdt4 => {
                check_dim(kind, d, min_d)?;
                prefixed_bounds(d, 1, -5.0, 5.0)
            }
            Uf1 | Uf2 | Uf5 | Uf6 | Uf7 => {
                check_dim(kind, d, min_d)?;
                prefixed_bounds(d, 1, -1.0, 1.0)
            }
            Uf4 => {
                check_dim(kind, d, min_d)?;
                prefixed_bounds(d, 1, -2.0, 2.0)
            }
            Uf8 | Uf9 => {
                check_dim(kind, d, min_d)?;
                prefixed_bounds(d, 2, -2.0, 2.0)
            }
            Re21 | Re22 | Re23 | Re24 | Re25 => {
                let published = Problem::new_re_dim(kind);
                if d != published {
                    return Err(Error::InvalidArgument(format!(
                        "{kind} has a fixed dimension of {published}, got {d}"
                    )));
                }
                re_bounds(kind)
            }
        };
        let mut problem = Self {
            name: kind.name().to_string(),
            kind,
            m,
            d,
            bounds,
            ideal: Vec::new(),
            nadir: Vec::new(),
        };
        let front = problem.sample_pf(2_000);
        let (ideal, nadir) = extremes(&front);
        problem.ideal = ideal;
        problem.nadir = nadir;
        Ok(problem)
    }

    fn new_re_dim(kind: ProblemKind) -> usize {
        match kind {
            ProblemKind::Re21 | ProblemKind::Re23 => 4,
            ProblemKind::Re22 | ProblemKind::Re25 => 3,
            _ => 2,
        }
    }

    /// ZDT4 in its original ten-variable form.
    pub fn zdt4_canonical() -> Self {
        let mut p = Self::with_dim(ProblemKind::Zdt4, 10).expect("valid");
        p.name = "zdt4-d10".into();
        p
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn num_objectives(&self) -> usize {
        self.m
    }

    pub fn num_variables(&self) -> usize {
        self.d
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// Componentwise minimum of the reference front.
    pub fn ideal(&self) -> &[f64] {
        &self.ideal
    }

    /// Componentwise maximum of the reference front.
    pub fn nadir(&self) -> &[f64] {
        &self.nadir
    }

    /// Evaluates `x`. Panics on a dimension mismatch; see [`Problem::try_evaluate`].
    pub fn evaluate(&self, x: &[f64]) -> ObjectiveVector {
        assert_eq!(
            x.len(),
            self.d,
            "contract violation: {} expects {} variables, got {}",
            self.name,
            self.d,
            x.len()
        );
        use ProblemKind::*;
        match self.kind {
            Zdt1 => zdt(x, ZdtShape::Convex),
            Zdt2 => zdt(x, ZdtShape::Concave),
            Zdt3 => zdt(x, ZdtShape::Disconnected),
            Zdt4 => zdt4(x),
            Zdt6 => zdt6(x),
            Uf1 => uf1(x),
            Uf2 => uf2(x),
            Uf3 => uf3(x),
            Uf4 => uf4(x),
            Uf5 => uf5(x),
            Uf6 => uf6(x),
            Uf7 => uf7(x),
            Uf8 => uf8(x),
            Uf9 => uf9(x),
            Re21 => re21(x),
            Re22 => re22(x),
            Re23 => re23(x),
            Re24 => re24(x),
            Re25 => re25(x),
        }
    }

    pub fn try_evaluate(&self, x: &[f64]) -> Result<ObjectiveVector> {
        if x.len() != self.d {
            return Err(Error::ContractViolation(format!(
                "{} expects {} variables, got {}",
                self.name,
                self.d,
                x.len()
            )));
        }
        Ok(self.evaluate(x))
    }

    /// Points on the true (or, for RE, best known) Pareto front. The result
    /// is mutually nondominated; for disconnected or filtered fronts it may
    /// hold fewer than `n` points.
    pub fn sample_pf(&self, n: usize) -> Vec<ObjectiveVector> {
        let n = n.max(1);
        use ProblemKind::*;
        match self.kind {
            Zdt1 | Zdt4 | Uf1 | Uf2 | Uf3 => curve(n, 0.0, 1.0, |t| 1.0 - t.sqrt()),
            Zdt2 | Uf4 => curve(n, 0.0, 1.0, |t| 1.0 - t * t),
            Zdt3 => zdt3_front(n),
            Zdt6 => curve(n, zdt6_min_f1(), 1.0, |t| 1.0 - t * t),
            Uf5 => (0..=20)
                .map(|i| {
                    let t = i as f64 / 20.0;
                    vec![t, 1.0 - t]
                })
                .collect(),
            Uf6 => {
                let mut pts = vec![vec![0.0, 1.0]];
                let per = n.saturating_sub(1).max(2) / 2;
                for (lo, hi) in [(0.25, 0.5), (0.75, 1.0)] {
                    pts.extend(curve(per.max(2), lo, hi, |t| 1.0 - t));
                }
                pts
            }
            Uf7 => curve(n, 0.0, 1.0, |t| 1.0 - t),
            Uf8 => simplex_points(n)
                .into_iter()
                .map(|p| {
                    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                    p.into_iter().map(|v| v / norm).collect()
                })
                .collect(),
            Uf9 => simplex_points(n)
                .into_iter()
                .filter(|p| {
                    let rest = 1.0 - p[2];
                    !(p[0] > rest / 4.0 && p[0] < rest * 3.0 / 4.0)
                })
                .collect(),
            Re21 | Re22 | Re23 | Re24 | Re25 => {
                let all = re_front(self.kind);
                if n >= all.len() {
                    all.to_vec()
                } else {
                    (0..n)
                        .map(|i| all[i * (all.len() - 1) / (n - 1).max(1)].clone())
                        .collect()
                }
            }
        }
    }

    pub fn is_real_world(&self) -> bool {
        self.kind.is_re()
    }
}

fn check_dim(kind: ProblemKind, d: usize, min_d: usize) -> Result<()> {
    if d < min_d {
        return Err(Error::InvalidArgument(format!(
            "{kind} needs at least {min_d} variables, got {d}"
        )));
    }
    Ok(())
}

/// First `k` variables in `[0, 1]`, the rest in `[lo, hi]`.
fn prefixed_bounds(d: usize, k: usize, lo: f64, hi: f64) -> Bounds {
    let lower = (0..d).map(|i| if i < k { 0.0 } else { lo }).collect();
    let upper = (0..d).map(|i| if i < k { 1.0 } else { hi }).collect();
    Bounds::new(lower, upper).expect("valid bounds")
}

fn extremes(points: &[ObjectiveVector]) -> (Vec<f64>, Vec<f64>) {
    let m = points.first().map(|p| p.len()).unwrap_or(0);
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for p in points {
        for j in 0..m {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    (lo, hi)
}

fn curve(n: usize, lo: f64, hi: f64, f2: impl Fn(f64) -> f64) -> Vec<ObjectiveVector> {
    if n == 1 {
        return vec![vec![lo, f2(lo)]];
    }
    (0..n)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            vec![t, f2(t)]
        })
        .collect()
}

/// Das–Dennis lattice on the 3-simplex with at most `n` points.
fn simplex_points(n: usize) -> Vec<Vec<f64>> {
    let h = divisions_at_most(3, n.max(3));
    das_dennis(3, h)
        .expect("m = 3 is valid")
        .into_iter()
        .map(|w| w.as_slice().to_vec())
        .collect()
}

/// Registry of every benchmark by lowercase name.
pub fn registry() -> BTreeMap<String, Problem> {
    ProblemKind::ALL
        .iter()
        .map(|k| (k.name().to_string(), Problem::new(*k)))
        .collect()
}

pub fn problem_names() -> Vec<String> {
    let mut names: Vec<String> = ProblemKind::ALL
        .iter()
        .map(|k| k.name().to_string())
        .collect();
    names.push("zdt4-d10".into());
    names
}

/// Looks a problem up by name (case-insensitive). `zdt4-d10` selects the
/// ten-variable ZDT4.
pub fn lookup(name: &str) -> Result<Problem> {
    let key = name.trim().to_ascii_lowercase();
    if key == "zdt4-d10" {
        return Ok(Problem::zdt4_canonical());
    }
    ProblemKind::ALL
        .iter()
        .find(|k| k.name() == key)
        .map(|k| Problem::new(*k))
        .ok_or_else(|| Error::NotFound {
            name: name.to_string(),
            valid: problem_names(),
        })
}

// ---------------------------------------------------------------- ZDT

#[derive(Clone, Copy)]
enum ZdtShape {
    Convex,
    Concave,
    Disconnected,
}

fn zdt_h(f1: f64, g: f64, shape: ZdtShape) -> f64 {
    let r = f1 / g;
    match shape {
        ZdtShape::Convex => 1.0 - r.sqrt(),
        ZdtShape::Concave => 1.0 - r * r,
        ZdtShape::Disconnected => 1.0 - r.sqrt() - r * (10.0 * PI * f1).sin(),
    }
}

fn zdt(x: &[f64], shape: ZdtShape) -> ObjectiveVector {
    let n = x.len();
    let f1 = x[0];
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (n - 1) as f64;
    vec![f1, g * zdt_h(f1, g, shape)]
}

fn zdt4(x: &[f64]) -> ObjectiveVector {
    let n = x.len();
    let f1 = x[0];
    let g = 1.0
        + 10.0 * (n - 1) as f64
        + x[1..]
            .iter()
            .map(|v| v * v - 10.0 * (4.0 * PI * v).cos())
            .sum::<f64>();
    vec![f1, g * zdt_h(f1, g, ZdtShape::Convex)]
}

fn zdt6_f1(x1: f64) -> f64 {
    1.0 - (-4.0 * x1).exp() * (6.0 * PI * x1).sin().powi(6)
}

fn zdt6(x: &[f64]) -> ObjectiveVector {
    let n = x.len();
    let f1 = zdt6_f1(x[0]);
    let g = 1.0 + 9.0 * (x[1..].iter().sum::<f64>() / (n - 1) as f64).powf(0.25);
    vec![f1, g * zdt_h(f1, g, ZdtShape::Concave)]
}

/// Golden-section minimizer on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Smallest attainable ZDT6 f1 (first peak of the `sin^6` term).
pub fn zdt6_min_f1() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| zdt6_f1(golden_min(zdt6_f1, 0.0, 1.0 / 6.0)))
}

/// The five f1-intervals of the nondominated part of the ZDT3 curve.
pub fn zdt3_segments() -> &'static [(f64, f64)] {
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let h = |t: f64| 1.0 - t.sqrt() - t * (10.0 * PI * t).sin();
        // one local minimum of h in each fifth of [0, 1]
        let ends: Vec<f64> = (0..5)
            .map(|k| golden_min(h, k as f64 * 0.2 + 0.01, k as f64 * 0.2 + 0.2))
            .collect();
        let mut segs = vec![(0.0, ends[0])];
        for k in 1..5 {
            let floor = h(ends[k - 1]);
            // h decreases from its local max to ends[k]; find where it drops below floor
            let peak = golden_min(|t| -h(t), ends[k - 1], ends[k]);
            let (mut lo, mut hi) = (peak, ends[k]);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if h(mid) < floor {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            segs.push((hi, ends[k]));
        }
        segs
    })
}

fn zdt3_front(n: usize) -> Vec<ObjectiveVector> {
    let segs = zdt3_segments();
    let total: f64 = segs.iter().map(|(a, b)| b - a).sum();
    let h = |t: f64| 1.0 - t.sqrt() - t * (10.0 * PI * t).sin();
    let mut out = Vec::with_capacity(n);
    let mut remaining = n;
    for (k, (a, b)) in segs.iter().enumerate() {
        let share = if k == segs.len() - 1 {
            remaining
        } else {
            (((b - a) / total) * n as f64).round() as usize
        };
        let share = share.max(1).min(remaining.max(1));
        remaining = remaining.saturating_sub(share);
        out.extend(curve(share, *a, *b, h));
    }
    out
}

// ---------------------------------------------------------------- UF (CEC 2009)

/// Sums over the odd (`J1`) and even (`J2`) 1-based indices `j >= 2`.
fn odd_even(x: &[f64], term: impl Fn(usize, f64) -> f64) -> (f64, usize, f64, usize) {
    let (mut s1, mut c1, mut s2, mut c2) = (0.0, 0usize, 0.0, 0usize);
    for (idx, xj) in x.iter().enumerate().skip(1) {
        let j = idx + 1;
        let v = term(j, *xj);
        if j % 2 == 1 {
            s1 += v;
            c1 += 1;
        } else {
            s2 += v;
            c2 += 1;
        }
    }
    (s1, c1, s2, c2)
}

fn uf_shift(x1: f64, j: usize, n: usize) -> f64 {
    (6.0 * PI * x1 + j as f64 * PI / n as f64).sin()
}

fn uf1(x: &[f64]) -> ObjectiveVector {
    let n = x.len();
    let x1 = x[0];
    let (s1, c1, s2, c2) = odd_even(x, |j, xj| (xj - uf_shift(x1, j, n)).powi(2));
    vec![
        x1 + 2.0 * s1 / c1 as f64,
        1.0 - x1.sqrt() + 2.0 * s2 / c2 as f64,
    ]
}

fn uf2(x: &[f64]) -> ObjectiveVector {
    let n = x.len();
    let x1 = x[0];
    let (s1, c1, s2, c2) = odd_even(x, |j, xj| {
        let jf = j as f64;
        let amp = 0.3 * x1 * x1 * (24.0 * PI * x1 + 4.0 * jf * PI / n as f64).cos() + 0.6 * x1;
        let angle = 6.0 * PI * x1 + jf * PI / n as f64;
        let y = if j % 2 == 1 {
            xj - amp * angle.cos()
        } else {
            xj - amp * angle.sin()
        };
        y * y
    });
    vec![
        x1 + 2.0 * s1 / c1 as f64,
        1.0 - x1.sqrt() + 2.0 * s2 / c2 as f64,
    ]
}

/// `4 sum y^2 - 2 prod cos(20 y pi / sqrt(j)) + 2` over one index class.
fn uf_multimodal(x: &[f64], y: impl Fn(usize, f64) -> f64) -> (f64, usize, f64, usize) {
    let (mut sum1, mut prod1, mut c1) = (0.0, 1.0, 0usize);
    let (mut sum2, mut prod2, mut c2) = (0.0, 1.0, 0usize);
    for (idx, xj) in x.iter().enumerate().skip(1) {
        let j = idx + 1;
        let yj = y(j, *xj);
        let cosine = (20.0 * yj * PI / (j as f64).sqrt()).cos();
        if j % 2 == 1 {
            sum1 += yj * yj;
            prod1 *= cosine;
            c1 += 1;
        } else {
            sum2 += yj * yj;
            prod2 *= cosine;
            c2 += 1;
        }
    }
    (
        4.0 * sum1 - 2.0 * prod1 + 2.0,
        c1,
        4.0 * sum2 - 2.0 * prod2 + 2.0,
        c2,
    )
}

fn uf3(x: &[f64]) -> ObjectiveVector {
    let n = x.len();
    let x1 = x[0];
    let (t1, c1, t2, c2) = uf_multimodal(x, |j, xj| {
        xj - x1.powf(0.5 * (1.0 + 3.0 * (j as f64 - 2.0) / (n as f64 - 2.0)))
    });
    vec![
        x1 + 2.0 * t1 / c1 as f64,
        1.0 - x1.sqrt() + 2.0 * t2 / c2 as f64,
    ]
}

fn uf4(x: &[f64]) -> ObjectiveVector {
    let n = x.len();
    let x1 = x[0];
    let (s1, c1, s2, c2) = odd_even(x, |j, xj| {
        let y = (xj - uf_shift(x1, j, n)).abs();
        y / (1.0 + (2.0 * y).exp())
    });
    vec![
        x1 + 2.0 * s1 / c1 as f64,
        1.0 - x1 * x1 + 2.0 * s2 / c2 as f64,
    ]
}

fn uf5(x: &[f64]) -> ObjectiveVector {
    const N: f64 = 10.0;
    const EPS: f64 = 0.1;
    let n = x.len();
    let x1 = x[0];
    let (s1, c1, s2, c2) = odd_even(x, |j, xj| {
        let y = xj - uf_shift(x1, j, n);
        2.0 * y * y - (4.0 * PI * y).cos() + 1.0
    });
    let ripple = (0.5 / N + EPS) * (2.0 * N * PI * x1).sin().abs();
    vec![
        x1 + ripple + 2.0 * s1 / c1 as f64,
        1.0 - x1 + ripple + 2.0 * s2 / c2 as f64,
    ]
}

fn uf6(x: &[f64]) -> ObjectiveVector {
    const N: f64 = 2.0;
    const EPS: f64 = 0.1;
    let n = x.len();
    let x1 = x[0];
    let (t1, c1, t2, c2) = uf_multimodal(x, |j, xj| xj - uf_shift(x1, j, n));
    let gap = (2.0 * (0.5 / N + EPS) * (2.0 * N * PI * x1).sin()).max(0.0);
    vec![
        x1 + gap + 2.0 * t1 / c1 as f64,
        1.0 - x1 + gap + 2.0 * t2 / c2 as f64,
    ]
}

fn uf7(x: &[f64]) -> ObjectiveVector {
    let n = x.len();
    let x1 = x[0];
    let (s1, c1, s2, c2) = odd_even(x, |j, xj| (xj - uf_shift(x1, j, n)).powi(2));
    let root = x1.powf(0.2);
    vec![
        root + 2.0 * s1 / c1 as f64,
        1.0 - root + 2.0 * s2 / c2 as f64,
    ]
}

/// Sums of `(x_j - 2 x2 sin(2 pi x1 + j pi / n))^2` over the three residue
/// classes of the 1-based index `j >= 3`: `(j-1) % 3 == 0`, `(j-2) % 3 == 0`,
/// `j % 3 == 0`.
fn tri_classes(x: &[f64]) -> [(f64, usize); 3] {
    let n = x.len();
    let (x1, x2) = (x[0], x[1]);
    let mut acc = [(0.0, 0usize); 3];
    for (idx, xj) in x.iter().enumerate().skip(2) {
        let j = idx + 1;
        let y = xj - 2.0 * x2 * (2.0 * PI * x1 + j as f64 * PI / n as f64).sin();
        let class = match j % 3 {
            1 => 0,
            2 => 1,
            _ => 2,
        };
        acc[class].0 += y * y;
        acc[class].1 += 1;
    }
    acc
}

fn uf8(x: &[f64]) -> ObjectiveVector {
    let (x1, x2) = (x[0], x[1]);
    let c = tri_classes(x);
    let mean = |k: usize| 2.0 * c[k].0 / c[k].1 as f64;
    vec![
        (0.5 * x1 * PI).cos() * (0.5 * x2 * PI).cos() + mean(0),
        (0.5 * x1 * PI).cos() * (0.5 * x2 * PI).sin() + mean(1),
        (0.5 * x1 * PI).sin() + mean(2),
    ]
}

fn uf9(x: &[f64]) -> ObjectiveVector {
    const EPS: f64 = 0.1;
    let (x1, x2) = (x[0], x[1]);
    let c = tri_classes(x);
    let mean = |k: usize| 2.0 * c[k].0 / c[k].1 as f64;
    let bump = ((1.0 + EPS) * (1.0 - 4.0 * (2.0 * x1 - 1.0).powi(2))).max(0.0);
    vec![
        0.5 * (bump + 2.0 * x1) * x2 + mean(0),
        0.5 * (bump - 2.0 * x1 + 2.0) * x2 + mean(1),
        1.0 - x2 + mean(2),
    ]
}

// ---------------------------------------------------------------- RE

fn re_bounds(kind: ProblemKind) -> Bounds {
    let (lower, upper): (Vec<f64>, Vec<f64>) = match kind {
        ProblemKind::Re21 => {
            let (force, stress) = (10.0, 10.0);
            let a = force / stress;
            let r2 = 2f64.sqrt();
            (vec![a, r2 * a, r2 * a, a], vec![3.0 * a; 4])
        }
        ProblemKind::Re22 => (vec![0.2, 0.0, 0.0], vec![15.0, 20.0, 40.0]),
        ProblemKind::Re23 => (vec![1.0, 1.0, 10.0, 10.0], vec![100.0, 100.0, 200.0, 240.0]),
        ProblemKind::Re24 => (vec![0.5, 4.0], vec![2.0, 50.0]),
        ProblemKind::Re25 => (vec![1.0, 0.6, 0.09], vec![70.0, 3.0, 0.5]),
        _ => unreachable!("not an RE problem"),
    };
    Bounds::new(lower, upper).expect("valid bounds")
}

/// Sum of constraint violations for constraints written as `g >= 0`.
fn violation(g: &[f64]) -> f64 {
    g.iter().map(|v| if *v < 0.0 { -v } else { 0.0 }).sum()
}

/// Guards divisions by variables whose lower bound is zero.
const RE_DIV_FLOOR: f64 = 1e-12;

fn nearest(values: &[f64], x: f64) -> f64 {
    let mut best = values[0];
    let mut best_dist = (values[0] - x).abs();
    for v in &values[1..] {
        let dist = (v - x).abs();
        if dist < best_dist {
            best = *v;
            best_dist = dist;
        }
    }
    best
}

fn re21(x: &[f64]) -> ObjectiveVector {
    let (f, sigma, e, l) = (10.0, 10.0, 2.0e5, 200.0);
    let _ = sigma;
    let r2 = 2f64.sqrt();
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let f1 = l * (2.0 * x1 + r2 * x2 + x3.sqrt() + x4);
    let f2 = (f * l / e) * (2.0 / x1 + 2.0 * r2 / x2 - 2.0 * r2 / x3 + 2.0 / x4);
    vec![f1, f2]
}

const RE22_AREAS: [f64; 75] = [
    0.20, 0.31, 0.40, 0.44, 0.60, 0.62, 0.79, 0.80, 0.88, 0.93, 1.0, 1.20, 1.24, 1.32, 1.40, 1.55,
    1.58, 1.60, 1.76, 1.80, 1.86, 2.0, 2.17, 2.20, 2.37, 2.40, 2.48, 2.60, 2.64, 2.79, 2.80, 3.0,
    3.08, 3.0, 10.0, 3.16, 3.41, 3.52, 3.60, 3.72, 3.95, 3.96, 4.0, 4.03, 4.20, 4.34, 4.40, 4.65,
    4.74, 4.80, 4.84, 5.0, 5.28, 5.40, 5.53, 5.72, 6.0, 6.16, 6.32, 6.60, 7.11, 7.20, 7.80, 7.90,
    8.0, 8.40, 8.69, 9.0, 9.48, 10.27, 11.0, 11.06, 11.85, 12.0, 13.0,
];
const RE22_AREAS_TAIL: [f64; 2] = [14.0, 15.0];

fn re22_area(x: f64) -> f64 {
    let head = nearest(&RE22_AREAS, x);
    let tail = nearest(&RE22_AREAS_TAIL, x);
    // first occurrence wins ties, and the head list precedes the tail
    if (tail - x).abs() < (head - x).abs() {
        tail
    } else {
        head
    }
}

fn re22(x: &[f64]) -> ObjectiveVector {
    let x1 = re22_area(x[0]);
    let (x2, x3) = (x[1], x[2]);
    let x2_safe = x2.max(RE_DIV_FLOOR);
    let f1 = 29.4 * x1 + 0.6 * x2 * x3;
    let g = [
        x1 * x3 - 7.735 * (x1 * x1 / x2_safe) - 180.0,
        4.0 - x3 / x2_safe,
    ];
    vec![f1, violation(&g)]
}

fn re23(x: &[f64]) -> ObjectiveVector {
    let x1 = 0.0625 * x[0].round_ties_even();
    let x2 = 0.0625 * x[1].round_ties_even();
    let (x3, x4) = (x[2], x[3]);
    let f1 = 0.6224 * x1 * x3 * x4
        + 1.7781 * x2 * x3 * x3
        + 3.1661 * x1 * x1 * x4
        + 19.84 * x1 * x1 * x3;
    let g = [
        x1 - 0.0193 * x3,
        x2 - 0.00954 * x3,
        PI * x3 * x3 * x4 + (4.0 / 3.0) * PI * x3 * x3 * x3 - 1_296_000.0,
    ];
    vec![f1, violation(&g)]
}

fn re24(x: &[f64]) -> ObjectiveVector {
    let (x1, x2) = (x[0], x[1]);
    let f1 = x1 + 120.0 * x2;
    let (e, sigma_b_max, tau_max, delta_max) = (700_000.0, 700.0, 450.0, 1.5);
    let sigma_k = e * x1 * x1 / 100.0;
    let sigma_b = 4500.0 / (x1 * x2);
    let tau = 1800.0 / x2;
    let delta = 56.2 * 10_000.0 / (e * x1 * x2 * x2);
    let g = [
        1.0 - sigma_b / sigma_b_max,
        1.0 - tau / tau_max,
        1.0 - delta / delta_max,
        1.0 - sigma_b / sigma_k,
    ];
    vec![f1, violation(&g)]
}

const RE25_DIAMETERS: [f64; 42] = [
    0.009, 0.0095, 0.0104, 0.0118, 0.0128, 0.0132, 0.014, 0.015, 0.0162, 0.0173, 0.018, 0.02,
    0.023, 0.025, 0.028, 0.032, 0.035, 0.041, 0.047, 0.054, 0.063, 0.072, 0.08, 0.092, 0.105, 0.12,
    0.135, 0.148, 0.162, 0.177, 0.192, 0.207, 0.225, 0.244, 0.263, 0.283, 0.307, 0.331, 0.362,
    0.394, 0.4375, 0.5,
];

fn re25(x: &[f64]) -> ObjectiveVector {
    let x1 = x[0].round_ties_even();
    let x2 = x[1];
    let x3 = nearest(&RE25_DIAMETERS, x[2]);
    let f1 = PI * PI * x2 * x3 * x3 * (x1 + 2.0) / 4.0;
    let cf = (4.0 * (x2 / x3) - 1.0) / (4.0 * (x2 / x3) - 4.0) + 0.615 * x3 / x2;
    let fmax = 1000.0;
    let s = 189_000.0;
    let g_mod = 11.5e6;
    let k = g_mod * x3.powi(4) / (8.0 * x1 * x2 * x2 * x2);
    let lmax = 14.0;
    let lf = fmax / k + 1.05 * (x1 + 2.0) * x3;
    let fp = 300.0;
    let sigma_p = fp / k;
    let sigma_pm = 6.0;
    let sigma_w = 1.25;
    let g = [
        -(8.0 * cf * fmax * x2 / (PI * x3 * x3 * x3)) + s,
        -lf + lmax,
        -3.0 + x2 / x3,
        -sigma_p + sigma_pm,
        -sigma_p - (fmax - fp) / k - 1.05 * (x1 + 2.0) * x3 + lf,
        sigma_w - (fmax - fp) / k,
    ];
    vec![f1, violation(&g)]
}

/// Parses a reference-front asset: one objective vector per line,
/// whitespace-separated; blank lines and `#` comments are skipped.
pub fn parse_front(text: &str) -> Result<Vec<ObjectiveVector>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        let row =
            row.map_err(|e| Error::InvalidDataset(format!("front line {}: {e}", lineno + 1)))?;
        if let Some(first) = out.first() {
            let first: &Vec<f64> = first;
            if first.len() != row.len() {
                return Err(Error::InvalidDataset(format!(
                    "front line {}: {} values, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        out.push(row);
    }
    Ok(out)
}

fn re_front(kind: ProblemKind) -> &'static [ObjectiveVector] {
    static FRONTS: OnceLock<BTreeMap<ProblemKind, Vec<ObjectiveVector>>> = OnceLock::new();
    let fronts = FRONTS.get_or_init(|| {
        [
            (ProblemKind::Re21, include_str!("../data/re21_front.txt")),
            (ProblemKind::Re22, include_str!("../data/re22_front.txt")),
            (ProblemKind::Re23, include_str!("../data/re23_front.txt")),
            (ProblemKind::Re24, include_str!("../data/re24_front.txt")),
            (ProblemKind::Re25, include_str!("../data/re25_front.txt")),
        ]
        .into_iter()
        .map(|(k, text)| (k, parse_front(text).expect("shipped front parses")))
        .collect()
    });
    &fronts[&kind]
}
