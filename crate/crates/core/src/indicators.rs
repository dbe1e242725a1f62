//! Hypervolume and inverted generational distance.
//!
//! Exact hypervolume is computed by a sorted sweep for two objectives and a
//! dimension sweep over a staircase for three; larger `m` falls back to Monte
//! Carlo with a reported standard error.

use log::warn;
use rand::Rng;

use crate::error::{Error, Result};
use crate::primitives::{ObjectiveVector, RngStream};

/// Reference margin used by the normalized conventions.
pub const REFERENCE_MARGIN: f64 = 1.1;
/// Default Monte Carlo sample count.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// How objectives are scaled and which reference point bounds the volume.
#[derive(Clone, Debug, PartialEq)]
pub enum HvMode {
    /// Map by `(f - ideal) / (nadir - ideal)`, reference `1.1` in every
    /// objective, divide by `1.1^m`. Values lie in `[0, 1]`.
    Normalized,
    /// Same mapping and reference, no division (maximum `1.1^m`).
    Scaled,
    /// Raw objectives against an explicit reference point.
    Raw(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorConfig {
    pub mode: HvMode,
    pub ideal: Vec<f64>,
    pub nadir: Vec<f64>,
    /// Samples for the Monte Carlo path (`m > 3`).
    pub mc_samples: usize,
}

impl IndicatorConfig {
    pub fn normalized(ideal: &[f64], nadir: &[f64]) -> Self {
        Self {
            mode: HvMode::Normalized,
            ideal: ideal.to_vec(),
            nadir: nadir.to_vec(),
            mc_samples: DEFAULT_MC_SAMPLES,
        }
    }

    pub fn scaled(ideal: &[f64], nadir: &[f64]) -> Self {
        Self {
            mode: HvMode::Scaled,
            ..Self::normalized(ideal, nadir)
        }
    }

    pub fn raw(reference: Vec<f64>) -> Self {
        Self {
            mode: HvMode::Raw(reference),
            ideal: Vec::new(),
            nadir: Vec::new(),
            mc_samples: DEFAULT_MC_SAMPLES,
        }
    }

    /// Objectives in the space the volume is measured in, plus the
    /// reference point of that space.
    fn transform(&self, points: &[ObjectiveVector]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let m = points.first().map(|p| p.len()).unwrap_or(0);
        if points.iter().any(|p| p.len() != m) {
            return Err(Error::ContractViolation(
                "objective vectors of differing length".into(),
            ));
        }
        match &self.mode {
            HvMode::Raw(reference) => {
                if !points.is_empty() && reference.len() != m {
                    return Err(Error::ContractViolation(format!(
                        "reference point has {} objectives, points have {m}",
                        reference.len()
                    )));
                }
                Ok((points.to_vec(), reference.clone()))
            }
            HvMode::Normalized | HvMode::Scaled => {
                let mapped = normalize(points, &self.ideal, &self.nadir)?;
                let m = self.ideal.len();
                Ok((mapped, vec![REFERENCE_MARGIN; m]))
            }
        }
    }
}

/// Maps every point by `(f - ideal) / (nadir - ideal)`.
pub fn normalize(
    points: &[ObjectiveVector],
    ideal: &[f64],
    nadir: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if ideal.len() != nadir.len() {
        return Err(Error::ContractViolation(
            "ideal and nadir differ in length".into(),
        ));
    }
    for (j, (lo, hi)) in ideal.iter().zip(nadir).enumerate() {
        if hi.partial_cmp(lo) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::UndefinedScale(format!(
                "objective {j}: nadir {hi} does not exceed ideal {lo}"
            )));
        }
    }
    points
        .iter()
        .map(|p| {
            if p.len() != ideal.len() {
                return Err(Error::ContractViolation(format!(
                    "point has {} objectives, ideal has {}",
                    p.len(),
                    ideal.len()
                )));
            }
            Ok(p.iter()
                .zip(ideal.iter().zip(nadir))
                .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
                .collect())
        })
        .collect()
}

/// Hypervolume under `cfg`. Exact for two and three objectives.
pub fn hv(points: &[ObjectiveVector], cfg: &IndicatorConfig) -> Result<f64> {
    if points.is_empty() {
        return Ok(0.0);
    }
    let (mapped, reference) = cfg.transform(points)?;
    let volume = match reference.len() {
        2 | 3 => hv_exact(&mapped, &reference)?,
        _ => {
            let mut rng = RngStream::new(0);
            hv_monte_carlo(&mapped, &reference, cfg.mc_samples, &mut rng)?.0
        }
    };
    Ok(match cfg.mode {
        HvMode::Normalized => volume / REFERENCE_MARGIN.powi(reference.len() as i32),
        _ => volume,
    })
}

/// Exact hypervolume for two or three objectives.
pub fn hv_exact(points: &[ObjectiveVector], reference: &[f64]) -> Result<f64> {
    match reference.len() {
        2 => Ok(hv_2d(points, reference)),
        3 => Ok(hv_3d(points, reference)),
        m => Err(Error::InvalidArgument(format!(
            "exact hypervolume supports 2 or 3 objectives, got {m}"
        ))),
    }
}

/// Points strictly better than the reference in every objective.
fn inside<'a>(
    points: &'a [ObjectiveVector],
    reference: &'a [f64],
) -> impl Iterator<Item = &'a ObjectiveVector> {
    points
        .iter()
        .filter(move |p| p.iter().zip(reference).all(|(v, r)| v < r))
}

pub fn hv_2d(points: &[ObjectiveVector], reference: &[f64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = inside(points, reference).map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut best_f2 = reference[1];
    for (i, &(x, y)) in pts.iter().enumerate() {
        if y < best_f2 {
            best_f2 = y;
        }
        let next_x = pts.get(i + 1).map(|p| p.0).unwrap_or(reference[0]);
        area += (next_x - x) * (reference[1] - best_f2);
    }
    area
}

/// Two-objective staircase, sorted by f1 ascending (so f2 descending), with
/// its dominated area maintained incrementally.
struct Staircase {
    steps: Vec<(f64, f64)>,
    area: f64,
    r1: f64,
    r2: f64,
}

impl Staircase {
    fn new(r1: f64, r2: f64) -> Self {
        Self {
            steps: Vec::new(),
            area: 0.0,
            r1,
            r2,
        }
    }

    fn insert(&mut self, p1: f64, p2: f64) {
        // weakly dominated by an existing step?
        let upto = self.steps.partition_point(|s| s.0 <= p1);
        if upto > 0 && self.steps[upto - 1].1 <= p2 {
            return;
        }
        let start = self.steps.partition_point(|s| s.0 < p1);
        let mut height = if start > 0 {
            self.steps[start - 1].1
        } else {
            self.r2
        };
        let mut x = p1;
        let mut end = start;
        let mut gained = 0.0;
        let mut closed = false;
        while end < self.steps.len() {
            let (q1, q2) = self.steps[end];
            gained += (q1 - x) * (height - p2);
            if q2 < p2 {
                closed = true;
                break;
            }
            x = q1;
            height = q2;
            end += 1;
        }
        if !closed {
            gained += (self.r1 - x) * (height - p2);
        }
        self.area += gained;
        self.steps.splice(start..end, [(p1, p2)]);
    }
}

pub fn hv_3d(points: &[ObjectiveVector], reference: &[f64]) -> f64 {
    let mut pts: Vec<&ObjectiveVector> = inside(points, reference).collect();
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut stairs = Staircase::new(reference[0], reference[1]);
    let mut volume = 0.0;
    for (i, p) in pts.iter().enumerate() {
        stairs.insert(p[0], p[1]);
        let next_z = pts.get(i + 1).map(|q| q[2]).unwrap_or(reference[2]);
        volume += stairs.area * (next_z - p[2]);
    }
    volume
}

/// Monte Carlo hypervolume over the box spanned by the componentwise
/// minimum of the points and the reference. Returns `(estimate, standard
/// error)`.
pub fn hv_monte_carlo(
    points: &[ObjectiveVector],
    reference: &[f64],
    samples: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "Monte Carlo needs at least one sample".into(),
        ));
    }
    let pts: Vec<&ObjectiveVector> = inside(points, reference).collect();
    if pts.is_empty() {
        return Ok((0.0, 0.0));
    }
    let m = reference.len();
    let lower: Vec<f64> = (0..m)
        .map(|j| pts.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let box_volume: f64 = lower.iter().zip(reference).map(|(lo, r)| r - lo).product();
    let mut hits = 0usize;
    let mut sample = vec![0.0; m];
    for _ in 0..samples {
        for j in 0..m {
            sample[j] = lower[j] + (reference[j] - lower[j]) * rng.random::<f64>();
        }
        if pts
            .iter()
            .any(|p| p.iter().zip(&sample).all(|(a, b)| a <= b))
        {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let se = (frac * (1.0 - frac) / samples as f64).sqrt() * box_volume;
    Ok((frac * box_volume, se))
}

/// Mean over reference points of the distance to the nearest approximation
/// point.
pub fn igd(approx: &[ObjectiveVector], reference: &[ObjectiveVector]) -> Result<f64> {
    if approx.is_empty() {
        return Err(Error::InvalidArgument(
            "IGD of an empty approximation is undefined".into(),
        ));
    }
    if reference.is_empty() {
        return Err(Error::InvalidArgument(
            "IGD needs a nonempty reference set".into(),
        ));
    }
    let m = reference[0].len();
    if approx.iter().chain(reference).any(|p| p.len() != m) {
        return Err(Error::ContractViolation(
            "IGD inputs differ in objective count".into(),
        ));
    }
    let mut total = 0.0;
    for r in reference {
        let mut best = f64::INFINITY;
        for a in approx {
            let mut sq = 0.0;
            for (x, y) in r.iter().zip(a) {
                let diff = x - y;
                sq += diff * diff;
                if sq >= best {
                    break;
                }
            }
            if sq < best {
                best = sq;
            }
        }
        total += best.sqrt();
    }
    Ok(total / reference.len() as f64)
}

/// Population objectives recorded after a given number of evaluations.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub evaluations: u64,
    pub objectives: Vec<ObjectiveVector>,
}

/// HV of the latest snapshot taken at or before each checkpoint.
/// Checkpoints past the last snapshot are dropped with a warning.
pub fn hv_trajectory(
    snapshots: &[Snapshot],
    cfg: &IndicatorConfig,
    checkpoints: &[u64],
) -> Result<Vec<(u64, f64)>> {
    let last = snapshots.iter().map(|s| s.evaluations).max();
    let mut out = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        if last.is_none_or(|l| c > l) {
            warn!("checkpoint {c} lies beyond the recorded run; omitted");
            continue;
        }
        let Some(snap) = snapshots
            .iter()
            .filter(|s| s.evaluations <= c)
            .max_by_key(|s| s.evaluations)
        else {
            warn!("no snapshot at or before checkpoint {c}; omitted");
            continue;
        };
        out.push((c, hv(&snap.objectives, cfg)?));
    }
    Ok(out)
}
