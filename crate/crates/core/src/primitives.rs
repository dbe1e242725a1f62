//! Domain primitives shared by every other module: decision and objective
//! vectors, box bounds, evaluated individuals, Pareto dominance and the
//! seeded random stream.
//!
//! All objectives are minimized. Problems with maximized objectives negate
//! them before they reach this layer.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A point in decision space, `d` components in problem units.
pub type DecisionVector = Vec<f64>;

/// An objective vector, `m` components, all minimized.
pub type ObjectiveVector = Vec<f64>;

/// Box constraints `lower[k] <= x[k] <= upper[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "bounds length mismatch: {} lower vs {} upper",
                lower.len(),
                upper.len()
            )));
        }
        for (k, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "invalid bound at index {k}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Same interval on every coordinate.
    pub fn uniform(d: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; d], vec![upper; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Clips every component into its interval, in place.
    pub fn clamp(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Uniform sample of the box.
    pub fn sample(&self, rng: &mut RngStream) -> DecisionVector {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }
}

/// Clips `x` into the box. Components already inside are returned bit-for-bit.
pub fn clamp_to_bounds(x: &[f64], bounds: &Bounds) -> DecisionVector {
    assert_eq!(
        x.len(),
        bounds.dim(),
        "contract violation: vector of length {} against {}-dimensional bounds",
        x.len(),
        bounds.dim()
    );
    let mut out = x.to_vec();
    bounds.clamp(&mut out);
    out
}

/// Uniform random point in the box.
pub fn random_individual(bounds: &Bounds, rng: &mut RngStream) -> DecisionVector {
    bounds.sample(rng)
}

/// An evaluated solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub x: DecisionVector,
    pub f: ObjectiveVector,
    /// Global evaluation counter value that produced `f` (1-based).
    pub evaluation_index: u64,
}

/// Pareto dominance for minimization: `a` is no worse everywhere and
/// strictly better somewhere.
///
/// Panics when the lengths differ; use [`try_dominates`] for a checked form.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(
        a.len(),
        b.len(),
        "contract violation: comparing objective vectors of length {} and {}",
        a.len(),
        b.len()
    );
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

pub fn try_dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::ContractViolation(format!(
            "comparing objective vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(dominates(a, b))
}

/// Indices of the points not dominated by any other point of the set.
pub fn nondominated_indices(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(q, &points[i])))
        .collect()
}

/// Seeded random stream. ChaCha8 keeps the sequence identical across
/// platforms and process invocations for a given seed.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream seeded from this stream's next output.
    pub fn split(&mut self) -> RngStream {
        RngStream::new(self.inner.next_u64())
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.sample(rand_distr::StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
