//! Decomposition machinery: simplex-lattice weight vectors, neighborhoods,
//! Chebyshev aggregation, the ideal reference point and the external archive
//! of nondominated solutions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::primitives::{dominates, Individual};

/// Aggregation direction on the unit simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weight components must be finite and nonnegative: {lambda:?}"
            )));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weight components sum to {sum}, expected 1"
            )));
        }
        Ok(Self(lambda))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Number of lattice points `C(h + m - 1, m - 1)`.
pub fn lattice_size(m: usize, h: usize) -> u128 {
    let k = (m - 1) as u128;
    let n = (h + m - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Smallest division count `h` whose lattice has exactly `n` points, if any.
pub fn divisions_for(m: usize, n: usize) -> Option<usize> {
    if m < 2 || n == 0 {
        return None;
    }
    let mut h = 1;
    loop {
        let size = lattice_size(m, h);
        match size.cmp(&(n as u128)) {
            Ordering::Equal => return Some(h),
            Ordering::Greater => return None,
            Ordering::Less => h += 1,
        }
    }
}

/// Largest division count whose lattice has at most `n` points.
pub fn divisions_at_most(m: usize, n: usize) -> usize {
    let mut h = 1;
    while lattice_size(m, h + 1) <= n as u128 {
        h += 1;
    }
    h
}

/// Das–Dennis simplex lattice: every vector with components in
/// `{0, 1/h, ..., 1}` summing to one, in lexicographic order.
pub fn das_dennis(m: usize, h: usize) -> Result<Vec<WeightVector>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "das_dennis needs at least 2 objectives, got {m}"
        )));
    }
    if h < 1 {
        return Err(Error::InvalidArgument("das_dennis needs h >= 1".into()));
    }
    let mut out = Vec::with_capacity(lattice_size(m, h) as usize);
    let mut counts = vec![0usize; m];
    fill_lattice(0, h, &mut counts, h, &mut out);
    Ok(out)
}

fn fill_lattice(
    pos: usize,
    remaining: usize,
    counts: &mut [usize],
    h: usize,
    out: &mut Vec<WeightVector>,
) {
    let m = counts.len();
    if pos == m - 1 {
        counts[pos] = remaining;
        let lambda = counts.iter().map(|&c| c as f64 / h as f64).collect();
        out.push(WeightVector(lambda));
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        fill_lattice(pos + 1, remaining - c, counts, h, out);
    }
}

/// Indices of the `T` subproblems closest to one subproblem, itself first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighborhood {
    indices: Vec<usize>,
}

impl Neighborhood {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }
}

/// Euclidean nearest neighbors in weight space; distance ties go to the
/// lower index. The owning index always comes first.
pub fn neighborhoods(weights: &[WeightVector], t: usize) -> Result<Vec<Neighborhood>> {
    let n = weights.len();
    if t > n {
        return Err(Error::InvalidArgument(format!(
            "neighborhood size {t} exceeds subproblem count {n}"
        )));
    }
    if t == 0 {
        return Err(Error::InvalidArgument(
            "neighborhood size must be >= 1".into(),
        ));
    }
    let mut out = Vec::with_capacity(n);
    for (i, wi) in weights.iter().enumerate() {
        let mut others: Vec<(f64, usize)> = weights
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, wj)| (squared_distance(wi.as_slice(), wj.as_slice()), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut indices = Vec::with_capacity(t);
        indices.push(i);
        indices.extend(others.iter().take(t - 1).map(|&(_, j)| j));
        out.push(Neighborhood { indices });
    }
    Ok(out)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Running componentwise minimum of every evaluated objective vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferencePoint {
    z: Vec<f64>,
}

impl ReferencePoint {
    /// All components `+inf` until the first update.
    pub fn new(m: usize) -> Self {
        Self {
            z: vec![f64::INFINITY; m],
        }
    }

    pub fn from_vec(z: Vec<f64>) -> Self {
        Self { z }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    pub fn update(&mut self, f: &[f64]) {
        debug_assert_eq!(f.len(), self.z.len());
        for (z, v) in self.z.iter_mut().zip(f) {
            if *v < *z {
                *z = *v;
            }
        }
    }
}

/// Componentwise minimum of `z` and `f`.
pub fn update_reference(z: &ReferencePoint, f: &[f64]) -> ReferencePoint {
    let mut next = z.clone();
    next.update(f);
    next
}

/// Chebyshev aggregation `max_j lambda_j (f_j - z_j)`. Zero weights are used
/// as given.
#[inline]
pub fn tchebycheff(f: &[f64], lambda: &[f64], z: &[f64]) -> f64 {
    debug_assert!(f.len() == lambda.len() && f.len() == z.len());
    let mut best = f64::NEG_INFINITY;
    for ((fj, lj), zj) in f.iter().zip(lambda).zip(z) {
        let v = lj * (fj - zj);
        if v > best {
            best = v;
        }
    }
    best
}

/// Replaces every neighbor incumbent that the offspring matches or beats on
/// that neighbor's subproblem. Returns the number of replacements.
pub fn update_neighbors(
    population: &mut [Individual],
    offspring: &Individual,
    neighborhood: &Neighborhood,
    weights: &[WeightVector],
    z: &ReferencePoint,
) -> usize {
    let mut replaced = 0;
    for &j in neighborhood.indices() {
        let lambda = weights[j].as_slice();
        let new_value = tchebycheff(&offspring.f, lambda, z.as_slice());
        let old_value = tchebycheff(&population[j].f, lambda, z.as_slice());
        if new_value <= old_value {
            population[j] = offspring.clone();
            replaced += 1;
        }
    }
    replaced
}

/// f64 key with a total order, for the sorted bi-objective archive.
#[derive(Clone, Copy, Debug, PartialEq)]
struct OrdKey(f64);

impl Eq for OrdKey {}

impl PartialOrd for OrdKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Debug)]
enum ArchiveStore {
    /// Bi-objective: keyed by f1; f2 strictly decreases along the keys.
    Sorted(BTreeMap<OrdKey, Individual>),
    Flat(Vec<Individual>),
}

/// The external population: mutually nondominated, no duplicate objective
/// vectors, optionally capped.
#[derive(Clone, Debug)]
pub struct ExternalArchive {
    store: ArchiveStore,
    capacity: Option<usize>,
}

impl ExternalArchive {
    pub fn new(m: usize, capacity: Option<usize>) -> Self {
        let store = if m == 2 {
            ArchiveStore::Sorted(BTreeMap::new())
        } else {
            ArchiveStore::Flat(Vec::new())
        };
        Self { store, capacity }
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn len(&self) -> usize {
        match &self.store {
            ArchiveStore::Sorted(map) => map.len(),
            ArchiveStore::Flat(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members in a stable order (ascending f1 for two objectives, insertion
    /// order otherwise).
    pub fn members(&self) -> Vec<&Individual> {
        match &self.store {
            ArchiveStore::Sorted(map) => map.values().collect(),
            ArchiveStore::Flat(v) => v.iter().collect(),
        }
    }

    pub fn into_members(self) -> Vec<Individual> {
        match self.store {
            ArchiveStore::Sorted(map) => map.into_values().collect(),
            ArchiveStore::Flat(v) => v,
        }
    }

    /// Offers a candidate. Returns `true` when it entered the archive.
    pub fn insert(&mut self, candidate: &Individual) -> bool {
        let inserted = match &mut self.store {
            ArchiveStore::Sorted(map) => insert_sorted(map, candidate),
            ArchiveStore::Flat(members) => insert_flat(members, candidate),
        };
        if inserted {
            if let Some(cap) = self.capacity {
                while self.len() > cap {
                    self.prune_most_crowded();
                }
            }
        }
        inserted
    }

    fn prune_most_crowded(&mut self) {
        let objectives: Vec<Vec<f64>> = self.members().iter().map(|m| m.f.clone()).collect();
        let distances = crowding_distance(&objectives);
        let victim = distances
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
            .expect("pruning a non-empty archive");
        match &mut self.store {
            ArchiveStore::Sorted(map) => {
                let key = OrdKey(objectives[victim][0]);
                map.remove(&key);
            }
            ArchiveStore::Flat(v) => {
                v.remove(victim);
            }
        }
    }
}

fn insert_sorted(map: &mut BTreeMap<OrdKey, Individual>, candidate: &Individual) -> bool {
    let (f1, f2) = (candidate.f[0], candidate.f[1]);
    let key = OrdKey(f1);
    if let Some((_, pred)) = map.range(..=key).next_back() {
        // pred.f1 <= f1: dominated or duplicate unless pred is strictly worse in f2
        if pred.f[1] <= f2 {
            return false;
        }
    }
    let doomed: Vec<OrdKey> = map
        .range(key..)
        .take_while(|(_, m)| m.f[1] >= f2)
        .map(|(k, _)| *k)
        .collect();
    for k in doomed {
        map.remove(&k);
    }
    map.insert(key, candidate.clone());
    true
}

fn insert_flat(members: &mut Vec<Individual>, candidate: &Individual) -> bool {
    if members
        .iter()
        .any(|m| m.f == candidate.f || dominates(&m.f, &candidate.f))
    {
        return false;
    }
    members.retain(|m| !dominates(&candidate.f, &m.f));
    members.push(candidate.clone());
    true
}

/// Offers `offspring` to a copy of the archive.
pub fn update_archive(ep: &ExternalArchive, offspring: &Individual) -> ExternalArchive {
    let mut next = ep.clone();
    next.insert(offspring);
    next
}

/// NSGA-II crowding distance of a mutually nondominated set. Extreme points
/// along any objective get `+inf`.
pub fn crowding_distance(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let m = points[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    #[allow(clippy::needless_range_loop)]
    for j in 0..m {
        order.sort_by(|&a, &b| points[a][j].total_cmp(&points[b][j]).then(a.cmp(&b)));
        let lo = points[order[0]][j];
        let hi = points[order[n - 1]][j];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in 1..n.saturating_sub(1) {
            let i = order[w];
            if dist[i].is_finite() {
                dist[i] += (points[order[w + 1]][j] - points[order[w - 1]][j]) / span;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::RngStream;
    use proptest::prelude::*;
    use rand::Rng;

    fn ind(f: &[f64]) -> Individual {
        Individual {
            x: vec![],
            f: f.to_vec(),
            evaluation_index: 0,
        }
    }

    #[test]
    fn das_dennis_bi_objective_h4() {
        let w = das_dennis(2, 4).unwrap();
        let got: Vec<Vec<f64>> = w.iter().map(|v| v.as_slice().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0.0, 1.0],
                vec![0.25, 0.75],
                vec![0.5, 0.5],
                vec![0.75, 0.25],
                vec![1.0, 0.0]
            ]
        );
    }

    #[test]
    fn das_dennis_counts_match_binomial() {
        assert_eq!(das_dennis(2, 199).unwrap().len(), 200);
        assert_eq!(das_dennis(3, 23).unwrap().len(), 300);
        for m in 2..=5 {
            for h in 1..=12 {
                let w = das_dennis(m, h).unwrap();
                assert_eq!(w.len() as u128, lattice_size(m, h));
                for v in &w {
                    let s: f64 = v.as_slice().iter().sum();
                    assert!((s - 1.0).abs() <= 1e-12);
                }
                // strictly increasing lexicographically
                for pair in w.windows(2) {
                    assert_eq!(
                        pair[0].as_slice().partial_cmp(pair[1].as_slice()).unwrap(),
                        Ordering::Less
                    );
                }
            }
        }
    }

    #[test]
    fn das_dennis_rejects_single_objective() {
        assert!(das_dennis(1, 4).is_err());
        assert!(das_dennis(2, 0).is_err());
    }

    #[test]
    fn lattice_inversion() {
        assert_eq!(divisions_for(2, 200), Some(199));
        assert_eq!(divisions_for(3, 300), Some(23));
        assert_eq!(divisions_for(2, 50), Some(49));
        assert_eq!(divisions_for(3, 100), None);
        assert_eq!(divisions_at_most(3, 10_000), 139);
    }

    #[test]
    fn neighborhood_tie_goes_to_lower_index() {
        let w = das_dennis(2, 4).unwrap();
        let b = neighborhoods(&w, 2).unwrap();
        // brute force: (0.5,0.5) is equidistant from (0.25,0.75) and (0.75,0.25)
        let mut got = b[2].indices().to_vec();
        got.sort();
        assert_eq!(got, vec![1, 2]);
    }

    #[test]
    fn neighborhood_extremes() {
        let w = das_dennis(2, 4).unwrap();
        for nb in neighborhoods(&w, 5).unwrap() {
            let mut idx = nb.indices().to_vec();
            idx.sort();
            assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        }
        for (i, nb) in neighborhoods(&w, 1).unwrap().iter().enumerate() {
            assert_eq!(nb.indices(), &[i]);
        }
        assert!(neighborhoods(&w, 6).is_err());
    }

    #[test]
    fn neighborhoods_match_brute_force() {
        let w = das_dennis(3, 12).unwrap();
        let t = 10;
        let b = neighborhoods(&w, t).unwrap();
        for (i, nb) in b.iter().enumerate() {
            assert_eq!(nb.len(), t);
            assert!(nb.contains(i));
            let mut uniq = nb.indices().to_vec();
            uniq.sort();
            uniq.dedup();
            assert_eq!(uniq.len(), t);
            // every non-member is at least as far as the farthest member
            let d = |j: usize| squared_distance(w[i].as_slice(), w[j].as_slice());
            let worst = nb.indices().iter().map(|&j| d(j)).fold(0.0, f64::max);
            for j in 0..w.len() {
                if !nb.contains(j) {
                    assert!(d(j) >= worst);
                }
            }
        }
    }

    #[test]
    fn tchebycheff_examples() {
        assert_eq!(tchebycheff(&[3.0, 7.0], &[1.0, 0.0], &[0.0, 0.0]), 3.0);
        assert_eq!(tchebycheff(&[2.0, 4.0], &[0.5, 0.5], &[1.0, 1.0]), 1.5);
        assert_eq!(tchebycheff(&[2.0, 4.0], &[0.3, 0.7], &[2.0, 4.0]), 0.0);
    }

    #[test]
    fn reference_point_examples() {
        let z = ReferencePoint::from_vec(vec![1.0, 1.0]);
        assert_eq!(update_reference(&z, &[0.5, 2.0]).as_slice(), &[0.5, 1.0]);
        assert_eq!(update_reference(&z, &[1.5, 2.0]).as_slice(), &[1.0, 1.0]);
        let z0 = ReferencePoint::new(2);
        assert_eq!(update_reference(&z0, &[3.0, 4.0]).as_slice(), &[3.0, 4.0]);
    }

    fn three_subproblem_setup() -> (Vec<WeightVector>, Vec<Neighborhood>, ReferencePoint) {
        let w = das_dennis(2, 2).unwrap(); // (0,1) (0.5,0.5) (1,0)
        let b = neighborhoods(&w, 3).unwrap();
        (w, b, ReferencePoint::from_vec(vec![0.0, 0.0]))
    }

    #[test]
    fn update_neighbors_replaces_all_when_better() {
        let (w, b, z) = three_subproblem_setup();
        let mut pop = vec![ind(&[2.0, 2.0]), ind(&[2.0, 2.0]), ind(&[2.0, 2.0])];
        let child = ind(&[1.0, 1.0]);
        assert_eq!(update_neighbors(&mut pop, &child, &b[1], &w, &z), 3);
        assert!(pop.iter().all(|p| p.f == vec![1.0, 1.0]));
    }

    #[test]
    fn update_neighbors_keeps_all_when_worse() {
        let (w, b, z) = three_subproblem_setup();
        let mut pop = vec![ind(&[1.0, 1.0]), ind(&[1.0, 1.0]), ind(&[1.0, 1.0])];
        let before = pop.clone();
        assert_eq!(
            update_neighbors(&mut pop, &ind(&[3.0, 3.0]), &b[0], &w, &z),
            0
        );
        assert_eq!(pop, before);
    }

    #[test]
    fn update_neighbors_accepts_ties_hand_traced() {
        // Subproblems (0,1), (0.5,0.5), (1,0); z = 0.
        // Incumbents: (1,3) -> g = 3, 1.5, 1; child (2,3) -> g = 3, 1.5, 2.
        // Ties on subproblems 0 and 1 are accepted; subproblem 2 keeps (1,3).
        let (w, b, z) = three_subproblem_setup();
        let mut pop = vec![ind(&[1.0, 3.0]), ind(&[1.0, 3.0]), ind(&[1.0, 3.0])];
        let child = ind(&[2.0, 3.0]);
        assert_eq!(update_neighbors(&mut pop, &child, &b[1], &w, &z), 2);
        assert_eq!(pop[0].f, vec![2.0, 3.0]);
        assert_eq!(pop[1].f, vec![2.0, 3.0]);
        assert_eq!(pop[2].f, vec![1.0, 3.0]);
    }

    #[test]
    fn archive_examples() {
        for m in [2usize, 3] {
            let pad = |v: &[f64]| {
                let mut out = v.to_vec();
                out.resize(m, 0.0);
                out
            };
            let mut ep = ExternalArchive::new(m, None);
            assert!(ep.insert(&ind(&pad(&[1.0, 1.0]))));
            assert_eq!(ep.len(), 1);
            assert!(!ep.insert(&ind(&pad(&[2.0, 2.0]))));
            assert!(!ep.insert(&ind(&pad(&[1.0, 1.0]))));
            assert_eq!(ep.len(), 1);

            let mut ep = ExternalArchive::new(m, None);
            ep.insert(&ind(&pad(&[1.0, 3.0])));
            ep.insert(&ind(&pad(&[3.0, 1.0])));
            ep.insert(&ind(&pad(&[0.0, 5.0])));
            assert_eq!(ep.len(), 3);
            assert!(ep.insert(&ind(&pad(&[0.5, 0.5]))));
            let mut fs: Vec<Vec<f64>> = ep.members().iter().map(|i| i.f.clone()).collect();
            fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(fs, vec![pad(&[0.0, 5.0]), pad(&[0.5, 0.5])]);
        }
    }

    #[test]
    fn archive_equal_f1_smaller_f2_replaces() {
        let mut ep = ExternalArchive::new(2, None);
        ep.insert(&ind(&[1.0, 2.0]));
        assert!(ep.insert(&ind(&[1.0, 1.0])));
        assert_eq!(ep.len(), 1);
        assert_eq!(ep.members()[0].f, vec![1.0, 1.0]);
    }

    #[test]
    fn capped_archive_keeps_boundary_points() {
        let mut ep = ExternalArchive::new(2, Some(3));
        for p in [[0.0, 1.0], [0.1, 0.9], [0.5, 0.5], [0.52, 0.48], [1.0, 0.0]] {
            ep.insert(&ind(&p));
        }
        assert_eq!(ep.len(), 3);
        let fs: Vec<Vec<f64>> = ep.members().iter().map(|i| i.f.clone()).collect();
        assert!(fs.contains(&vec![0.0, 1.0]));
        assert!(fs.contains(&vec![1.0, 0.0]));
    }

    #[test]
    fn crowding_boundaries_infinite() {
        let pts = vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]];
        let d = crowding_distance(&pts);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-12);
    }

    fn archive_brute_force_check(m: usize, seed: u64) {
        let mut rng = RngStream::new(seed);
        let mut ep = ExternalArchive::new(m, None);
        let mut seen: Vec<Vec<f64>> = Vec::new();
        for _ in 0..300 {
            // coarse values produce duplicates and ties
            let f: Vec<f64> = (0..m)
                .map(|_| (rng.random::<f64>() * 8.0).floor())
                .collect();
            seen.push(f.clone());
            ep.insert(&ind(&f));
            let members: Vec<Vec<f64>> = ep.members().iter().map(|i| i.f.clone()).collect();
            for (a, pa) in members.iter().enumerate() {
                for (b, pb) in members.iter().enumerate() {
                    if a != b {
                        assert!(!dominates(pa, pb));
                        assert_ne!(pa, pb);
                    }
                }
            }
            // archive equals the nondominated subset of everything offered
            let mut expected: Vec<Vec<f64>> = crate::primitives::nondominated_indices(&seen)
                .into_iter()
                .map(|i| seen[i].clone())
                .collect();
            expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
            expected.dedup();
            let mut got = members.clone();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn archive_matches_brute_force_bi_objective() {
        archive_brute_force_check(2, 3);
    }

    #[test]
    fn archive_matches_brute_force_tri_objective() {
        archive_brute_force_check(3, 4);
    }

    proptest! {
        #[test]
        fn tchebycheff_shift_invariant(f in proptest::collection::vec(-5.0f64..5.0, 3),
                                       z in proptest::collection::vec(-5.0f64..5.0, 3),
                                       c in -10.0f64..10.0) {
            let lambda = [0.2, 0.3, 0.5];
            let base = tchebycheff(&f, &lambda, &z);
            let fs: Vec<f64> = f.iter().map(|v| v + c).collect();
            let zs: Vec<f64> = z.iter().map(|v| v + c).collect();
            prop_assert!((tchebycheff(&fs, &lambda, &zs) - base).abs() < 1e-9);
        }

        #[test]
        fn reference_point_is_lower_bound(fs in proptest::collection::vec(
            proptest::collection::vec(-5.0f64..5.0, 2), 1..40)) {
            let mut z = ReferencePoint::new(2);
            for f in &fs {
                z.update(f);
            }
            for f in &fs {
                prop_assert!(z.as_slice().iter().zip(f).all(|(a, b)| a <= b));
            }
        }

        #[test]
        fn update_neighbors_never_worsens(incumbents in proptest::collection::vec(
            proptest::collection::vec(0.0f64..3.0, 2), 5),
            child in proptest::collection::vec(0.0f64..3.0, 2)) {
            let w = das_dennis(2, 4).unwrap();
            let b = neighborhoods(&w, 3).unwrap();
            let z = ReferencePoint::from_vec(vec![0.0, 0.0]);
            let mut pop: Vec<Individual> = incumbents.iter().map(|f| ind(f)).collect();
            let before: Vec<f64> = (0..5).map(|j| tchebycheff(&pop[j].f, w[j].as_slice(), z.as_slice())).collect();
            update_neighbors(&mut pop, &ind(&child), &b[2], &w, &z);
            for j in 0..5 {
                let after = tchebycheff(&pop[j].f, w[j].as_slice(), z.as_slice());
                prop_assert!(after <= before[j]);
            }
        }
    }
}
