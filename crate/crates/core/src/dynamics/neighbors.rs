use std::collections::HashMap;

use super::{Model, ModelParams, Points};
use crate::error::{Error, Result};
use crate::integrate::Domain;

/// Per-particle neighbor index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    pub sets: Vec<Vec<usize>>,
    /// Time of the (possibly delayed) positions the table was built from.
    pub source_time: f64,
}

impl NeighborTable {
    pub fn new(sets: Vec<Vec<usize>>) -> Self {
        NeighborTable {
            sets,
            source_time: 0.0,
        }
    }

    pub fn with_source_time(mut self, t: f64) -> Self {
        self.source_time = t;
        self
    }

    pub fn empty(n: usize) -> Self {
        Self::new(vec![Vec::new(); n])
    }

    /// Every particle lists every particle, itself included.
    pub fn all_to_all(n: usize) -> Self {
        Self::new(vec![(0..n).collect(); n])
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, i: usize, k: usize) -> bool {
        self.sets[i].binary_search(&k).is_ok()
    }

    pub fn is_symmetric(&self) -> bool {
        self.sets
            .iter()
            .enumerate()
            .all(|(i, set)| set.iter().all(|&k| self.contains(k, i)))
    }

    /// Checks index bounds, ordering and absence of duplicates.
    pub fn validate(&self) -> Result<()> {
        let n = self.sets.len();
        for (i, set) in self.sets.iter().enumerate() {
            if set.iter().any(|&k| k >= n) {
                return Err(Error::Input(format!("neighbor set {i} holds an index >= {n}")));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Input(format!("neighbor set {i} is not strictly increasing")));
            }
        }
        Ok(())
    }
}

/// Whether a ball includes its boundary sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallKind {
    /// `dist < radius`
    Open,
    /// `dist <= radius`
    Closed,
}

impl BallKind {
    #[inline]
    fn contains(self, dist_sq: f64, radius_sq: f64) -> bool {
        match self {
            BallKind::Open => dist_sq < radius_sq,
            BallKind::Closed => dist_sq <= radius_sq,
        }
    }
}

/// Strategy for fixed-radius neighbor queries. All strategies return identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborSearch {
    /// All pairs, `O(N^2)`.
    #[default]
    BruteForce,
    /// Uniform cell list with cells at least one radius wide.
    Grid,
    /// Periodic images materialized as ghost particles in a boundary layer one
    /// radius wide, followed by a plain Euclidean scan.
    Ghost,
}

/// For every particle, the sorted indices of all particles inside its ball of `radius`
/// (the particle itself included).
pub fn ball_members(
    points: Points<'_>,
    radius: f64,
    kind: BallKind,
    domain: &Domain,
    search: NeighborSearch,
) -> Vec<Vec<usize>> {
    match search {
        NeighborSearch::BruteForce => brute_force(points, radius, kind, domain),
        NeighborSearch::Grid => grid_search(points, radius, kind, domain),
        NeighborSearch::Ghost => ghost_search(points, radius, kind, domain),
    }
}

fn brute_force(points: Points<'_>, radius: f64, kind: BallKind, domain: &Domain) -> Vec<Vec<usize>> {
    let n = points.len();
    let r2 = radius * radius;
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        out[i].push(i);
        for j in (i + 1)..n {
            if kind.contains(domain.distance_sq(points.get(i), points.get(j)), r2) {
                out[i].push(j);
                out[j].push(i);
            }
        }
    }
    for set in &mut out {
        set.sort_unstable();
    }
    out
}

// cells slightly wider than the radius so that rounding in x / width can never
// put two points within `radius` more than one cell apart
const CELL_SLACK: f64 = 1.0 + 1e-9;

fn grid_search(points: Points<'_>, radius: f64, kind: BallKind, domain: &Domain) -> Vec<Vec<usize>> {
    let n = points.len();
    let dim = points.dim();
    if n < 2 || !radius.is_finite() || radius <= 0.0 {
        return brute_force(points, radius, kind, domain);
    }
    let min_width = radius * CELL_SLACK;
    // periodic grids need at least three cells per axis so that the 3^d stencil has no repeats
    let (width, cells_per_axis) = match *domain {
        Domain::Unbounded => (min_width, None),
        Domain::Periodic { side } => {
            let count = (side / min_width).floor() as i64;
            if count < 3 {
                return brute_force(points, radius, kind, domain);
            }
            (side / count as f64, Some(count))
        }
    };

    let cell_of = |p: &[f64]| -> Vec<i64> {
        p.iter()
            .map(|&c| match (cells_per_axis, domain.side()) {
                (Some(count), Some(side)) => {
                    let mut w = c.rem_euclid(side);
                    if w >= side {
                        w -= side;
                    }
                    ((w / width).floor() as i64).min(count - 1)
                }
                _ => (c / width).floor() as i64,
            })
            .collect()
    };

    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut home = Vec::with_capacity(n);
    for i in 0..n {
        let key = cell_of(points.get(i));
        cells.entry(key.clone()).or_default().push(i);
        home.push(key);
    }

    let offsets = stencil(dim);
    let r2 = radius * radius;
    let mut out = vec![Vec::new(); n];
    let mut key = vec![0i64; dim];
    for i in 0..n {
        let pi = points.get(i);
        for off in &offsets {
            for a in 0..dim {
                let k = home[i][a] + off[a];
                key[a] = match cells_per_axis {
                    Some(count) => k.rem_euclid(count),
                    None => k,
                };
            }
            if let Some(bucket) = cells.get(&key) {
                for &j in bucket {
                    if j == i || kind.contains(domain.distance_sq(pi, points.get(j)), r2) {
                        out[i].push(j);
                    }
                }
            }
        }
        out[i].sort_unstable();
    }
    out
}

fn stencil(dim: usize) -> Vec<Vec<i64>> {
    let mut offsets = vec![Vec::new()];
    for _ in 0..dim {
        offsets = offsets
            .into_iter()
            .flat_map(|o| {
                (-1..=1).map(move |d| {
                    let mut next = o.clone();
                    next.push(d);
                    next
                })
            })
            .collect();
    }
    offsets
}

fn ghost_search(points: Points<'_>, radius: f64, kind: BallKind, domain: &Domain) -> Vec<Vec<usize>> {
    let side = match *domain {
        Domain::Unbounded => return brute_force(points, radius, kind, domain),
        Domain::Periodic { side } => side,
    };
    let n = points.len();
    let dim = points.dim();

    // extended point cloud: originals plus shifted copies of particles within
    // `radius` of a face, edge or corner of the box
    let mut ext_coords: Vec<f64> = Vec::with_capacity(points.coords().len() * 2);
    let mut ext_owner: Vec<usize> = Vec::with_capacity(n * 2);
    for i in 0..n {
        let p = points.get(i);
        let shifts: Vec<Vec<f64>> = p
            .iter()
            .map(|&c| {
                let mut s = vec![0.0];
                if c < radius {
                    s.push(side);
                }
                if c >= side - radius {
                    s.push(-side);
                }
                s
            })
            .collect();
        let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &shifts {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    axis.iter().map(move |&s| {
                        let mut next = c.clone();
                        next.push(s);
                        next
                    })
                })
                .collect();
        }
        for combo in combos {
            ext_coords.extend(p.iter().zip(&combo).map(|(c, s)| c + s));
            ext_owner.push(i);
        }
    }

    let r2 = radius * radius;
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        let pi = points.get(i);
        for (e, &owner) in ext_owner.iter().enumerate() {
            let q = &ext_coords[e * dim..(e + 1) * dim];
            let d2: f64 = pi.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if owner == i && d2 == 0.0 || kind.contains(d2, r2) {
                out[i].push(owner);
            }
        }
        out[i].sort_unstable();
        out[i].dedup();
    }
    out
}

/// Density-induced neighbor sets: `k` is a neighbor of `i` iff `k` lies in the open
/// `delta`-ball around `i` and that ball holds more than `m` particles (counting `i`).
pub fn neighbor_sets_di(
    points: Points<'_>,
    delta: f64,
    m: usize,
    domain: &Domain,
    search: NeighborSearch,
) -> Result<NeighborTable> {
    points.check_finite()?;
    if !(delta > 0.0) {
        return Err(Error::config("delta", "interaction radius must be positive"));
    }
    let mut sets = ball_members(points, delta, BallKind::Open, domain, search);
    for set in &mut sets {
        if set.len() <= m {
            set.clear();
        }
    }
    Ok(NeighborTable::new(sets))
}

/// Geometric neighbor sets over the closed `delta`-ball (always symmetric).
pub fn neighbor_sets_cs_delta(
    points: Points<'_>,
    delta: f64,
    domain: &Domain,
    search: NeighborSearch,
) -> Result<NeighborTable> {
    points.check_finite()?;
    if !(delta > 0.0) {
        return Err(Error::config("delta", "interaction radius must be positive"));
    }
    Ok(NeighborTable::new(ball_members(
        points,
        delta,
        BallKind::Closed,
        domain,
        search,
    )))
}

/// The `q` particles closest to each particle (itself excluded), ties to the lower index.
pub fn neighbor_sets_cs_q(points: Points<'_>, q: usize, domain: &Domain) -> Result<NeighborTable> {
    points.check_finite()?;
    let n = points.len();
    if q == 0 || q + 1 > n {
        return Err(Error::config("q", format!("must lie in [1, N-1] with N = {n}")));
    }
    let mut sets = Vec::with_capacity(n);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        cand.clear();
        let pi = points.get(i);
        cand.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (domain.distance_sq(pi, points.get(j)), j)),
        );
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut set: Vec<usize> = cand[..q].iter().map(|&(_, j)| j).collect();
        set.sort_unstable();
        sets.push(set);
    }
    Ok(NeighborTable::new(sets))
}

/// Neighbor table of whichever model `params` selects.
pub fn neighbor_table(
    params: &ModelParams,
    points: Points<'_>,
    domain: &Domain,
    search: NeighborSearch,
) -> Result<NeighborTable> {
    let missing = |key: &str| Error::config(key, format!("required for model {}", params.model.name()));
    match params.model {
        Model::Di => neighbor_sets_di(
            points,
            params.delta.ok_or_else(|| missing("delta"))?,
            params.m.ok_or_else(|| missing("m"))?,
            domain,
            search,
        ),
        Model::Cs => {
            points.check_finite()?;
            Ok(NeighborTable::all_to_all(points.len()))
        }
        Model::CsDelta => neighbor_sets_cs_delta(
            points,
            params.delta.ok_or_else(|| missing("delta"))?,
            domain,
            search,
        ),
        Model::CsQ => neighbor_sets_cs_q(points, params.q.ok_or_else(|| missing("q"))?, domain),
    }
}
