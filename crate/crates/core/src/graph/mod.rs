//! Interaction digraph, clusters and the flocking certificate.
//!
//! The neighbor table of one instant defines a weighted digraph with
//! `phi[i][k] = M_i / M_*` whenever `k` influences `i`. Clusters are its strongly
//! connected components; for clusters whose restricted weight matrix is symmetric
//! the Laplacian `L = D - phi` has a Fiedler value `lambda_2`, and
//! `M_* > 2 / (lambda_2 (delta - r))` certifies that an `r`-densely packed cluster
//! flocks.

mod packing;
mod scc;
mod spectral;

pub use packing::{is_r_densely_packed, PackedReport};
pub use scc::{strongly_connected_components, ClusterLabeling};
pub use spectral::{decay_rate_fit, fiedler_value, flocking_certificate, FlockingCertificate, LogLinearFit};

use crate::dynamics::{MPolicy, NeighborTable};
use crate::error::Result;

/// Weighted digraph of who influences whom.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDigraph {
    pub n: usize,
    /// Row-major `n x n`; `phi[i * n + k] > 0` iff `k` is a neighbor of `i`.
    pub phi: Vec<f64>,
    /// `d_i = #N_i M_i / M_*`.
    pub degrees: Vec<f64>,
    /// Lower bound `M_*` used to scale the weights.
    pub m_star: f64,
}

impl InteractionDigraph {
    #[inline]
    pub fn weight(&self, i: usize, k: usize) -> f64 {
        self.phi[i * self.n + k]
    }

    /// Directed edges `k -> i` (influence flows from `k` to `i`), self loops dropped.
    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for k in 0..self.n {
                if k != i && self.weight(i, k) > 0.0 {
                    out[k].push(i);
                }
            }
        }
        out
    }

    /// Whether `phi` restricted to `cluster` equals its transpose.
    pub fn is_symmetric_on(&self, cluster: &[usize]) -> bool {
        cluster.iter().all(|&i| {
            cluster.iter().all(|&k| {
                let (a, b) = (self.weight(i, k), self.weight(k, i));
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
            })
        })
    }
}

/// Builds `phi` and the scaled degrees from a neighbor table.
///
/// `M_*` is the policy's analytic infimum over feasible set sizes `1..=n`.
pub fn build_digraph(table: &NeighborTable, policy: MPolicy, kappa: f64, n: usize) -> Result<InteractionDigraph> {
    table.validate()?;
    let (m_star, _) = policy.bounds(kappa, n);
    let size = table.len();
    let mut phi = vec![0.0; size * size];
    let mut degrees = vec![0.0; size];
    for (i, set) in table.sets.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let w = policy.value(kappa, n, set.len())? / m_star;
        for &k in set {
            phi[i * size + k] = w;
        }
        degrees[i] = set.len() as f64 * w;
    }
    Ok(InteractionDigraph {
        n: size,
        phi,
        degrees,
        m_star,
    })
}

/// Smallest `M` actually used by a particle with a nonempty neighbor set, if any.
pub fn realized_m_min(table: &NeighborTable, policy: MPolicy, kappa: f64, n: usize) -> Option<f64> {
    table
        .sets
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| policy.value(kappa, n, s.len()).ok())
        .reduce(f64::min)
}
