use crate::dynamics::Points;
use crate::error::{Error, Result};
use crate::integrate::Domain;

use super::scc::components;

/// Outcome of the `r`-densely packed test for one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedReport {
    pub cluster: Vec<usize>,
    pub r: f64,
    /// Union of open balls of radius `r / 2` around the members is connected.
    pub connected_at_half_r: bool,
    /// Fewest ensemble particles inside any member's open `r`-ball.
    pub min_ball_count: usize,
    pub is_packed: bool,
}

/// Tests whether `cluster` is `r`-densely packed at the given (delayed) positions.
///
/// Open balls of radius `r/2` overlap iff their centers are closer than `r`, so
/// the connectivity condition is graph connectivity under `dist < r`. Ball counts
/// range over the whole ensemble, not only the cluster.
pub fn is_r_densely_packed(
    points: Points<'_>,
    cluster: &[usize],
    r: f64,
    m: usize,
    domain: &Domain,
) -> Result<PackedReport> {
    if cluster.is_empty() {
        return Err(Error::Input("cluster must be nonempty".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Input("packing radius must be positive".into()));
    }
    if let Some(&bad) = cluster.iter().find(|&&i| i >= points.len()) {
        return Err(Error::Input(format!("cluster member {bad} out of range")));
    }
    let r2 = r * r;

    let adj: Vec<Vec<usize>> = cluster
        .iter()
        .map(|&i| {
            (0..cluster.len())
                .filter(|&b| cluster[b] != i && domain.distance_sq(points.get(i), points.get(cluster[b])) < r2)
                .collect()
        })
        .collect();
    let connected = components(&adj).cluster_count == 1;

    let min_ball_count = cluster
        .iter()
        .map(|&k| {
            let pk = points.get(k);
            (0..points.len())
                .filter(|&j| domain.distance_sq(pk, points.get(j)) < r2)
                .count()
        })
        .min()
        .unwrap_or(0);

    Ok(PackedReport {
        cluster: cluster.to_vec(),
        r,
        connected_at_half_r: connected,
        min_ball_count,
        is_packed: connected && min_ball_count > m,
    })
}
