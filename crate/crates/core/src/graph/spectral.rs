use nalgebra::{DMatrix, SymmetricEigen};

use super::InteractionDigraph;
use crate::error::{Error, Result};

/// Laplacian of the subgraph induced by `cluster`: off-diagonal `-phi_ik`, diagonal
/// the in-cluster row sum. Self weights cancel and are ignored.
pub(crate) fn cluster_laplacian(g: &InteractionDigraph, cluster: &[usize]) -> DMatrix<f64> {
    let n = cluster.len();
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            cluster
                .iter()
                .filter(|&&k| k != cluster[a])
                .map(|&k| g.weight(cluster[a], k))
                .sum()
        } else {
            -g.weight(cluster[a], cluster[b])
        }
    })
}

/// Second-smallest eigenvalue of `L = D - phi` restricted to `cluster`.
///
/// Only defined for undirected (symmetric) restrictions with at least two nodes.
pub fn fiedler_value(g: &InteractionDigraph, cluster: &[usize]) -> Result<f64> {
    if cluster.len() < 2 {
        return Err(Error::Precondition(
            "the Fiedler value needs a cluster of at least two nodes".into(),
        ));
    }
    if let Some(&bad) = cluster.iter().find(|&&i| i >= g.n) {
        return Err(Error::Input(format!("cluster member {bad} out of range")));
    }
    if !g.is_symmetric_on(cluster) {
        return Err(Error::Precondition(
            "cluster weight matrix is not symmetric".into(),
        ));
    }
    let eigen = SymmetricEigen::new(cluster_laplacian(g, cluster));
    let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values[1].max(0.0))
}

/// Evaluation of the sufficient flocking condition `M_* > 2 / (lambda_2 (delta - r))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlockingCertificate {
    pub r: f64,
    pub delta: f64,
    pub m_star: f64,
    pub lambda2: f64,
    pub threshold: f64,
    pub holds: bool,
    /// Why the certificate cannot hold, when its preconditions fail.
    pub reason: Option<String>,
}

pub fn flocking_certificate(r: f64, delta: f64, m_star: f64, lambda2: f64) -> FlockingCertificate {
    let reason = if !(r > 0.0) {
        Some("packing radius must be positive".to_string())
    } else if r >= delta {
        Some(format!("packing radius {r} is not below the interaction radius {delta}"))
    } else if !(lambda2 > 0.0) {
        Some("cluster graph is disconnected (lambda_2 = 0)".to_string())
    } else {
        None
    };
    let threshold = if reason.is_some() {
        f64::INFINITY
    } else {
        2.0 / (lambda2 * (delta - r))
    };
    FlockingCertificate {
        r,
        delta,
        m_star,
        lambda2,
        threshold,
        holds: reason.is_none() && m_star > threshold,
        reason,
    }
}

/// Least-squares line through `(t, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn decay_rate_fit(series: &[(f64, f64)]) -> Result<LogLinearFit> {
    if series.len() < 2 {
        return Err(Error::Input("need at least two samples".into()));
    }
    if let Some(&(t, v)) = series.iter().find(|&&(_, v)| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Input(format!("value {v} at t = {t} is not positive")));
    }
    let n = series.len() as f64;
    let mean_t = series.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = series.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in series {
        let (dt, dy) = (t - mean_t, v.ln() - mean_y);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::Input("all samples share one time".into()));
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let ss_res = syy - slope * sty;
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LogLinearFit {
        slope,
        intercept,
        r_squared,
    })
}
