use super::{EnsembleState, MPolicy, Model, ModelParams, NeighborTable, Points};
use crate::error::{Error, Result};
use crate::integrate::Domain;

/// Cucker-Smale communication weight `psi(s) = (1 + s)^(-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommWeight {
    pub alpha: f64,
}

impl Default for CommWeight {
    fn default() -> Self {
        CommWeight { alpha: 0.5 }
    }
}

impl CommWeight {
    pub fn new(alpha: f64) -> Self {
        CommWeight { alpha }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        if self.alpha == 0.5 {
            1.0 / (1.0 + s).sqrt()
        } else {
            (1.0 + s).powf(-self.alpha)
        }
    }
}

fn check_table(table: &NeighborTable, n: usize) -> Result<()> {
    if table.len() != n {
        return Err(Error::Input(format!(
            "neighbor table has {} rows for {n} particles",
            table.len()
        )));
    }
    Ok(())
}

/// Writes `a_i = sum_{k in N_i} M_i w_ik (v_k - v_i)` into `out`, with `w_ik = 1`
/// when `weight` is `None` and `psi(|x_i - x_k|)` otherwise.
fn accumulate(
    positions: Points<'_>,
    velocities: Points<'_>,
    table: &NeighborTable,
    policy: MPolicy,
    kappa: f64,
    weight: Option<(CommWeight, &Domain)>,
    out: &mut [f64],
) -> Result<()> {
    let n = velocities.len();
    let dim = velocities.dim();
    let v = velocities.coords();
    out.iter_mut().for_each(|a| *a = 0.0);
    for (i, set) in table.sets.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let m = policy.value(kappa, n, set.len())?;
        let ai = &mut out[i * dim..(i + 1) * dim];
        let vi = &v[i * dim..(i + 1) * dim];
        match weight {
            None => {
                for &k in set {
                    for ((a, vk), vi) in ai.iter_mut().zip(&v[k * dim..(k + 1) * dim]).zip(vi) {
                        *a += vk - vi;
                    }
                }
                ai.iter_mut().for_each(|a| *a *= m);
            }
            Some((psi, domain)) => {
                let pi = positions.get(i);
                for &k in set {
                    if k == i {
                        continue;
                    }
                    let w = m * psi.eval(domain.distance(pi, positions.get(k)));
                    for ((a, vk), vi) in ai.iter_mut().zip(&v[k * dim..(k + 1) * dim]).zip(vi) {
                        *a += w * (vk - vi);
                    }
                }
            }
        }
    }
    Ok(())
}

/// DI acceleration `a_i = sum_{k in N_i} M(N, i, #N_i) (v_k - v_i)`.
pub fn acceleration_di(
    state: &EnsembleState,
    table: &NeighborTable,
    policy: MPolicy,
    kappa: f64,
) -> Result<Vec<f64>> {
    check_table(table, state.len())?;
    let mut out = vec![0.0; state.velocities_flat().len()];
    accumulate(
        state.positions(),
        state.velocities(),
        table,
        policy,
        kappa,
        None,
        &mut out,
    )?;
    Ok(out)
}

/// Cucker-Smale-type acceleration `a_i = sum_{k in N_i} M psi(|x_i - x_k|) (v_k - v_i)`.
///
/// The table selects the variant: all-to-all for CS, the closed `delta`-ball for
/// CS_delta (so `psi` is effectively cut off at `delta`), the `q` closest for CS_q.
pub fn acceleration_cs(
    state: &EnsembleState,
    table: &NeighborTable,
    policy: MPolicy,
    kappa: f64,
    weight: CommWeight,
    domain: &Domain,
) -> Result<Vec<f64>> {
    check_table(table, state.len())?;
    let mut out = vec![0.0; state.velocities_flat().len()];
    accumulate(
        state.positions(),
        state.velocities(),
        table,
        policy,
        kappa,
        Some((weight, domain)),
        &mut out,
    )?;
    Ok(out)
}

/// Model acceleration at arbitrary (staged) positions and velocities, written into `out`.
pub fn acceleration(
    params: &ModelParams,
    positions: Points<'_>,
    velocities: Points<'_>,
    table: &NeighborTable,
    domain: &Domain,
    out: &mut [f64],
) -> Result<()> {
    check_table(table, velocities.len())?;
    let weight = match params.model {
        Model::Di => None,
        Model::Cs | Model::CsDelta | Model::CsQ => Some((params.comm_weight(), domain)),
    };
    accumulate(
        positions,
        velocities,
        table,
        params.m_policy,
        params.kappa,
        weight,
        out,
    )
}
