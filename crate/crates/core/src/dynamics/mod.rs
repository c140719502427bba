//! Particle state, interaction rules and scalar diagnostics.
//!
//! Four alignment models share the same second-order structure
//! `x' = v`, `v'_i = sum_{k in N_i} w_ik (v_k - v_i)` and differ only in how the
//! neighbor sets `N_i` and the weights `w_ik` are chosen:
//!
//! * `Di`: density-induced consensus. `k` is a neighbor of `i` when it lies in the
//!   open `delta`-ball around `i` *and* that ball holds more than `m` particles.
//!   Weights are the normalization `M` alone.
//! * `Cs`: all-to-all Cucker-Smale with communication weight `psi(|x_i - x_k|)`.
//! * `CsDelta`: Cucker-Smale restricted to the closed `delta`-ball.
//! * `CsQ`: Cucker-Smale restricted to the `q` closest particles.

mod forces;
mod neighbors;

pub use forces::{acceleration, acceleration_cs, acceleration_di, CommWeight};
pub use neighbors::{
    ball_members, neighbor_sets_cs_delta, neighbor_sets_cs_q, neighbor_sets_di, neighbor_table,
    BallKind, NeighborSearch, NeighborTable,
};

use crate::error::{Error, Result};

/// Read-only view of `n` points stored as a flat `[x0, y0, x1, y1, ...]` slice.
#[derive(Debug, Clone, Copy)]
pub struct Points<'a> {
    coords: &'a [f64],
    dim: usize,
}

impl<'a> Points<'a> {
    pub fn new(coords: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0, "coordinate count not a multiple of dim");
        Points { coords, dim }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize) -> &'a [f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &'a [f64] {
        self.coords
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.coords.iter().position(|c| !c.is_finite()) {
            Some(k) => Err(Error::Input(format!(
                "non-finite coordinate for particle {}",
                k / self.dim
            ))),
            None => Ok(()),
        }
    }
}

/// Positions and velocities of `n` particles in `dim` dimensions at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    pub t: f64,
    dim: usize,
    positions: Vec<f64>,
    velocities: Vec<f64>,
}

impl EnsembleState {
    pub fn new(t: f64, dim: usize, positions: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("dimension must be at least 1".into()));
        }
        if positions.is_empty() || positions.len() % dim != 0 {
            return Err(Error::Input(format!(
                "{} position coordinates do not form whole {dim}-d points",
                positions.len()
            )));
        }
        if positions.len() != velocities.len() {
            return Err(Error::Input(format!(
                "{} position coordinates but {} velocity coordinates",
                positions.len(),
                velocities.len()
            )));
        }
        let state = EnsembleState {
            t,
            dim,
            positions,
            velocities,
        };
        state.positions().check_finite()?;
        state.velocities().check_finite()?;
        Ok(state)
    }

    /// Builds a state from per-particle vectors.
    pub fn from_vectors(t: f64, positions: &[Vec<f64>], velocities: &[Vec<f64>]) -> Result<Self> {
        let dim = positions.first().map_or(0, Vec::len);
        if positions.iter().chain(velocities).any(|p| p.len() != dim) {
            return Err(Error::Input("particles have mixed dimensions".into()));
        }
        Self::new(t, dim, positions.concat(), velocities.concat())
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> Points<'_> {
        Points::new(&self.positions, self.dim)
    }

    pub fn velocities(&self) -> Points<'_> {
        Points::new(&self.velocities, self.dim)
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities_flat(&self) -> &[f64] {
        &self.velocities
    }

    pub fn positions_mut(&mut self) -> &mut [f64] {
        &mut self.positions
    }

    pub fn velocities_mut(&mut self) -> &mut [f64] {
        &mut self.velocities
    }

    pub fn mean_position(&self) -> Vec<f64> {
        mean_of(&self.positions, self.dim)
    }

    pub fn mean_velocity(&self) -> Vec<f64> {
        mean_of(&self.velocities, self.dim)
    }

    /// Mean velocity over a subset of particles.
    pub fn cluster_mean_velocity(&self, members: &[usize]) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for &i in members {
            for (m, v) in mean.iter_mut().zip(self.velocity(i)) {
                *m += v;
            }
        }
        let n = members.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

fn mean_of(flat: &[f64], dim: usize) -> Vec<f64> {
    let n = (flat.len() / dim) as f64;
    let mut mean = vec![0.0; dim];
    for p in flat.chunks_exact(dim) {
        for (m, c) in mean.iter_mut().zip(p) {
            *m += c;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Di,
    Cs,
    CsDelta,
    CsQ,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Di => "di",
            Model::Cs => "cs",
            Model::CsDelta => "cs_delta",
            Model::CsQ => "cs_q",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "di" => Some(Model::Di),
            "cs" => Some(Model::Cs),
            "cs_delta" => Some(Model::CsDelta),
            "cs_q" => Some(Model::CsQ),
            _ => None,
        }
    }
}

/// Normalization factor `M(N, i, #N_i)` multiplying every interaction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MPolicy {
    /// `kappa / N`, the classical Cucker-Smale scaling.
    Flat,
    /// `kappa / #N_i`, the Motsch-Tadmor scaling.
    PerNeighbor,
    /// `kappa`.
    Constant,
}

impl MPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            MPolicy::Flat => "flat",
            MPolicy::PerNeighbor => "per_neighbor",
            MPolicy::Constant => "constant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "flat" => Some(MPolicy::Flat),
            "per_neighbor" => Some(MPolicy::PerNeighbor),
            "constant" => Some(MPolicy::Constant),
            _ => None,
        }
    }

    /// Value of `M` for a particle whose neighbor set has `set_size` members.
    ///
    /// `PerNeighbor` is undefined for an empty set; callers skip particles
    /// without neighbors, so reaching that branch is a logic error.
    pub fn value(&self, kappa: f64, n: usize, set_size: usize) -> Result<f64> {
        match self {
            MPolicy::Flat => Ok(kappa / n as f64),
            MPolicy::PerNeighbor if set_size == 0 => Err(Error::Internal(
                "per-neighbor normalization queried for an empty neighbor set".into(),
            )),
            MPolicy::PerNeighbor => Ok(kappa / set_size as f64),
            MPolicy::Constant => Ok(kappa),
        }
    }

    /// Analytic `(inf M, sup M)` over every feasible set size `1..=n`.
    pub fn bounds(&self, kappa: f64, n: usize) -> (f64, f64) {
        match self {
            MPolicy::Flat => (kappa / n as f64, kappa / n as f64),
            MPolicy::PerNeighbor => (kappa / n as f64, kappa),
            MPolicy::Constant => (kappa, kappa),
        }
    }
}

/// `m_value` in functional form.
pub fn m_value(policy: MPolicy, kappa: f64, n: usize, set_size: usize) -> Result<f64> {
    policy.value(kappa, n, set_size)
}

/// Parameters of one interaction model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub model: Model,
    pub n: usize,
    /// Density threshold (DI only).
    pub m: Option<usize>,
    /// Interaction radius (DI and CS_delta).
    pub delta: Option<f64>,
    /// Neighbor count (CS_q only).
    pub q: Option<usize>,
    pub kappa: f64,
    /// Exponent of the communication weight `psi(s) = (1 + s)^(-alpha)`.
    pub alpha: f64,
    pub m_policy: MPolicy,
    /// Topology delay in integrator steps.
    pub h_steps: usize,
}

impl ModelParams {
    pub const DEFAULT_ALPHA: f64 = 0.5;

    /// DI with the cluster-formation parameters `(N, m, delta) = (64, 3, 2)` and `M = 1/#N_i`.
    pub fn di_reference() -> Self {
        ModelParams {
            model: Model::Di,
            n: 64,
            m: Some(3),
            delta: Some(2.0),
            q: None,
            kappa: 1.0,
            alpha: Self::DEFAULT_ALPHA,
            m_policy: MPolicy::PerNeighbor,
            h_steps: 1,
        }
    }

    pub fn di(n: usize, m: usize, delta: f64, m_policy: MPolicy, kappa: f64) -> Self {
        ModelParams {
            model: Model::Di,
            n,
            m: Some(m),
            delta: Some(delta),
            q: None,
            kappa,
            alpha: Self::DEFAULT_ALPHA,
            m_policy,
            h_steps: 1,
        }
    }

    pub fn cs(n: usize) -> Self {
        ModelParams {
            model: Model::Cs,
            n,
            m: None,
            delta: None,
            q: None,
            kappa: 1.0,
            alpha: Self::DEFAULT_ALPHA,
            m_policy: MPolicy::Flat,
            h_steps: 1,
        }
    }

    pub fn cs_delta(n: usize, delta: f64) -> Self {
        ModelParams {
            model: Model::CsDelta,
            delta: Some(delta),
            m_policy: MPolicy::PerNeighbor,
            ..Self::cs(n)
        }
    }

    pub fn cs_q(n: usize, q: usize) -> Self {
        ModelParams {
            model: Model::CsQ,
            q: Some(q),
            m_policy: MPolicy::PerNeighbor,
            ..Self::cs(n)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "particle count must be at least 1"));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::config("kappa", "coupling strength must be positive"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::config("alpha", "weight exponent must be non-negative"));
        }
        if self.h_steps == 0 {
            return Err(Error::config("h_steps", "topology delay must be at least one step"));
        }
        let need_delta = matches!(self.model, Model::Di | Model::CsDelta);
        match self.delta {
            Some(d) if !(d.is_finite() && d > 0.0) => {
                return Err(Error::config("delta", "interaction radius must be positive"))
            }
            None if need_delta => {
                return Err(Error::config("delta", format!("required for model {}", self.model.name())))
            }
            _ => {}
        }
        if self.model == Model::Di {
            match self.m {
                None => return Err(Error::config("m", "required for model di")),
                Some(0) => return Err(Error::config("m", "density threshold must be at least 1")),
                _ => {}
            }
        }
        if self.model == Model::CsQ {
            match self.q {
                None => return Err(Error::config("q", "required for model cs_q")),
                Some(q) if q == 0 || q + 1 > self.n => {
                    return Err(Error::config("q", format!("must lie in [1, N-1] = [1, {}]", self.n.saturating_sub(1))))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Largest distance over which particles can interact, if finite.
    pub fn interaction_range(&self) -> Option<f64> {
        match self.model {
            Model::Di | Model::CsDelta => self.delta,
            Model::Cs | Model::CsQ => None,
        }
    }

    pub fn comm_weight(&self) -> CommWeight {
        CommWeight::new(self.alpha)
    }
}

/// Velocity diameter `V = max_{i,j} |v_i - v_j|`.
pub fn velocity_diameter(state: &EnsembleState) -> f64 {
    let v = state.velocities();
    let mut best = 0.0f64;
    for i in 0..v.len() {
        let vi = v.get(i);
        for j in (i + 1)..v.len() {
            let d2: f64 = vi.iter().zip(v.get(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}

/// Sum of all velocities, component-wise.
pub fn total_momentum(state: &EnsembleState) -> Vec<f64> {
    let mut sum = vec![0.0; state.dim()];
    for v in state.velocities_flat().chunks_exact(state.dim()) {
        for (s, c) in sum.iter_mut().zip(v) {
            *s += c;
        }
    }
    sum
}

/// Average density `N / L^2` and minimal interaction density `m / (pi delta^2)` in 2-d.
pub fn density_ratio(n: usize, m: usize, delta: f64, side: f64) -> (f64, f64) {
    let rho_a = n as f64 / (side * side);
    let rho_m = m as f64 / (std::f64::consts::PI * delta * delta);
    (rho_a, rho_m)
}
