//! Time stepping: the staged RK4 scheme, the topology delay buffer and the
//! sampled trajectory record.

mod domain;

pub use domain::{min_image_distance, Domain};

use std::collections::VecDeque;

use crate::dynamics::{
    acceleration, neighbor_table, total_momentum, velocity_diameter, EnsembleState, Model, ModelParams,
    NeighborSearch, NeighborTable, Points,
};
use crate::error::{Error, Result};
use crate::graph::{build_digraph, strongly_connected_components, ClusterLabeling};

/// Last `h + 1` position snapshots; the oldest is the delayed one.
///
/// Until `h` steps have been taken the initial positions stay at the front, so
/// the topology on `[0, h)` comes from `x(0)`.
#[derive(Debug, Clone)]
pub struct DelayBuffer {
    h_steps: usize,
    snaps: VecDeque<Vec<f64>>,
}

impl DelayBuffer {
    pub fn new(h_steps: usize, initial: &[f64]) -> Self {
        let mut snaps = VecDeque::with_capacity(h_steps + 1);
        snaps.push_back(initial.to_vec());
        DelayBuffer { h_steps, snaps }
    }

    pub fn h_steps(&self) -> usize {
        self.h_steps
    }

    pub fn push(&mut self, positions: &[f64]) {
        if self.snaps.len() == self.h_steps + 1 {
            let mut reuse = self.snaps.pop_front().expect("buffer is nonempty");
            reuse.clear();
            reuse.extend_from_slice(positions);
            self.snaps.push_back(reuse);
        } else {
            self.snaps.push_back(positions.to_vec());
        }
    }

    /// Positions at step `max(n - h, 0)` where `n` is the number of pushes so far.
    pub fn delayed(&self) -> &[f64] {
        self.snaps.front().expect("buffer is nonempty")
    }

    /// Steps elapsed between the delayed snapshot and the newest one.
    pub fn lag(&self) -> usize {
        self.snaps.len() - 1
    }
}

/// Position and velocity increments of one RK4 step, staged as
/// `k_x2 = (v + k_v1/2) dt`, `k_v2 = a(x + k_x1/2, v + k_v1/2) dt`, and so on.
fn rk4_increments(
    state: &EnsembleState,
    dt: f64,
    params: &ModelParams,
    table: &NeighborTable,
    domain: &Domain,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = state.dim();
    let x = state.positions_flat();
    let v = state.velocities_flat();
    let len = x.len();
    // DI forces do not depend on positions once the table is fixed
    let positional = params.model != Model::Di;

    let mut xs = x.to_vec();
    let mut vs = v.to_vec();
    let mut a = vec![0.0; len];
    let mut dx = vec![0.0; len];
    let mut dv = vec![0.0; len];

    // (stage weight, fraction of the stage increment used for the next evaluation)
    const STAGES: [(f64, f64); 4] = [(1.0, 0.5), (2.0, 0.5), (2.0, 1.0), (1.0, 0.0)];
    for (s, &(weight, next)) in STAGES.iter().enumerate() {
        acceleration(params, Points::new(&xs, dim), Points::new(&vs, dim), table, domain, &mut a)?;
        for j in 0..len {
            let kx = vs[j] * dt;
            let kv = a[j] * dt;
            dx[j] += weight * kx;
            dv[j] += weight * kv;
            if s < 3 {
                if positional {
                    xs[j] = x[j] + next * kx;
                }
                vs[j] = v[j] + next * kv;
            }
        }
    }
    for (x, v) in dx.iter_mut().zip(dv.iter_mut()) {
        *x /= 6.0;
        *v /= 6.0;
    }
    Ok((dx, dv))
}

/// One RK4 step with a frozen neighbor table; positions are wrapped afterwards.
pub fn rk4_step(
    state: &EnsembleState,
    dt: f64,
    params: &ModelParams,
    table: &NeighborTable,
    domain: &Domain,
) -> Result<EnsembleState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("dt", "time step must be positive"));
    }
    let (dx, dv) = rk4_increments(state, dt, params, table, domain)?;
    let mut x: Vec<f64> = state.positions_flat().iter().zip(&dx).map(|(a, b)| a + b).collect();
    let v: Vec<f64> = state.velocities_flat().iter().zip(&dv).map(|(a, b)| a + b).collect();
    if x.iter().chain(&v).any(|c| !c.is_finite()) {
        return Err(Error::IntegrationFault {
            step: (state.t / dt).round() as u64,
            message: "non-finite position or velocity".into(),
        });
    }
    domain.wrap(&mut x);
    EnsembleState::new(state.t + dt, state.dim(), x, v)
}

/// A single run advanced step by step.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    domain: Domain,
    search: NeighborSearch,
    dt: f64,
    step: u64,
    state: EnsembleState,
    unwrapped: Vec<f64>,
    buffer: DelayBuffer,
}

impl Simulation {
    pub fn new(params: ModelParams, domain: Domain, dt: f64, initial: EnsembleState) -> Result<Self> {
        params.validate()?;
        domain.validate(params.interaction_range())?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config("dt", "time step must be positive"));
        }
        if initial.len() != params.n {
            return Err(Error::config(
                "n",
                format!("initial state has {} particles, expected {}", initial.len(), params.n),
            ));
        }
        let unwrapped = initial.positions_flat().to_vec();
        let mut state = initial;
        domain.wrap(state.positions_mut());
        let buffer = DelayBuffer::new(params.h_steps, state.positions_flat());
        Ok(Simulation {
            params,
            domain,
            search: NeighborSearch::default(),
            dt,
            step: 0,
            state,
            unwrapped,
            buffer,
        })
    }

    pub fn with_search(mut self, search: NeighborSearch) -> Self {
        self.search = search;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn state(&self) -> &EnsembleState {
        &self.state
    }

    /// Positions without periodic wrapping, for displacement diagnostics.
    pub fn unwrapped(&self) -> &[f64] {
        &self.unwrapped
    }

    /// Positions the current topology is computed from: the delayed snapshot for
    /// DI, the present positions for the other models.
    pub fn topology_positions(&self) -> &[f64] {
        match self.params.model {
            Model::Di => self.buffer.delayed(),
            _ => self.state.positions_flat(),
        }
    }

    /// Neighbor table that governs the next step.
    pub fn current_table(&self) -> Result<NeighborTable> {
        let source = self.state.t - self.buffer.lag() as f64 * self.dt;
        let (pts, t) = match self.params.model {
            Model::Di => (self.buffer.delayed(), source),
            _ => (self.state.positions_flat(), self.state.t),
        };
        Ok(neighbor_table(&self.params, Points::new(pts, self.state.dim()), &self.domain, self.search)?
            .with_source_time(t))
    }

    /// SCC labeling of the current interaction digraph.
    pub fn current_labels(&self) -> Result<ClusterLabeling> {
        labels_for(&self.params, &self.current_table()?)
    }

    /// Advances one step and returns the table that was used.
    pub fn step(&mut self) -> Result<NeighborTable> {
        let table = self.current_table()?;
        self.step_with(&table)?;
        Ok(table)
    }

    fn step_with(&mut self, table: &NeighborTable) -> Result<()> {
        let step = self.step;
        let fault = |message: String| Error::IntegrationFault { step, message };
        let (dx, dv) = rk4_increments(&self.state, self.dt, &self.params, table, &self.domain)?;
        if dx.iter().chain(&dv).any(|c| !c.is_finite()) {
            return Err(fault("non-finite position or velocity".into()));
        }
        for (u, d) in self.unwrapped.iter_mut().zip(&dx) {
            *u += d;
        }
        for (x, d) in self.state.positions_mut().iter_mut().zip(&dx) {
            *x += d;
        }
        for (v, d) in self.state.velocities_mut().iter_mut().zip(&dv) {
            *v += d;
        }
        self.domain.wrap(self.state.positions_mut());
        self.step += 1;
        self.state.t = self.step as f64 * self.dt;
        self.buffer.push(self.state.positions_flat());
        Ok(())
    }

    /// Snapshot of the present state with topology and diagnostics.
    pub fn sample(&self) -> Result<Sample> {
        let table = self.current_table()?;
        let labels = labels_for(&self.params, &table)?;
        let diagnostics = Diagnostics {
            vmax: velocity_diameter(&self.state),
            momentum: total_momentum(&self.state),
            n_clusters: labels.cluster_count,
        };
        Ok(Sample {
            t: self.state.t,
            step: self.step,
            state: self.state.clone(),
            unwrapped: self.unwrapped.clone(),
            topology_positions: self.topology_positions().to_vec(),
            table,
            labels,
            diagnostics,
        })
    }
}

fn labels_for(params: &ModelParams, table: &NeighborTable) -> Result<ClusterLabeling> {
    let g = build_digraph(table, params.m_policy, params.kappa, params.n)?;
    Ok(strongly_connected_components(&g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Velocity diameter `V`.
    pub vmax: f64,
    pub momentum: Vec<f64>,
    pub n_clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub step: u64,
    pub state: EnsembleState,
    pub unwrapped: Vec<f64>,
    /// Positions the neighbor table was computed from.
    pub topology_positions: Vec<f64>,
    pub table: NeighborTable,
    pub labels: ClusterLabeling,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub params: ModelParams,
    pub domain: Domain,
    pub dt: f64,
    pub seed: Option<u64>,
    pub samples: Vec<Sample>,
}

impl TrajectoryRecord {
    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Number of steps covering `[0, t_end]` at step `dt`.
pub fn step_count(t_end: f64, dt: f64) -> Result<u64> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::config("t_end", "must be finite and nonnegative"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("dt", "time step must be positive"));
    }
    Ok((t_end / dt).round() as u64)
}

/// Runs `steps` steps, sampling every `sample_every` steps and at the end.
///
/// `observe` sees the state after every step along with the table that produced it.
pub fn simulate_with(
    mut sim: Simulation,
    steps: u64,
    sample_every: u64,
    seed: Option<u64>,
    mut observe: impl FnMut(&Simulation, &NeighborTable) -> Result<()>,
) -> Result<TrajectoryRecord> {
    if sample_every == 0 {
        return Err(Error::config("sample_every", "must be at least 1"));
    }
    let mut samples = vec![sim.sample()?];
    for n in 1..=steps {
        let table = sim.step()?;
        observe(&sim, &table)?;
        if n % sample_every == 0 || n == steps {
            samples.push(sim.sample()?);
        }
    }
    Ok(TrajectoryRecord {
        params: sim.params.clone(),
        domain: sim.domain,
        dt: sim.dt,
        seed,
        samples,
    })
}

pub fn simulate(sim: Simulation, steps: u64, sample_every: u64, seed: Option<u64>) -> Result<TrajectoryRecord> {
    simulate_with(sim, steps, sample_every, seed, |_, _| Ok(()))
}

/// Builds the initial state from the scenario and runs it to `t_end`.
pub fn run_simulation(spec: &crate::scenarios::ScenarioSpec) -> Result<TrajectoryRecord> {
    let sim = spec.simulation()?;
    simulate(sim, step_count(spec.t_end, spec.dt)?, spec.sample_every, Some(spec.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MPolicy;

    fn state(x: &[f64], v: &[f64], dim: usize) -> EnsembleState {
        EnsembleState::new(0.0, dim, x.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn delay_buffer_lookup() {
        let mut b = DelayBuffer::new(2, &[0.0]);
        assert_eq!(b.delayed(), &[0.0]);
        b.push(&[1.0]);
        assert_eq!(b.delayed(), &[0.0]);
        b.push(&[2.0]);
        assert_eq!(b.delayed(), &[0.0]);
        b.push(&[3.0]);
        assert_eq!(b.delayed(), &[1.0]);
        b.push(&[4.0]);
        assert_eq!(b.delayed(), &[2.0]);
        assert_eq!(b.lag(), 2);
    }

    #[test]
    fn free_streaming_is_exact() {
        let s = state(&[0.0, 1.0, 5.0, 5.0], &[0.25, -0.5, 0.0, 1.0], 2);
        let p = ModelParams::di(2, 3, 1.0, MPolicy::PerNeighbor, 1.0);
        let next = rk4_step(&s, 0.5, &p, &NeighborTable::empty(2), &Domain::Unbounded).unwrap();
        assert_eq!(next.positions_flat(), &[0.125, 0.75, 5.0, 5.5]);
        assert_eq!(next.velocities_flat(), s.velocities_flat());
        assert_eq!(next.t, 0.5);
    }

    /// Two mutual neighbors with `M = 1/2`: `v_1 - v_0` decays as `e^{-t}` and the mean is constant.
    fn pair_error(dt: f64) -> f64 {
        let s0 = state(&[0.0, 0.5], &[0.0, 1.0], 1);
        let p = ModelParams::di(2, 1, 1.0, MPolicy::PerNeighbor, 1.0);
        let table = NeighborTable::new(vec![vec![0, 1], vec![0, 1]]);
        let steps = (1.0 / dt).round() as usize;
        let mut s = s0;
        for _ in 0..steps {
            s = rk4_step(&s, dt, &p, &table, &Domain::Unbounded).unwrap();
        }
        let exact_v0 = 0.5 - 0.5 * (-1.0f64).exp();
        let exact_x0 = 0.5 - 0.5 * (1.0 - (-1.0f64).exp());
        (s.velocities_flat()[0] - exact_v0).abs().max((s.positions_flat()[0] - exact_x0).abs())
    }

    #[test]
    fn fourth_order_on_fixed_topology() {
        let e1 = pair_error(0.1);
        let e2 = pair_error(0.05);
        let ratio = e1 / e2;
        assert!(e1 < 1e-6);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn periodic_wrap_keeps_velocity() {
        let p = ModelParams::di(1, 1, 1.0, MPolicy::Constant, 1.0);
        let s = state(&[9.95, 5.0], &[1.0, 0.0], 2);
        let mut sim = Simulation::new(p, Domain::periodic(10.0), 0.1, s).unwrap();
        sim.step().unwrap();
        let x = sim.state().positions_flat();
        assert!((x[0] - 0.05).abs() < 1e-12);
        assert_eq!(sim.state().velocities_flat(), &[1.0, 0.0]);
        assert!((sim.unwrapped()[0] - 10.05).abs() < 1e-12);
    }

    #[test]
    fn t_end_zero_records_initial_state_only() {
        let p = ModelParams::cs(2);
        let s = state(&[0.0, 1.0], &[0.0, 1.0], 1);
        let sim = Simulation::new(p, Domain::Unbounded, 0.01, s.clone()).unwrap();
        let rec = simulate(sim, step_count(0.0, 0.01).unwrap(), 10, None).unwrap();
        assert_eq!(rec.samples.len(), 1);
        assert_eq!(rec.samples[0].state, s);
    }

    #[test]
    fn sampling_includes_the_final_step() {
        let p = ModelParams::cs(2);
        let s = state(&[0.0, 1.0], &[0.0, 1.0], 1);
        let sim = Simulation::new(p, Domain::Unbounded, 0.1, s).unwrap();
        let rec = simulate(sim, 25, 10, None).unwrap();
        let steps: Vec<u64> = rec.samples.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 10, 20, 25]);
        assert!(rec.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn topology_is_delayed() {
        // two particles approach; with h = 3 steps the table lags the geometry
        let mut p = ModelParams::di(2, 1, 1.0, MPolicy::PerNeighbor, 1.0);
        p.h_steps = 3;
        let s = state(&[0.0, 1.05], &[0.0, -1.0], 1);
        let mut sim = Simulation::new(p, Domain::Unbounded, 0.1, s).unwrap();
        let mut used = Vec::new();
        for _ in 0..5 {
            used.push(sim.step().unwrap().sets[0].len());
        }
        // positions cross below 1 after the first step, seen three steps later
        assert_eq!(used, vec![0, 0, 0, 0, 2]);
    }

    #[test]
    fn nan_is_an_integration_fault() {
        let mut p = ModelParams::di(2, 1, 1.0, MPolicy::Constant, 1e308);
        p.kappa = 1e308;
        let s = state(&[0.0, 0.5], &[-1e308, 1e308], 1);
        let mut sim = Simulation::new(p, Domain::Unbounded, 1.0, s).unwrap();
        assert!(matches!(sim.step(), Err(Error::IntegrationFault { step: 0, .. })));
    }

    #[test]
    fn identical_runs_are_identical() {
        let p = ModelParams::di(6, 2, 1.5, MPolicy::PerNeighbor, 1.0);
        let x = vec![0.0, 0.0, 0.5, 0.2, 1.0, 0.1, 3.0, 3.0, 3.4, 3.1, 2.8, 3.3];
        let v = vec![0.1, 0.0, -0.2, 0.3, 0.0, 0.5, 0.4, -0.1, 0.0, 0.0, -0.3, 0.2];
        let run = || {
            let s = state(&x, &v, 2);
            simulate(Simulation::new(p.clone(), Domain::periodic(10.0), 0.01, s).unwrap(), 300, 7, Some(1)).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn search_modes_give_identical_runs() {
        let p = ModelParams::di(6, 2, 1.5, MPolicy::PerNeighbor, 1.0);
        let x = vec![0.2, 0.1, 9.7, 0.2, 0.1, 9.5, 3.0, 3.0, 3.4, 3.1, 2.8, 3.3];
        let v = vec![0.1, 0.0, -0.2, 0.3, 0.0, 0.5, 0.4, -0.1, 0.0, 0.0, -0.3, 0.2];
        let run = |search| {
            let s = state(&x, &v, 2);
            let sim = Simulation::new(p.clone(), Domain::periodic(10.0), 0.01, s).unwrap().with_search(search);
            simulate(sim, 200, 50, None).unwrap()
        };
        let brute = run(NeighborSearch::BruteForce);
        assert_eq!(brute, run(NeighborSearch::Grid));
        assert_eq!(brute, run(NeighborSearch::Ghost));
    }
}
