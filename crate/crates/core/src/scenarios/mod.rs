//! Initial conditions of the reference experiments and the three-body regime
//! classifier.

mod init;
mod regime;

pub use init::{
    init_chain, init_group_vs_individual, init_random_clusters, init_three_body, ChainSetup, GroupSetup,
    Motion, Shape, ThreeBody, CHAIN_LENGTH, GROUP_SIZE,
};
pub use regime::{classify_three_body, momentum_estimate, predict_three_body, Regime, RegimeResult};

use crate::dynamics::{EnsembleState, MPolicy, Model, ModelParams};
use crate::error::{Error, Result};
use crate::integrate::{Domain, Simulation};

/// How the initial state is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Uniform positions in `[margin, side - margin]^2`, randomized velocities.
    RandomClusters { side: f64, margin: f64 },
    GroupVsIndividual(GroupSetup),
    Chain(ChainSetup),
    ThreeBody(ThreeBody),
    /// A state supplied by the caller.
    Explicit(EnsembleState),
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::RandomClusters { .. } => "random_clusters",
            Generator::GroupVsIndividual(_) => "group_vs_individual",
            Generator::Chain(_) => "chain",
            Generator::ThreeBody(_) => "three_body",
            Generator::Explicit(_) => "explicit",
        }
    }
}

/// Declarative description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub params: ModelParams,
    pub domain: Domain,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: u64,
    pub seed: u64,
    pub generator: Generator,
}

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_SAMPLE_EVERY: u64 = 10;

impl ScenarioSpec {
    /// Random cluster formation on the periodic square of side 25 (`N = 64`).
    pub fn random_clusters(params: ModelParams, seed: u64) -> Self {
        let side = 25.0;
        ScenarioSpec {
            name: format!("random_clusters_{}", params.model.name()),
            params,
            domain: Domain::periodic(side),
            dt: DEFAULT_DT,
            t_end: 150.0,
            sample_every: DEFAULT_SAMPLE_EVERY,
            seed,
            generator: Generator::RandomClusters { side, margin: 2.0 },
        }
    }

    /// The `a / b / c` configuration with `DI`, `m = 3` and `M = 1`.
    pub fn three_body(delta: f64, setup: ThreeBody) -> Self {
        let t_end = 10.0 * (setup.n + 1) as f64;
        ScenarioSpec {
            name: "three_body".into(),
            params: ModelParams::di(setup.n + 1, 3, delta, MPolicy::Constant, 1.0),
            domain: Domain::Unbounded,
            dt: DEFAULT_DT,
            t_end,
            sample_every: DEFAULT_SAMPLE_EVERY,
            seed: 0,
            generator: Generator::ThreeBody(setup),
        }
    }

    /// Group of 28 against one particle, with the given model's reference parameters.
    pub fn group_vs_individual(model: Model, setup: GroupSetup) -> Self {
        let n = GROUP_SIZE + 1;
        let params = match model {
            Model::Di => ModelParams::di(n, 3, 2.0, MPolicy::PerNeighbor, 1.0),
            Model::Cs => ModelParams::cs(n),
            Model::CsDelta => ModelParams::cs_delta(n, 2.0),
            Model::CsQ => ModelParams::cs_q(n, 3),
        };
        ScenarioSpec {
            name: format!("group_vs_individual_{}", model.name()),
            params,
            domain: Domain::Unbounded,
            dt: DEFAULT_DT,
            t_end: 30.0,
            sample_every: DEFAULT_SAMPLE_EVERY,
            seed: 0,
            generator: Generator::GroupVsIndividual(setup),
        }
    }

    /// Chain of 21 against one fast particle: `DI`, `m = 3`, `M = 1`, `delta` from the setup.
    pub fn chain(setup: ChainSetup) -> Self {
        ScenarioSpec {
            name: format!("chain_delta_{}", setup.delta),
            params: ModelParams::di(CHAIN_LENGTH + 1, 3, setup.delta, MPolicy::Constant, 1.0),
            domain: Domain::Unbounded,
            dt: DEFAULT_DT,
            t_end: 30.0,
            sample_every: DEFAULT_SAMPLE_EVERY,
            seed: 0,
            generator: Generator::Chain(setup),
        }
    }

    pub fn explicit(params: ModelParams, domain: Domain, state: EnsembleState) -> Self {
        ScenarioSpec {
            name: "explicit".into(),
            params,
            domain,
            dt: DEFAULT_DT,
            t_end: 0.0,
            sample_every: DEFAULT_SAMPLE_EVERY,
            seed: 0,
            generator: Generator::Explicit(state),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.domain.validate(self.params.interaction_range())?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", "time step must be positive"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", "must be finite and nonnegative"));
        }
        if self.sample_every == 0 {
            return Err(Error::config("sample_every", "must be at least 1"));
        }
        let expected = match &self.generator {
            Generator::RandomClusters { side, margin } => {
                if !(*side > 0.0) {
                    return Err(Error::config("L", "side length must be positive"));
                }
                if !(*margin >= 0.0 && 2.0 * margin < *side) {
                    return Err(Error::config("margin", "must satisfy 0 <= margin < L / 2"));
                }
                None
            }
            Generator::GroupVsIndividual(g) => {
                g.validate()?;
                Some(GROUP_SIZE + 1)
            }
            Generator::Chain(c) => {
                c.validate()?;
                if self.params.delta != Some(c.delta) {
                    return Err(Error::config("delta", "chain runs take delta from delta_variant"));
                }
                Some(CHAIN_LENGTH + 1)
            }
            Generator::ThreeBody(tb) => {
                let delta = match (self.params.model, self.params.delta) {
                    (Model::Di, Some(d)) => d,
                    _ => return Err(Error::config("model", "three_body runs need the di model")),
                };
                tb.validate(delta, self.params.m.unwrap_or(0))?;
                Some(tb.n + 1)
            }
            Generator::Explicit(s) => Some(s.len()),
        };
        if let Some(n) = expected {
            if self.params.n != n {
                return Err(Error::config(
                    "n",
                    format!("scenario {} has {n} particles, not {}", self.generator.name(), self.params.n),
                ));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Result<EnsembleState> {
        self.validate()?;
        match &self.generator {
            Generator::RandomClusters { side, margin } => {
                init_random_clusters(self.params.n, *side, self.seed, *margin)
            }
            Generator::GroupVsIndividual(g) => init_group_vs_individual(g),
            Generator::Chain(c) => init_chain(c),
            Generator::ThreeBody(tb) => init_three_body(tb, self.params.delta.unwrap_or(f64::NAN), self.seed),
            Generator::Explicit(s) => Ok(s.clone()),
        }
    }

    pub fn simulation(&self) -> Result<Simulation> {
        Simulation::new(self.params.clone(), self.domain, self.dt, self.initial_state()?)
    }
}
