//! TOML run configuration.
//!
//! A config is a flat table of keys plus an optional `[sweep]` table whose entries
//! override top-level keys over a Cartesian grid:
//!
//! ```toml
//! scenario = "three_body"
//! n = 30
//! beta = 1.0
//! v_c = 1.0
//!
//! [sweep]
//! beta = { start = 1.0, stop = 1.99, count = 100 }
//! v_c = [0.5, 1.0]
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{MPolicy, Model, ModelParams};
use crate::error::{Error, Result};
use crate::integrate::Domain;
use crate::scenarios::{ChainSetup, Generator, GroupSetup, Motion, ScenarioSpec, Shape, ThreeBody};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Particle count; the group size `N` for `three_body`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_policy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_spread: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_variant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_trajectory: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_diagnostics: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_clusters: Option<bool>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<BTreeMap<String, SweepAxis>>,
}

/// Values one key takes in a sweep: an explicit list or `count` evenly spaced
/// points from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepAxis {
    Values(Vec<toml::Value>),
    Range { start: f64, stop: f64, count: usize },
}

impl SweepAxis {
    pub fn values(&self) -> Vec<toml::Value> {
        match self {
            SweepAxis::Values(v) => v.clone(),
            SweepAxis::Range { start, stop, count } => match *count {
                0 => Vec::new(),
                1 => vec![toml::Value::Float(*start)],
                c => (0..c)
                    .map(|k| toml::Value::Float(start + (stop - start) * k as f64 / (c - 1) as f64))
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    RandomClusters,
    GroupVsIndividual,
    Chain,
    ThreeBody,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random_clusters" => Some(ScenarioKind::RandomClusters),
            "group_vs_individual" => Some(ScenarioKind::GroupVsIndividual),
            "chain" => Some(ScenarioKind::Chain),
            "three_body" => Some(ScenarioKind::ThreeBody),
            _ => None,
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

fn parse_error(text: &str, e: toml::de::Error) -> Error {
    let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
    Error::Parse {
        line,
        column,
        message: e.message().trim().to_string(),
    }
}

/// Parses and fully validates a config (including every point of its sweep grid).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    cfg.to_spec()?;
    for point in cfg.grid()? {
        point.to_spec()?;
    }
    Ok(cfg)
}

pub fn serialize_config(cfg: &RunConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Internal(format!("cannot serialize config: {e}")))
}

fn require<T>(value: Option<T>, key: &str, scenario: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(key, format!("required for scenario {scenario}")))
}

impl RunConfig {
    pub fn scenario_kind(&self) -> Result<ScenarioKind> {
        match &self.scenario {
            None => Ok(ScenarioKind::RandomClusters),
            Some(s) => ScenarioKind::parse(s).ok_or_else(|| {
                Error::config(
                    "scenario",
                    format!("unknown scenario `{s}` (random_clusters|group_vs_individual|chain|three_body)"),
                )
            }),
        }
    }

    fn model_kind(&self) -> Result<Option<Model>> {
        self.model
            .as_deref()
            .map(|s| Model::parse(s).ok_or_else(|| Error::config("model", format!("unknown model `{s}` (di|cs|cs_delta|cs_q)"))))
            .transpose()
    }

    fn unused_keys(&self, kind: ScenarioKind) -> Vec<&'static str> {
        let set = |v: bool, k: &'static str| if v { Some(k) } else { None };
        let tb = [
            set(self.beta.is_some(), "beta"),
            set(self.gamma.is_some(), "gamma"),
            set(self.v_c.is_some(), "v_c"),
            set(self.a_spread.is_some(), "a_spread"),
            set(self.motion.is_some(), "motion"),
        ];
        let group = [set(self.shape.is_some(), "shape"), set(self.offset.is_some(), "offset")];
        let chain = [set(self.delta_variant.is_some(), "delta_variant")];
        let lattice = [set(self.spacing.is_some(), "spacing"), set(self.gap.is_some(), "gap")];
        let random = [set(self.margin.is_some(), "margin")];
        let mut out: Vec<&'static str> = Vec::new();
        if kind != ScenarioKind::ThreeBody {
            out.extend(tb.iter().flatten());
        }
        if kind != ScenarioKind::GroupVsIndividual {
            out.extend(group.iter().flatten());
        }
        if kind != ScenarioKind::Chain {
            out.extend(chain.iter().flatten());
        }
        if !matches!(kind, ScenarioKind::GroupVsIndividual | ScenarioKind::Chain) {
            out.extend(lattice.iter().flatten());
        }
        if kind != ScenarioKind::RandomClusters {
            out.extend(random.iter().flatten());
        }
        out
    }

    /// Builds the validated scenario this config describes.
    pub fn to_spec(&self) -> Result<ScenarioSpec> {
        let kind = self.scenario_kind()?;
        if let Some(key) = self.unused_keys(kind).first() {
            return Err(Error::config(*key, format!("not used by scenario {}", self.scenario.as_deref().unwrap_or("random_clusters"))));
        }
        let model = self.model_kind()?;
        let policy = self
            .m_policy
            .as_deref()
            .map(|s| MPolicy::parse(s).ok_or_else(|| Error::config("m_policy", format!("unknown policy `{s}` (flat|per_neighbor|constant)"))))
            .transpose()?;

        let mut spec = match kind {
            ScenarioKind::RandomClusters => {
                let name = "random_clusters";
                let n = self.n.unwrap_or(64);
                let params = match model.unwrap_or(Model::Di) {
                    Model::Di => ModelParams::di(
                        n,
                        require(self.m, "m", name)?,
                        require(self.delta, "delta", name)?,
                        MPolicy::PerNeighbor,
                        1.0,
                    ),
                    Model::Cs => ModelParams::cs(n),
                    Model::CsDelta => ModelParams::cs_delta(n, require(self.delta, "delta", name)?),
                    Model::CsQ => ModelParams::cs_q(n, require(self.q, "q", name)?),
                };
                let mut spec = ScenarioSpec::random_clusters(params, 0);
                let side = self.side.unwrap_or(25.0);
                let margin = self.margin.unwrap_or(2.0);
                spec.generator = Generator::RandomClusters { side, margin };
                spec.domain = Domain::periodic(side);
                spec
            }
            ScenarioKind::ThreeBody => {
                let name = "three_body";
                if model.is_some_and(|m| m != Model::Di) {
                    return Err(Error::config("model", "three_body runs need the di model"));
                }
                let delta = self.delta.unwrap_or(2.0);
                let group = self.n.unwrap_or(30);
                let beta = require(self.beta, "beta", name)?;
                let v_c = require(self.v_c, "v_c", name)?;
                let mut setup = ThreeBody::new(group, beta, self.gamma.unwrap_or(delta), v_c, delta);
                if let Some(a) = self.a_spread {
                    setup.a_spread = a;
                }
                if let Some(s) = &self.motion {
                    setup.motion = Motion::parse(s)
                        .ok_or_else(|| Error::config("motion", format!("unknown motion `{s}` (collinear|transverse)")))?;
                }
                ScenarioSpec::three_body(delta, setup)
            }
            ScenarioKind::GroupVsIndividual => {
                let shape_name = require(self.shape.as_deref(), "shape", "group_vs_individual")?;
                let shape = Shape::parse(shape_name)
                    .ok_or_else(|| Error::config("shape", format!("unknown shape `{shape_name}` (A|B)")))?;
                let mut setup = GroupSetup::new(shape);
                setup.spacing = self.spacing.unwrap_or(setup.spacing);
                setup.gap = self.gap.unwrap_or(setup.gap);
                setup.offset = self.offset.unwrap_or(setup.offset);
                let mut spec = ScenarioSpec::group_vs_individual(model.unwrap_or(Model::Di), setup);
                if self.delta.is_some() {
                    spec.params.delta = self.delta;
                }
                if let Some(q) = self.q {
                    spec.params.q = Some(q);
                }
                spec
            }
            ScenarioKind::Chain => {
                if model.is_some_and(|m| m != Model::Di) {
                    return Err(Error::config("model", "chain runs need the di model"));
                }
                let dv = require(self.delta_variant, "delta_variant", "chain")?;
                if self.delta.is_some_and(|d| d != dv) {
                    return Err(Error::config("delta", "chain runs take delta from delta_variant"));
                }
                let mut setup = ChainSetup::new(dv);
                setup.spacing = self.spacing.unwrap_or(setup.spacing);
                setup.gap = self.gap.unwrap_or(setup.gap);
                ScenarioSpec::chain(setup)
            }
        };

        if kind != ScenarioKind::RandomClusters {
            if let (Some(n), ScenarioKind::GroupVsIndividual | ScenarioKind::Chain) = (self.n, kind) {
                if n != spec.params.n {
                    return Err(Error::config("n", format!("scenario has {} particles, not {n}", spec.params.n)));
                }
            }
        }
        if let Some(m) = self.m {
            if spec.params.model != Model::Di {
                return Err(Error::config("m", "only used by model di"));
            }
            spec.params.m = Some(m);
        }
        if self.q.is_some() && spec.params.model != Model::CsQ {
            return Err(Error::config("q", "only used by model cs_q"));
        }
        if self.delta.is_some() && spec.params.interaction_range().is_none() {
            return Err(Error::config("delta", format!("not used by model {}", spec.params.model.name())));
        }
        if let Some(p) = policy {
            spec.params.m_policy = p;
        }
        if let Some(k) = self.kappa {
            spec.params.kappa = k;
        }
        if let Some(a) = self.alpha {
            spec.params.alpha = a;
        }
        if let Some(h) = self.h_steps {
            spec.params.h_steps = h;
        }
        if let Some(dt) = self.dt {
            spec.dt = dt;
        }
        if let Some(t) = self.t_end {
            spec.t_end = t;
        }
        if let Some(s) = self.sample_every {
            spec.sample_every = s;
        }
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        match self.domain.as_deref() {
            None => {
                if let (Some(side), false) = (self.side, kind == ScenarioKind::RandomClusters) {
                    spec.domain = Domain::periodic(side);
                }
            }
            Some("unbounded") => {
                if self.side.is_some() && kind != ScenarioKind::RandomClusters {
                    return Err(Error::config("L", "only used by a periodic domain"));
                }
                spec.domain = Domain::Unbounded;
            }
            Some("periodic") => {
                let side = self
                    .side
                    .or(spec.domain.side())
                    .ok_or_else(|| Error::config("L", "required for a periodic domain"))?;
                spec.domain = Domain::periodic(side);
            }
            Some(other) => {
                return Err(Error::config("domain", format!("unknown domain `{other}` (unbounded|periodic)")))
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn output_dir(&self) -> &str {
        self.output_dir.as_deref().unwrap_or("out")
    }

    pub fn record_trajectory(&self) -> bool {
        self.record_trajectory.unwrap_or(true)
    }

    pub fn record_diagnostics(&self) -> bool {
        self.record_diagnostics.unwrap_or(true)
    }

    pub fn record_clusters(&self) -> bool {
        self.record_clusters.unwrap_or(true)
    }

    /// The sweep's grid points in row-major order (last key varies fastest), each a
    /// copy of this config with the overrides applied and no `[sweep]` table.
    /// Without a `[sweep]` table the grid is empty.
    pub fn grid(&self) -> Result<Vec<RunConfig>> {
        let Some(axes) = &self.sweep else {
            return Ok(Vec::new());
        };
        let mut base = self.clone();
        base.sweep = None;
        if axes.is_empty() {
            return Ok(Vec::new());
        }
        let base_table = toml::Table::try_from(&base).map_err(|e| Error::Internal(e.to_string()))?;
        let axes: Vec<(&String, Vec<toml::Value>)> = axes.iter().map(|(k, a)| (k, a.values())).collect();
        if axes.iter().any(|(_, v)| v.is_empty()) {
            return Ok(Vec::new());
        }
        let total: usize = axes.iter().map(|(_, v)| v.len()).product();
        let mut out = Vec::with_capacity(total);
        for mut flat in 0..total {
            let mut table = base_table.clone();
            let mut idx = vec![0; axes.len()];
            for (slot, (_, values)) in idx.iter_mut().zip(&axes).rev() {
                *slot = flat % values.len();
                flat /= values.len();
            }
            for ((key, values), &i) in axes.iter().zip(&idx) {
                if key.as_str() == "sweep" {
                    return Err(Error::config("sweep", "sweeps cannot be nested"));
                }
                table.insert(key.to_string(), values[i].clone());
            }
            let point: RunConfig = table.try_into().map_err(|e: toml::de::Error| {
                Error::config("sweep", e.message().trim().to_string())
            })?;
            out.push(point);
        }
        Ok(out)
    }

    /// `key=value` pairs of the sweep overrides at a grid point, in key order.
    pub fn sweep_overrides(&self, point: &RunConfig) -> Vec<(String, String)> {
        let Some(axes) = &self.sweep else {
            return Vec::new();
        };
        let table = toml::Table::try_from(point).unwrap_or_default();
        axes.keys()
            .map(|k| {
                let shown = match table.get(k) {
                    Some(toml::Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                    None => String::new(),
                };
                (k.clone(), shown)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE_DI: &str = r#"
model = "di"
n = 64
m = 3
delta = 2.0
m_policy = "per_neighbor"
kappa = 1.0
"#;

    #[test]
    fn reference_di_block_is_valid() {
        let cfg = parse_config(REFERENCE_DI).unwrap();
        let spec = cfg.to_spec().unwrap();
        assert_eq!(spec.params, ModelParams::di_reference());
        assert_eq!(spec.domain, Domain::periodic(25.0));
        assert_eq!(spec.t_end, 150.0);
    }

    #[test]
    fn zero_delta_rejected() {
        let err = parse_config(&REFERENCE_DI.replace("delta = 2.0", "delta = 0.0")).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "delta"), "{err}");
    }

    #[test]
    fn cs_q_without_q_rejected() {
        let err = parse_config("model = \"cs_q\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "q"), "{err}");
        assert!(parse_config("model = \"cs_q\"\nq = 3\n").is_ok());
    }

    #[test]
    fn unknown_key_reports_location() {
        let err = parse_config("model = \"di\"\nm = 3\nbogus = 1\n").unwrap_err();
        match err {
            Error::Parse { line, column, message } => {
                assert_eq!((line, column), (3, 1));
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn syntax_error_reports_location() {
        let err = parse_config("model = \"di\"\nm = = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn misplaced_keys_rejected() {
        let err = parse_config("scenario = \"chain\"\ndelta_variant = 2.0\nbeta = 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "beta"), "{err}");
        let err = parse_config("model = \"cs\"\nm = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "m"), "{err}");
    }

    #[test]
    fn three_body_n_is_group_size() {
        let cfg = parse_config("scenario = \"three_body\"\nn = 30\nbeta = 1.0\nv_c = 1.0\n").unwrap();
        let spec = cfg.to_spec().unwrap();
        assert_eq!(spec.params.n, 31);
        match spec.generator {
            Generator::ThreeBody(tb) => assert_eq!((tb.n, tb.gamma), (30, 2.0)),
            _ => unreachable!(),
        }
        let err = parse_config("scenario = \"three_body\"\nbeta = 2.5\nv_c = 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "beta"), "{err}");
    }

    #[test]
    fn chain_and_group_presets() {
        let spec = parse_config("scenario = \"chain\"\ndelta_variant = 4.0\n").unwrap().to_spec().unwrap();
        assert_eq!(spec.params.delta, Some(4.0));
        assert_eq!(spec.params.n, 22);
        let spec = parse_config("scenario = \"group_vs_individual\"\nmodel = \"cs\"\nshape = \"B\"\n")
            .unwrap()
            .to_spec()
            .unwrap();
        assert_eq!(spec.params.model, Model::Cs);
        assert!(parse_config("scenario = \"group_vs_individual\"\nshape = \"C\"\n").is_err());
    }

    #[test]
    fn sweep_grid_expansion() {
        let text = r#"
scenario = "three_body"
beta = 1.0
v_c = 1.0

[sweep]
beta = { start = 1.0, stop = 1.5, count = 3 }
v_c = [0.5, 1.0]
"#;
        let cfg = parse_config(text).unwrap();
        let grid = cfg.grid().unwrap();
        let pts: Vec<(f64, f64)> = grid.iter().map(|c| (c.beta.unwrap(), c.v_c.unwrap())).collect();
        assert_eq!(pts, vec![(1.0, 0.5), (1.0, 1.0), (1.25, 0.5), (1.25, 1.0), (1.5, 0.5), (1.5, 1.0)]);
        assert!(grid.iter().all(|c| c.sweep.is_none()));
        let ov = cfg.sweep_overrides(&grid[3]);
        assert_eq!(ov, vec![("beta".into(), "1.25".into()), ("v_c".into(), "1.0".into())]);
        let cfg = parse_config("scenario = \"group_vs_individual\"\nshape = \"A\"\n[sweep]\nshape = [\"A\", \"B\"]\n").unwrap();
        let grid = cfg.grid().unwrap();
        assert_eq!(cfg.sweep_overrides(&grid[1]), vec![("shape".into(), "B".into())]);
    }

    #[test]
    fn empty_sweep_grid() {
        let cfg = parse_config("m = 3\ndelta = 2.0\n[sweep]\n").unwrap();
        assert!(cfg.grid().unwrap().is_empty());
        let cfg = parse_config("m = 3\ndelta = 2.0\n[sweep]\nseed = []\n").unwrap();
        assert!(cfg.grid().unwrap().is_empty());
    }

    #[test]
    fn invalid_sweep_point_rejected() {
        let text = "scenario = \"three_body\"\nbeta = 1.0\nv_c = 1.0\n[sweep]\nbeta = [1.0, 3.0]\n";
        assert!(matches!(parse_config(text), Err(Error::Config { .. })));
    }

    #[test]
    fn round_trip_examples() {
        for text in [
            REFERENCE_DI,
            "scenario = \"three_body\"\nbeta = 1.95\nv_c = 1.0\nmotion = \"transverse\"\n[sweep]\nbeta = { start = 1.0, stop = 1.99, count = 10 }\n",
            "scenario = \"group_vs_individual\"\nshape = \"A\"\nspacing = 0.95\noutput_dir = \"x\"\nrecord_clusters = false\n",
        ] {
            let cfg = parse_config(text).unwrap();
            let back = parse_config(&serialize_config(&cfg).unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_random(
            n in proptest::option::of(1usize..200),
            delta in proptest::option::of(0.1f64..10.0),
            kappa in proptest::option::of(0.01f64..10.0),
            dt in proptest::option::of(1e-4f64..0.1),
            seed in proptest::option::of(0..=i64::MAX as u64),
            policy in proptest::option::of(prop_oneof![Just("flat"), Just("per_neighbor"), Just("constant")]),
            traj in proptest::option::of(any::<bool>()),
        ) {
            let cfg = RunConfig {
                model: Some("di".into()),
                m: Some(3),
                delta: Some(delta.unwrap_or(2.0)),
                n,
                kappa,
                dt,
                seed,
                m_policy: policy.map(String::from),
                record_trajectory: traj,
                ..Default::default()
            };
            let text = serialize_config(&cfg).unwrap();
            let back: RunConfig = toml::from_str(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
