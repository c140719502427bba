//! Parallel parameter sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::Result;
use crate::integrate::{run_simulation, TrajectoryRecord};
use crate::scenarios::{classify_three_body, predict_three_body, Generator, Regime, ScenarioSpec};
use crate::seed::sub_seed;

/// What one run produced, reduced to a summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scenario: String,
    pub model: String,
    /// Observed regime (three-body runs only).
    pub regime: Option<Regime>,
    /// Regime from the reduced-system estimates (three-body runs only).
    pub predicted: Option<Regime>,
    pub final_momentum: Vec<f64>,
    /// Smallest sampled x-momentum.
    pub min_mom0: f64,
    pub initial_clusters: usize,
    pub max_clusters: usize,
    pub final_clusters: usize,
}

pub fn summarize(spec: &ScenarioSpec, record: &TrajectoryRecord) -> Result<RunSummary> {
    let (regime, predicted) = match &spec.generator {
        Generator::ThreeBody(tb) => (
            Some(classify_three_body(spec, record)?.regime),
            Some(predict_three_body(tb, spec.params.delta.unwrap_or(f64::NAN))?.regime),
        ),
        _ => (None, None),
    };
    let counts = record.samples.iter().map(|s| s.diagnostics.n_clusters);
    let last = record.last();
    Ok(RunSummary {
        scenario: spec.generator.name().to_string(),
        model: spec.params.model.name().to_string(),
        regime,
        predicted,
        final_momentum: last.map(|s| s.diagnostics.momentum.clone()).unwrap_or_default(),
        min_mom0: record
            .samples
            .iter()
            .map(|s| s.diagnostics.momentum[0])
            .fold(f64::INFINITY, f64::min),
        initial_clusters: record.samples.first().map_or(0, |s| s.diagnostics.n_clusters),
        max_clusters: counts.clone().max().unwrap_or(0),
        final_clusters: last.map_or(0, |s| s.diagnostics.n_clusters),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    /// The swept keys and their values at this grid point.
    pub overrides: Vec<(String, String)>,
    pub seed: u64,
    /// A failed run keeps its message; it does not abort the sweep.
    pub outcome: std::result::Result<RunSummary, String>,
}

impl SweepRow {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.overrides.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Runs every grid point of `cfg` in parallel.
///
/// Unless `seed` is itself swept, point `k` runs with `sub_seed(master, k)`, where
/// `master` is the config's seed (0 if absent). Rows come back in grid order.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let grid = cfg.grid()?;
    let master = cfg.seed.unwrap_or(0);
    let seed_swept = cfg.sweep.as_ref().is_some_and(|s| s.contains_key("seed"));
    let rows = grid
        .into_par_iter()
        .enumerate()
        .map(|(index, mut point)| {
            let overrides = cfg.sweep_overrides(&point);
            if !seed_swept {
                point.seed = Some(sub_seed(master, index as u64));
            }
            let seed = point.seed.unwrap_or(0);
            let outcome = point
                .to_spec()
                .and_then(|spec| run_simulation(&spec).and_then(|rec| summarize(&spec, &rec)))
                .map_err(|e| e.to_string());
            SweepRow {
                index,
                overrides,
                seed,
                outcome,
            }
        })
        .collect();
    Ok(rows)
}

fn opt_regime(r: Option<Regime>) -> &'static str {
    r.map_or("", |r| r.name())
}

/// Summary CSV: one row per grid point.
pub fn summary_csv(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let keys: Vec<String> = cfg.sweep.as_ref().map(|s| s.keys().cloned().collect()).unwrap_or_default();
    let mut out = String::from("run");
    for k in &keys {
        out.push(',');
        out.push_str(k);
    }
    out.push_str(",seed,scenario,model,regime,predicted,final_mom0,final_mom1,min_mom0,initial_clusters,max_clusters,final_clusters,error\n");
    for row in rows {
        let _ = write!(out, "{}", row.index);
        for k in &keys {
            let _ = write!(out, ",{}", row.get(k).unwrap_or(""));
        }
        let _ = write!(out, ",{}", row.seed);
        match &row.outcome {
            Ok(s) => {
                let m = |k: usize| s.final_momentum.get(k).map(|c| c.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    ",{},{},{},{},{},{},{},{},{},{},",
                    s.scenario,
                    s.model,
                    opt_regime(s.regime),
                    opt_regime(s.predicted),
                    m(0),
                    m(1),
                    s.min_mom0,
                    s.initial_clusters,
                    s.max_clusters,
                    s.final_clusters
                );
            }
            Err(e) => {
                let _ = writeln!(out, ",,,,,,,,,,,\"{}\"", e.replace('"', "\"\""));
            }
        }
    }
    out
}

/// Grid points, paired on every swept key except `shape`, where shape A's
/// x-momentum ends negative while shape B's never drops below zero.
pub fn momentum_flip_pairs(rows: &[SweepRow]) -> Vec<(usize, usize)> {
    let others = |r: &SweepRow| -> Vec<(String, String)> {
        r.overrides.iter().filter(|(k, _)| k != "shape").cloned().collect()
    };
    let flips = |r: &SweepRow| matches!(&r.outcome, Ok(s) if s.final_momentum[0] < 0.0);
    let holds = |r: &SweepRow| matches!(&r.outcome, Ok(s) if s.min_mom0 >= 0.0);
    let mut pairs = Vec::new();
    for a in rows.iter().filter(|r| r.get("shape").is_some_and(|s| s.contains('A'))) {
        for b in rows.iter().filter(|r| r.get("shape").is_some_and(|s| s.contains('B'))) {
            if others(a) == others(b) && flips(a) && holds(b) {
                pairs.push((a.index, b.index));
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn empty_grid_gives_header_only() {
        let cfg = parse_config("m = 3\ndelta = 2.0\n[sweep]\n").unwrap();
        let rows = run_sweep(&cfg).unwrap();
        assert!(rows.is_empty());
        assert_eq!(summary_csv(&cfg, &rows).lines().count(), 1);
    }

    #[test]
    fn velocity_sweep_and_failures_per_row() {
        let text = r#"
scenario = "three_body"
n = 30
beta = 1.0
v_c = 1.0
t_end = 3.0

[sweep]
v_c = [0.03, 1.0]
dt = [0.01, -1.0]
"#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        // keys in sorted order, last varies fastest: (dt, v_c)
        assert_eq!(rows[1].get("dt"), Some("0.01"));
        assert_eq!(rows[1].get("v_c"), Some("1.0"));
        assert!(rows[0].outcome.is_ok());
        assert!(rows[2].outcome.as_ref().unwrap_err().contains("dt"));
        assert!(rows[3].outcome.is_err());
        let fast = rows[1].outcome.as_ref().unwrap();
        assert_eq!(fast.regime, Some(Regime::Stability));
        assert_eq!(fast.predicted, Some(Regime::Stability));
        let csv = summary_csv(&cfg, &rows);
        assert!(csv.starts_with("run,dt,v_c,seed,"));
        let widths: Vec<usize> = csv.lines().map(|l| l.split(',').count()).collect();
        assert!(widths.iter().all(|&w| w == widths[0]), "{csv}");
    }

    #[test]
    fn deterministic_and_order_free() {
        let text = "m = 3\ndelta = 2.0\nn = 12\nt_end = 0.5\nseed = 5\n[sweep]\nkappa = [0.5, 1.0, 2.0]\n";
        let cfg = parse_config(text).unwrap();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        let seeds: Vec<u64> = a.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, (0..3).map(|k| sub_seed(5, k)).collect::<Vec<_>>());
    }
}
