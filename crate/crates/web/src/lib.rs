//! Browser bindings: a live random-cluster run, the three-body regime predictor,
//! and the reduced-system velocity curves.

use wasm_bindgen::prelude::*;

use diflock::analytic::{detach_times, eval_v_b, eval_v_b_minus_v_a, reduced_solution};
use diflock::dynamics::{Model, ModelParams};
use diflock::integrate::Simulation;
use diflock::scenarios::{momentum_estimate, predict_three_body, ScenarioSpec, ThreeBody};

/// Random-cluster run on the periodic square, stepped from JavaScript.
#[wasm_bindgen]
pub struct LiveRun {
    sim: Simulation,
    side: f64,
}

impl LiveRun {
    pub fn create(model: &str, n: usize, seed: u64) -> Result<LiveRun, String> {
        let params = match Model::parse(model).ok_or_else(|| format!("unknown model `{model}`"))? {
            Model::Di => ModelParams { n, ..ModelParams::di_reference() },
            Model::Cs => ModelParams::cs(n),
            Model::CsDelta => ModelParams::cs_delta(n, 2.0),
            Model::CsQ => ModelParams::cs_q(n, 3.min(n.saturating_sub(1)).max(1)),
        };
        let spec = ScenarioSpec::random_clusters(params, seed);
        let side = spec.domain.side().unwrap_or(25.0);
        let sim = spec.simulation().map_err(|e| e.to_string())?;
        Ok(LiveRun { sim, side })
    }

    pub fn advance(&mut self, steps: u32) -> Result<(), String> {
        for _ in 0..steps {
            self.sim.step().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn cluster_labels(&self) -> Result<Vec<u32>, String> {
        let labels = self.sim.current_labels().map_err(|e| e.to_string())?;
        Ok(labels.labels.iter().map(|&l| l as u32).collect())
    }
}

#[wasm_bindgen]
impl LiveRun {
    #[wasm_bindgen(constructor)]
    pub fn new(model: &str, n: usize, seed: u32) -> Result<LiveRun, JsError> {
        Self::create(model, n, seed.into()).map_err(|e| JsError::new(&e))
    }

    pub fn step(&mut self, steps: u32) -> Result<(), JsError> {
        self.advance(steps).map_err(|e| JsError::new(&e))
    }

    /// Flat `[x0, y0, x1, y1, ...]`.
    pub fn positions(&self) -> Vec<f64> {
        self.sim.state().positions_flat().to_vec()
    }

    pub fn velocities(&self) -> Vec<f64> {
        self.sim.state().velocities_flat().to_vec()
    }

    /// Cluster label per particle (smallest member index of its cluster).
    pub fn labels(&self) -> Result<Vec<u32>, JsError> {
        self.cluster_labels().map_err(|e| JsError::new(&e))
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn time(&self) -> f64 {
        self.sim.state().t
    }

    pub fn velocity_diameter(&self) -> f64 {
        diflock::dynamics::velocity_diameter(self.sim.state())
    }
}

/// Predicted regime and time scales, as a JSON object.
pub fn prediction_json(n: usize, beta: f64, gamma: f64, v_c: f64, delta: f64) -> Result<String, String> {
    let setup = ThreeBody::new(n, beta, gamma, v_c, delta);
    setup.validate(delta, 3).map_err(|e| e.to_string())?;
    let pred = predict_three_body(&setup, delta).map_err(|e| e.to_string())?;
    let times = detach_times(&reduced_solution(n, v_c).map_err(|e| e.to_string())?, beta, gamma, delta);
    let num = |x: Option<f64>| match x {
        Some(v) if v.is_finite() => v.to_string(),
        _ => "null".to_string(),
    };
    Ok(format!(
        "{{\"regime\":\"{}\",\"t_c\":{},\"t_b\":{},\"exact_t_c\":{},\"exact_t_b\":{},\"momentum_gain\":{}}}",
        pred.regime.name(),
        num(Some(times.approx_t_c)),
        num(Some(times.approx_t_b)),
        num(times.exact_t_c),
        num(times.exact_t_b),
        num(Some(momentum_estimate(pred.regime, delta, n, v_c)))
    ))
}

#[wasm_bindgen]
pub fn predict(n: usize, beta: f64, gamma: f64, v_c: f64, delta: f64) -> Result<String, JsError> {
    prediction_json(n, beta, gamma, v_c, delta).map_err(|e| JsError::new(&e))
}

/// `samples` rows of `(t, v_b, v_b - v_a)` over `[0, t_end]`, flattened.
pub fn curve(n: usize, v_c: f64, t_end: f64, samples: usize) -> Result<Vec<f64>, String> {
    if samples < 2 || !(t_end > 0.0) {
        return Err("need at least two samples over a positive horizon".into());
    }
    let sol = reduced_solution(n, v_c).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * samples);
    for k in 0..samples {
        let t = t_end * k as f64 / (samples - 1) as f64;
        out.extend_from_slice(&[t, eval_v_b(&sol, t), eval_v_b_minus_v_a(&sol, t)]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn v_b_curve(n: usize, v_c: f64, t_end: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    curve(n, v_c, t_end, samples).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn live_run_steps() {
        let mut run = LiveRun::create("di", 32, 3).unwrap();
        let before = run.positions();
        run.advance(5).unwrap();
        assert_eq!(run.positions().len(), 64);
        assert_ne!(before, run.positions());
        assert!((run.time() - 0.05).abs() < 1e-12);
        assert_eq!(run.cluster_labels().unwrap().len(), 32);
        assert!(LiveRun::create("boids", 32, 3).is_err());
        assert!(LiveRun::create("cs_q", 8, 1).is_ok());
    }

    #[test]
    fn prediction_examples() {
        let p = prediction_json(30, 1.0, 2.0, 1.0, 2.0).unwrap();
        assert!(p.starts_with("{\"regime\":\"stability\",\"t_c\":1,\"t_b\":30,"), "{p}");
        let p = prediction_json(30, 1.95, 2.0, 1.0, 2.0).unwrap();
        assert!(p.contains("\"regime\":\"breaking\""), "{p}");
        assert!(prediction_json(30, 2.5, 2.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn curve_endpoints() {
        let c = curve(10, 1.0, 50.0, 11).unwrap();
        assert_eq!(c.len(), 33);
        assert_eq!(&c[..3], &[0.0, 0.0, 0.0]);
        assert!((c[30] - 50.0).abs() < 1e-12);
        assert!(c[31] > 0.9);
        assert!(curve(10, 1.0, 0.0, 11).is_err());
    }
}
