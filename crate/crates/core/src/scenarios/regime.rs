use super::{Generator, ScenarioSpec, ThreeBody};
use crate::analytic::{detach_times, reduced_solution};
use crate::error::{Error, Result};
use crate::integrate::TrajectoryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `c` leaves, the group stays intact.
    Stability,
    /// `b` is torn out of the group.
    Breaking,
    /// `c` stays attached and diverts the group.
    Sticking,
    Undetermined,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Stability => "stability",
            Regime::Breaking => "breaking",
            Regime::Sticking => "sticking",
            Regime::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeResult {
    pub regime: Regime,
    /// First time `c` is not a neighbor of `b`.
    pub t_c_detach: Option<f64>,
    /// First time `b` is not a neighbor of any `a`.
    pub t_b_detach: Option<f64>,
    pub final_momentum: Vec<f64>,
}

/// Velocity gap (relative to `|v_c|`) below which a run without detachment counts as sticking.
pub const STICKING_TOLERANCE: f64 = 0.1;

/// Reads the regime off the sampled neighbor tables.
pub fn classify_three_body(spec: &ScenarioSpec, record: &TrajectoryRecord) -> Result<RegimeResult> {
    let setup = match &spec.generator {
        Generator::ThreeBody(tb) => tb,
        other => {
            return Err(Error::Input(format!(
                "three-body classification needs a three_body scenario, got {}",
                other.name()
            )))
        }
    };
    let last = record
        .last()
        .ok_or_else(|| Error::Input("empty trajectory record".into()))?;
    let (b, c) = (setup.b(), setup.c());
    let t_c_detach = record.samples.iter().find(|s| !s.table.contains(b, c)).map(|s| s.t);
    let t_b_detach = record
        .samples
        .iter()
        .find(|s| (0..b).all(|a| !s.table.contains(a, b)))
        .map(|s| s.t);

    let regime = match (t_c_detach, t_b_detach) {
        (tc, Some(tb)) if tc.map_or(true, |tc| tb <= tc) => Regime::Breaking,
        (Some(_), _) => Regime::Stability,
        (None, None) => {
            let e = setup.motion.unit();
            let target = [setup.v_c * e[0], setup.v_c * e[1]];
            let gap = (0..last.state.len())
                .map(|i| {
                    let v = last.state.velocity(i);
                    ((v[0] - target[0]).powi(2) + (v[1] - target[1]).powi(2)).sqrt()
                })
                .fold(0.0, f64::max);
            if gap <= STICKING_TOLERANCE * setup.v_c.abs() {
                Regime::Sticking
            } else {
                Regime::Undetermined
            }
        }
        (None, Some(_)) => unreachable!("covered by the breaking arm"),
    };
    Ok(RegimeResult {
        regime,
        t_c_detach,
        t_b_detach,
        final_momentum: last.diagnostics.momentum.clone(),
    })
}

/// Regime predicted by the reduced-system estimates.
///
/// Sticking when `|gamma - beta| + N |v_c| <= delta` and `|beta| + |v_c| <= delta`;
/// otherwise breaking when `T_b < T_c` and `T_b |v_c| (1/N + 1) < delta`, with
/// `T_c = (delta - (gamma - beta)) / |v_c|` and `T_b = N (delta - beta) / |v_c|`;
/// stability in every remaining case.
pub fn predict_three_body(setup: &ThreeBody, delta: f64) -> Result<RegimeResult> {
    let n = setup.n as f64;
    let speed = setup.v_c.abs();
    let (beta, gamma) = (setup.beta, setup.gamma);
    let sol = reduced_solution(setup.n, setup.v_c)?;
    let times = detach_times(&sol, beta, gamma, delta);
    let sticking = (gamma - beta).abs() + n * speed <= delta && beta.abs() + speed <= delta;
    let regime = if speed == 0.0 || sticking {
        Regime::Sticking
    } else if times.approx_t_b < times.approx_t_c && times.approx_t_b * speed * (1.0 / n + 1.0) < delta {
        Regime::Breaking
    } else {
        Regime::Stability
    };
    let (t_c_detach, t_b_detach) = match regime {
        Regime::Sticking => (None, None),
        _ => (Some(times.approx_t_c), Some(times.approx_t_b)),
    };
    let e = setup.motion.unit();
    let gain = momentum_estimate(regime, delta, setup.n, setup.v_c);
    // initial total momentum is v_c; the estimate is the group's gain
    let total = setup.v_c + gain.copysign(setup.v_c);
    Ok(RegimeResult {
        regime,
        t_c_detach,
        t_b_detach,
        final_momentum: vec![total * e[0], total * e[1]],
    })
}

/// Large-`N` estimate of the group's momentum gain: `delta + |v_c| e^{-delta/(N |v_c|)}`
/// when `c` or `b` detaches, `N |v_c|` when `c` sticks. Asymptotic, not exact; NaN
/// for an undetermined regime.
pub fn momentum_estimate(regime: Regime, delta: f64, n: usize, v_c: f64) -> f64 {
    let speed = v_c.abs();
    match regime {
        Regime::Stability | Regime::Breaking => {
            if speed == 0.0 {
                delta
            } else {
                delta + speed * (-delta / (n as f64 * speed)).exp()
            }
        }
        Regime::Sticking => n as f64 * speed,
        Regime::Undetermined => f64::NAN,
    }
}
