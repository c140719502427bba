//! Invariant suite: velocity-diameter monotonicity, momentum conservation,
//! agreement with the reduced-system solution, and the flocking certificate.

use std::fmt;

use crate::analytic::{eval_v_b, reduced_solution};
use crate::dynamics::{total_momentum, velocity_diameter, EnsembleState, MPolicy, ModelParams, Points};
use crate::error::{Error, Result};
use crate::graph::{build_digraph, decay_rate_fit, fiedler_value, flocking_certificate, is_r_densely_packed};
use crate::integrate::{simulate_with, step_count, Domain, Simulation};
use crate::scenarios::{ScenarioSpec, ThreeBody};

/// Thresholds used by the suite. Each can be overridden by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed per-step growth of `V`, relative to `V(0)`.
    pub monotone: f64,
    /// Allowed drift of the total momentum.
    pub momentum: f64,
    /// Allowed error against the reduced-system solution.
    pub oracle: f64,
    /// Smallest acceptable error reduction when `dt` is halved.
    pub order_ratio: f64,
    /// Fitted decay rate must be at least this fraction of `M_* lambda_2`.
    pub rate_fraction: f64,
    /// Smallest acceptable R^2 of the log-linear fit.
    pub r_squared: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            monotone: 1e-8,
            momentum: 1e-10,
            oracle: 1e-6,
            order_ratio: 12.0,
            rate_fraction: 0.8,
            r_squared: 0.95,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 6] = ["monotone", "momentum", "oracle", "order_ratio", "rate_fraction", "r_squared"];

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "monotone" => &mut self.monotone,
            "momentum" => &mut self.momentum,
            "oracle" => &mut self.oracle,
            "order_ratio" => &mut self.order_ratio,
            "rate_fraction" => &mut self.rate_fraction,
            "r_squared" => &mut self.r_squared,
            _ => {
                return Err(Error::config(
                    key,
                    format!("unknown tolerance (one of {})", Self::KEYS.join(", ")),
                ))
            }
        };
        if !value.is_finite() {
            return Err(Error::config(key, "tolerance must be finite"));
        }
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Human-readable measured values against their thresholds.
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Largest per-step increase of `V`, relative to `V(0)`, over a seeded DI run.
pub fn max_v_increase(spec: &ScenarioSpec) -> Result<f64> {
    let sim = spec.simulation()?;
    let v0 = velocity_diameter(sim.state());
    let mut prev = v0;
    let mut worst = f64::NEG_INFINITY;
    simulate_with(sim, step_count(spec.t_end, spec.dt)?, u64::MAX, None, |s, _| {
        let v = velocity_diameter(s.state());
        worst = worst.max((v - prev) / v0);
        prev = v;
        Ok(())
    })?;
    Ok(worst)
}

pub fn check_monotone(spec: &ScenarioSpec, tol: &Tolerances) -> Result<CheckResult> {
    let worst = max_v_increase(spec)?;
    Ok(CheckResult {
        name: "velocity diameter nonincreasing",
        passed: worst <= tol.monotone,
        detail: format!(
            "{} N={} t_end={} seed={}: max step increase of V / V(0) = {worst:e} (limit {:e})",
            spec.params.model.name(),
            spec.params.n,
            spec.t_end,
            spec.seed,
            tol.monotone
        ),
    })
}

/// `rows x cols` lattice with the given spacing and small seeded velocities.
pub fn lattice(rows: usize, cols: usize, spacing: f64, speed: f64, seed: u64) -> Result<EnsembleState> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(2 * rows * cols);
    let mut v = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            x.extend_from_slice(&[c as f64 * spacing, r as f64 * spacing]);
            v.push(speed * (2.0 * rng.random::<f64>() - 1.0));
            v.push(speed * (2.0 * rng.random::<f64>() - 1.0));
        }
    }
    EnsembleState::new(0.0, 2, x, v)
}

/// Largest deviation of the total momentum from its initial value over the run,
/// and whether every step used a symmetric neighbor table.
pub fn momentum_drift(sim: Simulation, steps: u64) -> Result<(f64, bool)> {
    let p0 = total_momentum(sim.state());
    let mut worst = 0.0f64;
    let mut symmetric = true;
    simulate_with(sim, steps, u64::MAX, None, |s, table| {
        symmetric &= table.is_symmetric();
        for (a, b) in total_momentum(s.state()).iter().zip(&p0) {
            worst = worst.max((a - b).abs());
        }
        Ok(())
    })?;
    Ok((worst, symmetric))
}

/// Packed isolated 3x3 lattice under DI with `M = kappa / N`.
pub fn check_momentum(tol: &Tolerances) -> Result<CheckResult> {
    let delta = 2.0;
    // slow enough that every ball keeps more than m particles, so the table stays symmetric
    let state = lattice(3, 3, 0.95 * delta / 2.0, 0.05, 7)?;
    let params = ModelParams::di(9, 2, delta, MPolicy::Flat, 1.0);
    let sim = Simulation::new(params, Domain::Unbounded, 0.01, state)?;
    let (drift, symmetric) = momentum_drift(sim, step_count(50.0, 0.01)?)?;
    Ok(CheckResult {
        name: "momentum conserved on a symmetric cluster",
        passed: symmetric && drift <= tol.momentum,
        detail: format!(
            "9-particle lattice, flat M, t in [0, 50]: max |sum v - sum v(0)| = {drift:e} (limit {:e}), table symmetric throughout: {symmetric}",
            tol.momentum
        ),
    })
}

/// Error of the simulated `v_b` against the exact solution, and whether the
/// neighbor table stayed as it started.
pub fn oracle_error(n: usize, v_c: f64, dt: f64, t_end: f64) -> Result<(f64, bool)> {
    let delta = 10.0;
    let setup = ThreeBody {
        a_spread: 0.0,
        ..ThreeBody::new(n, 0.8 * delta, delta, v_c, delta)
    };
    let mut spec = ScenarioSpec::three_body(delta, setup);
    spec.dt = dt;
    let sim = spec.simulation()?;
    let sol = reduced_solution(n, v_c)?;
    let first = sim.current_table()?;
    let e = setup.motion.unit();
    let b = setup.b();
    let mut err = 0.0f64;
    let mut fixed = true;
    simulate_with(sim, step_count(t_end, dt)?, u64::MAX, None, |s, table| {
        fixed &= table.sets == first.sets;
        let v = s.state().velocity(b);
        let along = v[0] * e[0] + v[1] * e[1];
        err = err.max((along - eval_v_b(&sol, s.state().t)).abs());
        Ok(())
    })?;
    Ok((err, fixed))
}

pub fn check_oracle(tol: &Tolerances) -> Result<CheckResult> {
    let (e1, fixed1) = oracle_error(10, 1.0, 1e-3, 10.0)?;
    let (e2, fixed2) = oracle_error(10, 1.0, 5e-4, 10.0)?;
    let ratio = e1 / e2;
    Ok(CheckResult {
        name: "three-body run matches the exact solution",
        passed: fixed1 && fixed2 && e1 <= tol.oracle && ratio >= tol.order_ratio,
        detail: format!(
            "N=10 v_c=1: max error {e1:e} at dt=1e-3 (limit {:e}), {e2:e} at dt=5e-4, ratio {ratio:.2} (min {}), topology fixed: {}",
            tol.oracle,
            tol.order_ratio,
            fixed1 && fixed2
        ),
    })
}

/// Measurements of the certificate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRun {
    pub lambda2: f64,
    pub m_star: f64,
    pub threshold: f64,
    pub holds: bool,
    /// Packed at every step through `t_end`.
    pub stays_packed: bool,
    /// Decay rate of `max_i |v_i - mean v|` fitted over the first half of the decay.
    pub rate: f64,
    pub r_squared: f64,
}

/// 3x3 lattice with spacing `0.95 r`, `r = delta / 2`, `m = 2` and `M = kappa`,
/// with `kappa` set to `margin` times the certificate threshold.
pub fn certificate_run(margin: f64, t_end: f64) -> Result<CertificateRun> {
    let (delta, m) = (2.0, 2);
    let r = delta / 2.0;
    let dt = 0.01;
    let state = lattice(3, 3, 0.95 * r, 0.5, 11)?;
    let unit = ModelParams::di(9, m, delta, MPolicy::Constant, 1.0);
    let sim = Simulation::new(unit.clone(), Domain::Unbounded, dt, state.clone())?;
    let g = build_digraph(&sim.current_table()?, MPolicy::Constant, 1.0, 9)?;
    let all: Vec<usize> = (0..9).collect();
    let lambda2 = fiedler_value(&g, &all)?;
    let probe = flocking_certificate(r, delta, 1.0, lambda2);
    let kappa = margin * probe.threshold;
    let params = ModelParams { kappa, ..unit };
    let (m_star, _) = params.m_policy.bounds(kappa, 9);
    let cert = flocking_certificate(r, delta, m_star, lambda2);

    let sim = Simulation::new(params, Domain::Unbounded, dt, state)?;
    let spread = |s: &EnsembleState| {
        let mean = s.mean_velocity();
        (0..s.len())
            .map(|i| {
                let v = s.velocity(i);
                ((v[0] - mean[0]).powi(2) + (v[1] - mean[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    };
    let d0 = spread(sim.state());
    let mut series = vec![(0.0, d0)];
    let mut stays_packed = true;
    simulate_with(sim, step_count(t_end, dt)?, u64::MAX, None, |s, _| {
        let pts = Points::new(s.topology_positions(), 2);
        stays_packed &= is_r_densely_packed(pts, &all, delta, m, s.domain())?.is_packed;
        series.push((s.state().t, spread(s.state())));
        Ok(())
    })?;
    // the decay lasts until the spread reaches the roundoff floor
    let floor = 1e-10 * d0;
    let decay: Vec<(f64, f64)> = series.iter().copied().take_while(|&(_, d)| d > floor).collect();
    let half = &decay[..(decay.len() / 2).max(2).min(decay.len())];
    let fit = decay_rate_fit(half)?;
    Ok(CertificateRun {
        lambda2,
        m_star,
        threshold: cert.threshold,
        holds: cert.holds,
        stays_packed,
        rate: -fit.slope,
        r_squared: fit.r_squared,
    })
}

pub fn check_certificate(tol: &Tolerances) -> Result<CheckResult> {
    let run = certificate_run(2.0, 100.0)?;
    let bound = run.m_star * run.lambda2;
    Ok(CheckResult {
        name: "certificate implies flocking",
        passed: run.holds && run.stays_packed && run.rate >= tol.rate_fraction * bound && run.r_squared >= tol.r_squared,
        detail: format!(
            "lambda2={:.6} M_*={:.6} (threshold {:.6}, holds {}): packed through t=100 {}, fitted rate {:.4} vs {}*M_* lambda2 = {:.4}, R^2 {:.5} (min {})",
            run.lambda2,
            run.m_star,
            run.threshold,
            run.holds,
            run.stays_packed,
            run.rate,
            tol.rate_fraction,
            tol.rate_fraction * bound,
            run.r_squared,
            tol.r_squared
        ),
    })
}

/// Runs the full suite. `seed` selects the random-cluster run of the monotonicity check.
pub fn run_suite(tol: &Tolerances, seed: u64) -> Result<Vec<CheckResult>> {
    let spec = ScenarioSpec::random_clusters(ModelParams::di_reference(), seed);
    Ok(vec![
        check_monotone(&spec, tol)?,
        check_momentum(tol)?,
        check_oracle(tol)?,
        check_certificate(tol)?,
    ])
}
