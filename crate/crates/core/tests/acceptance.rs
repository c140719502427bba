//! Acceptance criteria 1-10. Runs without the test harness so each criterion's
//! PASS/FAIL line always shows; exits nonzero if any criterion fails.

use std::time::Instant;

use diflock::config::parse_config;
use diflock::dynamics::{density_ratio, total_momentum, MPolicy, Model, ModelParams, Points};
use diflock::graph::is_r_densely_packed;
use diflock::integrate::{run_simulation, Domain};
use diflock::scenarios::{
    classify_three_body, predict_three_body, ChainSetup, GroupSetup, Regime, ScenarioSpec, Shape, ThreeBody,
};
use diflock::sweep::{momentum_flip_pairs, run_sweep};
use diflock::verify::{certificate_run, check_monotone, lattice, momentum_drift, oracle_error, Tolerances};
use diflock::Result;

type Outcome = Result<(bool, String)>;

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (e1, fixed1) = oracle_error(10, 1.0, 1e-3, 10.0)?;
    let elapsed = start.elapsed().as_secs_f64();
    let (e2, fixed2) = oracle_error(10, 1.0, 5e-4, 10.0)?;
    let ratio = e1 / e2;
    let ok = fixed1 && fixed2 && e1 <= 1e-6 && ratio >= 12.0 && elapsed < 1.0;
    Ok((
        ok,
        format!("max |v_b - exact| = {e1:.3e} at dt=1e-3, {e2:.3e} at dt/2 (ratio {ratio:.2}), topology fixed {}, {elapsed:.3} s", fixed1 && fixed2),
    ))
}

fn monotone_v() -> Outcome {
    let spec = ScenarioSpec::random_clusters(ModelParams::di_reference(), 1);
    let r = check_monotone(&spec, &Tolerances::default())?;
    Ok((r.passed, r.detail))
}

fn momentum_conservation() -> Outcome {
    let delta = 2.0;
    let state = lattice(3, 3, 0.95 * delta / 2.0, 0.05, 7)?;
    let all: Vec<usize> = (0..9).collect();
    let packed = is_r_densely_packed(state.positions(), &all, delta, 2, &Domain::Unbounded)?.is_packed;
    let params = ModelParams::di(9, 2, delta, MPolicy::Flat, 1.0);
    let sim = diflock::integrate::Simulation::new(params, Domain::Unbounded, 0.01, state)?;
    let (drift, symmetric) = momentum_drift(sim, 5000)?;
    Ok((
        packed && symmetric && drift <= 1e-10,
        format!("delta-packed at start {packed}, symmetric throughout {symmetric}, max |sum v - sum v(0)| over [0, 50] = {drift:.3e}"),
    ))
}

fn certificate() -> Outcome {
    let run = certificate_run(2.0, 100.0)?;
    let bound = run.m_star * run.lambda2;
    let ok = run.holds && run.stays_packed && run.rate >= 0.8 * bound && run.r_squared >= 0.95;
    Ok((
        ok,
        format!(
            "lambda2 {:.4}, M_* {:.4} > {:.4}: packed to t=100 {}, rate {:.4} >= 0.8 * {:.4}, R^2 {:.4}",
            run.lambda2, run.m_star, run.threshold, run.stays_packed, run.rate, bound, run.r_squared
        ),
    ))
}

fn regime_table() -> Outcome {
    let cases = [
        (1.0, 1.0, Regime::Stability),
        (1.95, 1.0, Regime::Breaking),
        (1.0, 0.03, Regime::Sticking),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (beta, v_c, expected) in cases {
        let setup = ThreeBody::new(30, beta, 2.0, v_c, 2.0);
        let predicted = predict_three_body(&setup, 2.0)?.regime;
        let mut observed = Vec::new();
        for dt in [0.01, 0.005] {
            let mut spec = ScenarioSpec::three_body(2.0, setup);
            spec.dt = dt;
            spec.sample_every = (0.1 / dt).round() as u64;
            let rec = run_simulation(&spec)?;
            observed.push(classify_three_body(&spec, &rec)?.regime);
        }
        ok &= predicted == expected && observed.iter().all(|&r| r == expected);
        parts.push(format!(
            "(beta {beta}, v_c {v_c}) predicted {} observed {}/{}",
            predicted.name(),
            observed[0].name(),
            observed[1].name()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn beta_sweep() -> Outcome {
    let text = r#"
scenario = "three_body"
n = 30
delta = 2.0
beta = 1.0
v_c = 1.0
t_end = 40.0

[sweep]
beta = { start = 1.0, stop = 1.99, count = 100 }
"#;
    let cfg = parse_config(text)?;
    let rows = run_sweep(&cfg)?;
    let mut points = Vec::new();
    for (row, point) in rows.iter().zip(cfg.grid()?) {
        match &row.outcome {
            Ok(s) => points.push((point.beta.unwrap(), s.regime)),
            Err(e) => return Ok((false, format!("run {} failed: {e}", row.index))),
        }
    }
    let last_stable = points.iter().filter(|p| p.1 == Some(Regime::Stability)).map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let first_breaking = points.iter().filter(|p| p.1 == Some(Regime::Breaking)).map(|p| p.0).fold(f64::INFINITY, f64::min);
    let only_two = points.iter().all(|p| matches!(p.1, Some(Regime::Stability | Regime::Breaking)));
    let boundary = 0.5 * (last_stable + first_breaking);
    let target = 30.0 * 2.0 / 31.0;
    let ok = only_two && last_stable < first_breaking && (boundary - target).abs() <= 0.05;
    Ok((
        ok,
        format!("stability up to beta {last_stable:.2}, breaking from {first_breaking:.2}: boundary {boundary:.3} vs {target:.3}"),
    ))
}

fn density() -> Outcome {
    let (rho_a, rho_m) = density_ratio(64, 3, 2.0, 25.0);
    let ratio = rho_m / rho_a;
    Ok(((ratio - 2.33).abs() <= 0.01, format!("rho_m / rho_a = {ratio:.4}")))
}

fn spontaneous_clusters() -> Outcome {
    let seed = 1;
    let di_spec = ScenarioSpec::random_clusters(ModelParams::di_reference(), seed);
    let di = run_simulation(&di_spec)?;
    let last = di.last().unwrap();
    let m = di_spec.params.m.unwrap();
    let pts = Points::new(&last.topology_positions, 2);
    let mut all_packed = true;
    let mut big = 0;
    for members in last.labels.clusters().into_iter().filter(|c| c.len() > m) {
        big += 1;
        all_packed &= is_r_densely_packed(pts, &members, 2.0, m, &di.domain)?.is_packed;
    }
    let cs = run_simulation(&ScenarioSpec::random_clusters(ModelParams::cs(64), seed))?;
    let cs_count = cs.last().unwrap().labels.cluster_count;
    let di_count = last.labels.cluster_count;
    Ok((
        di_count >= 2 && cs_count == 1 && all_packed,
        format!("seed {seed}: DI {di_count} clusters at t=150 ({big} larger than m, all delta-packed: {all_packed}), CS {cs_count}"),
    ))
}

fn group_momentum() -> Outcome {
    let mut drift: f64 = 0.0;
    for shape in [Shape::A, Shape::B] {
        let rec = run_simulation(&ScenarioSpec::group_vs_individual(Model::Cs, GroupSetup::new(shape)))?;
        let p0 = total_momentum(&rec.samples[0].state);
        for s in &rec.samples {
            for (a, b) in s.diagnostics.momentum.iter().zip(&p0) {
                drift = drift.max((a - b).abs());
            }
        }
    }
    let text = r#"
scenario = "group_vs_individual"
model = "di"
shape = "A"

[sweep]
shape = ["A", "B"]
spacing = [0.9, 0.95, 1.0]
gap = [2.0, 4.0]
"#;
    let cfg = parse_config(text)?;
    let rows = run_sweep(&cfg)?;
    let pairs = momentum_flip_pairs(&rows);
    let found: Vec<String> = pairs
        .iter()
        .map(|&(a, _)| format!("spacing {} gap {}", rows[a].get("spacing").unwrap(), rows[a].get("gap").unwrap()))
        .collect();
    Ok((
        drift <= 1e-10 && !pairs.is_empty(),
        format!("CS momentum drift {drift:.3e}; DI flips in A but not B for {} of 6 lattices: {}", pairs.len(), found.join(", ")),
    ))
}

fn chain_regimes() -> Outcome {
    let run = |delta: f64| run_simulation(&ScenarioSpec::chain(ChainSetup::new(delta)));
    let two = run(2.0)?;
    let counts2: Vec<usize> = two.samples.iter().map(|s| s.diagnostics.n_clusters).collect();
    let split = counts2.iter().max().unwrap() > &counts2[0];

    let four = run(4.0)?;
    let counts4: Vec<usize> = four.samples.iter().map(|s| s.diagnostics.n_clusters).collect();
    let no_split = counts4.iter().all(|&c| c <= counts4[0]);
    let last = four.last().unwrap();
    let chain: Vec<usize> = (0..21).collect();
    let chain_vx = last.state.cluster_mean_velocity(&chain)[0];
    let chain_whole = chain.iter().all(|&i| last.labels.labels[i] == last.labels.labels[0]);
    let single_neg = four.samples.iter().all(|s| s.state.velocity(21)[0] < 0.0);
    let ok = split && no_split && chain_whole && chain_vx < 0.0 && single_neg;
    Ok((
        ok,
        format!(
            "delta 2: clusters {} -> max {}; delta 4: clusters {} -> max {}, chain one cluster {chain_whole}, chain vx {chain_vx:.3} (from 0.1), singleton vx < 0 throughout {single_neg}",
            counts2[0],
            counts2.iter().max().unwrap(),
            counts4[0],
            counts4.iter().max().unwrap()
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 velocity diameter nonincreasing", monotone_v),
        ("3 momentum conservation", momentum_conservation),
        ("4 flocking certificate", certificate),
        ("5 three-body regime table", regime_table),
        ("6 beta-sweep boundary", beta_sweep),
        ("7 density ratio", density),
        ("8 spontaneous clusters", spontaneous_clusters),
        ("9 group momentum", group_momentum),
        ("10 chain regimes", chain_regimes),
    ];
    // criterion 1 carries a wall-clock limit, so it runs alone first
    let first = (criteria[0].1)();
    let rest: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria[1..].iter().map(|(_, f)| s.spawn(f)).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = Vec::new();
    for ((name, _), outcome) in criteria.iter().zip(std::iter::once(first).chain(rest)) {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        println!("{} criterion {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(*name);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
