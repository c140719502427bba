use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use diflock::config::{parse_config, RunConfig};
use diflock::integrate::run_simulation;
use diflock::output::{write_run, RecordToggles};
use diflock::scenarios::{classify_three_body, momentum_estimate, predict_three_body, Generator};
use diflock::sweep::{momentum_flip_pairs, run_sweep, summary_csv};
use diflock::verify::{run_suite, Tolerances};
use diflock::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_FAULT: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Density-induced consensus and Cucker-Smale flocking simulator.
#[derive(Parser)]
#[command(name = "diflock", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write trajectory, diagnostics and cluster CSVs.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
    },
    /// Run every point of the config's [sweep] grid in parallel and write a summary CSV.
    Sweep {
        config: PathBuf,
        /// Summary file; defaults to `<output_dir>/sweep.csv`. Use `-` for stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the invariant suite and report each check.
    Verify {
        /// Seed of the random-cluster run used by the monotonicity check.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override a tolerance, e.g. `--tol oracle=1e-8`.
        #[arg(long = "tol", value_name = "KEY=VALUE")]
        tolerances: Vec<String>,
    },
    /// Simulate a three_body config and compare the observed regime with the prediction.
    Classify { config: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::IntegrationFault { .. } => EXIT_FAULT,
        _ => EXIT_CONFIG,
    }
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn cmd_run(config: &Path, output_dir: Option<PathBuf>) -> Result<(), Error> {
    let cfg = load(config)?;
    if cfg.sweep.is_some() {
        eprintln!("note: ignoring the [sweep] table; use `diflock sweep` to run the grid");
    }
    let spec = cfg.to_spec()?;
    let record = run_simulation(&spec)?;
    let dir = output_dir.unwrap_or_else(|| PathBuf::from(cfg.output_dir()));
    let toggles = RecordToggles {
        trajectory: cfg.record_trajectory(),
        diagnostics: cfg.record_diagnostics(),
        clusters: cfg.record_clusters(),
    };
    let files = write_run(&record, &dir, toggles)?;
    let last = record.last().expect("a run always has its initial sample");
    println!(
        "{}: {} samples to t={}, {} clusters, momentum {:?}",
        spec.name,
        record.samples.len(),
        last.t,
        last.diagnostics.n_clusters,
        last.diagnostics.momentum
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_sweep(config: &Path, output: Option<PathBuf>) -> Result<(), Error> {
    let cfg = load(config)?;
    if cfg.sweep.is_none() {
        eprintln!("note: no [sweep] table, the grid is empty");
    }
    let rows = run_sweep(&cfg)?;
    let csv = summary_csv(&cfg, &rows);
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    match output {
        Some(p) if p.as_os_str() == "-" => print!("{csv}"),
        other => {
            let path = other.unwrap_or_else(|| Path::new(cfg.output_dir()).join("sweep.csv"));
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
            }
            fs::write(&path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
    }
    eprintln!("{} runs, {failed} failed", rows.len());
    let pairs = momentum_flip_pairs(&rows);
    if !pairs.is_empty() {
        eprintln!("momentum flips in shape A but not in shape B for runs {pairs:?}");
    }
    Ok(())
}

fn cmd_verify(seed: u64, overrides: &[String]) -> Result<bool, Error> {
    let mut tol = Tolerances::default();
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::config("tol", format!("expected KEY=VALUE, got `{item}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::config(key.trim(), format!("not a number: `{value}`")))?;
        tol.set(key.trim(), value)?;
    }
    let results = run_suite(&tol, seed)?;
    for r in &results {
        println!("{r}");
    }
    Ok(results.iter().all(|r| r.passed))
}

fn cmd_classify(config: &Path) -> Result<(), Error> {
    let spec = load(config)?.to_spec()?;
    let Generator::ThreeBody(setup) = &spec.generator else {
        return Err(Error::config("scenario", "classify needs a three_body config"));
    };
    let delta = spec.params.delta.unwrap_or(f64::NAN);
    let record = run_simulation(&spec)?;
    let observed = classify_three_body(&spec, &record)?;
    let predicted = predict_three_body(setup, delta)?;
    let fmt_t = |t: Option<f64>| t.map_or_else(|| "none".to_string(), |t| t.to_string());
    println!("observed:  {}", observed.regime.name());
    println!("predicted: {}", predicted.regime.name());
    println!("t_c detach: observed {}, estimated {}", fmt_t(observed.t_c_detach), fmt_t(predicted.t_c_detach));
    println!("t_b detach: observed {}, estimated {}", fmt_t(observed.t_b_detach), fmt_t(predicted.t_b_detach));
    let p0 = setup.v_c.abs();
    let p1 = observed.final_momentum.iter().map(|c| c * c).sum::<f64>().sqrt();
    println!(
        "momentum gain: observed {}, large-N estimate {}",
        p1 - p0,
        momentum_estimate(observed.regime, delta, setup.n, setup.v_c)
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output_dir } => cmd_run(&config, output_dir).map(|_| true),
        Command::Sweep { config, output } => cmd_sweep(&config, output).map(|_| true),
        Command::Verify { seed, tolerances } => cmd_verify(seed, &tolerances),
        Command::Classify { config } => cmd_classify(&config).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
