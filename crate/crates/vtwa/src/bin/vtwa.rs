//! Command-line front end: loads a flat key=value config, applies flag
//! overrides, pins the rayon thread pool, and dispatches to the experiment
//! pipelines. Thread count never changes numeric results, only wall time.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vtwa::config::format_float;
use vtwa::experiments::{
    self, run_distance, run_evolve, run_sweep, run_verify, ExperimentError,
};
use vtwa::RunConfig;

#[derive(Parser)]
#[command(
    name = "vtwa",
    about = "Quartic-oscillator phase-space dynamics: exact reference vs truncated Wigner vs effective-Hamiltonian transport",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key=value config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides ensemble.seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; falls back to RAYON_NUM_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the effective-Hamiltonian identities over a parameter sweep.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Perturb one effective-Hamiltonian coefficient by 1e-3; the suite
        /// must then fail (sensitivity check).
        #[arg(long)]
        fault_inject: bool,
    },
    /// Tabulate exact, centroid, classical, and ensemble observables.
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Measure Hilbert-Schmidt distance growth and its exponents.
    Distance {
        #[command(flatten)]
        common: Common,
    },
    /// Repeat the distance experiment along a parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, ExperimentError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::parse_file(path).map_err(ExperimentError::Config)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn resolve_threads(common: &Common) -> usize {
    common
        .threads
        .or_else(|| {
            std::env::var("RAYON_NUM_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn run(command: &Command) -> Result<bool, ExperimentError> {
    let (common, label) = match command {
        Command::Verify { common, .. } => (common, "verify"),
        Command::Evolve { common } => (common, "evolve"),
        Command::Distance { common } => (common, "distance"),
        Command::Sweep { common } => (common, "sweep"),
    };
    let cfg = load_config(common)?;
    let threads = resolve_threads(common);
    std::fs::create_dir_all(&common.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");

    let out = &common.out;
    let thread_meta = ("threads".to_string(), threads.to_string());
    pool.install(|| -> Result<bool, ExperimentError> {
        match command {
            Command::Verify { fault_inject, .. } => {
                let report = run_verify(&cfg, *fault_inject)?;
                experiments::write_verify_csv(&out.join("verify.csv"), &report)?;
                experiments::write_meta(
                    &out.join("verify.meta"),
                    &cfg,
                    &[
                        thread_meta,
                        ("fault_inject".into(), fault_inject.to_string()),
                        ("passed".into(), report.passed.to_string()),
                        (
                            "tolerance.bracket".into(),
                            format_float(experiments::RESIDUAL_TOL),
                        ),
                        (
                            "tolerance.structural".into(),
                            format_float(experiments::STRUCTURAL_TOL),
                        ),
                    ],
                )?;
                println!("{}", report.summary());
                for check in report.checks.iter().filter(|c| !c.pass) {
                    println!(
                        "  FAIL {} at g={} sx={} sp={} x0={} p0={}: residual {} >= {}",
                        check.name,
                        check.g,
                        check.sigma_x,
                        check.sigma_p,
                        check.x0,
                        check.p0,
                        check.residual,
                        check.tolerance
                    );
                }
                Ok(report.passed)
            }
            Command::Evolve { .. } => {
                let result = run_evolve(&cfg)?;
                experiments::write_table(&out.join("evolve.csv"), &result.table)?;
                for snap in &result.snapshots {
                    let name = format!("field_{}_t{:.4}.csv", snap.label, snap.time);
                    experiments::write_field(&out.join(name), &snap.field)?;
                }
                let mut extras = vec![
                    thread_meta,
                    ("ensemble_blowups".into(), result.ensemble_blowups.to_string()),
                    ("escaped_nodes".into(), result.escaped_nodes.to_string()),
                    (
                        "tolerance.blowup_fraction".into(),
                        format_float(vtwa::semiclassics::BLOWUP_FRACTION),
                    ),
                ];
                for (method, until) in &result.ensemble_valid_until {
                    extras.push((
                        format!("ensemble_{}_valid_until", method.name()),
                        until.map(format_float).unwrap_or_else(|| "none".into()),
                    ));
                }
                experiments::write_meta(&out.join("evolve.meta"), &cfg, &extras)?;
                println!(
                    "{label}: {} rows, {} snapshots -> {}",
                    result.table.len(),
                    result.snapshots.len(),
                    out.display()
                );
                Ok(true)
            }
            Command::Distance { .. } => {
                let result = run_distance(&cfg)?;
                experiments::write_table(&out.join("distance.csv"), &result.table)?;
                let fmt = |s: Option<f64>| s.map(format_float).unwrap_or_else(|| "undefined".into());
                experiments::write_meta(
                    &out.join("distance.meta"),
                    &cfg,
                    &[
                        thread_meta,
                        ("fit.window_lo".into(), format_float(result.fit_window.0)),
                        ("fit.window_hi".into(), format_float(result.fit_window.1)),
                        ("slope_twa".into(), fmt(result.slope_twa)),
                        ("slope_vtwa".into(), fmt(result.slope_vtwa)),
                        ("escaped_nodes".into(), result.escaped_nodes.to_string()),
                        (
                            "tolerance.distance_floor".into(),
                            format_float(experiments::DISTANCE_FLOOR),
                        ),
                    ],
                )?;
                println!(
                    "{label}: slope_twa = {}, slope_vtwa = {} -> {}",
                    fmt(result.slope_twa),
                    fmt(result.slope_vtwa),
                    out.display()
                );
                Ok(true)
            }
            Command::Sweep { .. } => {
                let sweep = run_sweep(&cfg);
                experiments::write_sweep_csv(&out.join("sweep.csv"), &sweep)?;
                experiments::write_meta(
                    &out.join("sweep.meta"),
                    &cfg,
                    &[thread_meta, ("all_ok".into(), sweep.all_ok.to_string())],
                )?;
                let failed = sweep.rows.iter().filter(|r| r.outcome.is_err()).count();
                println!(
                    "{label}: {} points, {} failed -> {}",
                    sweep.rows.len(),
                    failed,
                    out.display()
                );
                Ok(sweep.all_ok)
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
