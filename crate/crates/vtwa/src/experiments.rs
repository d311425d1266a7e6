//! Experiment pipelines behind the command-line tool: the algebraic
//! verification sweep, time-evolution tables, Hilbert-Schmidt distance
//! growth, and parameter sweeps, plus the plain-text writers that make every
//! output reproducible from its own metadata.

use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{format_float, ConfigError, RunConfig, SweepAxis};
use crate::effective::{twa_rhs, EffectiveParams};
use crate::exact::{self, ExactError};
use crate::metrics::{self, MetricsError};
use crate::phase::{
    GaussianWignerState, PhaseError, PhasePoint, TimeSeries, WignerField,
};
use crate::polygauss::PolyGauss;
use crate::semiclassics::{
    self, backward_map, integrate_centroid, rk4_step, CentroidPath, Method, PropagationError,
};

/// Measured distances below this are treated as numerical floor: the t = 0
/// gate for both methods, and the threshold under which a growth exponent is
/// reported as undefined.
pub const DISTANCE_FLOOR: f64 = 1e-4;

/// Residual tolerance for the double-bracket identities.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Residual tolerance for the structural identities (H + H_c = H_eff and the
/// invariance under additive functions of Q).
pub const STRUCTURAL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("the exact reference needs a minimal-uncertainty state (2 sx sp = 1), got 2 sx sp = {0}")]
    NonMinimalState(f64),
    #[error("output times must start at or after 0 and increase")]
    BadOutputTimes,
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// One identity check at one parameter tuple.
#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub name: &'static str,
    pub g: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub x0: f64,
    pub p0: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
    pub tuples: usize,
    pub fault_injected: bool,
    pub passed: bool,
}

impl VerifyReport {
    pub fn summary(&self) -> String {
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let worst = self
            .checks
            .iter()
            .map(|c| c.residual / c.tolerance)
            .fold(0.0f64, f64::max);
        format!(
            "verify: {} checks over {} tuples, {} failed (worst residual/tolerance = {:.3e}){} => {}",
            self.checks.len(),
            self.tuples,
            failed,
            worst,
            if self.fault_injected { " [fault injected]" } else { "" },
            if self.passed { "PASS" } else { "FAIL" },
        )
    }
}

/// Run the algebraic identity suite over a deterministic parameter sweep:
/// the configured tuple, the harmonic tuple, a stiff corner tuple, and random
/// tuples (g in [0,2], 2 sx sp in [1,3], |x0|,|p0| <= 2) up to 100 total.
/// With `fault_inject`, one coefficient of the candidate effective
/// Hamiltonian is perturbed by 1e-3, which must flip the suite to failure.
pub fn run_verify(cfg: &RunConfig, fault_inject: bool) -> Result<VerifyReport, ExperimentError> {
    // A configured g of zero pins the whole sweep to the harmonic case, where
    // every residual is exactly zero.
    let corner_g = if cfg.g == 0.0 { 0.0 } else { 2.0 };
    let mut tuples = vec![
        EffectiveParams::new(cfg.model()?, cfg.state()?),
        EffectiveParams::new(crate::phase::QuarticModel::harmonic(), cfg.state()?),
        EffectiveParams::new(
            crate::phase::QuarticModel::new(corner_g)?,
            GaussianWignerState::coherent(2.0, -2.0)?,
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while tuples.len() < 100 {
        let g = if cfg.g == 0.0 { 0.0 } else { rng.gen_range(0.0..2.0) };
        let unc = rng.gen_range(1.0..3.0);
        let sx = rng.gen_range(0.6..1.5);
        let sp = unc / (2.0 * sx);
        let state = GaussianWignerState::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            sx,
            sp,
        )?;
        tuples.push(EffectiveParams::new(crate::phase::QuarticModel::new(g)?, state));
    }

    let mut checks = Vec::with_capacity(tuples.len() * 5);
    for params in &tuples {
        let state = params.state();
        let mut push = |name: &'static str, residual: f64, tolerance: f64| {
            checks.push(VerifyCheck {
                name,
                g: params.model().g(),
                sigma_x: state.sigma_x(),
                sigma_p: state.sigma_p(),
                x0: state.x0(),
                p0: state.p0(),
                residual,
                tolerance,
                pass: residual < tolerance,
            });
        };

        let el = if fault_inject {
            let bump = PolyGauss::monomial(*state, 0, 2, 0, 1e-3).expect("degree 2");
            let faulty = params
                .effective_hamiltonian()
                .add(&bump)
                .expect("same power");
            params.el_residual_of(&faulty)
        } else {
            params.el_residual()
        };
        push(
            if fault_inject { "optimality(fault-injected)" } else { "optimality" },
            el,
            RESIDUAL_TOL,
        );
        push("correction-equation", params.correction_residual(), RESIDUAL_TOL);
        push("jump", params.jump_residual(), RESIDUAL_TOL);
        push("splitting", params.splitting_residual(), STRUCTURAL_TOL);
        push("u-invariance", params.u_function_residual(), STRUCTURAL_TOL);
    }

    let passed = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        checks,
        tuples: tuples.len(),
        fault_injected: fault_inject,
        passed,
    })
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

/// A grid snapshot written by `evolve`.
pub struct Snapshot {
    pub time: f64,
    pub label: String,
    pub field: WignerField,
}

pub struct EvolveOutput {
    pub table: TimeSeries,
    pub snapshots: Vec<Snapshot>,
    pub ensemble_blowups: usize,
    pub escaped_nodes: usize,
    /// Last output time at which each method's ensemble stayed under the
    /// blow-up gate; columns beyond it hold NaN. `None` means even the first
    /// output time failed.
    pub ensemble_valid_until: Vec<(Method, Option<f64>)>,
}

fn check_times(times: &[f64]) -> Result<(), ExperimentError> {
    let ordered = times.windows(2).all(|w| w[1] > w[0]);
    if times.is_empty() || times[0] < 0.0 || !ordered {
        return Err(ExperimentError::BadOutputTimes);
    }
    Ok(())
}

fn require_minimal(state: &GaussianWignerState) -> Result<(), ExperimentError> {
    if !state.is_minimal_uncertainty() {
        return Err(ExperimentError::NonMinimalState(
            2.0 * state.sigma_x() * state.sigma_p(),
        ));
    }
    Ok(())
}

/// Exact, centroid, classical-trajectory, and ensemble observables on one
/// time grid, with optional full-grid snapshots of all three fields.
pub fn run_evolve(cfg: &RunConfig) -> Result<EvolveOutput, ExperimentError> {
    let model = cfg.model()?;
    let state = cfg.state()?;
    require_minimal(&state)?;
    let grid = cfg.grid()?;
    let times = cfg.resolved_output_times();
    check_times(&times)?;
    let t_end = *times.last().expect("nonempty");
    let params = EffectiveParams::new(model, state);

    // Exact reference.
    let h = exact::hamiltonian_matrix(&model, cfg.exact_n_levels)?;
    let psi0 = exact::coherent_state(state.x0(), state.p0(), cfg.exact_n_levels)?;
    let snaps = exact::propagate(&psi0, &h, &times, cfg.exact_dt)?;
    let obs: Vec<_> = snaps.iter().map(|s| exact::observables(s, &model)).collect();

    // Effective centroid, sampled on the output grid.
    let centroid_at: Vec<PhasePoint> = if t_end > 0.0 {
        let series = integrate_centroid(&params, t_end, cfg.dt)?;
        let path = CentroidPath::from_series(&series)?;
        times.iter().map(|&t| path.at(t)).collect()
    } else {
        vec![state.centroid(); times.len()]
    };

    // Single classical trajectory of the true Hamiltonian from the centroid.
    let rhs = |_t: f64, pt: PhasePoint| twa_rhs(&model, pt);
    let mut classical = Vec::with_capacity(times.len());
    let mut pt = state.centroid();
    let mut t_prev = 0.0;
    for &t in &times {
        let mut remaining = t - t_prev;
        while remaining > 1e-15 {
            let step = cfg.dt.min(remaining);
            pt = rk4_step(&rhs, t_prev, pt, step);
            remaining -= step;
        }
        t_prev = t;
        classical.push(pt);
    }

    let mut table = TimeSeries::new(times.clone())?;
    table.push_column("mean_x_exact", obs.iter().map(|o| o.mean_x).collect())?;
    table.push_column("mean_p_exact", obs.iter().map(|o| o.mean_p).collect())?;
    table.push_column("energy_exact", obs.iter().map(|o| o.energy).collect())?;
    table.push_column("x0_vtwa", centroid_at.iter().map(|c| c.x).collect())?;
    table.push_column("p0_vtwa", centroid_at.iter().map(|c| c.p).collect())?;
    table.push_column("x0_twa_classical", classical.iter().map(|c| c.x).collect())?;
    table.push_column("p0_twa_classical", classical.iter().map(|c| c.p).collect())?;

    // Monte Carlo ensembles. The effective flow is not confining, so an
    // ensemble may stop being statistically trustworthy partway through the
    // horizon: columns past the blow-up gate are reported as NaN and the
    // valid horizon is recorded.
    let mut ensemble_blowups = 0;
    let mut ensemble_valid_until = Vec::new();
    let ensemble = state.sample(cfg.ensemble_n, cfg.seed)?;
    let gate = semiclassics::BLOWUP_FRACTION * cfg.ensemble_n as f64;
    for &method in &cfg.methods {
        let transported =
            semiclassics::transport_ensemble(method, &params, &ensemble, &times, cfg.dt)?;
        ensemble_blowups += transported.blowups.len();

        // First output index whose cumulative escape count exceeds the gate.
        let mut valid_len = times.len();
        for (k, &t) in times.iter().enumerate() {
            let escaped = transported
                .blowups
                .iter()
                .filter(|(_, failed_at)| *failed_at <= t + 1e-12)
                .count();
            if escaped as f64 > gate {
                valid_len = k;
                break;
            }
        }
        ensemble_valid_until.push((
            method,
            if valid_len == 0 { None } else { Some(times[valid_len - 1]) },
        ));

        let m = method.name();
        let column = |f: &dyn Fn(&crate::phase::TrajectoryEnsemble) -> f64| -> Vec<f64> {
            transported
                .snapshots
                .iter()
                .enumerate()
                .map(|(k, e)| if k < valid_len { f(e) } else { f64::NAN })
                .collect()
        };
        table.push_column(&format!("mean_x_{m}_ens"), column(&|e| e.mean_x()))?;
        table.push_column(&format!("mean_p_{m}_ens"), column(&|e| e.mean_p()))?;
        table.push_column(&format!("var_x_{m}_ens"), column(&|e| e.var_x()))?;
        table.push_column(&format!("var_p_{m}_ens"), column(&|e| e.var_p()))?;
    }

    // Optional grid snapshots of f_rho and the transported Gaussians.
    let mut snapshots = Vec::new();
    let mut escaped_nodes = 0;
    if !cfg.snapshot_times.is_empty() {
        check_times(&cfg.snapshot_times)?;
        let exact_snaps = exact::propagate(&psi0, &h, &cfg.snapshot_times, cfg.exact_dt)?;
        for (&t, snap) in cfg.snapshot_times.iter().zip(&exact_snaps) {
            let field = exact::wigner_field(snap, &grid, cfg.wigner_y_points)?;
            snapshots.push(Snapshot {
                time: t,
                label: "exact".to_string(),
                field,
            });
            for &method in &cfg.methods {
                let transported = backward_map(method, &params, &grid, t, cfg.dt)?;
                escaped_nodes += transported.escaped;
                snapshots.push(Snapshot {
                    time: t,
                    label: method.name().to_string(),
                    field: transported.field,
                });
            }
        }
    }

    Ok(EvolveOutput {
        table,
        snapshots,
        ensemble_blowups,
        escaped_nodes,
        ensemble_valid_until,
    })
}

// ---------------------------------------------------------------------------
// distance
// ---------------------------------------------------------------------------

pub struct DistanceOutput {
    pub table: TimeSeries,
    pub slope_twa: Option<f64>,
    pub slope_vtwa: Option<f64>,
    pub fit_window: (f64, f64),
    pub escaped_nodes: usize,
}

impl DistanceOutput {
    pub fn slope(&self, method: Method) -> Option<f64> {
        match method {
            Method::Twa => self.slope_twa,
            Method::Vtwa => self.slope_vtwa,
        }
    }
}

/// Hilbert-Schmidt distance growth of both transports against the exact
/// reference, with fitted log-log exponents over the configured window.
/// Exponents are reported as undefined when the distance sits at the
/// numerical floor (e.g. the harmonic limit).
pub fn run_distance(cfg: &RunConfig) -> Result<DistanceOutput, ExperimentError> {
    let model = cfg.model()?;
    let state = cfg.state()?;
    require_minimal(&state)?;
    let grid = cfg.grid()?;
    let times = cfg.resolved_output_times();
    check_times(&times)?;
    let params = EffectiveParams::new(model, state);

    let h = exact::hamiltonian_matrix(&model, cfg.exact_n_levels)?;
    let psi0 = exact::coherent_state(state.x0(), state.p0(), cfg.exact_n_levels)?;
    let snaps = exact::propagate(&psi0, &h, &times, cfg.exact_dt)?;
    let exact_fields: Vec<WignerField> = snaps
        .iter()
        .map(|s| exact::wigner_field(s, &grid, cfg.wigner_y_points))
        .collect::<Result<_, _>>()?;

    let mut table = TimeSeries::new(times.clone())?;
    table.push_column(
        "purity_exact",
        exact_fields.iter().map(metrics::purity).collect(),
    )?;

    let mut escaped_nodes = 0;
    for &method in &cfg.methods {
        let mut d2 = Vec::with_capacity(times.len());
        let mut pur = Vec::with_capacity(times.len());
        for (&t, f_exact) in times.iter().zip(&exact_fields) {
            let transported = backward_map(method, &params, &grid, t, cfg.dt)?;
            escaped_nodes += transported.escaped;
            d2.push(metrics::hs_distance(f_exact, &transported.field)?);
            pur.push(metrics::purity(&transported.field));
        }
        table.push_column(&format!("d2_{}", method.name()), d2)?;
        table.push_column(&format!("purity_{}", method.name()), pur)?;
    }

    let slope_for = |method: Method| -> Option<f64> {
        if !cfg.methods.contains(&method) {
            return None;
        }
        let col = format!("d2_{}", method.name());
        let values = table.column(&col)?;
        let window: Vec<f64> = times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t >= cfg.fit_t_lo - 1e-12 && **t <= cfg.fit_t_hi + 1e-12)
            .map(|(_, v)| *v)
            .collect();
        let max = window.iter().copied().fold(0.0f64, f64::max);
        if max < 2.0 * DISTANCE_FLOOR {
            return None; // at floor: exponent undefined
        }
        metrics::loglog_slope(&table, &col, cfg.fit_t_lo, cfg.fit_t_hi).ok()
    };
    let slope_twa = slope_for(Method::Twa);
    let slope_vtwa = slope_for(Method::Vtwa);

    Ok(DistanceOutput {
        table,
        slope_twa,
        slope_vtwa,
        fit_window: (cfg.fit_t_lo, cfg.fit_t_hi),
        escaped_nodes,
    })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub slope_twa: Option<f64>,
    pub slope_vtwa: Option<f64>,
    pub d2_twa_end: Option<f64>,
    pub d2_vtwa_end: Option<f64>,
}

pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<SweepSummary, String>,
}

pub struct SweepOutput {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub all_ok: bool,
}

/// Apply a sweep value to a copy of the base configuration.
pub fn apply_sweep_value(cfg: &RunConfig, axis: SweepAxis, value: f64) -> RunConfig {
    let mut out = cfg.clone();
    match axis {
        SweepAxis::G => out.g = value,
        SweepAxis::X0 => out.x0 = value,
        SweepAxis::Sigma => {
            out.sigma_x = cfg.sigma_x * value;
            out.sigma_p = cfg.sigma_p * value;
        }
    }
    out
}

/// One distance summary per sweep value. Per-point failures are recorded and
/// the sweep continues; `all_ok` reflects them.
pub fn run_sweep(cfg: &RunConfig) -> SweepOutput {
    let mut rows = Vec::with_capacity(cfg.sweep_values.len());
    for &value in &cfg.sweep_values {
        let point = apply_sweep_value(cfg, cfg.sweep_axis, value);
        let outcome = match run_distance(&point) {
            Ok(out) => {
                let end = |method: Method| {
                    let col = format!("d2_{}", method.name());
                    let values = out.table.column(&col)?;
                    out.table
                        .times()
                        .iter()
                        .zip(values)
                        .filter(|(t, _)| **t <= point.fit_t_hi + 1e-12)
                        .map(|(_, v)| *v)
                        .next_back()
                };
                Ok(SweepSummary {
                    slope_twa: out.slope_twa,
                    slope_vtwa: out.slope_vtwa,
                    d2_twa_end: end(Method::Twa),
                    d2_vtwa_end: end(Method::Vtwa),
                })
            }
            Err(err) => Err(err.to_string()),
        };
        rows.push(SweepRow { value, outcome });
    }
    let all_ok = rows.iter().all(|r| r.outcome.is_ok());
    SweepOutput {
        axis: cfg.sweep_axis,
        rows,
        all_ok,
    }
}

// ---------------------------------------------------------------------------
// writers
// ---------------------------------------------------------------------------

fn float_or_nan(v: Option<f64>) -> String {
    match v {
        Some(v) => format_float(v),
        None => "nan".to_string(),
    }
}

/// Comma-separated table with a one-line header; floats carry 17 significant
/// digits so reruns are byte-comparable.
pub fn write_table(path: &Path, series: &TimeSeries) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let names: Vec<&str> = series.column_names().collect();
    writeln!(out, "t,{}", names.join(","))?;
    for (i, t) in series.times().iter().enumerate() {
        let mut row = vec![format_float(*t)];
        for name in &names {
            row.push(format_float(series.column(name).expect("listed column")[i]));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

/// Sidecar metadata: the full configuration plus run-specific entries, as
/// `key = value` lines.
pub fn write_meta(
    path: &Path,
    cfg: &RunConfig,
    extras: &[(String, String)],
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "code.version = {}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in cfg.to_pairs() {
        writeln!(out, "{k} = {v}")?;
    }
    for (k, v) in extras {
        writeln!(out, "{k} = {v}")?;
    }
    out.flush()
}

/// Grid snapshot as CSV: header row of p values, one row per x node.
pub fn write_field(path: &Path, field: &WignerField) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let grid = field.grid();
    let header: Vec<String> = (0..grid.n_p()).map(|j| format_float(grid.p(j))).collect();
    writeln!(out, "x,{}", header.join(","))?;
    for i in 0..grid.n_x() {
        let mut row = vec![format_float(grid.x(i))];
        for j in 0..grid.n_p() {
            row.push(format_float(field.value(i, j)));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

/// Per-check verification results as CSV.
pub fn write_verify_csv(path: &Path, report: &VerifyReport) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "check,g,sigma_x,sigma_p,x0,p0,residual,tolerance,pass")?;
    for c in &report.checks {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.name,
            format_float(c.g),
            format_float(c.sigma_x),
            format_float(c.sigma_p),
            format_float(c.x0),
            format_float(c.p0),
            format_float(c.residual),
            format_float(c.tolerance),
            c.pass
        )?;
    }
    out.flush()
}

/// Sweep rows as CSV; failed points carry their error message in `status`.
pub fn write_sweep_csv(path: &Path, sweep: &SweepOutput) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "{},status,slope_twa,slope_vtwa,d2_twa_end,d2_vtwa_end",
        sweep.axis.name()
    )?;
    for row in &sweep.rows {
        match &row.outcome {
            Ok(s) => writeln!(
                out,
                "{},ok,{},{},{},{}",
                format_float(row.value),
                float_or_nan(s.slope_twa),
                float_or_nan(s.slope_vtwa),
                float_or_nan(s.d2_twa_end),
                float_or_nan(s.d2_vtwa_end),
            )?,
            Err(msg) => writeln!(
                out,
                "{},failed: {},nan,nan,nan,nan",
                format_float(row.value),
                msg.replace(',', ";"),
            )?,
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> RunConfig {
        RunConfig {
            grid_n_x: 96,
            grid_p_min: -9.0,
            grid_p_max: 9.0,
            grid_n_p: 144,
            ensemble_n: 2000,
            wigner_y_points: 256,
            output_times: Some(vec![0.0, 0.05, 0.1, 0.15, 0.2]),
            t_max: 0.2,
            ..Default::default()
        }
    }

    #[test]
    fn verify_passes_and_fault_injection_fails() {
        let cfg = RunConfig::default();
        let report = run_verify(&cfg, false).unwrap();
        assert!(report.passed, "{}", report.summary());
        assert_eq!(report.tuples, 100);
        assert_eq!(report.checks.len(), 500);

        let faulted = run_verify(&cfg, true).unwrap();
        assert!(!faulted.passed);
        // The injected fault must show up in the optimality residual.
        assert!(faulted
            .checks
            .iter()
            .filter(|c| c.name.starts_with("optimality"))
            .all(|c| c.residual > 1e-6));
    }

    #[test]
    fn harmonic_verify_residuals_are_exactly_zero() {
        let cfg = RunConfig {
            g: 0.0,
            ..Default::default()
        };
        let report = run_verify(&cfg, false).unwrap();
        assert!(report.passed);
        for c in report.checks.iter().filter(|c| c.name != "u-invariance") {
            assert_eq!(c.residual, 0.0, "{} at g = {}", c.name, c.g);
        }
    }

    #[test]
    fn evolve_rejects_mixed_states() {
        let mut cfg = small_cfg();
        cfg.sigma_x = 1.0;
        cfg.sigma_p = 1.0;
        assert!(matches!(
            run_evolve(&cfg),
            Err(ExperimentError::NonMinimalState(_))
        ));
    }

    #[test]
    fn harmonic_evolve_centroids_agree() {
        let mut cfg = small_cfg();
        cfg.g = 0.0;
        cfg.ensemble_n = 500;
        let out = run_evolve(&cfg).unwrap();
        let ex = out.table.column("mean_x_exact").unwrap();
        let vt = out.table.column("x0_vtwa").unwrap();
        let tw = out.table.column("x0_twa_classical").unwrap();
        for i in 0..ex.len() {
            assert!((ex[i] - vt[i]).abs() < 1e-8);
            assert!((ex[i] - tw[i]).abs() < 1e-8);
        }
        assert_eq!(out.ensemble_blowups, 0);
    }

    #[test]
    fn distance_floor_at_zero_time_and_harmonic_slope_undefined() {
        let mut cfg = small_cfg();
        cfg.g = 0.0;
        cfg.output_times = Some(vec![0.0, 0.02, 0.05, 0.09, 0.13, 0.2]);
        let out = run_distance(&cfg).unwrap();
        for method in [Method::Twa, Method::Vtwa] {
            let d2 = out.table.column(&format!("d2_{}", method.name())).unwrap();
            assert!(d2.iter().all(|v| *v < DISTANCE_FLOOR), "{method}: {d2:?}");
            assert!(out.slope(method).is_none(), "{method} slope should be undefined");
        }
    }

    #[test]
    fn sweep_is_stateless() {
        let mut cfg = small_cfg();
        cfg.ensemble_n = 500;
        cfg.output_times = Some(vec![0.0, 0.05, 0.2]);
        cfg.sweep_values = vec![0.5, 1.0];
        let sweep = run_sweep(&cfg);
        assert!(sweep.all_ok);

        for row in &sweep.rows {
            let point = apply_sweep_value(&cfg, cfg.sweep_axis, row.value);
            let direct = run_distance(&point).unwrap();
            let summary = row.outcome.as_ref().unwrap();
            let col = direct.table.column("d2_twa").unwrap();
            assert_eq!(summary.d2_twa_end, Some(col[col.len() - 1]));
        }
    }

    #[test]
    fn sigma_sweep_records_failures_but_continues() {
        let mut cfg = small_cfg();
        cfg.ensemble_n = 500;
        cfg.output_times = Some(vec![0.0, 0.05, 0.2]);
        cfg.sweep_axis = SweepAxis::Sigma;
        cfg.sweep_values = vec![1.0, 2.0];
        let sweep = run_sweep(&cfg);
        assert!(!sweep.all_ok);
        assert!(sweep.rows[0].outcome.is_ok());
        let err = sweep.rows[1].outcome.as_ref().unwrap_err();
        assert!(err.contains("minimal-uncertainty"), "unexpected error: {err}");
    }
}
