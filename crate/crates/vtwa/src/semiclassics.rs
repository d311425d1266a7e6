//! Time propagation along characteristics: fixed-step RK4, the centroid
//! trajectory, forward trajectory ensembles, and noise-free backward grid
//! maps that transport the initial Gaussian by the method of characteristics.
//!
//! Work items (trajectories, grid nodes) are independent; parallel execution
//! writes each result into its own slot, so output is bit-identical for any
//! thread count.

use rayon::prelude::*;
use thiserror::Error;

use crate::effective::{centroid_rhs, twa_rhs, vtwa_rhs, EffectiveParams};
use crate::phase::{PhaseGrid, PhasePoint, TimeSeries, TrajectoryEnsemble, WignerField};

/// Excursions beyond this value flag a trajectory as blown up; the quartic
/// potential is confining, so they signal integration failure.
pub const BLOWUP_LIMIT: f64 = 1e3;

/// Abort threshold for the centroid integration.
pub const CENTROID_LIMIT: f64 = 1e6;

/// Fraction of blown-up trajectories above which an ensemble run fails.
pub const BLOWUP_FRACTION: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum PropagationError {
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("horizon must be positive, got {0}")]
    InvalidHorizon(f64),
    #[error("output times must be non-negative and strictly increasing")]
    InvalidOutputTimes,
    #[error("centroid trajectory blew up at t = {time:.6} (|x0| or |p0| > {CENTROID_LIMIT})")]
    CentroidBlowUp { time: f64 },
    #[error("{count} of {total} trajectories blew up (limit is {BLOWUP_FRACTION:.1e})")]
    TooManyBlowUps { count: usize, total: usize },
    #[error("centroid series lacks column `{0}`")]
    BadCentroidSeries(String),
}

/// Transport scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Characteristics of the true Hamiltonian.
    Twa,
    /// Characteristics of the effective Hamiltonian.
    Vtwa,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Twa => "twa",
            Method::Vtwa => "vtwa",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One classical fourth-order Runge-Kutta update of a phase-space point under
/// a (possibly time-dependent) vector field. `dt` may be negative for
/// backward integration.
pub fn rk4_step(
    rhs: &impl Fn(f64, PhasePoint) -> PhasePoint,
    t: f64,
    pt: PhasePoint,
    dt: f64,
) -> PhasePoint {
    let k1 = rhs(t, pt);
    let k2 = rhs(
        t + 0.5 * dt,
        PhasePoint::new(pt.x + 0.5 * dt * k1.x, pt.p + 0.5 * dt * k1.p),
    );
    let k3 = rhs(
        t + 0.5 * dt,
        PhasePoint::new(pt.x + 0.5 * dt * k2.x, pt.p + 0.5 * dt * k2.p),
    );
    let k4 = rhs(t + dt, PhasePoint::new(pt.x + dt * k3.x, pt.p + dt * k3.p));
    PhasePoint::new(
        pt.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        pt.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
    )
}

/// March from `t0` to `t1` with fixed steps of size `dt` (sign-adjusted) and
/// one final partial step so the endpoint is hit exactly. Returns `None` if
/// the orbit leaves the `limit` box (checked after every step).
fn march(
    rhs: &impl Fn(f64, PhasePoint) -> PhasePoint,
    t0: f64,
    t1: f64,
    dt: f64,
    start: PhasePoint,
    limit: f64,
) -> Option<PhasePoint> {
    let span = t1 - t0;
    if span == 0.0 {
        return Some(start);
    }
    let step = dt.abs() * span.signum();
    let n_full = (span / step).floor() as usize;
    let mut pt = start;
    let mut t = t0;
    for _ in 0..n_full {
        pt = rk4_step(rhs, t, pt, step);
        t += step;
        if !pt.is_finite() || pt.x.abs() > limit || pt.p.abs() > limit {
            return None;
        }
    }
    let rest = t1 - t;
    if rest.abs() > 1e-15 * t1.abs().max(1.0) {
        pt = rk4_step(rhs, t, pt, rest);
        if !pt.is_finite() || pt.x.abs() > limit || pt.p.abs() > limit {
            return None;
        }
    }
    Some(pt)
}

/// Centroid trajectory of the effective flow, stored at every step so the
/// ensemble and grid propagators can interpolate it.
pub fn integrate_centroid(
    params: &EffectiveParams,
    t_max: f64,
    dt: f64,
) -> Result<TimeSeries, PropagationError> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(PropagationError::InvalidStep(dt));
    }
    if t_max <= 0.0 || !t_max.is_finite() {
        return Err(PropagationError::InvalidHorizon(t_max));
    }
    let rhs = |_t: f64, pt: PhasePoint| centroid_rhs(params, pt);
    let mut times = Vec::new();
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    let mut pt = params.state().centroid();
    let mut t = 0.0;
    times.push(t);
    xs.push(pt.x);
    ps.push(pt.p);
    while t < t_max - 1e-15 * t_max {
        let step = dt.min(t_max - t);
        pt = rk4_step(&rhs, t, pt, step);
        t += step;
        if !pt.is_finite() || pt.x.abs() > CENTROID_LIMIT || pt.p.abs() > CENTROID_LIMIT {
            return Err(PropagationError::CentroidBlowUp { time: t });
        }
        times.push(t);
        xs.push(pt.x);
        ps.push(pt.p);
    }
    let mut series = TimeSeries::new(times).expect("strictly increasing by construction");
    series.push_column("x0", xs).expect("fresh column");
    series.push_column("p0", ps).expect("fresh column");
    Ok(series)
}

/// Linear-interpolation view of a centroid series, clamped at both ends.
pub struct CentroidPath {
    times: Vec<f64>,
    xs: Vec<f64>,
    ps: Vec<f64>,
}

impl CentroidPath {
    pub fn from_series(series: &TimeSeries) -> Result<Self, PropagationError> {
        let xs = series
            .column("x0")
            .ok_or_else(|| PropagationError::BadCentroidSeries("x0".into()))?;
        let ps = series
            .column("p0")
            .ok_or_else(|| PropagationError::BadCentroidSeries("p0".into()))?;
        Ok(Self {
            times: series.times().to_vec(),
            xs: xs.to_vec(),
            ps: ps.to_vec(),
        })
    }

    /// Centroid at time `t`, linearly interpolated within steps.
    pub fn at(&self, t: f64) -> PhasePoint {
        let n = self.times.len();
        if t <= self.times[0] {
            return PhasePoint::new(self.xs[0], self.ps[0]);
        }
        if t >= self.times[n - 1] {
            return PhasePoint::new(self.xs[n - 1], self.ps[n - 1]);
        }
        let idx = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).expect("finite times"))
        {
            Ok(i) => return PhasePoint::new(self.xs[i], self.ps[i]),
            Err(i) => i,
        };
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (t - t0) / (t1 - t0);
        PhasePoint::new(
            self.xs[idx - 1] + w * (self.xs[idx] - self.xs[idx - 1]),
            self.ps[idx - 1] + w * (self.ps[idx] - self.ps[idx - 1]),
        )
    }
}

/// Snapshots of a propagated ensemble plus per-trajectory failure records.
#[derive(Debug, Clone)]
pub struct EnsembleTransport {
    /// One ensemble per requested output time, in input order.
    pub snapshots: Vec<TrajectoryEnsemble>,
    /// Ids and failure times of trajectories that left the integration box;
    /// such points stay frozen at their last finite position.
    pub blowups: Vec<(usize, f64)>,
}

fn validate_times(t_out: &[f64]) -> Result<(), PropagationError> {
    let ordered = t_out.windows(2).all(|w| w[1] > w[0]);
    if t_out.is_empty() || t_out[0] < 0.0 || !ordered {
        return Err(PropagationError::InvalidOutputTimes);
    }
    Ok(())
}

fn flow_rhs<'a>(
    method: Method,
    params: &'a EffectiveParams,
    path: Option<&'a CentroidPath>,
) -> impl Fn(f64, PhasePoint) -> PhasePoint + 'a {
    move |t, pt| match method {
        Method::Twa => twa_rhs(params.model(), pt),
        Method::Vtwa => {
            let centroid = path.expect("vtwa flow requires a centroid path").at(t);
            vtwa_rhs(params, centroid, pt)
        }
    }
}

/// Ungated transport: advances every point and records blow-ups without
/// failing the run. The experiment layer uses this to report how far an
/// ensemble remains trustworthy (the effective flow is not confining, so
/// far-out points genuinely escape at finite times).
pub(crate) fn transport_ensemble(
    method: Method,
    params: &EffectiveParams,
    ensemble: &TrajectoryEnsemble,
    t_out: &[f64],
    dt: f64,
) -> Result<EnsembleTransport, PropagationError> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(PropagationError::InvalidStep(dt));
    }
    validate_times(t_out)?;
    let t_end = *t_out.last().expect("nonempty");
    let path = match method {
        Method::Twa => None,
        Method::Vtwa => {
            if t_end > 0.0 {
                let series = integrate_centroid(params, t_end, dt)?;
                Some(CentroidPath::from_series(&series)?)
            } else {
                None
            }
        }
    };
    if t_end == 0.0 {
        return Ok(EnsembleTransport {
            snapshots: vec![ensemble.clone()],
            blowups: Vec::new(),
        });
    }
    let rhs = flow_rhs(method, params, path.as_ref());

    // Each item yields the full snapshot row for one trajectory.
    let per_point: Vec<(Vec<PhasePoint>, Option<f64>)> = ensemble
        .points()
        .par_iter()
        .map(|&start| {
            let mut out = Vec::with_capacity(t_out.len());
            let mut pt = start;
            let mut t = 0.0;
            let mut failed_at = None;
            for &target in t_out {
                if failed_at.is_none() {
                    match march(&rhs, t, target, dt, pt, BLOWUP_LIMIT) {
                        Some(next) => pt = next,
                        None => failed_at = Some(target),
                    }
                    t = target;
                }
                out.push(pt);
            }
            (out, failed_at)
        })
        .collect();

    let blowups: Vec<(usize, f64)> = per_point
        .iter()
        .enumerate()
        .filter_map(|(id, (_, failed))| failed.map(|t| (id, t)))
        .collect();
    let snapshots = (0..t_out.len())
        .map(|snap| {
            let points = per_point.iter().map(|(row, _)| row[snap]).collect();
            TrajectoryEnsemble::new(points, ensemble.base_seed()).expect("nonempty")
        })
        .collect();
    Ok(EnsembleTransport { snapshots, blowups })
}

/// Advance every ensemble point independently along the selected flow,
/// emitting a snapshot at each requested time. Deterministic for a given
/// (ensemble, dt) regardless of thread count; fails if more than
/// `BLOWUP_FRACTION` of the trajectories blow up.
pub fn propagate_ensemble(
    method: Method,
    params: &EffectiveParams,
    ensemble: &TrajectoryEnsemble,
    t_out: &[f64],
    dt: f64,
) -> Result<EnsembleTransport, PropagationError> {
    let out = transport_ensemble(method, params, ensemble, t_out, dt)?;
    if out.blowups.len() as f64 > BLOWUP_FRACTION * ensemble.len() as f64 {
        return Err(PropagationError::TooManyBlowUps {
            count: out.blowups.len(),
            total: ensemble.len(),
        });
    }
    Ok(out)
}

/// A transported field plus the count of grid nodes whose backward orbit left
/// the safety box (their value is set to zero).
pub struct TransportField {
    pub field: WignerField,
    pub escaped: usize,
}

/// Noise-free Liouville transport onto a grid: integrate every node backward
/// from `t` to 0 and evaluate the initial Gaussian at the pre-image. Classical
/// flows preserve phase-space volume, so the result is a density up to ODE
/// and quadrature error, and it is non-negative by construction.
pub fn backward_map(
    method: Method,
    params: &EffectiveParams,
    grid: &PhaseGrid,
    t: f64,
    dt: f64,
) -> Result<TransportField, PropagationError> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(PropagationError::InvalidStep(dt));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(PropagationError::InvalidHorizon(t));
    }
    let path = match method {
        Method::Twa => None,
        Method::Vtwa => {
            if t > 0.0 {
                let series = integrate_centroid(params, t, dt)?;
                Some(CentroidPath::from_series(&series)?)
            } else {
                None
            }
        }
    };
    let rhs = flow_rhs(method, params, path.as_ref());
    let state = params.state();

    let rows: Vec<Vec<f64>> = (0..grid.n_x())
        .into_par_iter()
        .map(|i| {
            (0..grid.n_p())
                .map(|j| match march(&rhs, t, 0.0, dt, grid.node(i, j), BLOWUP_LIMIT) {
                    Some(pre) => state.eval(pre),
                    None => f64::NAN, // marked; counted below
                })
                .collect()
        })
        .collect();

    let mut escaped = 0;
    let mut values = Vec::with_capacity(grid.n_nodes());
    for row in rows {
        for v in row {
            if v.is_nan() {
                escaped += 1;
                values.push(0.0);
            } else {
                values.push(v);
            }
        }
    }
    let field = WignerField::new(*grid, values).expect("grid-shaped values");
    Ok(TransportField { field, escaped })
}
