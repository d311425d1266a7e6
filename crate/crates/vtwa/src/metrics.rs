//! Hilbert-Schmidt distance between Wigner fields, purity, log-log growth
//! exponents, and centroid-error comparison between exact and trial series.

use thiserror::Error;

use crate::phase::{PhaseError, Quadrature, TimeSeries, WignerField};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("log-log fit needs strictly positive values in the window")]
    NonPositiveValues,
    #[error("log-log fit needs at least 5 points in the window, found {0}")]
    TooFewPoints(usize),
    #[error("time grids are not aligned")]
    MisalignedTimes,
    #[error(transparent)]
    Series(#[from] PhaseError),
}

/// Hilbert-Schmidt distance between the states underlying two Wigner fields:
/// D2 = sqrt(2 pi * Int (f - g)^2 dx dp) in natural units. Symmetric,
/// non-negative, and zero for identical fields.
pub fn hs_distance(a: &WignerField, b: &WignerField) -> Result<f64, MetricsError> {
    if a.grid() != b.grid() {
        return Err(MetricsError::GridMismatch);
    }
    let diff = WignerField::new(
        *a.grid(),
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x - y)
            .collect(),
    )
    .expect("same grid");
    let sq = diff.integrate_with_rule(Quadrature::Trapezoid, |v| v * v);
    Ok((2.0 * std::f64::consts::PI * sq).sqrt())
}

/// Purity 2 pi * Int f^2 dx dp: one for pure states, below one otherwise.
pub fn purity(f: &WignerField) -> f64 {
    2.0 * std::f64::consts::PI * f.integrate_with_rule(Quadrature::Trapezoid, |v| v * v)
}

/// Least-squares slope of log(value) against log(t) over the window
/// [t_lo, t_hi]. Requires at least 5 strictly positive samples there.
pub fn loglog_slope(
    series: &TimeSeries,
    column: &str,
    t_lo: f64,
    t_hi: f64,
) -> Result<f64, MetricsError> {
    let values = series.require_column(column)?;
    let pairs: Vec<(f64, f64)> = series
        .times()
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_lo - 1e-12 && **t <= t_hi + 1e-12)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pairs.len() < 5 {
        return Err(MetricsError::TooFewPoints(pairs.len()));
    }
    if pairs.iter().any(|(t, v)| *v <= 0.0 || *t <= 0.0) {
        return Err(MetricsError::NonPositiveValues);
    }
    let logs: Vec<(f64, f64)> = pairs.iter().map(|(t, v)| (t.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    Ok(sxy / sxx)
}

/// Per-time absolute centroid errors |mean_x - x0| and |mean_p - p0| between
/// an exact series (columns `mean_x`, `mean_p`) and a trial series (columns
/// `x0`, `p0`) on the same time grid. Output columns: `err_x`, `err_p`.
pub fn compare_moments(
    exact: &TimeSeries,
    trial: &TimeSeries,
) -> Result<TimeSeries, MetricsError> {
    if exact.len() != trial.len()
        || exact
            .times()
            .iter()
            .zip(trial.times())
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(MetricsError::MisalignedTimes);
    }
    let ex = exact.require_column("mean_x")?;
    let ep = exact.require_column("mean_p")?;
    let tx = trial.require_column("x0")?;
    let tp = trial.require_column("p0")?;
    let mut out = TimeSeries::new(exact.times().to_vec())?;
    out.push_column(
        "err_x",
        ex.iter().zip(tx).map(|(a, b)| (a - b).abs()).collect(),
    )?;
    out.push_column(
        "err_p",
        ep.iter().zip(tp).map(|(a, b)| (a - b).abs()).collect(),
    )?;
    Ok(out)
}
