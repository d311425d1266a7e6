//! Flat key=value run configuration. Diff-friendly, no structured-format
//! dependency; every key has a default, unknown keys are rejected, and the
//! full configuration round-trips through [`RunConfig::to_pairs`] so output
//! metadata can reproduce any run.

use std::path::Path;

use thiserror::Error;

use crate::phase::{GaussianWignerState, PhaseError, PhaseGrid, QuarticModel};
use crate::semiclassics::Method;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`, got `{content}`")]
    BadLine { line: usize, content: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: cannot parse `{value}` ({reason})")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error(transparent)]
    Domain(#[from] PhaseError),
}

/// Axis of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Quartic coupling `model.g`.
    G,
    /// Initial centroid position `state.x0`.
    X0,
    /// Multiplies both widths by the value; only the value 1 keeps the state
    /// minimal-uncertainty (and hence comparable with the exact reference).
    Sigma,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::G => "g",
            SweepAxis::X0 => "x0",
            SweepAxis::Sigma => "sigma",
        }
    }
}

/// All run parameters. Field values mirror the config keys; domain objects
/// are built (and validated) on demand by the accessor methods.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub g: f64,
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub t_max: f64,
    pub dt: f64,
    /// Output/snapshot times for tables; `None` selects the default layout
    /// (zero, a log-spaced fit window, then a sparse tail up to `t_max`).
    pub output_times: Option<Vec<f64>>,
    pub grid_x_min: f64,
    pub grid_x_max: f64,
    pub grid_n_x: usize,
    pub grid_p_min: f64,
    pub grid_p_max: f64,
    pub grid_n_p: usize,
    pub ensemble_n: usize,
    pub seed: u64,
    pub fit_t_lo: f64,
    pub fit_t_hi: f64,
    pub methods: Vec<Method>,
    pub exact_n_levels: usize,
    pub exact_dt: f64,
    pub wigner_y_points: usize,
    /// Times at which `evolve` writes full grid snapshots (empty: none).
    pub snapshot_times: Vec<f64>,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            x0: 1.0,
            p0: 0.0,
            sigma_x: std::f64::consts::FRAC_1_SQRT_2,
            sigma_p: std::f64::consts::FRAC_1_SQRT_2,
            t_max: 1.0,
            dt: 1e-3,
            output_times: None,
            // The x range covers the packet; the taller p range keeps the
            // momentum excursions of the energetic tail (|p| up to
            // sqrt(2 H)) on the grid for horizons up to t ~ 2. The node
            // counts resolve the filaments the effective flow develops by
            // t ~ 1, where the distance integral stops changing under
            // refinement.
            grid_x_min: -6.0,
            grid_x_max: 6.0,
            grid_n_x: 512,
            grid_p_min: -12.0,
            grid_p_max: 12.0,
            grid_n_p: 768,
            ensemble_n: 100_000,
            seed: 12345,
            fit_t_lo: 0.02,
            fit_t_hi: 0.2,
            methods: vec![Method::Twa, Method::Vtwa],
            exact_n_levels: crate::exact::DEFAULT_N_LEVELS,
            exact_dt: crate::exact::DEFAULT_DT,
            wigner_y_points: 512,
            snapshot_times: Vec::new(),
            sweep_axis: SweepAxis::G,
            sweep_values: vec![0.0, 0.1, 1.0],
        }
    }
}

impl RunConfig {
    pub fn model(&self) -> Result<QuarticModel, ConfigError> {
        Ok(QuarticModel::new(self.g)?)
    }

    pub fn state(&self) -> Result<GaussianWignerState, ConfigError> {
        Ok(GaussianWignerState::new(
            self.x0,
            self.p0,
            self.sigma_x,
            self.sigma_p,
        )?)
    }

    pub fn grid(&self) -> Result<PhaseGrid, ConfigError> {
        Ok(PhaseGrid::new(
            self.grid_x_min,
            self.grid_x_max,
            self.grid_n_x,
            self.grid_p_min,
            self.grid_p_max,
            self.grid_n_p,
        )?)
    }

    /// The table times: configured explicitly, or zero plus a log-spaced fit
    /// window plus a sparse tail to `t_max`.
    pub fn resolved_output_times(&self) -> Vec<f64> {
        if let Some(ts) = &self.output_times {
            return ts.clone();
        }
        let mut ts = vec![0.0];
        let n_fit = 12;
        for k in 0..n_fit {
            let f = k as f64 / (n_fit - 1) as f64;
            let t = self.fit_t_lo * (self.fit_t_hi / self.fit_t_lo).powf(f);
            ts.push(t.min(self.t_max));
        }
        let mut tail = self.fit_t_hi + 0.2;
        while tail < self.t_max - 1e-12 {
            ts.push(tail);
            tail += 0.2;
        }
        if self.t_max > self.fit_t_hi {
            ts.push(self.t_max);
        }
        ts.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        ts
    }

    pub fn parse_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    /// Parse `key = value` lines on top of the defaults. `#` starts a
    /// comment; later assignments win.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::BadLine {
                line: idx + 1,
                content: raw.to_string(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        match key {
            "model.g" => self.g = parse_f64(key, value)?,
            "state.x0" => self.x0 = parse_f64(key, value)?,
            "state.p0" => self.p0 = parse_f64(key, value)?,
            "state.sigma_x" => self.sigma_x = parse_f64(key, value)?,
            "state.sigma_p" => self.sigma_p = parse_f64(key, value)?,
            "time.t_max" => self.t_max = parse_f64(key, value)?,
            "time.dt" => self.dt = parse_f64(key, value)?,
            "time.outputs" => self.output_times = Some(parse_f64_list(key, value)?),
            "grid.x_min" => self.grid_x_min = parse_f64(key, value)?,
            "grid.x_max" => self.grid_x_max = parse_f64(key, value)?,
            "grid.n_x" => self.grid_n_x = parse_usize(key, value)?,
            "grid.p_min" => self.grid_p_min = parse_f64(key, value)?,
            "grid.p_max" => self.grid_p_max = parse_f64(key, value)?,
            "grid.n_p" => self.grid_n_p = parse_usize(key, value)?,
            "ensemble.n" => self.ensemble_n = parse_usize(key, value)?,
            "ensemble.seed" => {
                self.seed = value.parse().map_err(|_| bad("expected unsigned integer"))?
            }
            "fit.t_lo" => self.fit_t_lo = parse_f64(key, value)?,
            "fit.t_hi" => self.fit_t_hi = parse_f64(key, value)?,
            "methods" => {
                let mut methods = Vec::new();
                for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    match part.to_ascii_lowercase().as_str() {
                        "twa" => methods.push(Method::Twa),
                        "vtwa" => methods.push(Method::Vtwa),
                        _ => return Err(bad("expected `twa` or `vtwa`")),
                    }
                }
                if methods.is_empty() {
                    return Err(bad("needs at least one method"));
                }
                self.methods = methods;
            }
            "exact.n_levels" => self.exact_n_levels = parse_usize(key, value)?,
            "exact.dt" => self.exact_dt = parse_f64(key, value)?,
            "wigner.y_points" => self.wigner_y_points = parse_usize(key, value)?,
            "output.snapshot_times" => self.snapshot_times = parse_f64_list(key, value)?,
            "sweep.axis" => {
                self.sweep_axis = match value.to_ascii_lowercase().as_str() {
                    "g" => SweepAxis::G,
                    "x0" => SweepAxis::X0,
                    "sigma" => SweepAxis::Sigma,
                    _ => return Err(bad("expected `g`, `x0`, or `sigma`")),
                }
            }
            "sweep.values" => self.sweep_values = parse_f64_list(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order; parsing these
    /// pairs back reproduces the configuration exactly.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut pairs = vec![
            ("model.g".into(), format_float(self.g)),
            ("state.x0".into(), format_float(self.x0)),
            ("state.p0".into(), format_float(self.p0)),
            ("state.sigma_x".into(), format_float(self.sigma_x)),
            ("state.sigma_p".into(), format_float(self.sigma_p)),
            ("time.t_max".into(), format_float(self.t_max)),
            ("time.dt".into(), format_float(self.dt)),
        ];
        if let Some(ts) = &self.output_times {
            pairs.push(("time.outputs".into(), join_floats(ts)));
        }
        pairs.extend([
            ("grid.x_min".into(), format_float(self.grid_x_min)),
            ("grid.x_max".into(), format_float(self.grid_x_max)),
            ("grid.n_x".into(), self.grid_n_x.to_string()),
            ("grid.p_min".into(), format_float(self.grid_p_min)),
            ("grid.p_max".into(), format_float(self.grid_p_max)),
            ("grid.n_p".into(), self.grid_n_p.to_string()),
            ("ensemble.n".into(), self.ensemble_n.to_string()),
            ("ensemble.seed".into(), self.seed.to_string()),
            ("fit.t_lo".into(), format_float(self.fit_t_lo)),
            ("fit.t_hi".into(), format_float(self.fit_t_hi)),
            (
                "methods".into(),
                self.methods
                    .iter()
                    .map(Method::name)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("exact.n_levels".into(), self.exact_n_levels.to_string()),
            ("exact.dt".into(), format_float(self.exact_dt)),
            ("wigner.y_points".into(), self.wigner_y_points.to_string()),
        ]);
        if !self.snapshot_times.is_empty() {
            pairs.push(("output.snapshot_times".into(), join_floats(&self.snapshot_times)));
        }
        pairs.push(("sweep.axis".into(), self.sweep_axis.name().to_string()));
        pairs.push(("sweep.values".into(), join_floats(&self.sweep_values)));
        pairs
    }
}

/// 17 significant digits: enough for bit-faithful f64 round trips.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn join_floats(vs: &[f64]) -> String {
    vs.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(",")
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: "expected a real number".to_string(),
    })
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: "expected a non-negative integer".to_string(),
    })
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}
