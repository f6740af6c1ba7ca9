//! Grid sweeps over the three g² routes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use upb_core::fluct::{g2_semiclassical, FluctOptions};
use upb_core::master::{steady_state, SteadyOptions, DEFAULT_DIMS, LADDER_TOL, RESIDUAL_TOL};
use upb_core::model::{Direction, HamiltonianKind, ReducedParams};
use upb_core::weakdrive::{g2_weakdrive, AmplitudeVariant};

use crate::config::{Config, ConfigError};

/// Which computation produces g².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Lindblad steady state on a truncated Fock space.
    Master,
    /// Mean field plus linearized Gaussian fluctuations.
    Semiclassical,
    /// Two-photon wavefunction ansatz.
    Weakdrive,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Master, Route::Semiclassical, Route::Weakdrive];

    pub fn as_str(self) -> &'static str {
        match self {
            Route::Master => "master",
            Route::Semiclassical => "semiclassical",
            Route::Weakdrive => "weakdrive",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Route {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "master" | "me" => Ok(Route::Master),
            "semiclassical" | "linearized" => Ok(Route::Semiclassical),
            "weakdrive" | "weak-drive" => Ok(Route::Weakdrive),
            other => Err(format!(
                "unknown route '{other}' (expected master, semiclassical or weakdrive)"
            )),
        }
    }
}

/// The swept quantity and its unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptVariable {
    DetuningOverKappa,
    OmegaSpinRadS,
    OmegaSpinHz,
    GOverKappa,
    JOverKappa,
    TemperatureK,
}

impl SweptVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweptVariable::DetuningOverKappa => "detuning_over_kappa",
            SweptVariable::OmegaSpinRadS => "omega_spin_rad_s",
            SweptVariable::OmegaSpinHz => "omega_spin_hz",
            SweptVariable::GOverKappa => "g_over_kappa",
            SweptVariable::JOverKappa => "j_over_kappa",
            SweptVariable::TemperatureK => "temperature_k",
        }
    }
}

impl FromStr for SweptVariable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.trim().to_owned())).map_err(|_| {
            format!(
                "unknown sweep variable '{s}' (expected detuning_over_kappa, omega_spin_rad_s, omega_spin_hz, \
                 g_over_kappa, j_over_kappa or temperature_k)"
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub variable: SweptVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub routes: Vec<Route>,
    pub directions: Vec<Direction>,
}

impl SweepSpec {
    pub fn validated(mut self) -> Result<Self, ConfigError> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(ConfigError::Sweep(format!("step must be positive, got {}", self.step)));
        }
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(ConfigError::Sweep(format!(
                "need start < stop, got {} .. {}",
                self.start, self.stop
            )));
        }
        if self.routes.is_empty() {
            return Err(ConfigError::Sweep("at least one route is required".into()));
        }
        if self.directions.is_empty() {
            return Err(ConfigError::Sweep("at least one drive direction is required".into()));
        }
        dedup_sorted(&mut self.routes);
        dedup_sorted(&mut self.directions);
        Ok(self)
    }

    /// `start + k·step` up to and including `stop` (within a relative slack
    /// of 1e-9 steps).
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

fn dedup_sorted<T: Ord>(v: &mut Vec<T>) {
    v.sort();
    v.dedup();
}

/// Numerical settings shared by all routes.
#[derive(Clone, Debug, PartialEq)]
pub struct RouteSettings {
    pub truncation: [usize; 3],
    pub hamiltonian: HamiltonianKind,
    pub steady: SteadyOptions,
    pub fluct: FluctOptions,
    pub amplitudes: AmplitudeVariant,
}

impl Default for RouteSettings {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_DIMS,
            hamiltonian: HamiltonianKind::FullOm,
            steady: SteadyOptions::default(),
            fluct: FluctOptions::default(),
            amplitudes: AmplitudeVariant::Kerr,
        }
    }
}

impl RouteSettings {
    pub fn from_config(cfg: &Config, truncation: Option<[usize; 3]>) -> Self {
        Self {
            truncation: truncation.or(cfg.truncation).unwrap_or(DEFAULT_DIMS),
            hamiltonian: cfg.hamiltonian,
            ..Self::default()
        }
    }
}

/// g² at one point; `None` with an `error: …` status on failure.
#[derive(Clone, Debug, PartialEq)]
pub struct PointOutcome {
    pub g2: Option<f64>,
    pub status: String,
}

pub const STATUS_OK: &str = "ok";
/// Master solve finished above the residual tolerance; the value is kept.
pub const STATUS_UNCONVERGED: &str = "unconverged";

pub fn evaluate(route: Route, rp: &ReducedParams, settings: &RouteSettings) -> PointOutcome {
    let value = match route {
        Route::Master => steady_state(rp, settings.hamiltonian, &settings.truncation, &settings.steady)
            .map(|r| (r.g2_l, r.converged))
            .map_err(|e| e.to_string()),
        Route::Semiclassical => g2_semiclassical(rp, &settings.fluct)
            .map(|r| (r.g2, true))
            .map_err(|e| e.to_string()),
        Route::Weakdrive => g2_weakdrive(rp, settings.amplitudes)
            .map(|g| (g, true))
            .map_err(|e| e.to_string()),
    };
    match value {
        Ok((g2, _)) if !g2.is_finite() => PointOutcome {
            g2: None,
            status: format!("error: non-finite g2 ({g2})"),
        },
        Ok((g2, converged)) => PointOutcome {
            g2: Some(g2),
            status: if converged { STATUS_OK } else { STATUS_UNCONVERGED }.to_owned(),
        },
        Err(e) => PointOutcome {
            g2: None,
            status: format!("error: {e}"),
        },
    }
}

/// One route and direction across the grid. `g2[k]` is `None` (NaN) exactly
/// when `status[k]` starts with `error`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub route: Route,
    pub direction: Direction,
    pub g2: Vec<Option<f64>>,
    pub status: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub config: String,
    pub variable: SweptVariable,
    /// Parameters before the sweep variable is applied, for the first
    /// direction.
    pub parameters: ReducedParams,
    pub truncation: [usize; 3],
    pub hamiltonian: HamiltonianKind,
    pub residual_tol: f64,
    pub ladder_tol: f64,
    pub quad_rel_tol: f64,
    #[serde(default)]
    pub annotations: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub series: Vec<Series>,
    pub metadata: Metadata,
}

impl SweepResult {
    pub fn series(&self, route: Route, direction: Direction) -> Option<&Series> {
        self.series
            .iter()
            .find(|s| s.route == route && s.direction == direction)
    }

    /// Number of points that ended in an error.
    pub fn failures(&self) -> usize {
        self.series.iter().flat_map(|s| &s.g2).filter(|g| g.is_none()).count()
    }

    pub fn points(&self) -> usize {
        self.series.iter().map(|s| s.g2.len()).sum()
    }
}

pub fn metadata(cfg: &Config, spec: &SweepSpec, settings: &RouteSettings) -> Result<Metadata, ConfigError> {
    Ok(Metadata {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: cfg.name.clone(),
        variable: spec.variable,
        parameters: cfg.reduced(None, spec.directions[0])?,
        truncation: settings.truncation,
        hamiltonian: settings.hamiltonian,
        residual_tol: RESIDUAL_TOL,
        ladder_tol: LADDER_TOL,
        quad_rel_tol: settings.fluct.quad.rel_tol,
        annotations: BTreeMap::new(),
    })
}

/// Runs `f` on a pool of `jobs` threads (all cores when `None`).
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running serially");
            f()
        }
    }
}

/// Evaluates every grid point on every route and direction. Point failures
/// are recorded in the result; only an invalid configuration aborts.
pub fn run_sweep(
    cfg: &Config,
    spec: &SweepSpec,
    settings: &RouteSettings,
    jobs: Option<usize>,
) -> Result<SweepResult, ConfigError> {
    let spec = spec.clone().validated()?;
    let grid = spec.grid();
    let mut params = Vec::with_capacity(grid.len() * spec.directions.len());
    for &d in &spec.directions {
        for &x in &grid {
            params.push(cfg.reduced(Some((spec.variable, x)), d)?);
        }
    }
    let n = grid.len();
    let nd = spec.directions.len();
    let tasks: Vec<(usize, usize, usize)> = (0..spec.routes.len() * nd * n)
        .map(|i| (i / (nd * n), (i / n) % nd, i % n))
        .collect();
    let outcomes: Vec<PointOutcome> = with_pool(jobs, || {
        tasks
            .par_iter()
            .map(|&(r, d, k)| evaluate(spec.routes[r], &params[d * n + k], settings))
            .collect()
    });
    let mut series = Vec::new();
    for (r, &route) in spec.routes.iter().enumerate() {
        for (d, &direction) in spec.directions.iter().enumerate() {
            let at = (r * spec.directions.len() + d) * n;
            let chunk = &outcomes[at..at + n];
            series.push(Series {
                route,
                direction,
                g2: chunk.iter().map(|o| o.g2).collect(),
                status: chunk.iter().map(|o| o.status.clone()).collect(),
            });
        }
    }
    Ok(SweepResult {
        grid,
        series,
        metadata: metadata(cfg, &spec, settings)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(routes: Vec<Route>) -> SweepSpec {
        SweepSpec {
            variable: SweptVariable::DetuningOverKappa,
            start: -0.4,
            stop: -0.2,
            step: 0.1,
            routes,
            directions: vec![Direction::Cw, Direction::Ccw],
        }
    }

    #[test]
    fn grid_includes_stop() {
        let g = spec(vec![Route::Master]).grid();
        assert_eq!(g.len(), 3);
        assert!((g[2] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn empty_route_set_is_rejected() {
        assert!(matches!(spec(vec![]).validated(), Err(ConfigError::Sweep(_))));
        let mut s = spec(vec![Route::Master]);
        s.step = 0.0;
        assert!(s.validated().is_err());
        let mut s = spec(vec![Route::Master]);
        s.stop = s.start;
        assert!(s.validated().is_err());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let cfg = Config::load("case2", &[]).unwrap();
        let s = spec(vec![Route::Weakdrive, Route::Master]);
        let settings = RouteSettings {
            truncation: [3, 3, 3],
            ..RouteSettings::from_config(&cfg, None)
        };
        let a = run_sweep(&cfg, &s, &settings, Some(1)).unwrap();
        let b = run_sweep(&cfg, &s, &settings, Some(3)).unwrap();
        assert_eq!(a, b);
        // Sorted routes and directions.
        assert_eq!(a.series[0].route, Route::Master);
        assert_eq!(a.series[0].direction, Direction::Ccw);
        assert_eq!(a.series.len(), 4);
        assert_eq!(a.failures(), 0);
    }

    #[test]
    fn failing_point_is_isolated() {
        let cfg = Config::load("case1", &[]).unwrap();
        let s = SweepSpec {
            variable: SweptVariable::GOverKappa,
            start: 0.0,
            stop: 0.1,
            step: 0.1,
            routes: vec![Route::Weakdrive],
            directions: vec![Direction::Ccw],
        };
        let cfg = Config {
            overrides: upb_core::model::DimensionlessOverrides {
                eps_d: Some(0.0),
                ..cfg.overrides.clone()
            },
            ..cfg
        };
        let r = run_sweep(&cfg, &s, &RouteSettings::default(), Some(1)).unwrap();
        let ser = &r.series[0];
        assert!(ser.g2.iter().all(Option::is_none));
        assert!(ser.status.iter().all(|s| s.starts_with("error")));
    }

    #[test]
    fn route_names() {
        for r in Route::ALL {
            assert_eq!(r.as_str().parse::<Route>().unwrap(), r);
        }
        assert!("qutip".parse::<Route>().is_err());
        assert_eq!(
            "temperature_k".parse::<SweptVariable>().unwrap(),
            SweptVariable::TemperatureK
        );
    }
}
