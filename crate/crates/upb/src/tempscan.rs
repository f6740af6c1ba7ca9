//! Temperature dependence of the nonreciprocal dip at the optimal point.

use rayon::prelude::*;
use upb_core::model::Direction;
use upb_core::weakdrive::optimal_params;

use crate::config::{Config, ConfigError};
use crate::sweep::{
    evaluate, metadata, with_pool, Route, RouteSettings, Series, SweepResult, SweepSpec, SweptVariable,
};

/// Bath temperatures scanned by default, in kelvin.
pub const DEFAULT_TEMPERATURES_K: [f64; 11] = [1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 3e-3, 4e-3, 5e-3, 6e-3, 8e-3, 1e-2];

/// Truncation used when neither the command line nor the config sets one;
/// the phonon mode needs room for a few thermal quanta at 10 mK.
pub const TEMPSCAN_DIMS: [usize; 3] = [4, 4, 8];

/// Direction ratio below which the response counts as reciprocal.
pub const RATIO_THRESHOLD: f64 = 2.0;

#[derive(Debug, thiserror::Error)]
pub enum TempScanError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no optimal point: {0}")]
    NoOptimum(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TempScan {
    pub result: SweepResult,
    /// The direction the optimum was computed for.
    pub dip: Direction,
    pub delta_opt: f64,
    pub g_opt: f64,
    /// `g²(opposite)/g²(dip)` per temperature.
    pub ratio: Vec<Option<f64>>,
    /// First scanned temperature where the ratio is below
    /// [`RATIO_THRESHOLD`].
    pub crossing_k: Option<f64>,
}

/// Master-route `g²` against temperature for both directions at the
/// optimum of `dip`.
pub fn run_tempscan(
    cfg: &Config,
    temperatures_k: &[f64],
    dip: Direction,
    settings: &RouteSettings,
    jobs: Option<usize>,
) -> Result<TempScan, TempScanError> {
    if temperatures_k.is_empty() || temperatures_k.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(ConfigError::Sweep("temperatures must be finite and non-negative".into()).into());
    }
    let rp = cfg.reduced(None, dip)?;
    let opt = optimal_params(rp.j, rp.kappa_l, rp.omega_m, rp.delta_f)
        .map_err(|e| TempScanError::NoOptimum(e.to_string()))?;
    let at = Config {
        overrides: upb_core::model::DimensionlessOverrides {
            g: Some(opt.g_opt),
            detuning: Some(opt.delta_opt),
            ..cfg.overrides.clone()
        },
        ..cfg.clone()
    };
    let directions = [dip, dip.reversed()];
    let mut params = Vec::new();
    for d in directions {
        for &t in temperatures_k {
            params.push(at.reduced(Some((SweptVariable::TemperatureK, t)), d)?);
        }
    }
    let outcomes: Vec<_> = with_pool(jobs, || {
        params
            .par_iter()
            .map(|p| evaluate(Route::Master, p, settings))
            .collect()
    });
    let n = temperatures_k.len();
    let mut series: Vec<Series> = directions
        .iter()
        .enumerate()
        .map(|(i, &d)| Series {
            route: Route::Master,
            direction: d,
            g2: outcomes[i * n..(i + 1) * n].iter().map(|o| o.g2).collect(),
            status: outcomes[i * n..(i + 1) * n].iter().map(|o| o.status.clone()).collect(),
        })
        .collect();
    let ratio: Vec<Option<f64>> = (0..n)
        .map(|k| match (series[0].g2[k], series[1].g2[k]) {
            (Some(a), Some(b)) if a > 0.0 => Some(b / a),
            _ => None,
        })
        .collect();
    let crossing_k = ratio
        .iter()
        .zip(temperatures_k)
        .find(|(r, _)| r.is_some_and(|r| r < RATIO_THRESHOLD))
        .map(|(_, t)| *t);
    series.sort_by_key(|s| s.direction);
    let spec = SweepSpec {
        variable: SweptVariable::TemperatureK,
        start: 0.0,
        stop: 1.0,
        step: 1.0,
        routes: vec![Route::Master],
        directions: vec![dip],
    };
    let mut meta = metadata(&at, &spec, settings)?;
    meta.annotations.insert("dip_direction".into(), dip.to_string());
    meta.annotations
        .insert("delta_opt".into(), format!("{:?}", opt.delta_opt));
    meta.annotations.insert("g_opt".into(), format!("{:?}", opt.g_opt));
    meta.annotations.insert(
        "crossing_temperature_k".into(),
        crossing_k.map_or_else(|| "none".to_owned(), |t| format!("{t:?}")),
    );
    Ok(TempScan {
        result: SweepResult {
            grid: temperatures_k.to_vec(),
            series,
            metadata: meta,
        },
        dip,
        delta_opt: opt.delta_opt,
        g_opt: opt.g_opt,
        ratio,
        crossing_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cold_limit_saturates() {
        let cfg = Config::load("case2", &[]).unwrap();
        let settings = RouteSettings {
            truncation: [3, 3, 4],
            ..RouteSettings::from_config(&cfg, None)
        };
        let s = run_tempscan(&cfg, &[0.0, 1e-4], Direction::Ccw, &settings, Some(1)).unwrap();
        for ser in &s.result.series {
            let (a, b) = (ser.g2[0].unwrap(), ser.g2[1].unwrap());
            assert!((a - b).abs() < 1e-2 * a, "{a} {b}");
        }
        assert_eq!(s.ratio.len(), 2);
        assert!(s.result.metadata.annotations.contains_key("crossing_temperature_k"));
    }

    #[test]
    fn rejects_negative_temperature() {
        let cfg = Config::load("case2", &[]).unwrap();
        let r = run_tempscan(&cfg, &[-1.0], Direction::Ccw, &RouteSettings::default(), Some(1));
        assert!(matches!(r, Err(TempScanError::Config(_))));
    }
}
