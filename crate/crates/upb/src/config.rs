//! JSON parameter files and the bundled presets.
//!
//! Every physical key carries its unit in the name. The three dimensionless
//! keys `g_over_kappa`, `omega_m_over_kappa` and `j_over_kappa` are required;
//! everything else falls back to the default resonator.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use upb_core::model::{
    reduce, DimensionlessOverrides, Direction, HamiltonianKind, ModelError, PhysicalParams, ReducedParams,
};

use crate::sweep::{Route, SweepSpec, SweptVariable};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}\nschema: {SCHEMA_HINT}")]
    Parse(String),
    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<&'static str>),
    #[error("exactly one of omega_spin_hz or omega_spin_rad_s must be given (found {0})")]
    SpinUnits(usize),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("unknown preset '{0}' (available: {names})", names = preset_names().join(", "))]
    UnknownPreset(String),
    #[error("invalid --set '{0}': expected section.key=value")]
    Assignment(String),
    #[error(transparent)]
    Model(ModelError),
}

impl From<ModelError> for ConfigError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::MissingKeys(k) => ConfigError::MissingKeys(k),
            other => ConfigError::Model(other),
        }
    }
}

pub const SCHEMA_HINT: &str = "{ \"physical\": { wavelength_m, q_l, q_r, q_m, radius_m, refractive_index, \
dn_dlambda_per_m, mass_kg, input_power_w, omega_spin_hz | omega_spin_rad_s, temperature_k, direction }, \
\"dimensionless\": { g_over_kappa, omega_m_over_kappa, j_over_kappa, eps_d_over_kappa, gamma_m_over_kappa, \
delta_f_over_kappa, detuning_over_kappa }, \"sweep\": { variable, start, stop, step, routes, directions }, \
\"truncation\": [n_l, n_r, n_m], \"hamiltonian\": \"full-om\" | \"effective-kerr\" }";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refractive_index: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dn_dlambda_per_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_spin_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_spin_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_over_kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m_over_kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_over_kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_d_over_kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m_over_kappa: Option<f64>,
    /// Magnitude; the sign follows the drive direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_f_over_kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_over_kappa: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweptVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    #[serde(default = "default_routes")]
    pub routes: Vec<Route>,
    #[serde(default = "default_directions")]
    pub directions: Vec<Direction>,
}

fn default_routes() -> Vec<Route> {
    vec![Route::Master]
}

fn default_directions() -> Vec<Direction> {
    Direction::BOTH.to_vec()
}

/// The file as written.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub physical: PhysicalSection,
    #[serde(default)]
    pub dimensionless: DimensionlessSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianKind>,
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub name: String,
    pub physical: PhysicalParams,
    pub overrides: DimensionlessOverrides,
    pub sweep: Option<SweepSpec>,
    pub truncation: Option<[usize; 3]>,
    pub hamiltonian: HamiltonianKind,
}

const PRESETS: [(&str, &str); 2] = [
    ("case1", include_str!("../presets/case1.json")),
    ("case2", include_str!("../presets/case2.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON of a bundled preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

impl Config {
    /// Loads a preset by name, or else a file by path.
    pub fn load(source: &str, assignments: &[String]) -> Result<Self, ConfigError> {
        let text = match preset_source(source) {
            Some(s) => s.to_owned(),
            None => {
                let path = Path::new(source);
                if !path.exists() && !source.contains(['/', '.']) {
                    return Err(ConfigError::UnknownPreset(source.to_owned()));
                }
                std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                    path: source.to_owned(),
                    source: e,
                })?
            }
        };
        let name = Path::new(source)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(source)
            .to_owned();
        Self::from_json(&text, &name, assignments)
    }

    /// Parses JSON text, applying `section.key=value` assignments first.
    pub fn from_json(text: &str, fallback_name: &str, assignments: &[String]) -> Result<Self, ConfigError> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for a in assignments {
            apply_assignment(&mut value, a)?;
        }
        let file: ConfigFile = serde_json::from_value(value).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_file(file, fallback_name)
    }

    pub fn from_file(file: ConfigFile, fallback_name: &str) -> Result<Self, ConfigError> {
        let p = &file.physical;
        let d = &file.dimensionless;
        let mut missing = Vec::new();
        for (key, v) in [
            ("g_over_kappa", d.g_over_kappa),
            ("omega_m_over_kappa", d.omega_m_over_kappa),
            ("j_over_kappa", d.j_over_kappa),
        ] {
            if v.is_none() {
                missing.push(key);
            }
        }
        if !missing.is_empty() {
            return Err(ConfigError::MissingKeys(missing));
        }
        let omega_spin_rad_s = match (p.omega_spin_hz, p.omega_spin_rad_s) {
            (Some(hz), None) => 2.0 * std::f64::consts::PI * hz,
            (None, Some(w)) => w,
            (None, None) => return Err(ConfigError::SpinUnits(0)),
            (Some(_), Some(_)) => return Err(ConfigError::SpinUnits(2)),
        };
        let def = PhysicalParams::default();
        let physical = PhysicalParams {
            wavelength_m: p.wavelength_m.unwrap_or(def.wavelength_m),
            q_l: p.q_l.unwrap_or(def.q_l),
            q_r: p.q_r.unwrap_or(def.q_r),
            q_m: p.q_m.unwrap_or(def.q_m),
            radius_m: p.radius_m.unwrap_or(def.radius_m),
            refractive_index: p.refractive_index.unwrap_or(def.refractive_index),
            dn_dlambda_per_m: p.dn_dlambda_per_m.unwrap_or(def.dn_dlambda_per_m),
            mass_kg: p.mass_kg.unwrap_or(def.mass_kg),
            input_power_w: p.input_power_w.unwrap_or(def.input_power_w),
            omega_spin_rad_s,
            temperature_k: p.temperature_k.unwrap_or(def.temperature_k),
            direction: p.direction.unwrap_or(def.direction),
        };
        let overrides = DimensionlessOverrides {
            g: d.g_over_kappa,
            omega_m: d.omega_m_over_kappa,
            j: d.j_over_kappa,
            eps_d: d.eps_d_over_kappa,
            gamma_m: d.gamma_m_over_kappa,
            delta_f: d.delta_f_over_kappa,
            detuning: d.detuning_over_kappa,
        };
        let sweep = file
            .sweep
            .map(|s| SweepSpec {
                variable: s.variable,
                start: s.start,
                stop: s.stop,
                step: s.step,
                routes: s.routes,
                directions: s.directions,
            })
            .map(|s| s.validated())
            .transpose()?;
        if let Some(t) = file.truncation {
            if t.iter().any(|&n| n < 2) {
                return Err(ConfigError::Parse(format!(
                    "truncation {t:?}: every mode needs at least two levels"
                )));
            }
        }
        let cfg = Config {
            name: file.name.unwrap_or_else(|| fallback_name.to_owned()),
            physical,
            overrides,
            sweep,
            truncation: file.truncation,
            hamiltonian: file.hamiltonian.unwrap_or(HamiltonianKind::FullOm),
        };
        cfg.reduced(None, cfg.physical.direction)?;
        Ok(cfg)
    }

    /// Reduced parameters for `direction`, with one variable optionally
    /// replaced.
    pub fn reduced(
        &self,
        replace: Option<(SweptVariable, f64)>,
        direction: Direction,
    ) -> Result<ReducedParams, ConfigError> {
        let mut p = self.physical.clone();
        p.direction = direction;
        let mut o = self.overrides.clone();
        if let Some((var, v)) = replace {
            match var {
                SweptVariable::DetuningOverKappa => o.detuning = Some(v),
                SweptVariable::GOverKappa => o.g = Some(v),
                SweptVariable::JOverKappa => o.j = Some(v),
                SweptVariable::OmegaSpinRadS | SweptVariable::OmegaSpinHz => {
                    if o.delta_f.is_some() {
                        return Err(ConfigError::Sweep(
                            "cannot sweep the spin rate while delta_f_over_kappa pins the Fizeau shift".into(),
                        ));
                    }
                    p.omega_spin_rad_s = match var {
                        SweptVariable::OmegaSpinHz => 2.0 * std::f64::consts::PI * v,
                        _ => v,
                    };
                }
                SweptVariable::TemperatureK => p.temperature_k = v,
            }
        }
        Ok(reduce(&p, &o)?)
    }
}

fn apply_assignment(root: &mut serde_json::Value, assignment: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::Assignment(assignment.to_owned());
    let (path, raw) = assignment.split_once('=').ok_or_else(bad)?;
    let value: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_owned()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(bad());
    }
    let mut node = root;
    for k in &keys[..keys.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(bad)?;
        node = obj
            .entry(k.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    let obj = node.as_object_mut().ok_or_else(bad)?;
    let last = keys[keys.len() - 1];
    // Setting one spin unit removes the other so that presets can be
    // overridden in either unit.
    match last {
        "omega_spin_hz" => {
            obj.remove("omega_spin_rad_s");
        }
        "omega_spin_rad_s" => {
            obj.remove("omega_spin_hz");
        }
        _ => {}
    }
    obj.insert(last.to_owned(), value);
    Ok(())
}

/// `a,b,c` truncation syntax.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation(pub [usize; 3]);

impl FromStr for Truncation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated levels, got '{s}'"));
        }
        let mut out = [0; 3];
        for (o, p) in out.iter_mut().zip(parts) {
            *o = p.parse().map_err(|_| format!("'{p}' is not a level count"))?;
            if *o < 2 {
                return Err(format!("truncation '{s}': every mode needs at least two levels"));
            }
        }
        Ok(Truncation(out))
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0[0], self.0[1], self.0[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"physical": {"omega_spin_rad_s": 0},
        "dimensionless": {"g_over_kappa": 0.63, "omega_m_over_kappa": 10, "j_over_kappa": 3}}"#;

    #[test]
    fn presets_load() {
        for name in preset_names() {
            let c = Config::load(name, &[]).unwrap();
            assert_eq!(c.name, name);
            assert!(c.sweep.is_some());
        }
    }

    #[test]
    fn case1_kerr_shift() {
        let c = Config::load("case1", &[]).unwrap();
        let rp = c.reduced(None, Direction::Ccw).unwrap();
        assert_eq!(rp.kerr_shift(), 0.63 * 0.63 / 10.0);
        assert_eq!(rp.delta_f, 0.0);
    }

    #[test]
    fn missing_keys_are_listed() {
        let text = r#"{"physical": {"omega_spin_hz": 0}, "dimensionless": {"g_over_kappa": 0.1}}"#;
        match Config::from_json(text, "t", &[]) {
            Err(ConfigError::MissingKeys(k)) => assert_eq!(k, vec!["omega_m_over_kappa", "j_over_kappa"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spin_unit_must_be_unique() {
        let both = r#"{"physical": {"omega_spin_hz": 1, "omega_spin_rad_s": 1},
            "dimensionless": {"g_over_kappa": 0.63, "omega_m_over_kappa": 10, "j_over_kappa": 3}}"#;
        assert!(matches!(
            Config::from_json(both, "t", &[]),
            Err(ConfigError::SpinUnits(2))
        ));
        let none = r#"{"dimensionless": {"g_over_kappa": 0.63, "omega_m_over_kappa": 10, "j_over_kappa": 3}}"#;
        assert!(matches!(
            Config::from_json(none, "t", &[]),
            Err(ConfigError::SpinUnits(0))
        ));
    }

    #[test]
    fn malformed_unit_key_names_the_schema() {
        let text = r#"{"physical": {"omega_spin_khz": 12},
            "dimensionless": {"g_over_kappa": 0.63, "omega_m_over_kappa": 10, "j_over_kappa": 3}}"#;
        let e = Config::from_json(text, "t", &[]).unwrap_err();
        let msg = e.to_string();
        assert!(
            msg.contains("omega_spin_khz") && msg.contains("omega_spin_rad_s"),
            "{msg}"
        );
    }

    #[test]
    fn hz_is_two_pi_rad_s() {
        let hz = Config::from_json(MINIMAL, "t", &["physical.omega_spin_hz=1000".into()]).unwrap();
        let rad = Config::from_json(MINIMAL, "t", &["physical.omega_spin_rad_s=6283.185307179586".into()]).unwrap();
        let a = hz.reduced(None, Direction::Cw).unwrap().delta_f;
        let b = rad.reduced(None, Direction::Cw).unwrap().delta_f;
        assert!((a - b).abs() < 1e-12 * a.abs());
        assert!(a > 0.0);
    }

    #[test]
    fn sweep_replacement_reaches_reduced_params() {
        let c = Config::from_json(MINIMAL, "t", &[]).unwrap();
        let rp = c
            .reduced(Some((SweptVariable::JOverKappa, 7.0)), Direction::Ccw)
            .unwrap();
        assert_eq!(rp.j, 7.0);
        let rp = c
            .reduced(Some((SweptVariable::DetuningOverKappa, -0.3)), Direction::Ccw)
            .unwrap();
        assert_eq!(rp.delta_l, -0.3);
        assert_eq!(rp.delta_r, -0.3 + rp.kerr_shift());
        let rp = c
            .reduced(Some((SweptVariable::TemperatureK, 0.0)), Direction::Ccw)
            .unwrap();
        assert_eq!(rp.n_th, 0.0);
    }

    #[test]
    fn bad_assignment() {
        assert!(matches!(
            Config::from_json(MINIMAL, "t", &["nonsense".into()]),
            Err(ConfigError::Assignment(_))
        ));
    }

    #[test]
    fn truncation_syntax() {
        assert_eq!("4, 4,5".parse::<Truncation>().unwrap(), Truncation([4, 4, 5]));
        assert!("4,4".parse::<Truncation>().is_err());
        assert!("4,1,5".parse::<Truncation>().is_err());
    }
}
