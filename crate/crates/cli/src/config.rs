//! Flat `key = value` run configuration.
//!
//! `#` starts a comment. Lists are comma-separated, or `linspace(a, b, n)` /
//! `logspace(a, b, n)` (exponents of ten). Rates and detunings are in units of
//! `kappa_sq` unless `physical_units.kappa_sq_hz` is set, in which case every
//! rate key is read in Hz and divided by it. Times are always in `1/kappa_sq`.

use std::collections::BTreeMap;
use std::fmt;

use qswitch_core::ScenarioParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    FloatList,
    Int,
    Text,
}

/// Every accepted key. `true` marks a rate that physical units convert.
const KEYS: &[(&str, Kind, bool)] = &[
    ("experiment", Kind::Text, false),
    // scenario
    ("g_s", Kind::Float, true),
    ("g_q", Kind::Float, true),
    ("kappa_sq", Kind::Float, true),
    ("kappa_wq", Kind::Float, true),
    ("delta_q", Kind::Float, true),
    ("detuning_s", Kind::Float, true),
    ("detuning_q", Kind::Float, true),
    ("kappa_s", Kind::Float, true),
    ("kappa_q", Kind::Float, true),
    ("gamma_s", Kind::Float, true),
    ("gamma_q", Kind::Float, true),
    ("levels_s", Kind::Int, false),
    ("ladder_rabi", Kind::FloatList, true),
    ("ladder_detuning", Kind::FloatList, true),
    ("physical_units.kappa_sq_hz", Kind::Float, false),
    // integration
    ("integrator", Kind::Text, false),
    ("dt", Kind::Float, false),
    ("rel_tol", Kind::Float, false),
    ("abs_tol", Kind::Float, false),
    ("sample_interval", Kind::Float, false),
    ("t_end", Kind::Float, false),
    // sweeps
    ("sweep_knob", Kind::Text, false),
    ("sweep_T", Kind::FloatList, false),
    ("sweep_from", Kind::Float, true),
    ("sweep_to", Kind::Float, true),
    ("sweep_endpoint", Kind::Text, false),
    ("initial", Kind::Text, false),
    // drive
    ("drive", Kind::Text, false),
    ("drive_amplitude", Kind::Float, false),
    ("drive_center", Kind::Float, false),
    ("drive_width", Kind::Float, false),
    ("drive_detuning", Kind::Float, true),
    // spectrum
    ("spectrum_knob", Kind::Text, false),
    ("spectrum_grid", Kind::FloatList, true),
    // shape
    ("reconstruct_iterations", Kind::Int, false),
    ("reconstruct_width", Kind::Float, false),
    // qudit
    ("qudit_coefficients", Kind::FloatList, false),
    ("qudit_phases", Kind::FloatList, false),
    ("qudit_hold", Kind::Float, false),
    ("qudit_leg", Kind::Float, false),
    ("qudit_emit_hold", Kind::Float, false),
    ("qudit_transfer", Kind::Float, false),
    // scan
    ("scan_kind", Kind::Text, false),
    ("scan_channel", Kind::Text, false),
    ("scan_rates", Kind::FloatList, true),
    ("scan_detuning_q", Kind::FloatList, true),
    ("scan_delta_q", Kind::FloatList, true),
    ("scan_t_max", Kind::Float, false),
    // capture
    ("capture_mode", Kind::Text, false),
    ("capture_t_end", Kind::Float, false),
];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    List(Vec<f64>),
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey { key: String, line: usize },
    ParseError { line: usize, message: String },
    /// A rate unit convention was violated.
    UnitConflict(String),
    /// A key is missing or has the wrong kind for the experiment.
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnknownKey { key, line } => write!(f, "line {line}: unknown key `{key}`"),
            Self::ParseError { line, message } => write!(f, "line {line}: {message}"),
            Self::UnitConflict(m) => write!(f, "unit conflict: {m}"),
            Self::Invalid(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration: the scenario plus typed experiment keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioParams,
    values: BTreeMap<String, Value>,
}

fn parse_float(s: &str, line: usize) -> Result<f64, ConfigError> {
    let v: f64 = s.trim().parse().map_err(|_| ConfigError::ParseError {
        line,
        message: format!("`{}` is not a number", s.trim()),
    })?;
    if !v.is_finite() {
        return Err(ConfigError::ParseError {
            line,
            message: format!("`{}` is not finite", s.trim()),
        });
    }
    Ok(v)
}

fn parse_list(s: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    let s = s.trim();
    for (name, log) in [("linspace", false), ("logspace", true)] {
        if let Some(inner) = s.strip_prefix(name).map(str::trim).and_then(|r| r.strip_prefix('(')).and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err(ConfigError::ParseError {
                    line,
                    message: format!("{name} takes (start, stop, count)"),
                });
            }
            let (a, b) = (parse_float(parts[0], line)?, parse_float(parts[1], line)?);
            let n: usize = parts[2].trim().parse().map_err(|_| ConfigError::ParseError {
                line,
                message: format!("`{}` is not a count", parts[2].trim()),
            })?;
            if n < 2 {
                return Err(ConfigError::ParseError {
                    line,
                    message: format!("{name} needs at least two points"),
                });
            }
            return Ok((0..n)
                .map(|i| {
                    let x = a + (b - a) * i as f64 / (n - 1) as f64;
                    if log {
                        10f64.powf(x)
                    } else {
                        x
                    }
                })
                .collect());
        }
    }
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| parse_float(p, line)).collect()
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut values = BTreeMap::new();
    let mut lines_of = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::ParseError {
            line,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let &(_, kind, _) = KEYS
            .iter()
            .find(|(k, _, _)| *k == key)
            .ok_or_else(|| ConfigError::UnknownKey { key: key.into(), line })?;
        if lines_of.contains_key(key) {
            return Err(ConfigError::ParseError {
                line,
                message: format!("`{key}` given twice"),
            });
        }
        let value = value.trim();
        let parsed = match kind {
            Kind::Float => Value::Float(parse_float(value, line)?),
            Kind::FloatList => Value::List(parse_list(value, line)?),
            Kind::Int => Value::Int(value.parse().map_err(|_| ConfigError::ParseError {
                line,
                message: format!("`{value}` is not an integer"),
            })?),
            Kind::Text => Value::Text(value.to_string()),
        };
        lines_of.insert(key.to_string(), line);
        values.insert(key.to_string(), parsed);
    }

    if let Some(Value::Float(hz)) = values.get("physical_units.kappa_sq_hz").cloned() {
        if hz <= 0.0 {
            return Err(ConfigError::UnitConflict("physical_units.kappa_sq_hz must be positive".into()));
        }
        if let Some(Value::Float(k)) = values.get("kappa_sq") {
            if (k / hz - 1.0).abs() > 1e-12 {
                return Err(ConfigError::UnitConflict(format!(
                    "kappa_sq = {k} Hz disagrees with physical_units.kappa_sq_hz = {hz}"
                )));
            }
        }
        for (key, value) in values.iter_mut() {
            let rate = KEYS.iter().any(|(k, _, r)| *k == key && *r);
            if !rate {
                continue;
            }
            match value {
                Value::Float(v) => *v /= hz,
                Value::List(vs) => vs.iter_mut().for_each(|v| *v /= hz),
                _ => {}
            }
        }
        values.insert("kappa_sq".into(), Value::Float(1.0));
    } else if let Some(Value::Float(k)) = values.get("kappa_sq") {
        if *k != 1.0 {
            return Err(ConfigError::UnitConflict(format!(
                "kappa_sq = {k} but rates are in units of kappa_sq; set physical_units.kappa_sq_hz to convert"
            )));
        }
    }

    let mut cfg = RunConfig {
        scenario: ScenarioParams::default(),
        values,
    };
    cfg.scenario = cfg.build_scenario()?;
    Ok(cfg)
}

impl RunConfig {
    fn build_scenario(&self) -> Result<ScenarioParams, ConfigError> {
        let levels = self.int("levels_s", 2)?;
        if levels < 2 {
            return Err(ConfigError::Invalid(format!("levels_s = {levels} must be at least 2")));
        }
        let levels = levels as usize;
        let rabi = self.list_or("ladder_rabi", vec![0.0; levels - 2])?;
        let ladder_detuning = self.list_or("ladder_detuning", vec![0.0; rabi.len()])?;
        let p = ScenarioParams {
            g_s: self.float("g_s", 0.0)?,
            g_q: self.float("g_q", 0.0)?,
            kappa_sq: 1.0,
            kappa_wq: self.float("kappa_wq", 0.0)?,
            cavity_detuning_q: self.float("delta_q", 0.0)?,
            detuning_s: self.float("detuning_s", 0.0)?,
            detuning_q: self.float("detuning_q", 0.0)?,
            kappa_s: self.float("kappa_s", 0.0)?,
            kappa_q: self.float("kappa_q", 0.0)?,
            gamma_s: self.float("gamma_s", 0.0)?,
            gamma_q: self.float("gamma_q", 0.0)?,
            levels_s: levels,
            ladder_rabi: rabi,
            ladder_detuning,
        };
        p.validate().map_err(|e| ConfigError::Invalid(format!("invalid scenario: {e}")))?;
        Ok(p)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn float(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.float_opt(key).map(|v| v.unwrap_or(default))
    }

    pub fn float_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::List(v)) if v.len() == 1 => Ok(Some(v[0])),
            Some(_) => Err(ConfigError::Invalid(format!("`{key}` must be a single number"))),
        }
    }

    pub fn int(&self, key: &str, default: i64) -> Result<i64, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(Value::Int(v)) => Ok(*v),
            Some(_) => Err(ConfigError::Invalid(format!("`{key}` must be an integer"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.values.get(key) {
            Some(Value::List(v)) => Ok(v.clone()),
            Some(Value::Float(v)) => Ok(vec![*v]),
            Some(_) => Err(ConfigError::Invalid(format!("`{key}` must be a list of numbers"))),
            None => Err(ConfigError::Invalid(format!("`{key}` is required"))),
        }
    }

    pub fn list_or(&self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
        if self.has(key) {
            self.list(key)
        } else {
            Ok(default)
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    /// `text(key)` restricted to `allowed`, or `default` when absent.
    pub fn choice<'a>(&'a self, key: &str, allowed: &[&'a str], default: &'a str) -> Result<&'a str, ConfigError> {
        match self.text(key) {
            None => Ok(default),
            Some(v) if allowed.contains(&v) => Ok(v),
            Some(v) => Err(ConfigError::Invalid(format!("`{key}` = `{v}`; expected one of {allowed:?}"))),
        }
    }

    /// Echo of every key as given after unit conversion, for the metadata file.
    pub fn echo(&self) -> BTreeMap<String, Value> {
        self.values.clone()
    }
}
