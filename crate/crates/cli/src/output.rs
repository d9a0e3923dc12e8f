//! Bit-stable CSV and JSON writers.
//!
//! Floats are written as `{:.16e}` (17 significant digits), CSV rows end in a
//! bare LF, and JSON objects are `BTreeMap`-backed so keys come out sorted.
//! A non-finite number anywhere is a numerical failure, never `NaN` or `null`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use qswitch_core::protocols::ProtocolError;
use serde_json::{Map, Value};

use crate::config::ConfigError;

#[derive(Debug)]
pub enum AppError {
    /// Bad configuration or input; exit code 2.
    Validation(String),
    /// The computation itself failed; exit code 3.
    Numerical(String),
    /// Reading or writing files; exit code 1.
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "invalid input: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<ProtocolError> for AppError {
    fn from(e: ProtocolError) -> Self {
        use qswitch_core::dynamics::DynamicsError;
        use qswitch_core::spectra::SpectraError;
        let validation = matches!(
            e,
            ProtocolError::Model(_)
                | ProtocolError::InvalidInput(_)
                | ProtocolError::Dynamics(
                    DynamicsError::Model(_) | DynamicsError::InvalidIntegrator(_) | DynamicsError::DimensionMismatch { .. }
                )
                | ProtocolError::Spectra(
                    SpectraError::Model(_)
                        | SpectraError::InvalidGrid
                        | SpectraError::GridTooCoarse { .. }
                        | SpectraError::Unsupported(_)
                )
        );
        if validation {
            Self::Validation(e.to_string())
        } else {
            Self::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub fn float(x: f64) -> Result<String, AppError> {
    if x.is_finite() {
        Ok(format!("{x:.16e}"))
    } else {
        Err(AppError::Numerical(format!("non-finite value {x} in output")))
    }
}

pub fn num(x: f64) -> Result<Value, AppError> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| AppError::Numerical(format!("non-finite value {x} in output")))
}

pub fn nums(xs: &[f64]) -> Result<Value, AppError> {
    xs.iter().map(|&x| num(x)).collect::<Result<Vec<_>, _>>().map(Value::Array)
}

/// Insertion helper that keeps `?` at the call site short.
#[derive(Debug, Default)]
pub struct Object(Map<String, Value>);

impl Object {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, key: &str, x: f64) -> Result<Self, AppError> {
        self.0.insert(key.into(), num(x)?);
        Ok(self)
    }

    pub fn set(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.insert(key.into(), v.into());
        self
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}

impl From<Object> for Value {
    fn from(o: Object) -> Self {
        o.into_value()
    }
}

/// Collects everything a subcommand writes so nothing lands on disk before
/// the whole run has succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn json(&mut self, name: &str, value: &Value) -> Result<(), AppError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::Numerical(e.to_string()))?;
        text.push('\n');
        self.files.push((name.into(), text.into_bytes()));
        Ok(())
    }

    /// `rows` hold already-formatted cells; see [`float`].
    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), AppError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| AppError::Io(e.to_string()))?;
        self.files.push((name.into(), bytes));
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, AppError> {
        fs::create_dir_all(dir).map_err(|e| AppError::Io(format!("{}: {e}", dir.display())))?;
        let mut out = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
            out.push(path);
        }
        Ok(out)
    }
}

/// Formats one CSV row of floats.
pub fn row(xs: &[f64]) -> Result<Vec<String>, AppError> {
    xs.iter().map(|&x| float(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(float(0.1).unwrap(), "1.0000000000000001e-1");
        assert_eq!(float(-52.142857142857146).unwrap(), "-5.2142857142857146e1");
        assert!(float(f64::NAN).is_err());
        let back: f64 = float(std::f64::consts::PI).unwrap().parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn json_rejects_nan_and_sorts_keys() {
        assert!(num(f64::INFINITY).is_err());
        let v = Object::new().num("zeta", 1.0).unwrap().num("alpha", 2.0).unwrap().into_value();
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"{"alpha":2.0,"zeta":1.0}"#);
    }

    #[test]
    fn csv_uses_lf() {
        let mut o = Outputs::default();
        o.csv("a.csv", &["x".into(), "y".into()], &[row(&[1.0, 2.0]).unwrap()]).unwrap();
        assert_eq!(o.files[0].1, b"x,y\n1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
