//! Parameter files and grid specifications.
//!
//! Parameter files are flat JSON objects with frequencies in cyclic Hz:
//!
//! ```json
//! {"n_spins": 1000000, "g_hz": 50, "sigma_delta_hz": 1e6, "gamma_minus_hz": 1,
//!  "kappa_hz": 1e5, "delta_hz": 5e6, "n_bar": 1e5, "eta": 1, "gamma_L_hz": 0}
//! ```
//!
//! `eta` and `gamma_L_hz` are optional. Unknown keys are rejected.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::SystemParams;

/// A parameter file as written on disk, all rates in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub n_spins: usize,
    pub g_hz: f64,
    pub sigma_delta_hz: f64,
    pub gamma_minus_hz: f64,
    pub kappa_hz: f64,
    pub delta_hz: f64,
    pub n_bar: f64,
    #[serde(default = "unit_efficiency")]
    pub eta: f64,
    #[serde(rename = "gamma_L_hz", default)]
    pub gamma_l_hz: f64,
}

fn unit_efficiency() -> f64 {
    1.0
}

impl ParamsFile {
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            n_spins: self.n_spins,
            g: TAU * self.g_hz,
            sigma_delta: TAU * self.sigma_delta_hz,
            gamma_minus: TAU * self.gamma_minus_hz,
            kappa: TAU * self.kappa_hz,
            delta_res: TAU * self.delta_hz,
            n_bar: self.n_bar,
            eta: self.eta,
            gamma_l: TAU * self.gamma_l_hz,
        }
    }

    pub fn from_params(p: &SystemParams) -> Self {
        ParamsFile {
            n_spins: p.n_spins,
            g_hz: p.g / TAU,
            sigma_delta_hz: p.sigma_delta / TAU,
            gamma_minus_hz: p.gamma_minus / TAU,
            kappa_hz: p.kappa / TAU,
            delta_hz: p.delta_res / TAU,
            n_bar: p.n_bar,
            eta: p.eta,
            gamma_l_hz: p.gamma_l / TAU,
        }
    }

    /// Compact JSON with keys in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// A parameter-file problem with its location when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}")?;
            if let Some(col) = self.column {
                write!(f, ", column {col}")?;
            }
            write!(f, ": ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key `{key}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e.to_string())
    }
}

/// First backtick-quoted token of a serde message, which names the field.
fn quoted_key(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

/// Line of the first occurrence of `"key"` in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn file_key(name: &str) -> &str {
    match name {
        "g" => "g_hz",
        "sigma_delta" => "sigma_delta_hz",
        "gamma_minus" => "gamma_minus_hz",
        "kappa" => "kappa_hz",
        "delta_res" => "delta_hz",
        "gamma_L" => "gamma_L_hz",
        other => other,
    }
}

/// Parses and validates a parameter file, converting to angular units.
pub fn parse_params(text: &str) -> Result<SystemParams, ConfigError> {
    let file = parse_params_file(text)?;
    let params = file.to_params();
    params.validate().map_err(|e| {
        let key = match &e {
            Error::InvalidParameter { name, .. } => Some(file_key(name).to_string()),
            _ => None,
        };
        ConfigError {
            line: key.as_deref().and_then(|k| key_line(text, k)),
            column: None,
            key,
            message: e.to_string(),
        }
    })?;
    Ok(params)
}

/// Parses a parameter file without validating the values.
pub fn parse_params_file(text: &str) -> Result<ParamsFile, ConfigError> {
    serde_json::from_str::<ParamsFile>(text).map_err(|e| {
        let mut message = e.to_string();
        // location is reported separately
        if let Some(i) = message.rfind(" at line ") {
            message.truncate(i);
        }
        let key = if message.contains("field") { quoted_key(&message) } else { None };
        let line = key
            .as_deref()
            .filter(|_| message.starts_with("unknown field"))
            .and_then(|k| key_line(text, k))
            .or(if e.line() > 0 { Some(e.line()) } else { None });
        ConfigError {
            line,
            column: if e.column() > 0 { Some(e.column()) } else { None },
            key,
            message,
        }
    })
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// `count` logarithmically spaced values from `start` to `stop` inclusive.
pub fn geomspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    let (a, b) = (start.ln(), stop.ln());
    linspace(a, b, count)
        .into_iter()
        .enumerate()
        .map(|(i, u)| {
            if i == 0 {
                start
            } else if i == count - 1 {
                stop
            } else {
                u.exp()
            }
        })
        .collect()
}

/// Parses a grid written as `start:stop:count[:log|:lin]` or as a comma
/// list `a,b,c`. Range grids default to linear spacing.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let number = |s: &str| -> Result<f64, Error> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("`{}` is not a number", s.trim())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Config(format!("`{}` is not finite", s.trim())))
        }
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(Error::Config(format!("grid `{spec}` must be start:stop:count[:log|:lin]")));
        }
        let start = number(parts[0])?;
        let stop = number(parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("`{}` is not a point count", parts[2].trim())))?;
        if count == 0 {
            return Err(Error::Config("grid needs at least one point".into()));
        }
        if count > 10_000_000 {
            return Err(Error::Config(format!("grid of {count} points is too large")));
        }
        let scale = parts.get(3).map(|s| s.trim()).unwrap_or("lin");
        match scale {
            "lin" | "linear" => Ok(linspace(start, stop, count)),
            "log" => {
                if start <= 0.0 || stop <= 0.0 {
                    return Err(Error::Config("logarithmic grid needs positive end points".into()));
                }
                Ok(geomspace(start, stop, count))
            }
            other => Err(Error::Config(format!("unknown grid scale `{other}`"))),
        }
    } else {
        spec.split(',').map(number).collect()
    }
}
