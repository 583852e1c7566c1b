//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every value keeps
//! the place it came from so errors can point at a line or an override.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use svetlichny::optimizer::{optimal_planar_menu, optimal_planar_scenario};
use svetlichny::quantum::{ghz_state, MeasurementSetting, Scenario, StateVector};

pub const KNOWN_KEYS: &[&str] = &[
    "state",
    "scenario",
    "a",
    "a_prime",
    "b",
    "b_prime",
    "c",
    "c_prime",
    "search",
    "seeds",
    "max_iterations",
    "step_tolerance",
    "seed",
    "menu",
    "target",
    "tolerance",
    "shots",
    "out",
];

const SETTING_KEYS: [[&str; 2]; 3] = [["a", "a_prime"], ["b", "b_prime"], ["c", "c_prime"]];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Flag(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("--set"),
            Origin::Flag(name) => write!(f, "--{name}"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("config error at {origin}, key `{key}`: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub key: String,
    pub message: String,
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    origin: Origin,
}

#[derive(Clone, Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

fn split_pair(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let origin = Origin::Line(i + 1);
            let Some((key, value)) = split_pair(line) else {
                return Err(ConfigError {
                    origin,
                    key: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            if config.entries.contains_key(key) {
                return Err(ConfigError {
                    origin,
                    key: key.into(),
                    message: "duplicate key".into(),
                });
            }
            config.insert(key, value, origin)?;
        }
        Ok(config)
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, text: &str) -> Result<(), ConfigError> {
        let (key, value) = split_pair(text).ok_or_else(|| ConfigError {
            origin: Origin::Override,
            key: text.into(),
            message: "expected `key=value`".into(),
        })?;
        self.insert(key, value, Origin::Override)
    }

    pub fn set_from_flag(&mut self, key: &str, value: String, flag: &'static str) {
        self.entries.insert(
            key.into(),
            Entry {
                value,
                origin: Origin::Flag(flag),
            },
        );
    }

    fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError {
                origin,
                key: key.into(),
                message: format!("unknown key; expected one of {}", KNOWN_KEYS.join(", ")),
            });
        }
        if value.is_empty() {
            return Err(ConfigError {
                origin,
                key: key.into(),
                message: "empty value".into(),
            });
        }
        self.entries.insert(
            key.into(),
            Entry {
                value: value.into(),
                origin,
            },
        );
        Ok(())
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            origin: self
                .entries
                .get(key)
                .map_or(Origin::Override, |e| e.origin.clone()),
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn parsed<T>(
        &self,
        key: &str,
        default: T,
        f: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => f(v).map_err(|m| self.error(key, m)),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        self.parsed(key, default, |v| {
            v.parse::<u64>()
                .map_err(|_| format!("`{v}` is not a nonnegative integer"))
        })
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.parsed(key, default, |v| {
            v.parse::<usize>()
                .map_err(|_| format!("`{v}` is not a nonnegative integer"))
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.parsed(key, default, parse_real)
    }

    pub fn state(&self) -> Result<StateVector, ConfigError> {
        self.parsed("state", ghz_state(), parse_state)
    }

    /// The optimal planar preset, with any individually given settings
    /// replacing the preset's.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        if let Some(v) = self.raw("scenario") {
            if v != "ghz-optimal" {
                return Err(self.error(
                    "scenario",
                    format!("unknown preset `{v}`; expected ghz-optimal"),
                ));
            }
        }
        let mut settings = optimal_planar_scenario().settings().clone();
        for (p, keys) in SETTING_KEYS.iter().enumerate() {
            for (k, key) in keys.iter().enumerate() {
                if let Some(v) = self.raw(key) {
                    settings[p][k] = parse_setting(v).map_err(|m| self.error(key, m))?;
                }
            }
        }
        Scenario::new(settings).map_err(|e| self.error("scenario", e.to_string()))
    }

    pub fn menu(&self) -> Result<Vec<MeasurementSetting>, ConfigError> {
        let Some(v) = self.raw("menu") else {
            return Err(self.error("menu", "a menu is required, e.g. `menu = x, z`"));
        };
        if v == "ghz-optimal" {
            return Ok(optimal_planar_menu());
        }
        let items = split_top_level(v);
        if items.iter().all(|s| s.is_empty()) {
            return Err(self.error("menu", "menu is empty"));
        }
        items
            .iter()
            .map(|item| parse_setting(item).map_err(|m| self.error("menu", m)))
            .collect()
    }
}

/// Real number with an optional `pi` multiplier suffix: `0.25pi`, `-pi`.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let value = if let Some(head) = t.strip_suffix("pi") {
        let factor = match head.trim() {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))?,
        };
        factor * PI
    } else {
        t.parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))?
    };
    if !value.is_finite() {
        return Err(format!("`{t}` is not finite"));
    }
    Ok(value)
}

/// Splits on commas and semicolons outside brackets.
fn split_top_level(text: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            _ => {}
        }
        if (ch == ',' || ch == ';') && depth == 0 {
            items.push(current.trim().to_string());
            current.clear();
        } else {
            current.push(ch);
        }
    }
    items.push(current.trim().to_string());
    items
}

/// `x`, `y`, `z`, a plane angle (`0.25pi`), or a unit vector `[nx, ny, nz]`.
pub fn parse_setting(text: &str) -> Result<MeasurementSetting, String> {
    let t = text.trim();
    match t {
        "x" => return Ok(MeasurementSetting::pauli_x()),
        "y" => return Ok(MeasurementSetting::pauli_y()),
        "z" => return Ok(MeasurementSetting::pauli_z()),
        _ => {}
    }
    if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        let parts: Vec<f64> = inner
            .split([',', ' '])
            .filter(|s| !s.trim().is_empty())
            .map(parse_real)
            .collect::<Result<_, _>>()?;
        let direction: [f64; 3] = parts.try_into().map_err(|p: Vec<f64>| {
            format!("vector `{t}` has {} components, expected 3", p.len())
        })?;
        return MeasurementSetting::new(direction, t).map_err(|e| e.to_string());
    }
    let angle =
        parse_real(t).map_err(|_| format!("`{t}` is not x, y, z, an angle, or [nx, ny, nz]"))?;
    Ok(MeasurementSetting::planar(angle).with_label(t))
}

/// `ghz`, or sixteen reals `re0 im0 re1 im1 …` (commas or spaces), normalized.
pub fn parse_state(text: &str) -> Result<StateVector, String> {
    let t = text.trim();
    if t == "ghz" {
        return Ok(ghz_state());
    }
    let parts: Vec<f64> = t
        .split([',', ' '])
        .filter(|s| !s.trim().is_empty())
        .map(parse_real)
        .collect::<Result<_, _>>()
        .map_err(|m| format!("{m}; expected `ghz` or 16 reals"))?;
    if parts.len() != 16 {
        return Err(format!(
            "expected `ghz` or 16 reals, found {} numbers",
            parts.len()
        ));
    }
    let amps = std::array::from_fn(|i| Complex64::new(parts[2 * i], parts[2 * i + 1]));
    StateVector::new(amps).map_err(|e| e.to_string())
}
