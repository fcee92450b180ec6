//! Sectioned `key = value` experiment files with unit-suffixed quantities.
//!
//! ```text
//! [field]
//! b = 0.5375 T
//! [drive]
//! omega_start = 5.6 MHz
//! ```
//!
//! `#` starts a comment. Keys are fixed per section; `nucleus` may repeat.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: [{section}] {key}: {msg}")]
    Value { line: usize, section: String, key: String, msg: String },
    #[error("missing required key [{section}] {key}")]
    Missing { section: String, key: String },
    #[error("{0}")]
    Other(String),
}

const KEYS: &[(&str, &[&str])] = &[
    ("field", &["b"]),
    (
        "drive",
        &["omega_start", "omega_stop", "omega_step", "tau_start", "tau_stop", "tau_step", "t1rho", "contrast_factor"],
    ),
    (
        "bath",
        &[
            "nucleus",
            "enabled",
            "abundance",
            "radius",
            "min_distance",
            "seed",
            "count",
            "engine_nuclei",
            "engine_min_radius",
        ],
    ),
    ("sequence", &["sweeps", "bias", "biases", "interleaving", "snapshots", "lock_omega", "lock_tau", "j_floor"]),
    (
        "analysis",
        &[
            "detuning",
            "samples",
            "dt",
            "zero_pad",
            "window",
            "drift_broadening",
            "host_beat",
            "overlay_coupling",
            "overlay_angles",
            "interrogation",
            "couplings",
        ],
    ),
    ("output", &["dir"]),
];

const REPEATABLE: &[(&str, &str)] = &[("bath", "nucleus")];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Frequency,
    Time,
    Field,
    Length,
    Angle,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dim::Frequency => "a frequency (Hz, kHz, MHz, GHz)",
            Dim::Time => "a duration (s, ms, us, ns)",
            Dim::Field => "a field (T, mT, G)",
            Dim::Length => "a length (m, nm, pm, A)",
            Dim::Angle => "an angle (deg, rad)",
        };
        f.write_str(s)
    }
}

/// Decimal prefixes shift the exponent so `25 us` parses to exactly `25e-6`.
enum Scale {
    Pow10(i32),
    Factor(f64),
}

fn unit_scale(unit: &str) -> Option<(Dim, Scale)> {
    use Scale::*;
    Some(match unit {
        "Hz" => (Dim::Frequency, Pow10(0)),
        "kHz" => (Dim::Frequency, Pow10(3)),
        "MHz" => (Dim::Frequency, Pow10(6)),
        "GHz" => (Dim::Frequency, Pow10(9)),
        "s" => (Dim::Time, Pow10(0)),
        "ms" => (Dim::Time, Pow10(-3)),
        "us" | "µs" => (Dim::Time, Pow10(-6)),
        "ns" => (Dim::Time, Pow10(-9)),
        "T" => (Dim::Field, Pow10(0)),
        "mT" => (Dim::Field, Pow10(-3)),
        "G" => (Dim::Field, Pow10(-4)),
        "m" => (Dim::Length, Pow10(0)),
        "nm" => (Dim::Length, Pow10(-9)),
        "pm" => (Dim::Length, Pow10(-12)),
        "A" | "Å" => (Dim::Length, Pow10(-10)),
        "deg" => (Dim::Angle, Factor(std::f64::consts::PI / 180.0)),
        "rad" => (Dim::Angle, Pow10(0)),
        _ => return None,
    })
}

/// `"<number> <unit>"` in SI.
pub fn parse_quantity(text: &str, dim: Dim) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_whitespace() || (c.is_alphabetic() && c != 'e' && c != 'E') || c == 'µ' || c == 'Å')
        .ok_or_else(|| format!("{text:?} has no unit; expected {dim}"))?;
    let (num, unit) = text.split_at(split);
    let (num, unit) = (num.trim(), unit.trim());
    let not_number = || format!("{num:?} is not a number");
    let value: f64 = num.parse().map_err(|_| not_number())?;
    let v = match unit_scale(unit) {
        Some((d, scale)) if d == dim => match scale {
            Scale::Factor(f) => value * f,
            Scale::Pow10(p) => {
                let (mantissa, exp) = match num.find(['e', 'E']) {
                    Some(i) => (&num[..i], num[i + 1..].parse::<i32>().map_err(|_| not_number())?),
                    None => (num, 0),
                };
                format!("{mantissa}e{}", exp + p).parse().map_err(|_| not_number())?
            }
        },
        Some((d, _)) => return Err(format!("{text:?} is {d}, expected {dim}")),
        None => return Err(format!("unknown unit {unit:?}; expected {dim}")),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{text:?} is not finite"))
    }
}

pub fn parse_quantity_cli(text: &str, dim: Dim) -> Result<f64, ConfigError> {
    parse_quantity(text, dim).map_err(ConfigError::Other)
}

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: String,
}

/// Parsed experiment file; values stay text until a command asks for them.
#[derive(Clone, Debug, Default)]
pub struct Config {
    entries: BTreeMap<(String, String), Vec<Entry>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line, msg: format!("malformed section header {content:?}") })?
                    .trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::Syntax { line, msg: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, msg: format!("expected `key = value`, got {content:?}") })?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .clone()
                .ok_or_else(|| ConfigError::Syntax { line, msg: format!("key {key:?} outside any section") })?;
            let known = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !known.contains(&key) {
                return Err(ConfigError::Value {
                    line,
                    section: sec,
                    key: key.into(),
                    msg: "unknown key".into(),
                });
            }
            if value.is_empty() {
                return Err(ConfigError::Value { line, section: sec, key: key.into(), msg: "empty value".into() });
            }
            let slot = cfg.entries.entry((sec.clone(), key.to_string())).or_default();
            if !slot.is_empty() && !REPEATABLE.contains(&(sec.as_str(), key)) {
                return Err(ConfigError::Value {
                    line,
                    section: sec,
                    key: key.into(),
                    msg: format!("duplicate key (first set on line {})", slot[0].line),
                });
            }
            slot.push(Entry { line, value: value.to_string() });
        }
        Ok(cfg)
    }

    /// Sets or replaces a value from the command line.
    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.entries.insert((section.into(), key.into()), vec![Entry { line: 0, value }]);
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string())).and_then(|v| v.first())
    }

    fn err(&self, section: &str, key: &str, e: &Entry, msg: String) -> ConfigError {
        ConfigError::Value { line: e.line, section: section.into(), key: key.into(), msg }
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.entry(section, key).is_some()
    }

    pub fn require(&self, section: &str, key: &str) -> Result<(), ConfigError> {
        if self.has(section, key) {
            Ok(())
        } else {
            Err(ConfigError::Missing { section: section.into(), key: key.into() })
        }
    }

    pub fn text(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    fn get_with<T>(&self, section: &str, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => f(&e.value).map(Some).map_err(|m| self.err(section, key, e, m)),
        }
    }

    pub fn quantity(&self, section: &str, key: &str, dim: Dim) -> Result<Option<f64>, ConfigError> {
        self.get_with(section, key, |v| parse_quantity(v, dim))
    }

    pub fn quantity_req(&self, section: &str, key: &str, dim: Dim) -> Result<f64, ConfigError> {
        self.require(section, key)?;
        Ok(self.quantity(section, key, dim)?.expect("checked"))
    }

    /// A quantity, or `none` / `auto`.
    pub fn quantity_or_word(&self, section: &str, key: &str, dim: Dim, word: &str) -> Result<Option<Option<f64>>, ConfigError> {
        self.get_with(section, key, |v| if v == word { Ok(None) } else { parse_quantity(v, dim).map(Some) })
    }

    pub fn number(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get_with(section, key, |v| {
            let x: f64 = v.parse().map_err(|_| format!("{v:?} is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("{v:?} is not finite"))
            }
        })
    }

    pub fn integer(&self, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get_with(section, key, |v| v.parse::<u64>().map_err(|_| format!("{v:?} is not a non-negative integer")))
    }

    pub fn flag(&self, section: &str, key: &str) -> Result<Option<bool>, ConfigError> {
        self.get_with(section, key, |v| match v {
            "true" | "yes" | "on" => Ok(true),
            "false" | "no" | "off" => Ok(false),
            _ => Err(format!("{v:?} is not a boolean")),
        })
    }

    pub fn list<T>(&self, section: &str, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<Vec<T>>, ConfigError> {
        self.get_with(section, key, |v| v.split(',').map(|item| f(item.trim())).collect())
    }

    /// Every value of a repeatable key with its line number.
    pub fn all(&self, section: &str, key: &str) -> Vec<(usize, &str)> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|v| v.iter().map(|e| (e.line, e.value.as_str())).collect())
            .unwrap_or_default()
    }

    /// One `section.key = value` line per entry, sorted; the digest input.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for ((sec, key), entries) in &self.entries {
            for e in entries {
                s.push_str(&format!("{sec}.{key} = {}\n", e.value));
            }
        }
        s
    }

    /// Digest of the canonical form followed by `extra` (command-line inputs).
    pub fn digest(&self, extra: &str) -> String {
        hex::encode(Sha256::digest((self.canonical() + extra).as_bytes()))
    }

    pub fn echo(&self) -> BTreeMap<String, serde_json::Value> {
        let mut out = BTreeMap::new();
        for ((sec, key), entries) in &self.entries {
            let v = if entries.len() == 1 {
                serde_json::Value::String(entries[0].value.clone())
            } else {
                serde_json::Value::Array(entries.iter().map(|e| serde_json::Value::String(e.value.clone())).collect())
            };
            out.insert(format!("{sec}.{key}"), v);
        }
        out
    }
}
