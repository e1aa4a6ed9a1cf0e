//! Flat `key = value` experiment configs.
//!
//! ```text
//! # one scenario per file
//! scenario = umet-run
//! map = odometer:R=10
//! family = dyadic_intervals:max_level=8
//! n_schedule = [16, 64, 256, 1024]
//! output = "out/umet"
//! ```
//!
//! Values are integers, rationals `p/q`, lists `[a, b, ...]`, quoted
//! strings, or bare strings running to the end of the line.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;
use umet_core::{MapSpec, Rational, SetFamily};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ConfigError { line, column, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    EntropyProfile,
    VcDim,
    UmetRun,
    AdversaryRun,
    MixingRun,
    LemmaSuite,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::EntropyProfile,
        Scenario::VcDim,
        Scenario::UmetRun,
        Scenario::AdversaryRun,
        Scenario::MixingRun,
        Scenario::LemmaSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::EntropyProfile => "entropy-profile",
            Scenario::VcDim => "vc-dim",
            Scenario::UmetRun => "umet-run",
            Scenario::AdversaryRun => "adversary-run",
            Scenario::MixingRun => "mixing-run",
            Scenario::LemmaSuite => "lemma-suite",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub map: Option<MapSpec>,
    pub family: Option<SetFamily>,
    /// Greedy sequence length for entropy-profile, largest `k` for vc-dim.
    pub horizon: Option<usize>,
    pub n_schedule: Vec<usize>,
    pub epsilon: Option<Rational>,
    pub resolution: Option<u32>,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        ExperimentConfig {
            scenario,
            map: None,
            family: None,
            horizon: None,
            n_schedule: Vec::new(),
            epsilon: None,
            resolution: None,
            seeds: Vec::new(),
            output: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Value {
    Int(u64),
    Rational(Rational),
    Str(String),
    List(Vec<(usize, Value)>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "an integer",
            Value::Rational(_) => "a rational",
            Value::Str(_) => "a string",
            Value::List(_) => "a list",
        }
    }
}

/// Parses one value starting at byte `col` (0-based) of `text`.
fn parse_value(text: &str, col: usize, line: usize) -> Result<Value, ConfigError> {
    let t = text.trim_end();
    if let Some(body) = t.strip_prefix('"') {
        return match body.strip_suffix('"') {
            Some(s) if !s.contains('"') => Ok(Value::Str(s.to_string())),
            _ => Err(ConfigError::at(line, col + 1, "unterminated string")),
        };
    }
    if let Some(body) = t.strip_prefix('[') {
        let Some(body) = body.strip_suffix(']') else {
            return Err(ConfigError::at(line, col + 1, "list is missing ']'"));
        };
        let mut items = Vec::new();
        let mut offset = col + 1;
        if body.trim().is_empty() {
            return Ok(Value::List(items));
        }
        for item in body.split(',') {
            let lead = item.len() - item.trim_start().len();
            let at = offset + lead;
            if item.trim().is_empty() {
                return Err(ConfigError::at(line, at + 1, "empty list item"));
            }
            items.push((at + 1, parse_value(item.trim(), at, line)?));
            offset += item.len() + 1;
        }
        return Ok(Value::List(items));
    }
    if t.chars().all(|c| c.is_ascii_digit()) {
        return t.parse().map(Value::Int).map_err(|_| ConfigError::at(line, col + 1, "integer too large"));
    }
    let numeric = |s: &str| !s.is_empty() && s.trim_start_matches('-').chars().all(|c| c.is_ascii_digit());
    if let Some((n, d)) = t.split_once('/') {
        if numeric(n.trim()) && numeric(d.trim()) {
            return t
                .parse()
                .map(Value::Rational)
                .map_err(|_| ConfigError::at(line, col + 1, format!("bad rational {t:?}")));
        }
    }
    if t.contains('.') && t.replace(['.', '-'], "").chars().all(|c| c.is_ascii_digit()) {
        return Err(ConfigError::at(line, col + 1, format!("decimal {t:?} is not exact; write it as p/q")));
    }
    Ok(Value::Str(t.to_string()))
}

struct Entry {
    line: usize,
    column: usize,
    value: Value,
}

impl Entry {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::at(self.line, self.column, message)
    }

    fn string(&self) -> Result<String, ConfigError> {
        match &self.value {
            Value::Str(s) => Ok(s.clone()),
            Value::Int(i) => Ok(i.to_string()),
            Value::Rational(r) => Ok(r.to_string()),
            v => Err(self.err(format!("expected a string, found {}", v.kind()))),
        }
    }

    fn parsed<T: FromStr>(&self) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.string()?.parse().map_err(|e: T::Err| self.err(e.to_string()))
    }

    fn int(&self) -> Result<u64, ConfigError> {
        match &self.value {
            Value::Int(i) => Ok(*i),
            v => Err(self.err(format!("expected an integer, found {}", v.kind()))),
        }
    }

    fn rational(&self) -> Result<Rational, ConfigError> {
        match &self.value {
            Value::Int(i) => Ok(Rational::from_integer(*i as i64)),
            Value::Rational(r) => Ok(r.clone()),
            v => Err(self.err(format!("expected a rational p/q, found {}", v.kind()))),
        }
    }

    fn int_list(&self) -> Result<Vec<(usize, u64)>, ConfigError> {
        let Value::List(items) = &self.value else {
            return Err(self.err(format!("expected a list, found {}", self.value.kind())));
        };
        items
            .iter()
            .map(|(column, v)| match v {
                Value::Int(i) => Ok((*column, *i)),
                v => Err(ConfigError::at(self.line, *column, format!("expected an integer, found {}", v.kind()))),
            })
            .collect()
    }
}

const KEYS: [&str; 9] = ["scenario", "map", "family", "horizon", "n_schedule", "epsilon", "resolution", "seeds", "output"];

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(&str, Entry)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim_start();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let indent = raw.len() - content.len();
            let Some((key, rest)) = content.split_once('=') else {
                return Err(ConfigError::at(line, indent + 1, "expected `key = value`"));
            };
            let key = key.trim_end();
            if !KEYS.contains(&key) {
                return Err(ConfigError::at(line, indent + 1, format!("unknown key {key:?}")));
            }
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::at(line, indent + 1, format!("duplicate key {key:?}")));
            }
            let value_start = raw.len() - rest.trim_start().len();
            if rest.trim().is_empty() {
                return Err(ConfigError::at(line, raw.len() + 1, format!("missing value for {key:?}")));
            }
            let value = parse_value(rest.trim(), value_start, line)?;
            entries.push((key, Entry { line, column: value_start + 1, value }));
        }
        let get = |key: &str| entries.iter().find(|(k, _)| *k == key).map(|(_, e)| e);

        let Some(scenario) = get("scenario") else {
            return Err(ConfigError::at(1, 1, "missing key \"scenario\""));
        };
        let mut cfg = ExperimentConfig::new(scenario.parsed()?);
        if let Some(e) = get("map") {
            cfg.map = Some(e.parsed()?);
        }
        if let Some(e) = get("family") {
            cfg.family = Some(e.parsed()?);
        }
        if let Some(e) = get("horizon") {
            cfg.horizon = Some(e.int()? as usize);
        }
        if let Some(e) = get("n_schedule") {
            let items = e.int_list()?;
            for w in items.windows(2) {
                if w[1].1 <= w[0].1 {
                    return Err(ConfigError::at(e.line, w[1].0, "n_schedule must be strictly increasing"));
                }
            }
            if let Some((column, _)) = items.iter().find(|(_, n)| *n == 0) {
                return Err(ConfigError::at(e.line, *column, "n_schedule entries must be positive"));
            }
            cfg.n_schedule = items.into_iter().map(|(_, n)| n as usize).collect();
        }
        if let Some(e) = get("epsilon") {
            let eps = e.rational()?;
            if !eps.is_positive() {
                return Err(e.err("epsilon must be positive"));
            }
            cfg.epsilon = Some(eps);
        }
        if let Some(e) = get("resolution") {
            let r = e.int()?;
            if r == 0 || r > 40 {
                return Err(e.err("resolution must be in 1..=40"));
            }
            cfg.resolution = Some(r as u32);
        }
        if let Some(e) = get("seeds") {
            cfg.seeds = e.int_list()?.into_iter().map(|(_, s)| s).collect();
        }
        if let Some(e) = get("output") {
            cfg.output = Some(PathBuf::from(e.string()?));
        }
        Ok(cfg)
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, key: &str, items: &[T]) -> fmt::Result {
    let body: Vec<String> = items.iter().map(|x| x.to_string()).collect();
    writeln!(f, "{key} = [{}]", body.join(", "))
}

impl fmt::Display for ExperimentConfig {
    /// Writes the config back in the file format; parsing the output gives
    /// an equal config.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario = {}", self.scenario)?;
        if let Some(m) = &self.map {
            writeln!(f, "map = {m}")?;
        }
        if let Some(fam) = &self.family {
            writeln!(f, "family = {fam}")?;
        }
        if let Some(h) = self.horizon {
            writeln!(f, "horizon = {h}")?;
        }
        if !self.n_schedule.is_empty() {
            write_list(f, "n_schedule", &self.n_schedule)?;
        }
        if let Some(e) = &self.epsilon {
            writeln!(f, "epsilon = {e}")?;
        }
        if let Some(r) = self.resolution {
            writeln!(f, "resolution = {r}")?;
        }
        if !self.seeds.is_empty() {
            write_list(f, "seeds", &self.seeds)?;
        }
        if let Some(o) = &self.output {
            writeln!(f, "output = \"{}\"", o.display())?;
        }
        Ok(())
    }
}
