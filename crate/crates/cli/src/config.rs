//! `key = value` run configuration with per-subcommand schemas.
//!
//! Every key a subcommand understands is declared with a type and a default;
//! anything else in the file is rejected before work starts.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(key) => write!(f, "config key `{key}`: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Real,
    /// Strictly positive real.
    Positive,
    /// Real ≥ 0.
    NonNegative,
    Count,
    Seed,
    /// Comma-separated positive reals.
    PositiveList,
    /// Comma-separated counts ≥ 1.
    CountList,
    Choice(&'static [&'static str]),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Count(usize),
    Seed(u64),
    Reals(Vec<f64>),
    Counts(Vec<usize>),
    Choice(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |items: Vec<String>| items.join(",");
        match self {
            Value::Real(v) => write!(f, "{v:e}"),
            Value::Count(v) => write!(f, "{v}"),
            Value::Seed(v) => write!(f, "{v}"),
            Value::Reals(v) => write!(f, "{}", join(v.iter().map(|x| format!("{x:e}")).collect())),
            Value::Counts(v) => write!(f, "{}", join(v.iter().map(|x| x.to_string()).collect())),
            Value::Choice(v) => write!(f, "{v}"),
        }
    }
}

pub struct KeySpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
}

pub const fn key(key: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec { key, kind, default }
}

/// Raw `key → value` pairs in file order.
pub fn parse_document(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError {
                key: None,
                message: format!("line {}: expected `key = value`, got `{line}`", lineno + 1),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError {
                key: None,
                message: format!("line {}: empty key", lineno + 1),
            });
        }
        if seen.insert(k.to_string(), lineno + 1).is_some() {
            return Err(ConfigError::at(k, "given more than once"));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn parse_real(k: &str, text: &str) -> Result<f64, ConfigError> {
    let v: f64 = text
        .parse()
        .map_err(|_| ConfigError::at(k, format!("`{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(ConfigError::at(k, "must be finite"));
    }
    Ok(v)
}

fn parse_count(k: &str, text: &str) -> Result<usize, ConfigError> {
    text.parse()
        .map_err(|_| ConfigError::at(k, format!("`{text}` is not a non-negative integer")))
}

fn parse_value(spec: &KeySpec, text: &str) -> Result<Value, ConfigError> {
    let k = spec.key;
    let list = |text: &str| -> Vec<String> {
        text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    };
    Ok(match spec.kind {
        Kind::Real => Value::Real(parse_real(k, text)?),
        Kind::Positive => {
            let v = parse_real(k, text)?;
            if v <= 0.0 {
                return Err(ConfigError::at(k, format!("must be > 0, got {v}")));
            }
            Value::Real(v)
        }
        Kind::NonNegative => {
            let v = parse_real(k, text)?;
            if v < 0.0 {
                return Err(ConfigError::at(k, format!("must be >= 0, got {v}")));
            }
            Value::Real(v)
        }
        Kind::Count => Value::Count(parse_count(k, text)?),
        Kind::Seed => Value::Seed(
            text.parse()
                .map_err(|_| ConfigError::at(k, format!("`{text}` is not a 64-bit seed")))?,
        ),
        Kind::PositiveList => {
            let items = list(text);
            if items.is_empty() {
                return Err(ConfigError::at(k, "empty list"));
            }
            let mut values = Vec::new();
            for item in items {
                let v = parse_real(k, &item)?;
                if v <= 0.0 {
                    return Err(ConfigError::at(k, format!("entries must be > 0, got {v}")));
                }
                values.push(v);
            }
            Value::Reals(values)
        }
        Kind::CountList => {
            let items = list(text);
            if items.is_empty() {
                return Err(ConfigError::at(k, "empty list"));
            }
            let mut values = Vec::new();
            for item in items {
                let v = parse_count(k, &item)?;
                if v == 0 {
                    return Err(ConfigError::at(k, "entries must be >= 1"));
                }
                values.push(v);
            }
            Value::Counts(values)
        }
        Kind::Choice(options) => {
            if !options.contains(&text) {
                return Err(ConfigError::at(
                    k,
                    format!("`{text}` is not one of {}", options.join(", ")),
                ));
            }
            Value::Choice(text.to_string())
        }
    })
}

/// A fully typed configuration: every schema key, with defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    entries: BTreeMap<&'static str, Value>,
}

impl Resolved {
    pub fn resolve(schema: &[KeySpec], document: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut given: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in document {
            if !schema.iter().any(|s| s.key == k) {
                return Err(ConfigError::at(k, "unknown key for this subcommand"));
            }
            given.insert(k, v);
        }
        let mut entries = BTreeMap::new();
        for spec in schema {
            let text = given.get(spec.key).copied().unwrap_or(spec.default);
            entries.insert(spec.key, parse_value(spec, text)?);
        }
        Ok(Self { entries })
    }

    /// Replaces a key after resolution (command-line overrides).
    pub fn set(&mut self, key: &'static str, value: Value) {
        self.entries.insert(key, value);
    }

    fn get(&self, key: &str) -> &Value {
        self.entries
            .get(key)
            .unwrap_or_else(|| panic!("`{key}` is not in this subcommand's schema"))
    }

    pub fn real(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Real(v) => *v,
            other => panic!("`{key}` holds {other:?}, not a real"),
        }
    }

    pub fn count(&self, key: &str) -> usize {
        match self.get(key) {
            Value::Count(v) => *v,
            other => panic!("`{key}` holds {other:?}, not a count"),
        }
    }

    pub fn seed(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::Seed(v) => *v,
            other => panic!("`{key}` holds {other:?}, not a seed"),
        }
    }

    pub fn reals(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::Reals(v) => v,
            other => panic!("`{key}` holds {other:?}, not a list of reals"),
        }
    }

    pub fn counts(&self, key: &str) -> &[usize] {
        match self.get(key) {
            Value::Counts(v) => v,
            other => panic!("`{key}` holds {other:?}, not a list of counts"),
        }
    }

    pub fn choice(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Choice(v) => v,
            other => panic!("`{key}` holds {other:?}, not a choice"),
        }
    }

    /// `key → value` strings in key order, for provenance blocks.
    pub fn to_strings(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &[KeySpec] = &[
        key("grid.n_points", Kind::Count, "64"),
        key("kernel.ell_g", Kind::Positive, "1.0"),
        key("kernel.kind", Kind::Choice(&["gaussian", "identity"]), "gaussian"),
        key("sweep", Kind::PositiveList, "0.5, 1"),
        key("seed", Kind::Seed, "42"),
    ];

    #[test]
    fn parses_comments_and_defaults() {
        let doc = parse_document("# header\n\nkernel.ell_g = 2.5e-6  # metres\nsweep=1,2,3\n").unwrap();
        let r = Resolved::resolve(SCHEMA, &doc).unwrap();
        assert_eq!(r.real("kernel.ell_g"), 2.5e-6);
        assert_eq!(r.reals("sweep"), &[1.0, 2.0, 3.0]);
        assert_eq!(r.count("grid.n_points"), 64);
        assert_eq!(r.choice("kernel.kind"), "gaussian");
        assert_eq!(r.seed("seed"), 42);
        assert_eq!(r.to_strings()["kernel.ell_g"], "2.5e-6");
    }

    #[test]
    fn rejects_bad_documents() {
        let err = |text: &str| {
            let doc = parse_document(text)?;
            Resolved::resolve(SCHEMA, &doc).map(|_| ())
        };
        assert_eq!(err("kernel.elll = 1").unwrap_err().key.as_deref(), Some("kernel.elll"));
        assert_eq!(err("kernel.ell_g = -1").unwrap_err().key.as_deref(), Some("kernel.ell_g"));
        assert_eq!(err("kernel.ell_g = abc").unwrap_err().key.as_deref(), Some("kernel.ell_g"));
        assert_eq!(err("kernel.kind = step").unwrap_err().key.as_deref(), Some("kernel.kind"));
        assert_eq!(err("grid.n_points = 1.5").unwrap_err().key.as_deref(), Some("grid.n_points"));
        assert_eq!(err("seed = 1\nseed = 2").unwrap_err().key.as_deref(), Some("seed"));
        assert!(err("just words").unwrap_err().key.is_none());
        assert!(err("sweep = ,").is_err());
    }
}
