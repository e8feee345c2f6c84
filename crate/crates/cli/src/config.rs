//! Experiment configuration: one JSON object whose numeric fields may be
//! JSON numbers, decimal strings (`"0.75"`) or fractions (`"2/3"`).

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use reinforced_walks::{make_distribution, DistributionSpec, Mode, StepDistribution};
use serde_json::{Map, Value};

/// A configuration problem tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

/// Parses `"0.5"`, `"-3"`, `"1e4"` or `"2/3"`.
pub fn parse_real(text: &str) -> Option<f64> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let (num, den) = (num.trim().parse::<f64>().ok()?, den.trim().parse::<f64>().ok()?);
            if den == 0.0 {
                return None;
            }
            num / den
        }
        None => text.parse::<f64>().ok()?,
    };
    value.is_finite().then_some(value)
}

#[derive(Debug, Clone)]
pub struct Config {
    map: Map<String, Value>,
    used: std::cell::RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn from_json(text: &str) -> ConfigResult<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| ConfigError::new("<document>", format!("invalid JSON: {e}")))?;
        match value {
            Value::Object(map) => Ok(Config {
                map,
                used: Default::default(),
            }),
            _ => Err(ConfigError::new("<document>", "top level must be a JSON object")),
        }
    }

    pub fn from_path(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
        Config::from_json(&text)
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key).filter(|v| !v.is_null())
    }

    /// Fails on keys that no command step has read.
    pub fn reject_unknown(&self) -> ConfigResult<()> {
        let used = self.used.borrow();
        match self.map.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(ConfigError::new(k.as_str(), "unknown key for this command")),
            None => Ok(()),
        }
    }

    pub fn real(&self, key: &str) -> ConfigResult<Option<f64>> {
        self.get(key).map(|v| value_real(key, v)).transpose()
    }

    pub fn require_real(&self, key: &str) -> ConfigResult<f64> {
        self.real(key)?.ok_or_else(|| ConfigError::new(key, "required"))
    }

    pub fn probability(&self, key: &str) -> ConfigResult<f64> {
        let p = self.require_real(key)?;
        if p > 0.0 && p < 1.0 {
            Ok(p)
        } else {
            Err(ConfigError::new(key, format!("{p} is not in (0, 1)")))
        }
    }

    pub fn uint(&self, key: &str) -> ConfigResult<Option<u64>> {
        self.get(key).map(|v| value_uint(key, v)).transpose()
    }

    pub fn require_uint(&self, key: &str) -> ConfigResult<u64> {
        self.uint(key)?.ok_or_else(|| ConfigError::new(key, "required"))
    }

    pub fn uint_list(&self, key: &str) -> ConfigResult<Option<Vec<u64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, v)| value_uint(&format!("{key}[{i}]"), v))
                .collect::<ConfigResult<Vec<_>>>()
                .map(Some),
            Some(_) => Err(ConfigError::new(key, "expected an array of integers")),
        }
    }

    pub fn string(&self, key: &str) -> ConfigResult<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(ConfigError::new(key, "expected a string")),
        }
    }

    pub fn boolean(&self, key: &str) -> ConfigResult<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(_) => Err(ConfigError::new(key, "expected true or false")),
        }
    }

    pub fn value(&self, key: &str) -> Option<&Value> {
        self.get(key)
    }

    pub fn mode(&self) -> ConfigResult<Mode> {
        match self.string("mode")? {
            None | Some("positive") => Ok(Mode::Positive),
            Some("negative") => Ok(Mode::Negative),
            Some(other) => Err(ConfigError::new(
                "mode",
                format!("`{other}` is not `positive` or `negative`"),
            )),
        }
    }

    /// The `distribution` object; rademacher when absent.
    pub fn distribution(&self) -> ConfigResult<StepDistribution> {
        let spec = match self.get("distribution") {
            None => DistributionSpec::Rademacher,
            Some(Value::String(kind)) => spec_from_kind(kind, &Map::new())?,
            Some(Value::Object(obj)) => {
                let kind = match obj.get("kind") {
                    Some(Value::String(k)) => k.clone(),
                    _ => return Err(ConfigError::new("distribution.kind", "required string")),
                };
                spec_from_kind(&kind, obj)?
            }
            Some(_) => return Err(ConfigError::new("distribution", "expected an object or a kind name")),
        };
        make_distribution(&spec).map_err(|e| ConfigError::new("distribution", e.to_string()))
    }
}

fn spec_from_kind(kind: &str, obj: &Map<String, Value>) -> ConfigResult<DistributionSpec> {
    let allowed: &[&str] = match kind {
        "rademacher" => &["kind"],
        "custom-discrete" => &["kind", "values", "probs"],
        "centered-gaussian" => &["kind", "sd"],
        other => {
            return Err(ConfigError::new(
                "distribution.kind",
                format!("`{other}` is not rademacher, custom-discrete or centered-gaussian"),
            ))
        }
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(ConfigError::new(format!("distribution.{k}"), "unknown key"));
    }
    let reals = |field: &str| -> ConfigResult<Vec<f64>> {
        let key = format!("distribution.{field}");
        match obj.get(field) {
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, v)| value_real(&format!("{key}[{i}]"), v))
                .collect(),
            _ => Err(ConfigError::new(key, "required array")),
        }
    };
    Ok(match kind {
        "rademacher" => DistributionSpec::Rademacher,
        "custom-discrete" => DistributionSpec::CustomDiscrete {
            values: reals("values")?,
            probs: reals("probs")?,
        },
        _ => DistributionSpec::CenteredGaussian {
            sd: match obj.get("sd") {
                Some(v) => value_real("distribution.sd", v)?,
                None => 1.0,
            },
        },
    })
}

fn value_real(key: &str, v: &Value) -> ConfigResult<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| ConfigError::new(key, "number out of range")),
        Value::String(s) => {
            parse_real(s).ok_or_else(|| ConfigError::new(key, format!("`{s}` is not a decimal or fraction")))
        }
        _ => Err(ConfigError::new(key, "expected a number or numeric string")),
    }
}

fn value_uint(key: &str, v: &Value) -> ConfigResult<u64> {
    if let Some(n) = v.as_u64() {
        return Ok(n);
    }
    let x = value_real(key, v)?;
    if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) {
        Ok(x as u64)
    } else {
        Err(ConfigError::new(key, format!("{x} is not a nonnegative integer")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_from_strings() {
        assert_eq!(parse_real("0.5"), Some(0.5));
        assert_eq!(parse_real("2/3"), Some(2.0 / 3.0));
        assert_eq!(parse_real(" 1e4 "), Some(10_000.0));
        assert_eq!(parse_real("1/0"), None);
        assert_eq!(parse_real("half"), None);
    }

    #[test]
    fn integers_accept_several_spellings() {
        let c = Config::from_json(r#"{"a": 10, "b": "1e4", "c": "2.5", "d": [1, "100"]}"#).unwrap();
        assert_eq!(c.uint("a").unwrap(), Some(10));
        assert_eq!(c.uint("b").unwrap(), Some(10_000));
        assert_eq!(c.uint("c").unwrap_err().key, "c");
        assert_eq!(c.uint_list("d").unwrap(), Some(vec![1, 100]));
    }

    #[test]
    fn unknown_keys_are_named() {
        let c = Config::from_json(r#"{"p": "0.5", "pp": 1}"#).unwrap();
        c.probability("p").unwrap();
        assert_eq!(c.reject_unknown().unwrap_err().key, "pp");
    }

    #[test]
    fn distributions() {
        let c = Config::from_json(
            r#"{"distribution": {"kind": "custom-discrete", "values": ["0", "2"], "probs": ["1/2", "0.5"]}}"#,
        )
        .unwrap();
        let d = c.distribution().unwrap();
        assert_eq!(d.m1, 1.0);
        let bad = Config::from_json(r#"{"distribution": {"kind": "custom-discrete", "values": [1], "probs": [0.4]}}"#)
            .unwrap();
        assert_eq!(bad.distribution().unwrap_err().key, "distribution");
        let typo = Config::from_json(r#"{"distribution": {"kind": "centered-gaussian", "sigma": 1}}"#).unwrap();
        assert_eq!(typo.distribution().unwrap_err().key, "distribution.sigma");
    }
}
