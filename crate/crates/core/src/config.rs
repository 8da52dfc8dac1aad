//! Tunable parameters and the `key=value` config format.
//!
//! Config files hold one `key = value` per line; `#` starts a comment.
//! Overrides are applied after the file, later entries win.

use std::path::Path;

use crate::error::{Error, Result};
use crate::index::MAX_BOUND;
use crate::name_model::DEFAULT_MIN_COUNT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    /// Friend first-name similarity must exceed this.
    pub alpha: f64,
    /// Friend last-name similarity must exceed this.
    pub beta: f64,
    /// Best candidate score must exceed this.
    pub gamma: f64,
    /// Best / runner-up score ratio must exceed this.
    pub delta: f64,
    /// Maximum edit distance between names in candidate generation.
    pub candidate_distance: u8,
    /// Name pairs seen fewer times are dropped from the synonym dictionary.
    pub synonym_min_count: u64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            alpha: 0.8,
            beta: 0.6,
            gamma: 3.0,
            delta: 5.0,
            candidate_distance: 1,
            synonym_min_count: DEFAULT_MIN_COUNT,
        }
    }
}

/// `(key, default, description)` for every config key, in help order.
pub const CONFIG_KEYS: &[(&str, &str, &str)] = &[
    ("alpha", "0.8", "friend first-name similarity threshold, in (0, 1]"),
    ("beta", "0.6", "friend last-name similarity threshold, in (0, 1]"),
    ("gamma", "3", "minimum profile similarity of the best candidate, >= 0"),
    ("delta", "5", "minimum best/runner-up score ratio, >= 1"),
    (
        "candidate_distance",
        "1",
        "max edit distance between names for candidates, 0..=2",
    ),
    (
        "synonym_min_count",
        "2",
        "min occurrences of a name pair to enter the synonym dictionary, >= 1",
    ),
];

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config("alpha", format!("must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::config("beta", format!("must be in (0, 1], got {}", self.beta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if !(self.delta >= 1.0 && self.delta.is_finite()) {
            return Err(Error::config("delta", format!("must be >= 1, got {}", self.delta)));
        }
        if self.candidate_distance > MAX_BOUND {
            return Err(Error::config(
                "candidate_distance",
                format!("must be 0, 1 or 2, got {}", self.candidate_distance),
            ));
        }
        if self.synonym_min_count < 1 {
            return Err(Error::config("synonym_min_count", "must be >= 1"));
        }
        Ok(())
    }

    /// Sets one key from its textual value. Does not validate ranges.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::config(key, format!("cannot parse {value:?}")))
        }
        match key {
            "alpha" => self.alpha = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "candidate_distance" => self.candidate_distance = num(key, value)?,
            "synonym_min_count" => self.synonym_min_count = num(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Defaults, then the file contents, then `overrides`; validated.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = MatchConfig::default();
        for (key, value) in parse_key_values(text)? {
            cfg.set(&key, &value)?;
        }
        for (key, value) in overrides {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        Self::parse(&text, overrides)
    }

    pub fn to_key_values(&self) -> String {
        format!(
            "alpha={}\nbeta={}\ngamma={}\ndelta={}\ncandidate_distance={}\nsynonym_min_count={}\n",
            self.alpha, self.beta, self.gamma, self.delta, self.candidate_distance, self.synonym_min_count
        )
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("line {}: expected key=value", idx + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a `key=value` override as given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::config(s, "expected key=value"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}
