// SPDX-License-Identifier: Apache-2.0 OR MIT
//! `key = value` scenario files.
//!
//! Blank lines and lines starting with `#` are ignored. Every key can be
//! overridden from the command line with a flag of the same name.

use std::fmt::Write as _;
use std::path::Path;

use gram_core::{Protocol, ScenarioConfig, SimDuration};
use thiserror::Error;

/// Recognized keys, in the order [`to_kv`] writes them.
pub const KEYS: &[&str] = &[
    "protocol",
    "nodes",
    "side",
    "radius",
    "link_delay_ms",
    "groups",
    "group_size",
    "rate",
    "cache",
    "duration_s",
    "sample_ms",
    "warmup_s",
    "payload",
    "seed",
    "mart_timeout_s",
    "interest_lifetime_s",
    "access_delay_ms",
    "max_attempts",
    "verify_counters",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<ConfigError>,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn bad(key: &str, value: &str) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| bad(key, value))
}

fn non_negative(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = num(key, value)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(bad(key, value))
    }
}

fn millis(key: &str, value: &str) -> Result<SimDuration, ConfigError> {
    non_negative(key, value).map(SimDuration::from_millis_f64)
}

fn secs(key: &str, value: &str) -> Result<SimDuration, ConfigError> {
    non_negative(key, value).map(SimDuration::from_secs_f64)
}

/// Sets one key. Range checks beyond parsing are left to
/// [`ScenarioConfig::validate`].
pub fn set(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    let value = value.trim();
    match key {
        "protocol" => cfg.protocol = Protocol::parse(value).ok_or_else(|| bad(key, value))?,
        "nodes" => cfg.nodes = num(key, value)?,
        "side" => cfg.side = num(key, value)?,
        "radius" => cfg.radius = num(key, value)?,
        "link_delay_ms" => cfg.link_delay = millis(key, value)?,
        "groups" => cfg.groups = num(key, value)?,
        "group_size" => cfg.group_size = num(key, value)?,
        "rate" => cfg.rate = num(key, value)?,
        "cache" => cfg.cache_capacity = num(key, value)?,
        "duration_s" => cfg.duration = secs(key, value)?,
        "sample_ms" => cfg.sample_period = millis(key, value)?,
        "warmup_s" => cfg.warmup = secs(key, value)?,
        "payload" => cfg.payload_size = num(key, value)?,
        "seed" => cfg.seed = num(key, value)?,
        "mart_timeout_s" => cfg.mart_timeout = secs(key, value)?,
        "interest_lifetime_s" => cfg.interest_lifetime = secs(key, value)?,
        "access_delay_ms" => cfg.access_delay = millis(key, value)?,
        "max_attempts" => cfg.max_topology_attempts = num(key, value)?,
        "verify_counters" => cfg.verify_counters = num(key, value)?,
        _ => return Err(ConfigError::UnknownKey(key.to_string())),
    }
    Ok(())
}

/// Applies a config file body on top of `cfg`.
pub fn apply_str(cfg: &mut ScenarioConfig, text: &str) -> Result<(), ConfigError> {
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: idx + 1 })?;
        set(cfg, key.trim(), value).map_err(|e| ConfigError::AtLine {
            line: idx + 1,
            source: Box::new(e),
        })?;
    }
    Ok(())
}

pub fn apply_file(cfg: &mut ScenarioConfig, path: &Path) -> Result<(), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    apply_str(cfg, &text)
}

fn ms(d: SimDuration) -> String {
    format!("{}", d.as_millis_f64())
}

fn s(d: SimDuration) -> String {
    format!("{}", d.as_micros() as f64 / 1e6)
}

/// The whole configuration as a config file body.
pub fn to_kv(cfg: &ScenarioConfig) -> String {
    let values = [
        cfg.protocol.to_string(),
        cfg.nodes.to_string(),
        cfg.side.to_string(),
        cfg.radius.to_string(),
        ms(cfg.link_delay),
        cfg.groups.to_string(),
        cfg.group_size.to_string(),
        cfg.rate.to_string(),
        cfg.cache_capacity.to_string(),
        s(cfg.duration),
        ms(cfg.sample_period),
        s(cfg.warmup),
        cfg.payload_size.to_string(),
        cfg.seed.to_string(),
        s(cfg.mart_timeout),
        s(cfg.interest_lifetime),
        ms(cfg.access_delay),
        cfg.max_topology_attempts.to_string(),
        cfg.verify_counters.to_string(),
    ];
    let mut out = String::new();
    for (key, value) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{key} = {value}");
    }
    out
}
