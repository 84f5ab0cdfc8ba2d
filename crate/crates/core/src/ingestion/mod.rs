//! File loaders for snapshots, holder histories, vault portfolios and
//! scenarios.
//!
//! All four kinds are TOML documents carrying `schema_version`. Money and
//! fractions are decimal strings, dates ISO-8601 calendar dates. Schemas are
//! closed: an unknown key is an error. Loaders collect every problem in a
//! file before failing.

mod holders;
mod scenario;
mod snapshot;
mod vaults;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CalmError, Result};
use crate::Money;

pub use holders::{holders_to_toml, load_holders};
pub use scenario::{
    load_scenario, scenario_to_toml, LiquidityParameters, Scenario, Tolerances, DEFAULT_TABLE,
};
pub use snapshot::{load_snapshot, load_vault_book, read_snapshot, snapshot_to_toml};
pub use vaults::{load_vaults, vaults_to_toml};

/// The only schema version this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// A value taken from the default table because the file left it out.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AppliedDefault {
    pub field: String,
    pub value: String,
}

impl fmt::Display for AppliedDefault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} (default)", self.field, self.value)
    }
}

/// A loaded value together with the defaults that were filled in.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub defaults: Vec<AppliedDefault>,
}

fn read_toml<R: DeserializeOwned>(path: &Path) -> Result<R> {
    let text = std::fs::read_to_string(path).map_err(|e| CalmError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CalmError::parse(path, vec![e.to_string().trim_end().replace('\n', " ")]))
}

fn to_toml<S: Serialize>(value: &S) -> String {
    toml::to_string(value).expect("file records serialize to TOML")
}

/// Accumulates problems found while converting a parsed file.
#[derive(Default)]
struct Problems(Vec<String>);

impl Problems {
    fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    fn version(&mut self, found: u32) {
        if found != SCHEMA_VERSION {
            self.push(format!("unsupported schema_version {found} (expected {SCHEMA_VERSION})"));
        }
    }

    fn decimal(&mut self, ctx: &str, field: &str, raw: &str) -> Option<Money> {
        match Money::from_str_exact(raw.trim()) {
            Ok(d) => Some(d),
            Err(e) => {
                self.push(format!("{ctx}: field `{field}`: malformed decimal {raw:?} ({e})"));
                None
            }
        }
    }

    fn float(&mut self, ctx: &str, field: &str, raw: &str) -> Option<f64> {
        match raw.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.push(format!("{ctx}: field `{field}`: malformed number {raw:?}"));
                None
            }
        }
    }

    fn date(&mut self, ctx: &str, field: &str, raw: &str) -> Option<NaiveDate> {
        match NaiveDate::from_str(raw.trim()) {
            Ok(d) => Some(d),
            Err(e) => {
                self.push(format!("{ctx}: field `{field}`: malformed date {raw:?} ({e})"));
                None
            }
        }
    }

    /// Parses a snake_case enum name through its serde representation.
    fn keyword<E: DeserializeOwned>(&mut self, ctx: &str, field: &str, raw: &str) -> Option<E> {
        match E::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(raw)) {
            Ok(v) => Some(v),
            Err(_) => {
                self.push(format!("{ctx}: field `{field}`: unknown value {raw:?}"));
                None
            }
        }
    }

    fn finish<T>(self, path: &Path, value: Option<T>) -> Result<T> {
        match value {
            Some(v) if self.0.is_empty() => Ok(v),
            _ => Err(CalmError::parse(path, self.0)),
        }
    }
}

/// Canonical string form for a serialized keyword.
fn keyword_str<E: Serialize>(value: &E) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        other => panic!("keyword serializes to a string, got {other:?}"),
    }
}
