//! Flag / config-file resolution and the error shape printed on failure.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde_json::json;
use sst_core::SstError;

/// Failure reported as JSON on stderr.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    /// Config field the error refers to, e.g. `static-lp.k`.
    pub field: Option<String>,
}

impl CliError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError {
            kind: "invalid-config".into(),
            message: message.into(),
            field: Some(field.into()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut v = json!({"error": self.kind, "message": self.message});
        if let Some(f) = &self.field {
            v["field"] = json!(f);
        }
        v.to_string()
    }
}

impl From<SstError> for CliError {
    fn from(e: SstError) -> Self {
        CliError {
            kind: e.kind().to_string(),
            message: e.to_string(),
            field: None,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        SstError::from(e).into()
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        SstError::from(e).into()
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Defaults from a `key = value` file; keys are long flag names. Every
/// resolved value is recorded so it can be echoed into reports.
pub struct Settings {
    section: String,
    file: BTreeMap<String, String>,
    resolved: serde_json::Map<String, serde_json::Value>,
}

impl Settings {
    pub fn load(section: &str, path: Option<&Path>) -> CliResult<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                sst_core::io::parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let mut resolved = serde_json::Map::new();
        resolved.insert("subcommand".into(), json!(section));
        Ok(Settings {
            section: section.to_string(),
            file,
            resolved,
        })
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{}", self.section, key)
    }

    /// Flag value, else config value, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> CliResult<T>
    where
        T: FromStr + Display + Into<serde_json::Value> + Clone,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(
                    raw.parse::<T>()
                        .map_err(|e| CliError::field(self.path(key), format!("cannot parse {raw:?}: {e}")))?,
                ),
                None => default,
            },
        };
        let value = value.ok_or_else(|| CliError::field(self.path(key), "required value missing"))?;
        self.resolved.insert(key.to_string(), value.clone().into());
        Ok(value)
    }

    /// Boolean switch: set by the flag, or by `key = true` in the config.
    pub fn switch(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        let value = if flag {
            true
        } else {
            match self.file.get(key).map(String::as_str) {
                None => false,
                Some("true" | "1" | "yes") => true,
                Some("false" | "0" | "no") => false,
                Some(other) => return Err(CliError::field(self.path(key), format!("not a boolean: {other:?}"))),
            }
        };
        self.resolved.insert(key.to_string(), json!(value));
        Ok(value)
    }

    /// Checks a resolved value against a predicate.
    pub fn check(&self, key: &str, ok: bool, message: &str) -> CliResult<()> {
        if ok {
            Ok(())
        } else {
            Err(CliError::field(self.path(key), message))
        }
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::Value::Object(self.resolved.clone())
    }
}
