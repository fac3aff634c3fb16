//! File loading and JSON emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pptsq::{BipartiteOperator, ComplexMatrix, KrausChannel};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub fn load<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let value = load_value(path, what)?;
    serde_json::from_value(value).with_context(|| format!("{what} ({}): invalid field", path.display()))
}

pub fn load_value(path: &Path, what: &str) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("{what}: cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{what} ({}): malformed JSON", path.display()))
}

/// Anything a command can read from a single file.
pub enum Object {
    Channel(KrausChannel),
    State(BipartiteOperator),
    Matrix(ComplexMatrix),
}

impl Object {
    /// Dispatches on the distinguishing key: `kraus`, `dA` or bare `rows`.
    pub fn load(path: &Path, what: &str) -> Result<Self> {
        let value = load_value(path, what)?;
        let Some(map) = value.as_object() else {
            bail!("{what} ({}): expected a JSON object", path.display());
        };
        let ctx = || format!("{what} ({}): invalid field", path.display());
        if map.contains_key("kraus") {
            Ok(Self::Channel(serde_json::from_value(value).with_context(ctx)?))
        } else if map.contains_key("dA") || map.contains_key("dB") {
            Ok(Self::State(serde_json::from_value(value).with_context(ctx)?))
        } else if map.contains_key("rows") {
            Ok(Self::Matrix(serde_json::from_value(value).with_context(ctx)?))
        } else {
            bail!("{what} ({}): missing field `kraus`, `dA` or `rows`", path.display());
        }
    }
}

pub struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        Self { out }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(&text)
    }

    pub fn text(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("--out: cannot write {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(stdout.flush()?)
            }
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
