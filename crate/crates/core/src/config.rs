//! Flat `key = value` configuration documents.
//!
//! One entry per line, `#` starts a comment (whole-line or trailing). Typed
//! loaders pull the keys they understand with the `take_*` methods; whatever
//! is left over afterwards is reported by [`ConfigDoc::ensure_consumed`].

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ConfigDoc {
    entries: BTreeMap<String, Entry>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    key: content.to_string(),
                    line,
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    key: String::new(),
                    line,
                    message: "empty key".into(),
                });
            }
            let entry = Entry {
                value: value.to_string(),
                line,
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(Error::Parse {
                    key: key.to_string(),
                    line,
                    message: format!("duplicate key (first set on line {})", prev.line),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn take_parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(entry) => entry.value.parse::<T>().map(Some).map_err(|e| Error::Parse {
                key: key.to_string(),
                line: entry.line,
                message: format!("`{}`: {e}", entry.value),
            }),
        }
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        let value: Option<f64> = self.take_parsed(key)?;
        if let Some(v) = value {
            if !v.is_finite() {
                return Err(Error::Parse {
                    key: key.to_string(),
                    line: 0,
                    message: format!("non-finite value {v}"),
                });
            }
        }
        Ok(value)
    }

    pub fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        self.take_parsed(key)
    }

    pub fn take_string(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|e| e.value)
    }

    /// Fails on the first key no loader has taken.
    pub fn ensure_consumed(&self) -> Result<()> {
        match self.entries.iter().next() {
            None => Ok(()),
            Some((key, entry)) => Err(Error::Parse {
                key: key.clone(),
                line: entry.line,
                message: "unknown key".into(),
            }),
        }
    }
}
