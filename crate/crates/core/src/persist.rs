//! Versioned JSON documents for persisted models.
//!
//! Models are written as pretty-printed JSON whose object keys are emitted
//! in lexicographic order (struct fields are declared sorted and maps are
//! `BTreeMap`s), so saving the same model always produces the same bytes.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::error::Category;
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

pub(crate) fn save<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(json_error)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub(crate) fn load<T: DeserializeOwned, R: Read>(mut input: R) -> Result<T> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Err(Error::Truncated);
    }
    let value: Value = serde_json::from_str(&text).map_err(json_error)?;
    let found = value
        .get("schema_version")
        .ok_or_else(|| Error::ModelFormat("missing schema_version".into()))?
        .as_u64()
        .ok_or_else(|| Error::ModelFormat("schema_version is not an integer".into()))?;
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion { found, expected: SCHEMA_VERSION });
    }
    serde_json::from_value(value).map_err(json_error)
}

fn json_error(e: serde_json::Error) -> Error {
    match e.classify() {
        Category::Eof => Error::Truncated,
        Category::Io => Error::Io(e.into()),
        Category::Syntax | Category::Data => Error::ModelFormat(e.to_string()),
    }
}

/// Maps keyed by integers are stored with decimal string keys, sorted as
/// strings like every other key in the file.
pub(crate) mod int_keys {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<u64, u64>, s: S) -> Result<S::Ok, S::Error> {
        let as_strings: BTreeMap<String, u64> = map.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        as_strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, u64>, D::Error> {
        let raw = BTreeMap::<String, u64>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.parse::<u64>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("non-integer key {k:?}")))
            })
            .collect()
    }
}
