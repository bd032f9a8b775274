//! Record-per-line file helpers. Every emitted file may start with a `_meta`
//! line carrying the config hash and seed; readers skip it.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
}

impl ArtifactMeta {
    pub fn new(kind: impl Into<String>, config_hash: impl Into<String>, seed: u64) -> Self {
        ArtifactMeta {
            kind: kind.into(),
            config_hash: config_hash.into(),
            seed,
        }
    }

    pub fn with_kind(&self, kind: impl Into<String>) -> Self {
        ArtifactMeta {
            kind: kind.into(),
            ..self.clone()
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    #[serde(rename = "_meta")]
    meta: ArtifactMeta,
}

/// Serializes records one per line (`\n` terminated), preceded by the meta
/// line when given.
pub fn to_jsonl<T: Serialize>(meta: Option<&ArtifactMeta>, records: &[T]) -> Result<String> {
    let mut out = String::new();
    if let Some(meta) = meta {
        out.push_str(&serde_json::to_string(&MetaLine { meta: meta.clone() })?);
        out.push('\n');
    }
    for rec in records {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses records, returning the meta line if present. Errors carry the
/// one-based line number.
pub fn from_jsonl<T: DeserializeOwned>(raw: &str) -> Result<(Option<ArtifactMeta>, Vec<T>)> {
    let mut meta = None;
    let mut records = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if line.trim_start().starts_with("{\"_meta\"") {
            let m: MetaLine = serde_json::from_str(line).map_err(|e| Error::Line {
                line: idx + 1,
                message: e.to_string(),
            })?;
            meta = Some(m.meta);
            continue;
        }
        records.push(serde_json::from_str(line).map_err(|e| Error::Line {
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok((meta, records))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Pretty JSON document with a trailing newline.
pub fn to_json_doc<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_line_round_trip() {
        let meta = ArtifactMeta::new("x", "abc", 7);
        let text = to_jsonl(Some(&meta), &[1u32, 2, 3]).unwrap();
        assert!(text.ends_with("3\n"));
        let (m, recs): (_, Vec<u32>) = from_jsonl(&text).unwrap();
        assert_eq!(m, Some(meta));
        assert_eq!(recs, [1, 2, 3]);
    }

    #[test]
    fn bad_line_number() {
        let err = from_jsonl::<u32>("1\n\nx\n").unwrap_err();
        assert!(matches!(err, Error::Line { line: 3, .. }));
    }
}
