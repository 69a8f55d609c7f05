//! Shared record keys and JSON-Lines input.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies a sentence across tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SentenceKey {
    pub answer_id: String,
    pub sentence_index: usize,
}

impl SentenceKey {
    pub fn new(answer_id: &str, sentence_index: usize) -> Self {
        SentenceKey { answer_id: answer_id.to_string(), sentence_index }
    }
}

/// Identifies one method's claim; claim text stands in for identity because
/// duplicates are removed per sentence before evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClaimKey {
    pub method_id: String,
    pub answer_id: String,
    pub sentence_index: usize,
    pub text: String,
}

/// One dataset row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub question_id: String,
    pub question: String,
    pub answer: String,
}

/// First line of every artifact written by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub manifest_digest: String,
}

/// Parses a JSON-Lines file, skipping blank lines and a leading manifest
/// header. Errors carry the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 && serde_json::from_str::<ManifestHeader>(&line).is_ok() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Schema {
            path: path.display().to_string(),
            line: i + 1,
            message: schema_message(&e),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// serde_json's message without its position, which is relative to the line.
fn schema_message(e: &serde_json::Error) -> String {
    let text = e.to_string();
    let bare = text.rfind(" at line ").map_or(text.as_str(), |p| &text[..p]);
    format!("{bare} (column {})", e.column())
}
