//! Run manifests and manifest-headed JSON-Lines output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// What an output depends on. Provider ids and the timestamp live beside it
/// in the sidecar but stay out of the digest, so a cache-only replay of a mock
/// or live run yields the same bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_digest: String,
    pub model_id: String,
    pub prompt_templates: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, config_digest: &str, model_id: &str) -> Self {
        Manifest {
            command: command.into(),
            config_digest: config_digest.into(),
            model_id: model_id.into(),
            prompt_templates: claimify::prompts::template_digests().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> Result<()> {
        self.inputs.insert(name.to_string(), file_digest(path)?);
        Ok(())
    }

    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("manifest serializes"))
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    manifest_digest: String,
    #[serde(flatten)]
    manifest: &'a Manifest,
    provider_ids: &'a [String],
    timestamp: u64,
}

/// Writes `name` under `dir` as JSON-Lines: a `{"manifest_digest": ...}`
/// header, then one row per record. The file appears atomically.
pub fn write_jsonl<T: Serialize>(dir: &Path, name: &str, rows: &[T], manifest: &Manifest, provider_ids: &[String]) -> Result<PathBuf> {
    let digest = manifest.digest();
    let mut body = serde_json::to_string(&serde_json::json!({ "manifest_digest": digest }))?;
    body.push('\n');
    for r in rows {
        body.push_str(&serde_json::to_string(r)?);
        body.push('\n');
    }
    let path = dir.join(name);
    atomic_write(&path, body.as_bytes())?;

    let timestamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let sidecar = Sidecar { manifest_digest: digest, manifest, provider_ids, timestamp };
    let mut side = serde_json::to_string_pretty(&sidecar)?;
    side.push('\n');
    atomic_write(&dir.join(format!("{name}.manifest.json")), side.as_bytes())?;
    Ok(path)
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
