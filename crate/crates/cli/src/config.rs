use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use claimify::eval::retrieval::RetrievalConfig;
use claimify::pipeline::PipelineConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub pipeline: PipelineConfig,
    pub eval: EvalConfig,
    /// Connection settings; they do not enter the manifest digest.
    #[serde(skip_serializing)]
    pub provider: ProviderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub model_id: String,
    pub max_retries: usize,
    pub alpha: f64,
    pub retrieval: Vec<RetrievalConfig>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            model_id: "gpt-4o-2024-08-06".into(),
            max_retries: 2,
            alpha: 0.05,
            retrieval: vec![RetrievalConfig::google(), RetrievalConfig::bing()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub base_url: String,
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
    /// Scripted replies for `--provider mock`.
    pub mock_rules: Option<PathBuf>,
    /// Scripted search hits for `--provider mock`.
    pub search_mock: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120,
            max_in_flight: 8,
            mock_rules: None,
            search_mock: None,
        }
    }
}

impl Config {
    /// Reads a TOML file. Relative fixture paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.provider.mock_rules, &mut cfg.provider.search_mock].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.pipeline.validate()?;
        for r in &cfg.eval.retrieval {
            claimify::eval::retrieval::validate(r)?;
        }
        anyhow::ensure!(cfg.eval.alpha > 0.0 && cfg.eval.alpha < 1.0, "eval.alpha must lie in (0, 1)");
        Ok(cfg)
    }
}
