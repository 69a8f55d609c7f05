//! OpenAI-compatible chat-completions client.

use std::time::Duration;

use serde_json::{json, Value};

use super::{ChatCall, ChatProvider};
use crate::error::{Error, Result};

pub struct OpenAiProvider {
    client: reqwest::blocking::Client,
    base_url: String,
    api_key: String,
    id: String,
}

impl OpenAiProvider {
    pub fn new(base_url: &str, api_key: &str, timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(OpenAiProvider {
            client,
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key: api_key.to_string(),
            id: format!("openai-compatible:{base_url}"),
        })
    }

    /// Reads the key from `env_var`; a missing key is a startup error.
    pub fn from_env(base_url: &str, env_var: &str, timeout: Duration) -> Result<Self> {
        let key = std::env::var(env_var)
            .map_err(|_| Error::Config(format!("live provider needs credentials in ${env_var}")))?;
        Self::new(base_url, &key, timeout)
    }
}

impl ChatProvider for OpenAiProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn chat(&self, call: &ChatCall) -> Result<String> {
        let body = json!({
            "model": call.model_id,
            "messages": [
                {"role": "system", "content": call.system},
                {"role": "user", "content": call.user},
            ],
            "temperature": call.temperature,
            "seed": call.ordinal,
            "n": 1,
        });
        let resp = self
            .client
            .post(format!("{}/chat/completions", self.base_url))
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| Error::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Error::Transport(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Error::Transport(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Err(Error::Provider(format!("HTTP {status}: {text}")));
        }
        let v: Value = serde_json::from_str(&text)?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::Provider(format!("response without message content: {text}")))
    }
}
