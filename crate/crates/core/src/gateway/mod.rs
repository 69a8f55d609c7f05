//! Chat-completion gateway: provider abstraction, response cache, retries and
//! a bound on concurrent provider calls.

mod cache;
mod mock;
mod openai;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, ParseError, Result};

pub use cache::DiskCache;
pub use mock::{MockProvider, MockRule};
pub use openai::OpenAiProvider;

const LLM_NAMESPACE: &str = "llm";

/// Sampling temperature the pipeline uses for a given completion count.
pub fn temperature_for(n_completions: usize) -> f64 {
    if n_completions > 1 {
        0.2
    } else {
        0.0
    }
}

/// One logical request, possibly sampled several times.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptRequest {
    pub system_text: String,
    pub user_text: String,
    pub n_completions: usize,
    pub temperature: f64,
    pub model_id: String,
}

impl PromptRequest {
    /// Builds a request with the temperature implied by `n_completions`.
    pub fn new(model_id: &str, system_text: &str, user_text: String, n_completions: usize) -> Self {
        PromptRequest {
            system_text: system_text.to_string(),
            user_text,
            n_completions: n_completions.max(1),
            temperature: temperature_for(n_completions),
            model_id: model_id.to_string(),
        }
    }

    pub fn call(&self, ordinal: usize) -> ChatCall {
        ChatCall {
            model_id: self.model_id.clone(),
            system: self.system_text.clone(),
            user: self.user_text.clone(),
            temperature: self.temperature,
            ordinal,
        }
    }
}

/// A single provider invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatCall {
    pub model_id: String,
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub ordinal: usize,
}

impl ChatCall {
    /// Hex sha256 over every field; a pure function of the call.
    pub fn cache_key(&self) -> String {
        let body = serde_json::to_vec(self).expect("call serializes");
        hex::encode(Sha256::digest(body))
    }
}

pub trait ChatProvider: Send + Sync {
    fn id(&self) -> &str;
    fn chat(&self, call: &ChatCall) -> Result<String>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    /// "cache" when replayed, otherwise the provider id.
    pub provider_meta: String,
    pub cache_key: String,
    pub ordinal: usize,
}

/// Outcome of a parse-checked request.
#[derive(Debug, Clone, PartialEq)]
pub enum Attempted<T> {
    Parsed { value: T, transcript: String, attempts: usize },
    Failure { rejected: Vec<String> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayStats {
    pub provider_calls: usize,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

struct Limiter {
    in_flight: Mutex<usize>,
    freed: Condvar,
    max: usize,
}

struct Permit<'a>(&'a Limiter);

impl Limiter {
    fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_flight.lock().expect("limiter poisoned");
        while *n >= self.max {
            n = self.freed.wait(n).expect("limiter poisoned");
        }
        *n += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().expect("limiter poisoned");
        *n -= 1;
        self.0.freed.notify_one();
    }
}

pub struct Gateway {
    provider: Option<Arc<dyn ChatProvider>>,
    cache: Option<DiskCache>,
    limiter: Limiter,
    transport_retries: usize,
    backoff: Duration,
    provider_calls: AtomicUsize,
    cache_hits: AtomicUsize,
    cache_misses: AtomicUsize,
}

impl Gateway {
    /// Gateway backed by a provider, optionally caching through `cache`.
    pub fn new(provider: Arc<dyn ChatProvider>, cache: Option<DiskCache>) -> Self {
        Self::build(Some(provider), cache)
    }

    /// Gateway that may only replay cached completions.
    pub fn cache_only(cache: DiskCache) -> Self {
        Self::build(None, Some(cache))
    }

    fn build(provider: Option<Arc<dyn ChatProvider>>, cache: Option<DiskCache>) -> Self {
        Gateway {
            provider,
            cache,
            limiter: Limiter { in_flight: Mutex::new(0), freed: Condvar::new(), max: 8 },
            transport_retries: 3,
            backoff: Duration::from_millis(500),
            provider_calls: AtomicUsize::new(0),
            cache_hits: AtomicUsize::new(0),
            cache_misses: AtomicUsize::new(0),
        }
    }

    pub fn with_max_in_flight(mut self, max: usize) -> Self {
        self.limiter.max = max.max(1);
        self
    }

    pub fn with_transport_retries(mut self, retries: usize, backoff: Duration) -> Self {
        self.transport_retries = retries;
        self.backoff = backoff;
        self
    }

    pub fn provider_id(&self) -> &str {
        self.provider.as_ref().map_or("cache-only", |p| p.id())
    }

    pub fn cache(&self) -> Option<&DiskCache> {
        self.cache.as_ref()
    }

    pub fn is_cache_only(&self) -> bool {
        self.provider.is_none()
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            provider_calls: self.provider_calls.load(Ordering::SeqCst),
            cache_hits: self.cache_hits.load(Ordering::SeqCst),
            cache_misses: self.cache_misses.load(Ordering::SeqCst),
        }
    }

    /// Returns exactly `n_completions` completions with ordinals `0..n`.
    pub fn complete(&self, req: &PromptRequest) -> Result<Vec<Completion>> {
        (0..req.n_completions).map(|i| self.complete_call(&req.call(i))).collect()
    }

    /// Serves one call from cache or provider.
    pub fn complete_call(&self, call: &ChatCall) -> Result<Completion> {
        let key = call.cache_key();
        if let Some(cache) = &self.cache {
            if let Some(text) = cache.get(LLM_NAMESPACE, &key, "txt")? {
                self.cache_hits.fetch_add(1, Ordering::SeqCst);
                return Ok(Completion { text, provider_meta: "cache".into(), cache_key: key, ordinal: call.ordinal });
            }
            self.cache_misses.fetch_add(1, Ordering::SeqCst);
        }
        let Some(provider) = &self.provider else {
            return Err(Error::CacheMiss { key });
        };
        let text = self.invoke(provider.as_ref(), call)?;
        if let Some(cache) = &self.cache {
            cache.put(LLM_NAMESPACE, &key, "txt", &text)?;
        }
        Ok(Completion { text, provider_meta: provider.id().to_string(), cache_key: key, ordinal: call.ordinal })
    }

    fn invoke(&self, provider: &dyn ChatProvider, call: &ChatCall) -> Result<String> {
        let mut attempt = 0;
        loop {
            let result = {
                let _permit = self.limiter.acquire();
                self.provider_calls.fetch_add(1, Ordering::SeqCst);
                provider.chat(call)
            };
            match result {
                Err(e) if e.is_retryable() && attempt < self.transport_retries => {
                    log::warn!("transport error (attempt {}): {e}", attempt + 1);
                    std::thread::sleep(self.backoff * 2u32.saturating_pow(attempt as u32));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    /// Fills completion slot `slot` of `req`, reissuing on parse rejection.
    ///
    /// Attempt `a` uses ordinal `a * n_completions + slot`, so every retry is a
    /// fresh cache entry and a rejected text is never replayed as the answer
    /// for another ordinal.
    pub fn call_with_retries<T, F>(&self, req: &PromptRequest, slot: usize, max_retries: usize, parse: F) -> Result<Attempted<T>>
    where
        F: Fn(&str) -> std::result::Result<T, ParseError>,
    {
        let mut rejected = Vec::new();
        for attempt in 0..=max_retries {
            let ordinal = attempt * req.n_completions + slot;
            let completion = self.complete_call(&req.call(ordinal))?;
            match parse(&completion.text) {
                Ok(value) => {
                    return Ok(Attempted::Parsed { value, transcript: completion.text, attempts: attempt + 1 })
                }
                Err(e) => {
                    log::debug!("slot {slot} attempt {attempt} rejected: {}", e.0);
                    rejected.push(completion.text);
                }
            }
        }
        Ok(Attempted::Failure { rejected })
    }
}
