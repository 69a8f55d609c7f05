//! Web search providers returning ranked snippets, with response caching.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gateway::DiskCache;

const SEARCH_NAMESPACE: &str = "search";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchHit {
    pub title: String,
    pub url: String,
    pub snippet: String,
}

pub trait SearchProvider: Send + Sync {
    fn id(&self) -> &str;
    /// Up to `k` ranked results.
    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>>;
}

fn http_client(timeout: Duration) -> Result<reqwest::blocking::Client> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| Error::Config(format!("http client: {e}")))
}

fn env_key(var: &str) -> Result<String> {
    std::env::var(var).map_err(|_| Error::Config(format!("search provider needs credentials in ${var}")))
}

fn check_status(resp: reqwest::blocking::Response) -> Result<Value> {
    let status = resp.status();
    let text = resp.text().map_err(|e| Error::Transport(e.to_string()))?;
    if status.as_u16() == 429 || status.is_server_error() {
        return Err(Error::Transport(format!("HTTP {status}: {text}")));
    }
    if !status.is_success() {
        return Err(Error::Provider(format!("HTTP {status}: {text}")));
    }
    Ok(serde_json::from_str(&text)?)
}

fn hits_from(items: Option<&Vec<Value>>, title: &str, url: &str, snippet: &str, k: usize) -> Vec<SearchHit> {
    items
        .map(|arr| {
            arr.iter()
                .take(k)
                .map(|it| SearchHit {
                    title: it[title].as_str().unwrap_or_default().to_string(),
                    url: it[url].as_str().unwrap_or_default().to_string(),
                    snippet: it[snippet].as_str().unwrap_or_default().to_string(),
                })
                .collect()
        })
        .unwrap_or_default()
}

/// Google results through the Serper API (`SERPER_API_KEY`).
pub struct SerperSearch {
    client: reqwest::blocking::Client,
    api_key: String,
}

impl SerperSearch {
    pub fn from_env(timeout: Duration) -> Result<Self> {
        Ok(SerperSearch { client: http_client(timeout)?, api_key: env_key("SERPER_API_KEY")? })
    }
}

impl SearchProvider for SerperSearch {
    fn id(&self) -> &str {
        "serper"
    }

    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>> {
        let resp = self
            .client
            .post("https://google.serper.dev/search")
            .header("X-API-KEY", &self.api_key)
            .json(&json!({ "q": query, "num": k }))
            .send()
            .map_err(|e| Error::Transport(e.to_string()))?;
        let v = check_status(resp)?;
        Ok(hits_from(v["organic"].as_array(), "title", "link", "snippet", k))
    }
}

/// Bing Web Search v7 (`BING_SEARCH_API_KEY`).
pub struct BingSearch {
    client: reqwest::blocking::Client,
    api_key: String,
}

impl BingSearch {
    pub fn from_env(timeout: Duration) -> Result<Self> {
        Ok(BingSearch { client: http_client(timeout)?, api_key: env_key("BING_SEARCH_API_KEY")? })
    }
}

impl SearchProvider for BingSearch {
    fn id(&self) -> &str {
        "bing"
    }

    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>> {
        let resp = self
            .client
            .get("https://api.bing.microsoft.com/v7.0/search")
            .header("Ocp-Apim-Subscription-Key", &self.api_key)
            .query(&[("q", query), ("count", &k.to_string())])
            .send()
            .map_err(|e| Error::Transport(e.to_string()))?;
        let v = check_status(resp)?;
        Ok(hits_from(v["webPages"]["value"].as_array(), "name", "url", "snippet", k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockSearchRule {
    pub contains: String,
    pub hits: Vec<SearchHit>,
}

/// Offline search: fixture rules matched by substring, otherwise a single hit
/// echoing the query (or nothing when `echo` is off).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockSearch {
    #[serde(default)]
    pub rules: Vec<MockSearchRule>,
    #[serde(default)]
    pub echo: bool,
}

impl SearchProvider for MockSearch {
    fn id(&self) -> &str {
        "mock-search"
    }

    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>> {
        if let Some(rule) = self.rules.iter().find(|r| query.contains(&r.contains)) {
            return Ok(rule.hits.iter().take(k).cloned().collect());
        }
        if self.echo && k > 0 {
            return Ok(vec![SearchHit { title: "echo".into(), url: "mock://echo".into(), snippet: query.to_string() }]);
        }
        Ok(Vec::new())
    }
}

/// Search front-end that replays cached responses and can forbid live calls.
pub struct SearchClient {
    provider: Option<Arc<dyn SearchProvider>>,
    /// Per-engine providers; engines without a route use `provider`.
    routes: BTreeMap<String, Arc<dyn SearchProvider>>,
    cache: Option<DiskCache>,
    provider_calls: AtomicUsize,
}

impl SearchClient {
    pub fn new(provider: Arc<dyn SearchProvider>, cache: Option<DiskCache>) -> Self {
        SearchClient { provider: Some(provider), routes: BTreeMap::new(), cache, provider_calls: AtomicUsize::new(0) }
    }

    /// One provider per engine name, e.g. "google" to Serper and "bing" to Bing.
    pub fn routed(routes: BTreeMap<String, Arc<dyn SearchProvider>>, cache: Option<DiskCache>) -> Self {
        SearchClient { provider: None, routes, cache, provider_calls: AtomicUsize::new(0) }
    }

    pub fn cache_only(cache: DiskCache) -> Self {
        SearchClient { provider: None, routes: BTreeMap::new(), cache: Some(cache), provider_calls: AtomicUsize::new(0) }
    }

    pub fn provider_calls(&self) -> usize {
        self.provider_calls.load(Ordering::SeqCst)
    }

    pub fn provider_id(&self) -> String {
        let mut ids: Vec<String> = self.routes.iter().map(|(e, p)| format!("{e}={}", p.id())).collect();
        if let Some(p) = &self.provider {
            ids.push(p.id().to_string());
        }
        if ids.is_empty() {
            "cache-only".into()
        } else {
            ids.join(",")
        }
    }

    /// Cache key over provider-independent inputs, so a warm cache replays under
    /// any configured backend.
    pub fn cache_key(engine: &str, query: &str, k: usize) -> String {
        let body = json!({ "engine": engine, "query": query, "k": k });
        hex::encode(Sha256::digest(body.to_string().as_bytes()))
    }

    /// `engine` names the retrieval configuration and separates cache entries.
    pub fn search(&self, engine: &str, query: &str, k: usize) -> Result<Vec<SearchHit>> {
        let key = Self::cache_key(engine, query, k);
        if let Some(cache) = &self.cache {
            if let Some(text) = cache.get(SEARCH_NAMESPACE, &key, "json")? {
                return Ok(serde_json::from_str(&text)?);
            }
        }
        let Some(provider) = self.routes.get(engine).or(self.provider.as_ref()) else {
            if self.routes.is_empty() {
                return Err(Error::CacheMiss { key });
            }
            return Err(Error::Config(format!("no search provider for engine {engine}")));
        };
        self.provider_calls.fetch_add(1, Ordering::SeqCst);
        let hits = provider.search(query, k)?;
        if let Some(cache) = &self.cache {
            cache.put(SEARCH_NAMESPACE, &key, "json", &serde_json::to_string(&hits)?)?;
        }
        Ok(hits)
    }
}
