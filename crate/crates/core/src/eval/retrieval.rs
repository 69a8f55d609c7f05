//! Evidence gathering from web search and support verification.

use serde::{Deserialize, Serialize};

use super::Judge;
use crate::error::{Error, Result};
use crate::gateway::Attempted;
use crate::parse::{parse_query, parse_verification, strip_query_quotes};
use crate::prompts::PromptKind;
use crate::search::{SearchClient, SearchHit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Each query is written after seeing the snippets found so far.
    Iterative,
    Single,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalConfig {
    /// Configuration label, also used to separate search cache entries.
    pub name: String,
    pub strategy: Strategy,
    pub n_queries: usize,
    pub per_query: usize,
}

impl RetrievalConfig {
    pub fn google() -> Self {
        RetrievalConfig { name: "google".into(), strategy: Strategy::Iterative, n_queries: 5, per_query: 3 }
    }

    pub fn bing() -> Self {
        RetrievalConfig { name: "bing".into(), strategy: Strategy::Single, n_queries: 1, per_query: 3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSet {
    pub snippets: Vec<SearchHit>,
    pub queries_used: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl EvidenceSet {
    /// Snippets as the knowledge block of the query and verification prompts.
    pub fn knowledge(&self) -> String {
        if self.snippets.is_empty() {
            return "None".into();
        }
        self.snippets
            .iter()
            .map(|h| format!("{}: {}", one_line(&h.title), one_line(&h.snippet)))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

const SEARCH_ATTEMPTS: usize = 3;

fn search_with_retry(search: &SearchClient, cfg: &RetrievalConfig, query: &str) -> Result<Option<Vec<SearchHit>>> {
    for attempt in 0..SEARCH_ATTEMPTS {
        match search.search(&cfg.name, query, cfg.per_query) {
            Ok(hits) => return Ok(Some(hits)),
            Err(e) if e.is_retryable() => log::warn!("search attempt {} failed: {e}", attempt + 1),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Issues `cfg.n_queries` model-written queries and keeps the top
/// `cfg.per_query` snippets of each. Quotation marks never reach the engine.
pub fn gather_evidence(judge: &Judge, search: &SearchClient, statement: &str, cfg: &RetrievalConfig) -> Result<EvidenceSet> {
    let mut ev = EvidenceSet::default();
    for _ in 0..cfg.n_queries {
        let asked = match cfg.strategy {
            Strategy::Iterative => {
                let knowledge = ev.knowledge();
                let queries = if ev.queries_used.is_empty() { "None".to_string() } else { ev.queries_used.join("\n") };
                judge.ask(
                    PromptKind::QueryIterative,
                    &[("statement", statement), ("knowledge", &knowledge), ("queries", &queries)],
                    parse_query,
                )?
            }
            Strategy::Single => judge.ask(PromptKind::QuerySingle, &[("statement", statement)], parse_query)?,
        };
        let query = match asked {
            Attempted::Parsed { value, .. } => value,
            Attempted::Failure { .. } => {
                ev.flags.push("query_parse_failed".into());
                strip_query_quotes(statement)
            }
        };
        match search_with_retry(search, cfg, &query)? {
            Some(hits) => ev.snippets.extend(hits.into_iter().take(cfg.per_query)),
            None => {
                ev.flags.push("search_failed".into());
                ev.snippets.clear();
                ev.queries_used.push(query);
                return Ok(ev);
            }
        }
        ev.queries_used.push(query);
    }
    Ok(ev)
}

/// Whether the snippets support the statement. Without evidence the statement
/// is unsupported and no judge is consulted.
pub fn verify_support(judge: &Judge, statement: &str, evidence: &EvidenceSet) -> Result<Attempted<bool>> {
    if evidence.snippets.is_empty() {
        return Ok(Attempted::Parsed { value: false, transcript: String::new(), attempts: 0 });
    }
    let knowledge = evidence.knowledge();
    judge.ask(PromptKind::Verification, &[("knowledge", &knowledge), ("statement", statement)], parse_verification)
}

/// Fails fast when a configuration cannot produce any evidence.
pub fn validate(cfg: &RetrievalConfig) -> Result<()> {
    if cfg.n_queries == 0 || cfg.per_query == 0 {
        return Err(Error::Config(format!("retrieval config {} needs at least one query and one result", cfg.name)));
    }
    Ok(())
}
