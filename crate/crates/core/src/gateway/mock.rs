//! Offline provider: scripted fixture responses, with deterministic synthetic
//! answers for any request no rule matches.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChatCall, ChatProvider};
use crate::error::{Error, Result};
use crate::prompts::PromptKind;

/// Returns `responses[ordinal]` (the last entry once ordinals run past the end)
/// for requests of `kind` whose user text contains `contains`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(default)]
    pub kind: Option<PromptKind>,
    #[serde(default)]
    pub contains: Option<String>,
    pub responses: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockProvider {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    /// Answer unmatched requests synthetically instead of failing.
    #[serde(default = "yes")]
    pub synthesize: bool,
}

fn yes() -> bool {
    true
}

impl MockProvider {
    pub fn new(rules: Vec<MockRule>, synthesize: bool) -> Self {
        MockProvider { rules, synthesize }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mock: MockProvider = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("mock fixture {}: {e}", path.display())))?;
        if let Some(bad) = mock.rules.iter().position(|r| r.responses.is_empty()) {
            return Err(Error::Config(format!("mock rule {bad} has no responses")));
        }
        Ok(mock)
    }
}

impl ChatProvider for MockProvider {
    fn id(&self) -> &str {
        "mock"
    }

    fn chat(&self, call: &ChatCall) -> Result<String> {
        let kind = PromptKind::from_system(&call.system);
        for rule in &self.rules {
            let kind_ok = rule.kind.is_none() || rule.kind == kind;
            let text_ok = rule.contains.as_deref().is_none_or(|c| call.user.contains(c));
            if kind_ok && text_ok {
                return Ok(rule.responses[call.ordinal.min(rule.responses.len() - 1)].clone());
            }
        }
        match kind {
            Some(k) if self.synthesize => Ok(synthesize(k, &call.user)),
            _ => Err(Error::Provider("mock provider has no rule for this request".into())),
        }
    }
}

/// Text following the line `header` up to the next blank line.
fn section<'a>(user: &'a str, header: &str) -> &'a str {
    let Some(pos) = user.find(header) else { return "" };
    let rest = &user[pos + header.len()..];
    let rest = rest.strip_prefix(' ').unwrap_or(rest);
    let rest = rest.strip_prefix('\n').unwrap_or(rest);
    rest.split("\n\n").next().unwrap_or("").trim_end()
}

fn words(s: &str) -> BTreeSet<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.chars().count() >= 4)
        .map(str::to_lowercase)
        .collect()
}

fn coverage(part: &str, whole: &str) -> f64 {
    let p = words(part);
    if p.is_empty() {
        return 1.0;
    }
    let w = words(whole);
    p.iter().filter(|x| w.contains(*x)).count() as f64 / p.len() as f64
}

/// Quoted entries of a `{ 1: "...", }` block.
fn block_entries(block: &str) -> Vec<String> {
    block
        .lines()
        .filter_map(|l| {
            let (_, v) = l.split_once(": ")?;
            serde_json::from_str::<String>(v.trim_end_matches(',')).ok()
        })
        .collect()
}

const OPINION_WORDS: [&str; 3] = ["truly ", "amazing ", "incredibly "];
const UNRESOLVED_OPENERS: [&str; 4] = ["They ", "This ", "These ", "It "];

fn synthesize(kind: PromptKind, user: &str) -> String {
    match kind {
        PromptKind::Selection => {
            let s = section(user, "Sentence:");
            let unverifiable = s.ends_with(':') || s.ends_with('?') || s.starts_with("I ") || s.contains(" should ");
            if unverifiable {
                return "The sentence offers no checkable fact.\n\nFinal submission:\nDoes NOT contain a specific and verifiable proposition\n\nSentence with only verifiable information:\nNone\n".into();
            }
            let mut revised = s.to_string();
            for w in OPINION_WORDS {
                revised = revised.replace(w, "");
            }
            let line = if revised == s { "remains unchanged".to_string() } else { revised };
            format!("The sentence states a fact.\n\nFinal submission:\nContains a specific and verifiable proposition\n\nSentence with only verifiable information:\n{line}\n")
        }
        PromptKind::Disambiguation => {
            let s = section(user, "Sentence:");
            if UNRESOLVED_OPENERS.iter().any(|o| s.starts_with(o)) {
                "Incomplete Names, Acronyms, Abbreviations:\nNone.\n\nLinguistic Ambiguity:\nThe referent is unclear.\n\nDecontextualizedSentence: Cannot be decontextualized\n".into()
            } else {
                format!("Incomplete Names, Acronyms, Abbreviations:\nNone.\n\nLinguistic Ambiguity:\nNone.\n\nChanges Needed to Decontextualize the Sentence:\nNone.\n\nDecontextualizedSentence: {s}\n")
            }
        }
        PromptKind::Decomposition => {
            let s = section(user, "Sentence:");
            let body = s.trim_start_matches("- ").trim_end_matches('.');
            let mut out = String::from("Specific, Verifiable, and Decontextualized Propositions with Essential Context/Clarifications:\n[\n");
            for part in body.split("; ").filter(|p| !p.trim().is_empty()) {
                let entry = serde_json::Value::String(format!("{} - true or false?", part.trim()));
                out.push_str(&format!("{entry},\n"));
            }
            out.push_str("]\n");
            out
        }
        PromptKind::Entailment => {
            let claim = section(user, "Claim:");
            let source = format!("{} {}", section(user, "Excerpt from response:"), section(user, "Sentence of interest:"));
            if coverage(claim, &source) == 1.0 {
                "Every element of C appears in S. Therefore, S entails all elements of C.\n".into()
            } else {
                "C adds information absent from S. Therefore, S does not entail all elements of C.\n".into()
            }
        }
        PromptKind::ElementExtraction => {
            let s = section(user, "Sentence of interest:");
            let body = s.trim_start_matches("- ").trim_end_matches('.');
            let mut out = String::from("S = ");
            out.push_str(s);
            out.push_str("\nWhat are ALL elements of S_restated?\n[\n");
            for part in body.split(", ").filter(|p| !p.trim().is_empty()) {
                let verifiable = part.chars().any(|c| c.is_ascii_digit()) || part.chars().skip(1).any(char::is_uppercase);
                let verdict = if verifiable {
                    "contains verifiable information"
                } else {
                    "it's an interpretation, so it does not contain verifiable information"
                };
                out.push_str(&format!("{},\n", serde_json::Value::String(format!("{} -> {verdict}", part.trim()))));
            }
            out.push_str("]\n");
            out
        }
        PromptKind::ElementCoverage => {
            let claims = block_entries(section(user, "Claims (C):")).join(" ");
            let elements = block_entries(section(user, "Elements (E):"));
            let mut out = String::new();
            for (i, e) in elements.iter().enumerate() {
                let k = i + 1;
                let c = coverage(e, &claims);
                out.push_str(&format!("Element {k}: {e}\n"));
                if c == 1.0 {
                    out.push_str(&format!("- What is not explicitly stated or strongly implied by C, and is therefore grounds for lack of full coverage? Nothing. The element is explicitly stated. Therefore E{k} is fully covered by C\n\n"));
                } else if c >= 0.5 {
                    out.push_str(&format!("- What is not explicitly stated or strongly implied by C, and is therefore grounds for lack of full coverage? It does not explicitly state E{k}, but C strongly implies it. Therefore it is implied that E{k} is fully covered by C\n\n"));
                } else {
                    out.push_str(&format!("- What is not explicitly stated or strongly implied by C, and is therefore grounds for lack of full coverage? Most of E{k} is missing. Therefore E{k} is not fully covered by C\n\n"));
                }
            }
            out
        }
        PromptKind::CMax => {
            let claim = section(user, "Claim of interest:");
            let question = section(user, "Question:").trim_end_matches('?');
            if UNRESOLVED_OPENERS.iter().chain(["He ", "She "].iter()).any(|o| claim.starts_with(o)) {
                format!("C = {claim}\nA reader would ask what the claim refers to.\nC_max = {}, in answer to: {question}\n", claim.trim_end_matches('.'))
            } else {
                format!("C = {claim}\nA reader would have no questions.\nC_max = C\n")
            }
        }
        PromptKind::InvalidSentence => {
            let s = section(user, "Sentence of interest:");
            let verdict = if s.ends_with(':') { "cannot" } else { "can" };
            format!("S = {s}\nTherefore, S {verdict} be interpreted as a complete, declarative sentence.\n")
        }
        PromptKind::InvalidClaim => {
            let c = section(user, "Claim:");
            let first_word = c.split_whitespace().next().unwrap_or("");
            let fragment = c.chars().next().is_none_or(char::is_lowercase) || first_word.ends_with("ing");
            if fragment {
                "It is missing a subject and a verb, so C is not a complete, declarative sentence.\n".into()
            } else {
                "Yes, C is a complete, declarative sentence.\n".into()
            }
        }
        PromptKind::QueryIterative | PromptKind::QuerySingle => {
            let statement = user.lines().next().unwrap_or("").trim_start_matches("Statement: ");
            let prior = section(user, "Previous queries:").lines().filter(|l| !l.trim().is_empty() && *l != "None").count();
            let query = if prior == 0 { statement.to_string() } else { format!("{statement} ({prior})") };
            format!("```\n{}\n```\n", query.trim_end_matches('.'))
        }
        PromptKind::Verification => {
            let knowledge = section(user, "Knowledge:");
            let statement = section(user, "Statement:");
            if coverage(statement, knowledge) == 1.0 {
                "The knowledge states every part of the statement.\n[Supported]\n".into()
            } else {
                "Part of the statement is not in the knowledge.\n[Not Supported]\n".into()
            }
        }
    }
}
