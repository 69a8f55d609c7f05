//! Claim normalization, invalid-statement detection and evaluation samples.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, ParseError, Result};
use crate::eval::Judge;
use crate::gateway::Attempted;
use crate::parse::{parse_claim_validity, parse_sentence_validity};
use crate::prompts::PromptKind;
use crate::records::{ClaimKey, SentenceKey};

/// Which whitespace was removed together with a bracketed span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Separator {
    Before,
    After,
    None,
}

/// Bracketed text the extractor added for context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferredSegment {
    pub text: String,
    /// Byte offset in `core` where the span was removed.
    pub offset: usize,
    pub separator: Separator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub method_id: String,
    pub answer_id: String,
    pub sentence_index: usize,
    /// The claim as extracted, brackets included.
    pub text: String,
    pub core: String,
    pub inferred_segments: Vec<InferredSegment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl Claim {
    /// Builds a claim, separating bracketed segments. Malformed brackets keep
    /// the claim verbatim with a diagnostic.
    pub fn new(method_id: &str, answer_id: &str, sentence_index: usize, text: &str) -> Self {
        let text = text.trim().to_string();
        let (core, inferred_segments, diagnostic) = match parse_brackets(&text) {
            Ok((core, segs)) => (core, segs, None),
            Err(e) => (text.clone(), Vec::new(), Some(e.0)),
        };
        Claim {
            method_id: method_id.to_string(),
            answer_id: answer_id.to_string(),
            sentence_index,
            text,
            core,
            inferred_segments,
            diagnostic,
        }
    }

    pub fn sentence_key(&self) -> SentenceKey {
        SentenceKey::new(&self.answer_id, self.sentence_index)
    }

    pub fn key(&self) -> ClaimKey {
        ClaimKey {
            method_id: self.method_id.clone(),
            answer_id: self.answer_id.clone(),
            sentence_index: self.sentence_index,
            text: self.text.clone(),
        }
    }
}

/// Splits `[...]` spans out of a claim. Each span takes one adjacent space with
/// it (the one before if present, else the one after) so the core reads
/// naturally; the choice is recorded so [`reinsert`] can undo it.
pub fn parse_brackets(claim_text: &str) -> std::result::Result<(String, Vec<InferredSegment>), ParseError> {
    let mut core = String::with_capacity(claim_text.len());
    let mut segments = Vec::new();
    let mut chars = claim_text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '[' => {
                let start = i + 1;
                let mut end = None;
                for (j, d) in chars.by_ref() {
                    match d {
                        '[' => return Err(ParseError::new("nested brackets")),
                        ']' => {
                            end = Some(j);
                            break;
                        }
                        _ => {}
                    }
                }
                let end = end.ok_or_else(|| ParseError::new("unbalanced '['"))?;
                let separator = if core.ends_with(' ') {
                    core.pop();
                    Separator::Before
                } else if chars.peek().is_some_and(|&(_, n)| n == ' ') {
                    chars.next();
                    Separator::After
                } else {
                    Separator::None
                };
                segments.push(InferredSegment { text: claim_text[start..end].to_string(), offset: core.len(), separator });
            }
            ']' => return Err(ParseError::new("unbalanced ']'")),
            _ => core.push(c),
        }
    }
    Ok((core, segments))
}

/// Puts segments back into the core, reproducing the original claim text.
pub fn reinsert(core: &str, segments: &[InferredSegment]) -> String {
    let mut out = core.to_string();
    for seg in segments.iter().rev() {
        let piece = match seg.separator {
            Separator::Before => format!(" [{}]", seg.text),
            Separator::After => format!("[{}] ", seg.text),
            Separator::None => format!("[{}]", seg.text),
        };
        out.insert_str(seg.offset, &piece);
    }
    out
}

fn dedupe_key(c: &Claim) -> (String, String, usize, String) {
    (c.method_id.clone(), c.answer_id.clone(), c.sentence_index, c.text.trim().nfc().collect())
}

/// Drops repeated claims within each (method, sentence) group, keeping the first.
pub fn dedupe(claims: Vec<Claim>) -> Vec<Claim> {
    let mut seen = HashSet::new();
    claims.into_iter().filter(|c| seen.insert(dedupe_key(c))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Sentence,
    Claim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReasonClass {
    MissingInfo,
    NonDeclarative,
    Preamble,
    Reference,
    Valid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityVerdict {
    pub subject: Subject,
    pub valid: bool,
    pub reason_class: ReasonClass,
}

impl ValidityVerdict {
    /// The judge only says valid or invalid; the reason class of an invalid
    /// statement is read off its surface form.
    pub fn from_judgment(subject: Subject, text: &str, valid: bool) -> Self {
        let reason_class = if valid { ReasonClass::Valid } else { classify_invalid(text) };
        ValidityVerdict { subject, valid, reason_class }
    }
}

fn classify_invalid(text: &str) -> ReasonClass {
    let t = text.trim().trim_start_matches(['-', '*', '•', ' ']);
    let starts_with_ref = t.starts_with('[') && t[1..].split(']').next().is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()));
    if starts_with_ref || t.contains("http://") || t.contains("https://") {
        return ReasonClass::Reference;
    }
    if t.ends_with(':') {
        return ReasonClass::Preamble;
    }
    let gerund = t.split_whitespace().next().is_some_and(|w| w.len() > 4 && w.to_lowercase().ends_with("ing"));
    if t.ends_with('?') || gerund {
        return ReasonClass::NonDeclarative;
    }
    ReasonClass::MissingInfo
}

/// Asks whether a sentence, read in context, is a complete declarative sentence.
pub fn detect_invalid_sentence(judge: &Judge, sentence: &str, excerpt: &str, question: &str) -> Result<Attempted<ValidityVerdict>> {
    let outcome = judge.ask(
        PromptKind::InvalidSentence,
        &[("question", question), ("excerpt", excerpt), ("sentence", sentence)],
        parse_sentence_validity,
    )?;
    Ok(map_attempt(outcome, |valid| ValidityVerdict::from_judgment(Subject::Sentence, sentence, valid)))
}

/// Asks whether a claim, in isolation, is a complete declarative sentence.
pub fn detect_invalid_claim(judge: &Judge, claim_text: &str) -> Result<Attempted<ValidityVerdict>> {
    let outcome = judge.ask(PromptKind::InvalidClaim, &[("claim", claim_text)], parse_claim_validity)?;
    Ok(map_attempt(outcome, |valid| ValidityVerdict::from_judgment(Subject::Claim, claim_text, valid)))
}

pub(crate) fn map_attempt<T, U>(a: Attempted<T>, f: impl FnOnce(T) -> U) -> Attempted<U> {
    match a {
        Attempted::Parsed { value, transcript, attempts } => Attempted::Parsed { value: f(value), transcript, attempts },
        Attempted::Failure { rejected } => Attempted::Failure { rejected },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    InvalidClaim,
    InvalidSentence,
    CannotBeDisambiguated,
    NotEntailed,
    GoldUnverifiable,
    /// A prerequisite judgment could not be parsed.
    VerdictUnknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalKind {
    Entailment,
    CoverageSentence,
    CoverageElement,
    Decontext,
}

/// Judgments the sample filters draw on. A `None` value inside a table means
/// the judgment was attempted but could not be parsed.
#[derive(Debug, Clone, Default)]
pub struct SampleInputs {
    pub sentence_validity: Option<HashMap<SentenceKey, Option<bool>>>,
    /// Keyed by claim text; validity in isolation depends on nothing else.
    pub claim_validity: Option<HashMap<String, Option<bool>>>,
    pub cannot_disambiguate: Option<HashSet<SentenceKey>>,
    pub entailment: Option<HashMap<ClaimKey, Option<bool>>>,
    pub gold_verifiable: Option<HashMap<SentenceKey, bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry<T> {
    #[serde(flatten)]
    pub item: T,
    pub exclusion_reason: Option<ExclusionReason>,
}

impl<T> SampleEntry<T> {
    pub fn included(&self) -> bool {
        self.exclusion_reason.is_none()
    }
}

fn need<'a, T>(table: &'a Option<T>, name: &str, kind: EvalKind) -> Result<&'a T> {
    table
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{kind:?} sample needs the {name} table")))
}

/// Looks a judgment up: missing or unparsed → unknown, false → `fail`.
fn gate<K: std::hash::Hash + Eq>(table: &HashMap<K, Option<bool>>, key: &K, fail: ExclusionReason) -> Option<ExclusionReason> {
    match table.get(key) {
        Some(Some(true)) => None,
        Some(Some(false)) => Some(fail),
        _ => Some(ExclusionReason::VerdictUnknown),
    }
}

/// Claim-level sample (entailment or decontextualization).
pub fn build_claim_sample(kind: EvalKind, claims: &[Claim], inputs: &SampleInputs) -> Result<Vec<SampleEntry<Claim>>> {
    if !matches!(kind, EvalKind::Entailment | EvalKind::Decontext) {
        return Err(Error::Config(format!("{kind:?} is a sentence-level sample")));
    }
    let sentences = need(&inputs.sentence_validity, "sentence validity", kind)?;
    let claims_ok = need(&inputs.claim_validity, "claim validity", kind)?;
    let (entail, gold) = if kind == EvalKind::Decontext {
        (Some(need(&inputs.entailment, "entailment", kind)?), Some(need(&inputs.gold_verifiable, "gold label", kind)?))
    } else {
        (None, None)
    };
    Ok(claims
        .iter()
        .map(|c| {
            let sk = c.sentence_key();
            let reason = gate(sentences, &sk, ExclusionReason::InvalidSentence)
                .or_else(|| gate(claims_ok, &c.text, ExclusionReason::InvalidClaim))
                .or_else(|| entail.and_then(|t| gate(t, &c.key(), ExclusionReason::NotEntailed)))
                .or_else(|| {
                    gold.and_then(|g| match g.get(&sk) {
                        Some(true) => None,
                        Some(false) => Some(ExclusionReason::GoldUnverifiable),
                        None => Some(ExclusionReason::VerdictUnknown),
                    })
                });
            SampleEntry { item: c.clone(), exclusion_reason: reason }
        })
        .collect())
}

/// Sentence-level sample for coverage evaluation.
pub fn build_sentence_sample(kind: EvalKind, sentences: &[SentenceKey], inputs: &SampleInputs) -> Result<Vec<SampleEntry<SentenceKey>>> {
    if !matches!(kind, EvalKind::CoverageSentence | EvalKind::CoverageElement) {
        return Err(Error::Config(format!("{kind:?} is a claim-level sample")));
    }
    let validity = need(&inputs.sentence_validity, "sentence validity", kind)?;
    let blocked = need(&inputs.cannot_disambiguate, "disambiguation label", kind)?;
    Ok(sentences
        .iter()
        .map(|k| {
            let reason = gate(validity, k, ExclusionReason::InvalidSentence)
                .or_else(|| blocked.contains(k).then_some(ExclusionReason::CannotBeDisambiguated));
            SampleEntry { item: k.clone(), exclusion_reason: reason }
        })
        .collect())
}
