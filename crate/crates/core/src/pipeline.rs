//! The three extraction stages (Selection, Disambiguation, Decomposition)
//! with multi-completion voting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{Attempted, Gateway, PromptRequest};
use crate::parse::{parse_decomposition, parse_disambiguation, parse_selection};
use crate::postprocess::{dedupe, Claim};
use crate::prompts::PromptKind;
use crate::textseg::{build_context, split_into_sentences, ContextWindow, SentenceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    #[serde(rename = "max_preceding_sentences")]
    pub p: usize,
    #[serde(rename = "max_following_sentences")]
    pub f: usize,
    pub completions: usize,
    pub min_successes: usize,
    pub max_retries: usize,
}

impl StageConfig {
    pub const SELECTION: StageConfig = StageConfig { p: 5, f: 5, completions: 3, min_successes: 2, max_retries: 2 };
    pub const DISAMBIGUATION: StageConfig = StageConfig { p: 5, f: 0, completions: 3, min_successes: 2, max_retries: 2 };
    pub const DECOMPOSITION: StageConfig = StageConfig { p: 5, f: 0, completions: 1, min_successes: 1, max_retries: 2 };

    pub fn validate(&self, stage: &str) -> Result<()> {
        if self.min_successes < 1 || self.min_successes > self.completions {
            return Err(Error::Config(format!(
                "{stage}: min_successes must be in 1..={}, got {}",
                self.completions, self.min_successes
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub model_id: String,
    pub method_id: String,
    pub selection: StageConfig,
    pub disambiguation: StageConfig,
    pub decomposition: StageConfig,
    pub skip_selection: bool,
    /// Selection only filters; the original sentence is passed on unchanged.
    pub selection_detect_only: bool,
    pub skip_disambiguation: bool,
    pub keep_transcripts: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            model_id: "gpt-4o-2024-08-06".into(),
            method_id: "claimify".into(),
            selection: StageConfig::SELECTION,
            disambiguation: StageConfig::DISAMBIGUATION,
            decomposition: StageConfig::DECOMPOSITION,
            skip_selection: false,
            selection_detect_only: false,
            skip_disambiguation: false,
            keep_transcripts: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.selection.validate("selection")?;
        self.disambiguation.validate("disambiguation")?;
        self.decomposition.validate("decomposition")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text")]
pub enum SelectionKind {
    NoVerifiableContent,
    Revised(String),
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text")]
pub enum DisambiguationKind {
    CannotBeDisambiguated,
    Clarified(String),
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotResult<T> {
    pub success: bool,
    pub payload: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDecision<T> {
    pub pass: bool,
    pub successes: usize,
    /// Payload of the earliest successful slot.
    pub payload: Option<T>,
}

pub fn vote<T: Clone>(slots: &[SlotResult<T>], min_successes: usize) -> StageDecision<T> {
    let successes = slots.iter().filter(|s| s.success).count();
    let payload = slots.iter().find(|s| s.success).and_then(|s| s.payload.clone());
    StageDecision { pass: successes >= min_successes, successes, payload }
}

/// Per-slot transcripts plus a count of slots whose every attempt was rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRaw {
    pub transcripts: Vec<String>,
    pub failed_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub kind: SelectionKind,
    pub raw: StageRaw,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisambiguationOutcome {
    pub kind: DisambiguationKind,
    pub raw: StageRaw,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionOutcome {
    /// `None` when the stage failed (no slot parsed, or too few did).
    pub claims: Option<Vec<String>>,
    pub raw: StageRaw,
}

/// Fills every slot of a stage and returns per-slot parsed values.
fn run_slots<T, F>(gateway: &Gateway, req: &PromptRequest, cfg: &StageConfig, parse: F) -> Result<(Vec<Option<T>>, StageRaw)>
where
    F: Fn(&str) -> std::result::Result<T, crate::error::ParseError>,
{
    let mut values = Vec::with_capacity(cfg.completions);
    let mut raw = StageRaw::default();
    for slot in 0..cfg.completions {
        match gateway.call_with_retries(req, slot, cfg.max_retries, &parse)? {
            Attempted::Parsed { value, transcript, .. } => {
                raw.transcripts.push(transcript);
                values.push(Some(value));
            }
            Attempted::Failure { rejected } => {
                raw.transcripts.push(rejected.last().cloned().unwrap_or_default());
                raw.failed_slots += 1;
                values.push(None);
            }
        }
    }
    Ok((values, raw))
}

fn stage_request(model_id: &str, kind: PromptKind, question: &str, excerpt: &str, sentence: &str, cfg: &StageConfig) -> Result<PromptRequest> {
    let user = kind.render_user(&[("question", question), ("excerpt", excerpt), ("sentence", sentence)])?;
    Ok(PromptRequest::new(model_id, kind.system(), user, cfg.completions))
}

pub fn run_selection(gateway: &Gateway, model_id: &str, sentence: &str, ctx: &ContextWindow, question: &str, cfg: &StageConfig) -> Result<SelectionOutcome> {
    let req = stage_request(model_id, PromptKind::Selection, question, &ctx.render(sentence), sentence, cfg)?;
    let (values, raw) = run_slots(gateway, &req, cfg, |t| parse_selection(t, sentence))?;
    let slots: Vec<SlotResult<SelectionKind>> = values
        .into_iter()
        .map(|v| SlotResult { success: matches!(v, Some(ref k) if *k != SelectionKind::NoVerifiableContent), payload: v })
        .collect();
    let decision = vote(&slots, cfg.min_successes);
    let kind = match decision.payload {
        Some(k) if decision.pass => k,
        _ => SelectionKind::NoVerifiableContent,
    };
    Ok(SelectionOutcome { kind, raw })
}

pub fn run_disambiguation(gateway: &Gateway, model_id: &str, sentence: &str, ctx: &ContextWindow, question: &str, cfg: &StageConfig) -> Result<DisambiguationOutcome> {
    let req = stage_request(model_id, PromptKind::Disambiguation, question, &ctx.render(sentence), sentence, cfg)?;
    let (values, raw) = run_slots(gateway, &req, cfg, |t| parse_disambiguation(t, sentence))?;
    let slots: Vec<SlotResult<DisambiguationKind>> = values
        .into_iter()
        .map(|v| SlotResult { success: matches!(v, Some(ref k) if *k != DisambiguationKind::CannotBeDisambiguated), payload: v })
        .collect();
    let decision = vote(&slots, cfg.min_successes);
    let kind = match decision.payload {
        Some(k) if decision.pass => k,
        _ => DisambiguationKind::CannotBeDisambiguated,
    };
    Ok(DisambiguationOutcome { kind, raw })
}

pub fn run_decomposition(gateway: &Gateway, model_id: &str, sentence: &str, ctx: &ContextWindow, question: &str, cfg: &StageConfig) -> Result<DecompositionOutcome> {
    let req = stage_request(model_id, PromptKind::Decomposition, question, &ctx.render(sentence), sentence, cfg)?;
    let (values, raw) = run_slots(gateway, &req, cfg, parse_decomposition)?;
    let slots: Vec<SlotResult<Vec<String>>> =
        values.into_iter().map(|v| SlotResult { success: v.is_some(), payload: v }).collect();
    let decision = vote(&slots, cfg.min_successes);
    Ok(DecompositionOutcome { claims: decision.pass.then_some(decision.payload).flatten(), raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SentenceLabel {
    NoVerifiableClaims,
    CannotBeDisambiguated,
    ClaimsExtracted,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTranscripts {
    pub selection: Vec<String>,
    pub disambiguation: Vec<String>,
    pub decomposition: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceVerdict {
    pub answer_id: String,
    pub sentence_index: usize,
    pub sentence: String,
    pub label: SentenceLabel,
    pub claims: Vec<Claim>,
    /// Machine-readable notes such as `decomposition_failed`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    /// Set when a provider or cache error stopped processing of this sentence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcripts: Option<StageTranscripts>,
}

/// Runs all stages for one sentence of an answer.
pub fn process_sentence(gateway: &Gateway, question: &str, sentences: &[SentenceRecord], index: usize, cfg: &PipelineConfig) -> SentenceVerdict {
    let rec = &sentences[index];
    let mut verdict = SentenceVerdict {
        answer_id: rec.answer_id.clone(),
        sentence_index: rec.sentence_index,
        sentence: rec.text.clone(),
        label: SentenceLabel::NoVerifiableClaims,
        claims: Vec::new(),
        diagnostics: Vec::new(),
        error: None,
        transcripts: None,
    };
    let mut transcripts = StageTranscripts::default();
    if let Err(e) = stages(gateway, question, sentences, index, cfg, &mut verdict, &mut transcripts) {
        verdict.label = SentenceLabel::NoVerifiableClaims;
        verdict.claims.clear();
        verdict.error = Some(e.to_string());
    }
    if cfg.keep_transcripts {
        verdict.transcripts = Some(transcripts);
    }
    verdict
}

fn note_failures(verdict: &mut SentenceVerdict, stage: &str, raw: &StageRaw) {
    if raw.failed_slots > 0 {
        verdict.diagnostics.push(format!("{stage}_parse_failed:{}", raw.failed_slots));
    }
}

fn stages(
    gateway: &Gateway,
    question: &str,
    sentences: &[SentenceRecord],
    index: usize,
    cfg: &PipelineConfig,
    verdict: &mut SentenceVerdict,
    transcripts: &mut StageTranscripts,
) -> Result<()> {
    let original = sentences[index].text.as_str();
    let model = cfg.model_id.as_str();

    let mut current = original.to_string();
    if !cfg.skip_selection {
        let ctx = build_context(sentences, index, cfg.selection.p, cfg.selection.f)?;
        let out = run_selection(gateway, model, original, &ctx, question, &cfg.selection)?;
        note_failures(verdict, "selection", &out.raw);
        transcripts.selection = out.raw.transcripts;
        match out.kind {
            SelectionKind::NoVerifiableContent => return Ok(()),
            SelectionKind::Revised(t) if !cfg.selection_detect_only => current = t,
            _ => {}
        }
    }

    if !cfg.skip_disambiguation {
        let ctx = build_context(sentences, index, cfg.disambiguation.p, cfg.disambiguation.f)?;
        let out = run_disambiguation(gateway, model, &current, &ctx, question, &cfg.disambiguation)?;
        note_failures(verdict, "disambiguation", &out.raw);
        transcripts.disambiguation = out.raw.transcripts;
        match out.kind {
            DisambiguationKind::CannotBeDisambiguated => {
                verdict.label = SentenceLabel::CannotBeDisambiguated;
                return Ok(());
            }
            DisambiguationKind::Clarified(t) => current = t,
            DisambiguationKind::Unchanged => {}
        }
    }

    let ctx = build_context(sentences, index, cfg.decomposition.p, cfg.decomposition.f)?;
    let out = run_decomposition(gateway, model, &current, &ctx, question, &cfg.decomposition)?;
    note_failures(verdict, "decomposition", &out.raw);
    transcripts.decomposition = out.raw.transcripts;
    match out.claims {
        None => verdict.diagnostics.push("decomposition_failed".into()),
        Some(texts) => {
            let claims = texts
                .iter()
                .map(|t| Claim::new(&cfg.method_id, &sentences[index].answer_id, sentences[index].sentence_index, t))
                .collect();
            verdict.claims = dedupe(claims);
            if verdict.claims.is_empty() {
                verdict.diagnostics.push("no_claims_in_list".into());
            } else {
                verdict.label = SentenceLabel::ClaimsExtracted;
            }
        }
    }
    Ok(())
}

/// Splits the answer and processes its sentences concurrently on the current
/// rayon pool; output is in sentence order.
pub fn run_pipeline(gateway: &Gateway, answer_id: &str, question: &str, answer: &str, cfg: &PipelineConfig) -> Result<Vec<SentenceVerdict>> {
    cfg.validate()?;
    let sentences = split_into_sentences(answer_id, answer);
    Ok((0..sentences.len())
        .into_par_iter()
        .map(|i| process_sentence(gateway, question, &sentences, i, cfg))
        .collect())
}
