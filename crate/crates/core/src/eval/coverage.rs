//! Sentence- and element-level coverage.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Judge;
use crate::error::{Error, Result};
use crate::gateway::Attempted;
use crate::num::{ratio, Real};
use crate::parse::{parse_coverage, parse_elements};
use crate::prompts::{numbered_block, PromptKind};
use crate::records::SentenceKey;

/// A distinct unit of information in a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub text: String,
    pub verifiable: bool,
    /// Annotation like "'notable' is not verifiable, but the rest is verifiable".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_note: Option<String>,
}

impl Element {
    /// Text as shown to the coverage judge, carrying any mixed-verifiability note.
    pub fn prompt_text(&self) -> String {
        match &self.mixed_note {
            Some(note) => format!("{} [note: {note}]", self.text),
            None => self.text.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoverageLabel {
    NotCovered,
    Implicit,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfusionCell {
    TP,
    TN,
    FP,
    FN,
}

/// Implicit coverage counts for verifiable elements but not against
/// unverifiable ones.
pub fn confusion_cell(verifiable: bool, label: CoverageLabel) -> ConfusionCell {
    match (verifiable, label) {
        (true, CoverageLabel::Explicit | CoverageLabel::Implicit) => ConfusionCell::TP,
        (true, CoverageLabel::NotCovered) => ConfusionCell::FN,
        (false, CoverageLabel::Explicit) => ConfusionCell::FP,
        (false, CoverageLabel::Implicit | CoverageLabel::NotCovered) => ConfusionCell::TN,
    }
}

/// Counts for the verifiable (positive) class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_cells(cells: &[ConfusionCell]) -> Self {
        let mut c = Confusion::default();
        for cell in cells {
            c.add(*cell);
        }
        c
    }

    pub fn add(&mut self, cell: ConfusionCell) {
        match cell {
            ConfusionCell::TP => self.tp += 1,
            ConfusionCell::TN => self.tn += 1,
            ConfusionCell::FP => self.fp += 1,
            ConfusionCell::FN => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Class-specific precision and recall for verifiable (V) and unverifiable (UV)
/// content. Zero denominators give 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard<T: Real> {
    pub accuracy: T,
    pub macro_f1: T,
    pub precision_v: T,
    pub recall_v: T,
    pub precision_uv: T,
    pub recall_uv: T,
    pub f1_v: T,
    pub f1_uv: T,
}

fn f1<T: Real>(p: T, r: T) -> T {
    if p + r == T::zero() {
        T::zero()
    } else {
        T::lit(2.0) * p * r / (p + r)
    }
}

impl<T: Real> ScoreCard<T> {
    pub fn from_confusion(c: &Confusion) -> Result<Self> {
        if c.total() == 0 {
            return Err(Error::Input("cannot score an empty set".into()));
        }
        let precision_v = ratio(c.tp, c.tp + c.fp);
        let recall_v = ratio(c.tp, c.tp + c.fn_);
        let precision_uv = ratio(c.tn, c.tn + c.fn_);
        let recall_uv = ratio(c.tn, c.tn + c.fp);
        let f1_v = f1(precision_v, recall_v);
        let f1_uv = f1(precision_uv, recall_uv);
        Ok(ScoreCard {
            accuracy: ratio(c.tp + c.tn, c.total()),
            macro_f1: (f1_v + f1_uv) / T::lit(2.0),
            precision_v,
            recall_v,
            precision_uv,
            recall_uv,
            f1_v,
            f1_uv,
        })
    }
}

/// Sentence-level confusion: a method predicts "verifiable" for a sentence
/// when it extracted at least one claim from it.
pub fn sentence_confusion(predicted: &[bool], gold: &[bool]) -> Result<Confusion> {
    if predicted.len() != gold.len() {
        return Err(Error::Input(format!("{} predictions for {} gold labels", predicted.len(), gold.len())));
    }
    let mut c = Confusion::default();
    for (&p, &g) in predicted.iter().zip(gold) {
        c.add(match (g, p) {
            (true, true) => ConfusionCell::TP,
            (true, false) => ConfusionCell::FN,
            (false, true) => ConfusionCell::FP,
            (false, false) => ConfusionCell::TN,
        });
    }
    Ok(c)
}

pub fn sentence_level_scores<T: Real>(predicted: &[bool], gold: &[bool]) -> Result<ScoreCard<T>> {
    ScoreCard::from_confusion(&sentence_confusion(predicted, gold)?)
}

pub fn element_level_scores<T: Real>(cells: &[ConfusionCell]) -> Result<ScoreCard<T>> {
    ScoreCard::from_confusion(&Confusion::from_cells(cells))
}

pub fn extract_elements(judge: &Judge, sentence: &str, excerpt: &str, question: &str) -> Result<Attempted<Vec<Element>>> {
    judge.ask(
        PromptKind::ElementExtraction,
        &[("question", question), ("excerpt", excerpt), ("sentence", sentence)],
        parse_elements,
    )
}

/// Labels each element against a method's claims for the sentence. With no
/// claims (or no elements) nothing is asked.
pub fn label_coverage(
    judge: &Judge,
    elements: &[Element],
    claims: &[String],
    excerpt: &str,
    question: &str,
) -> Result<Attempted<Vec<Option<CoverageLabel>>>> {
    if claims.is_empty() || elements.is_empty() {
        return Ok(Attempted::Parsed {
            value: vec![Some(CoverageLabel::NotCovered); elements.len()],
            transcript: String::new(),
            attempts: 0,
        });
    }
    let element_block = numbered_block(&elements.iter().map(Element::prompt_text).collect::<Vec<_>>());
    let claim_block = numbered_block(claims);
    let n = elements.len();
    judge.ask(
        PromptKind::ElementCoverage,
        &[("question", question), ("excerpt", excerpt), ("claims", &claim_block), ("elements", &element_block)],
        move |t| parse_coverage(t, n),
    )
}

/// Whether the element set agrees with the gold sentence label: some element
/// is verifiable exactly when the sentence is.
pub fn is_consistent(elements: &[Element], gold_verifiable: bool) -> bool {
    elements.iter().any(|e| e.verifiable) == gold_verifiable
}

/// Sentences whose elements agree with their gold label; sentences without a
/// gold label are dropped.
pub fn consistency_filter(sentences: &[(SentenceKey, Vec<Element>)], gold: &HashMap<SentenceKey, bool>) -> Vec<SentenceKey> {
    sentences
        .iter()
        .filter(|(k, els)| gold.get(k).is_some_and(|&g| is_consistent(els, g)))
        .map(|(k, _)| k.clone())
        .collect()
}
