//! Sentence segmentation and per-stage context windows.
//!
//! Answers are first cut into paragraphs at newline boundaries, then every
//! paragraph is split by a deterministic rule-based segmenter. Markdown bullet
//! items therefore always end up as sentences of their own, whether or not they
//! carry terminal punctuation.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marker rendered on a truncated side of an excerpt.
pub const ELLIPSIS: &str = "[...]";

/// One sentence of an answer.
///
/// `leading` holds the exact source text between the previous sentence (or the
/// start of the answer) and this one; `trailing` is only non-empty on the last
/// sentence. Concatenating `leading + text` over all records and appending the
/// final `trailing` reproduces the answer byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub answer_id: String,
    pub paragraph_index: usize,
    pub sentence_index: usize,
    pub text: String,
    #[serde(skip)]
    pub leading: String,
    #[serde(skip)]
    pub trailing: String,
}

/// Reassembles the source answer from its records.
pub fn reconstruct(sentences: &[SentenceRecord]) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.leading);
        out.push_str(&s.text);
    }
    if let Some(last) = sentences.last() {
        out.push_str(&last.trailing);
    }
    out
}

/// Splits an answer into sentences.
pub fn split_into_sentences(answer_id: &str, answer_text: &str) -> Vec<SentenceRecord> {
    // absolute (start, end, paragraph) spans
    let mut spans: Vec<(usize, usize, usize)> = Vec::new();
    let mut paragraph = 0usize;
    let mut line_start = 0usize;
    for line in answer_text.split('\n') {
        let local = paragraph_spans(line);
        if !local.is_empty() {
            spans.extend(local.into_iter().map(|(s, e)| (line_start + s, line_start + e, paragraph)));
            paragraph += 1;
        }
        line_start += line.len() + 1;
    }

    let mut out = Vec::with_capacity(spans.len());
    let mut cursor = 0usize;
    for (i, &(start, end, para)) in spans.iter().enumerate() {
        out.push(SentenceRecord {
            answer_id: answer_id.to_string(),
            paragraph_index: para,
            sentence_index: i,
            text: answer_text[start..end].to_string(),
            leading: answer_text[cursor..start].to_string(),
            trailing: String::new(),
        });
        cursor = end;
    }
    if let Some(last) = out.last_mut() {
        last.trailing = answer_text[cursor..].to_string();
    }
    out
}

fn abbreviations() -> &'static HashSet<&'static str> {
    static ABBREV: OnceLock<HashSet<&'static str>> = OnceLock::new();
    ABBREV.get_or_init(|| {
        [
            "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "u.s",
            "u.k", "u.n", "inc", "ltd", "co", "corp", "no", "fig", "approx", "dept", "est", "govt",
            "mt", "ft", "ave", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
            "oct", "nov", "dec", "gen", "col", "lt", "sgt", "rep", "sen", "gov", "a.m", "p.m",
            "cf", "al", "vol", "pp", "ed", "op",
        ]
        .into_iter()
        .collect()
    })
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | ')' | ']' | '»' | '*' | '_')
}

/// Consumes citation markers such as `[1]`, `[^2^]` or `[1][3]` starting at `i`.
fn skip_citations(chars: &[(usize, char)], mut i: usize) -> usize {
    loop {
        if i >= chars.len() || chars[i].1 != '[' {
            return i;
        }
        let mut j = i + 1;
        if j < chars.len() && chars[j].1 == '^' {
            j += 1;
        }
        let digits_start = j;
        while j < chars.len() && chars[j].1.is_ascii_digit() {
            j += 1;
        }
        if j == digits_start {
            return i;
        }
        if j < chars.len() && chars[j].1 == '^' {
            j += 1;
        }
        if j < chars.len() && chars[j].1 == ']' {
            i = j + 1;
        } else {
            return i;
        }
    }
}

/// Trimmed sentence spans (byte offsets) within one paragraph.
fn paragraph_spans(par: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = par.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0usize;

    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(pos);
        }
        if !is_terminal(c) {
            i += 1;
            continue;
        }

        let punct_start = i;
        let mut j = i;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        let single_period = j - punct_start == 1 && c == '.';
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        j = skip_citations(&chars, j);

        // A boundary needs whitespace after it; end of paragraph closes the span anyway.
        if j >= chars.len() {
            break;
        }
        if !chars[j].1.is_whitespace() {
            i = j.max(i + 1);
            continue;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k >= chars.len() {
            break;
        }
        let next = chars[k].1;
        if next.is_lowercase() {
            i = k;
            continue;
        }
        let sent_start = start.expect("span opened");
        if single_period && is_non_boundary_period(par, sent_start, chars[punct_start].0) {
            i = k;
            continue;
        }

        let end = if j < chars.len() { chars[j].0 } else { par.len() };
        spans.push((sent_start, end));
        start = None;
        i = k;
    }

    if let Some(s) = start {
        let end = par.trim_end().len();
        if end > s {
            spans.push((s, end));
        }
    }
    spans
}

/// Decides whether a period at byte `dot` ends an abbreviation, an initial or a
/// list number rather than a sentence.
fn is_non_boundary_period(par: &str, sent_start: usize, dot: usize) -> bool {
    let before = &par[sent_start..dot];
    let word_start = before
        .rfind(char::is_whitespace)
        .map(|p| p + before[p..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(0);
    let raw = &before[word_start..];
    let token = raw.trim_start_matches(['(', '"', '\'', '“', '‘', '[', '*', '_']);
    if token.is_empty() {
        return false;
    }
    let lower = token.to_lowercase();
    if abbreviations().contains(lower.as_str()) {
        return true;
    }
    // dotted acronyms such as "U.S.A"
    if token.contains('.') && token.split('.').all(|p| p.chars().count() == 1 && p.chars().all(char::is_alphabetic)) {
        return true;
    }
    let is_first_token = before[..word_start].trim().is_empty();
    // "1." opening a numbered list item
    if is_first_token && token.chars().all(|c| c.is_ascii_digit()) {
        return true;
    }
    // middle initial: "John F. Kennedy", "George R. R. Martin"
    let mut tc = token.chars();
    if let (Some(first), None) = (tc.next(), tc.next()) {
        if first.is_uppercase() && !is_first_token {
            let prev = before[..word_start].trim_end();
            let prev_word = prev.rsplit(char::is_whitespace).next().unwrap_or("");
            let prev_word = prev_word.trim_start_matches(|c: char| !c.is_alphanumeric());
            let chained = prev_word.len() == 2 && prev_word.ends_with('.');
            let prev_word = if chained { &prev_word[..1] } else { prev_word };
            if prev_word.chars().next().is_some_and(char::is_uppercase)
                && prev_word.chars().all(char::is_alphabetic)
            {
                return true;
            }
        }
    }
    false
}

/// Surrounding sentences for one focal sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextWindow {
    pub preceding: Vec<String>,
    pub following: Vec<String>,
    pub truncated_before: bool,
    pub truncated_after: bool,
    /// Source separators between consecutive window items (preceding, focal,
    /// following), plus the separator after the last item.
    separators: Vec<String>,
}

impl ContextWindow {
    /// Renders the excerpt shown to the model, substituting `focal` for the
    /// sentence of interest.
    pub fn render(&self, focal: &str) -> String {
        let mut out = String::new();
        if self.truncated_before {
            out.push_str(ELLIPSIS);
        }
        let items = self
            .preceding
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(focal))
            .chain(self.following.iter().map(String::as_str));
        for (k, item) in items.enumerate() {
            if k > 0 {
                out.push_str(&self.separators[k - 1]);
            }
            out.push_str(item);
        }
        if self.truncated_after {
            let sep = self.separators.last().map(String::as_str).unwrap_or(" ");
            out.push_str(if sep.is_empty() { " " } else { sep });
            out.push_str(ELLIPSIS);
        }
        out
    }
}

/// Builds the window of up to `p` preceding and `f` following sentences.
pub fn build_context(sentences: &[SentenceRecord], index: usize, p: usize, f: usize) -> Result<ContextWindow> {
    if index >= sentences.len() {
        return Err(Error::Input(format!(
            "sentence index {index} out of range for {} sentences",
            sentences.len()
        )));
    }
    let lo = index.saturating_sub(p);
    let hi = (index + f + 1).min(sentences.len());
    window_over(sentences, lo, index, hi)
}

fn window_over(sentences: &[SentenceRecord], lo: usize, index: usize, hi: usize) -> Result<ContextWindow> {
    let preceding = sentences[lo..index].iter().map(|s| s.text.clone()).collect();
    let following = sentences[index + 1..hi].iter().map(|s| s.text.clone()).collect();
    let mut separators: Vec<String> = sentences[lo + 1..hi].iter().map(|s| s.leading.clone()).collect();
    separators.push(sentences.get(hi).map(|s| s.leading.clone()).unwrap_or_default());
    Ok(ContextWindow {
        preceding,
        following,
        truncated_before: lo > 0,
        truncated_after: hi < sentences.len(),
        separators,
    })
}

/// How much of the answer a given claim-extraction method saw around each sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContextSpec {
    /// The sentence alone.
    None,
    Window { preceding: usize, following: usize },
    /// The newline-delimited paragraph containing the sentence.
    Paragraph,
    WholeAnswer,
}

impl ContextSpec {
    /// Five preceding sentences, used for coverage and decontextualization.
    pub const STANDARD: ContextSpec = ContextSpec::Window { preceding: 5, following: 0 };

    pub fn window(&self, sentences: &[SentenceRecord], index: usize) -> Result<ContextWindow> {
        if index >= sentences.len() {
            return build_context(sentences, index, 0, 0);
        }
        match *self {
            ContextSpec::None => build_context(sentences, index, 0, 0).map(|mut w| {
                // the excerpt is just the sentence; nothing is hidden from view on purpose
                w.truncated_before = false;
                w.truncated_after = false;
                w
            }),
            ContextSpec::Window { preceding, following } => build_context(sentences, index, preceding, following),
            ContextSpec::WholeAnswer => window_over(sentences, 0, index, sentences.len()),
            ContextSpec::Paragraph => {
                let para = sentences[index].paragraph_index;
                let lo = sentences[..index]
                    .iter()
                    .rposition(|s| s.paragraph_index != para)
                    .map_or(0, |p| p + 1);
                let hi = sentences[index..]
                    .iter()
                    .position(|s| s.paragraph_index != para)
                    .map_or(sentences.len(), |p| index + p);
                window_over(sentences, lo, index, hi)
            }
        }
    }

    /// Default entailment context for well-known extraction methods.
    pub fn for_method(method: &str) -> ContextSpec {
        match method.to_ascii_lowercase().as_str() {
            "claimify" => ContextSpec::Window { preceding: 5, following: 5 },
            "veriscore" => ContextSpec::Window { preceding: 3, following: 1 },
            "afacta" => ContextSpec::Window { preceding: 1, following: 1 },
            "dnd" => ContextSpec::Paragraph,
            "safe" => ContextSpec::WholeAnswer,
            "factcheck-gpt" | "factcheckgpt" => ContextSpec::None,
            _ => ContextSpec::STANDARD,
        }
    }
}
