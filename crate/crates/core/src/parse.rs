//! Parsers for model outputs. Every parser is total: it returns a value or a
//! [`ParseError`], never panics.

use std::sync::OnceLock;

use regex::Regex;

use crate::error::ParseError;
use crate::eval::coverage::{CoverageLabel, Element};
use crate::eval::decontext::CMaxKind;
use crate::pipeline::{DisambiguationKind, SelectionKind};

type Parsed<T> = std::result::Result<T, ParseError>;

const DECOMPOSITION_HEADER: &str =
    "Specific, Verifiable, and Decontextualized Propositions with Essential Context/Clarifications:";
const TRUE_OR_FALSE: &str = "- true or false?";

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn strip_quotes(s: &str) -> &str {
    let s = s.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”')] {
        if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
            return s[open.len_utf8()..s.len() - close.len_utf8()].trim();
        }
    }
    s
}

/// Text after the last occurrence of `marker`, up to the next blank line.
fn after_last<'a>(text: &'a str, marker: &str) -> Option<&'a str> {
    let pos = text.rfind(marker)?;
    let rest = text[pos + marker.len()..].trim_start();
    Some(rest.split("\n\n").next().unwrap_or("").trim())
}

/// Which of two mutually exclusive phrases occurs last, if either does.
fn last_of(text: &str, yes: &str, no: &str) -> Option<bool> {
    match (text.rfind(yes), text.rfind(no)) {
        (Some(a), Some(b)) => Some(a > b),
        (Some(_), None) => Some(true),
        (None, Some(_)) => Some(false),
        (None, None) => None,
    }
}

pub fn parse_selection(text: &str, sentence: &str) -> Parsed<SelectionKind> {
    let text = text.replace("**", "");
    let pos = text
        .rfind("Final submission:")
        .ok_or_else(|| ParseError::new("missing \"Final submission:\""))?;
    let tail = &text[pos..];
    let line_marker = "Sentence with only verifiable information:";
    let verdict_part = tail.split(line_marker).next().unwrap_or("").to_lowercase();
    let contains = if verdict_part.contains("does not contain") {
        false
    } else if verdict_part.contains("contains a specific and verifiable proposition") {
        true
    } else {
        return Err(ParseError::new("no verdict after \"Final submission:\""));
    };
    if !contains {
        return Ok(SelectionKind::NoVerifiableContent);
    }
    let line = after_last(tail, line_marker)
        .ok_or_else(|| ParseError::new("missing \"Sentence with only verifiable information:\""))?;
    let line = strip_quotes(line);
    let lower = line.trim_end_matches('.').to_lowercase();
    let lower = strip_quotes(&lower);
    if lower == "remains unchanged" {
        return Ok(SelectionKind::Unchanged);
    }
    if lower == "none" || line.is_empty() {
        return Err(ParseError::new("verdict says verifiable but no sentence was given"));
    }
    if line == sentence.trim() {
        Ok(SelectionKind::Unchanged)
    } else {
        Ok(SelectionKind::Revised(line.to_string()))
    }
}

pub fn parse_disambiguation(text: &str, sentence: &str) -> Parsed<DisambiguationKind> {
    let text = text.replace("**", "");
    let line = after_last(&text, "DecontextualizedSentence:")
        .ok_or_else(|| ParseError::new("missing \"DecontextualizedSentence:\""))?;
    let line = strip_quotes(line);
    if line.is_empty() {
        return Err(ParseError::new("empty DecontextualizedSentence"));
    }
    if line.to_lowercase().starts_with("cannot be decontextualized") {
        return Ok(DisambiguationKind::CannotBeDisambiguated);
    }
    if line == sentence.trim() {
        Ok(DisambiguationKind::Unchanged)
    } else {
        Ok(DisambiguationKind::Clarified(line.to_string()))
    }
}

/// Entries of the first bracketed list in `region`: either a one-line JSON
/// array or one quoted entry per line with the brackets on their own lines.
fn bracketed_list(region: &str) -> Parsed<Vec<String>> {
    let open = region.find('[').ok_or_else(|| ParseError::new("no list found"))?;
    let after_open = &region[open + 1..];
    let first_line = after_open.split('\n').next().unwrap_or("");
    if !first_line.trim().is_empty() {
        let close = first_line.rfind(']').ok_or_else(|| ParseError::new("unterminated one-line list"))?;
        let inner = first_line[..close].trim().trim_end_matches(',');
        if inner.is_empty() {
            return Ok(Vec::new());
        }
        return serde_json::from_str::<Vec<String>>(&format!("[{inner}]"))
            .map_err(|e| ParseError::new(format!("one-line list is not a string array: {e}")));
    }
    let mut entries = Vec::new();
    for line in after_open.lines().skip(1) {
        let t = line.trim();
        if t.starts_with(']') {
            return Ok(entries);
        }
        if t.is_empty() {
            continue;
        }
        let t = t.strip_suffix(',').unwrap_or(t).trim();
        let entry = serde_json::from_str::<String>(t).unwrap_or_else(|_| strip_quotes(t).to_string());
        entries.push(entry);
    }
    Err(ParseError::new("list is never closed"))
}

/// Claims from the final list, with the fact-checker suffix removed.
pub fn parse_decomposition(text: &str) -> Parsed<Vec<String>> {
    let pos = text
        .rfind(DECOMPOSITION_HEADER)
        .ok_or_else(|| ParseError::new("missing final proposition list header"))?;
    let items = bracketed_list(&text[pos + DECOMPOSITION_HEADER.len()..])?;
    Ok(items
        .into_iter()
        .map(|c| {
            let c = c.trim_end();
            c.strip_suffix(TRUE_OR_FALSE).unwrap_or(c).trim().to_string()
        })
        .filter(|c| !c.is_empty())
        .collect())
}

/// `true` for entailed.
pub fn parse_entailment(text: &str) -> Parsed<bool> {
    last_of(&normalize_ws(text), "S entails all elements of C", "S does not entail all elements of C")
        .ok_or_else(|| ParseError::new("no entailment verdict"))
}

/// `true` when the sentence can be read as a complete declarative sentence.
pub fn parse_sentence_validity(text: &str) -> Parsed<bool> {
    last_of(
        &normalize_ws(text),
        "S can be interpreted as a complete, declarative sentence",
        "S cannot be interpreted as a complete, declarative sentence",
    )
    .ok_or_else(|| ParseError::new("no sentence validity verdict"))
}

pub fn parse_claim_validity(text: &str) -> Parsed<bool> {
    last_of(
        &normalize_ws(text),
        "C is a complete, declarative sentence",
        "C is not a complete, declarative sentence",
    )
    .ok_or_else(|| ParseError::new("no claim validity verdict"))
}

pub fn parse_elements(text: &str) -> Parsed<Vec<Element>> {
    // the element list is the last one opened on its own line (or the last one-line list)
    let start = text
        .match_indices('[')
        .filter(|(i, _)| {
            let line_start = text[..*i].rfind('\n').map_or(0, |p| p + 1);
            text[line_start..*i].trim().is_empty()
        })
        .map(|(i, _)| i)
        .next_back()
        .ok_or_else(|| ParseError::new("no element list"))?;
    let entries = bracketed_list(&text[start..])?;
    entries
        .iter()
        .map(|entry| {
            let (body, verdict) = entry
                .rsplit_once(" -> ")
                .ok_or_else(|| ParseError::new(format!("element without verifiability: {entry}")))?;
            let lower = verdict.to_lowercase();
            let verifiable = lower.contains("contains verifiable information") && !lower.contains("not contain verifiable");
            let mixed_note = lower
                .contains("is not verifiable, but the rest")
                .then(|| verdict.split(", so").next().unwrap_or(verdict).trim().to_string());
            Ok(Element { text: body.trim().to_string(), verifiable, mixed_note })
        })
        .collect()
}

fn section_header() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^[\s\-*#]*(?:E|Element )(\d+):").expect("valid regex"))
}

fn template_question() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"What is not explicitly stated or strongly implied by C\??,? and is therefore grounds for lack of full coverage\??")
            .expect("valid regex")
    })
}

fn implied() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\bimpl(?:ied|ies|y|icit|icitly)\b").expect("valid regex"))
}

/// Label from one element's reasoning block.
fn coverage_label(section: &str) -> Option<CoverageLabel> {
    let cleaned = template_question().replace_all(section, "");
    let pos = cleaned.rfind("fully covered by C")?;
    if cleaned[..pos].trim_end().ends_with("not") {
        return Some(CoverageLabel::NotCovered);
    }
    let line_start = cleaned[..pos].rfind('\n').map_or(0, |p| p + 1);
    if implied().is_match(&cleaned[line_start..pos]) {
        Some(CoverageLabel::Implicit)
    } else {
        Some(CoverageLabel::Explicit)
    }
}

/// One label per element (1-based numbering in the transcript). Elements whose
/// verdict cannot be found are `None`; the whole output is rejected only when
/// no element could be read.
pub fn parse_coverage(text: &str, n_elements: usize) -> Parsed<Vec<Option<CoverageLabel>>> {
    let mut labels: Vec<Option<CoverageLabel>> = vec![None; n_elements];
    let headers: Vec<(usize, usize)> = section_header()
        .captures_iter(text)
        .filter_map(|c| Some((c.get(0)?.start(), c[1].parse::<usize>().ok()?)))
        .collect();
    for (i, &(start, k)) in headers.iter().enumerate() {
        let end = headers.get(i + 1).map_or(text.len(), |h| h.0);
        if (1..=n_elements).contains(&k) {
            if let Some(label) = coverage_label(&text[start..end]) {
                labels[k - 1] = Some(label);
            }
        }
    }
    for (k, slot) in labels.iter_mut().enumerate() {
        if slot.is_none() {
            let re = Regex::new(&format!(r"E{} is (not )?fully covered by C", k + 1)).expect("valid regex");
            if let Some(c) = re.captures_iter(text).last() {
                *slot = Some(if c.get(1).is_some() { CoverageLabel::NotCovered } else { CoverageLabel::Explicit });
            }
        }
    }
    if n_elements > 0 && labels.iter().all(Option::is_none) {
        return Err(ParseError::new("no element coverage verdicts"));
    }
    Ok(labels)
}

pub fn parse_cmax(text: &str) -> Parsed<CMaxKind> {
    let value = text
        .lines()
        .filter_map(|l| {
            let l = l.trim().trim_start_matches(['-', '*', ' ']);
            let rest = l.strip_prefix("C_max")?.trim_start();
            Some(rest.strip_prefix('=')?.trim())
        })
        .next_back()
        .ok_or_else(|| ParseError::new("missing \"C_max =\""))?;
    let value = strip_quotes(value);
    match value {
        "" => Err(ParseError::new("empty C_max")),
        "C" | "C." => Ok(CMaxKind::AlreadyMaximal),
        v => Ok(CMaxKind::Generated(v.to_string())),
    }
}

/// `true` for supported.
pub fn parse_verification(text: &str) -> Parsed<bool> {
    let lower = text.to_lowercase();
    last_of(&lower, "[supported]", "[not supported]").ok_or_else(|| ParseError::new("no support verdict"))
}

/// The query inside the first fenced code block, with all quotation marks removed.
pub fn parse_query(text: &str) -> Parsed<String> {
    let open = text.find("```").ok_or_else(|| ParseError::new("no code block"))?;
    let body = &text[open + 3..];
    // optional language tag on the fence line
    let body = match body.find('\n') {
        Some(nl) if !body[..nl].contains("```") => &body[nl + 1..],
        _ => body,
    };
    let close = body.find("```").ok_or_else(|| ParseError::new("unterminated code block"))?;
    let query = strip_query_quotes(&body[..close]);
    if query.is_empty() {
        return Err(ParseError::new("empty query"));
    }
    Ok(query)
}

/// Removes straight and typographic double quotes and collapses whitespace.
pub fn strip_query_quotes(q: &str) -> String {
    normalize_ws(&q.replace(['"', '“', '”'], ""))
}
