//! Judge-based entailment of claims by their source sentence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{pct1, Judge};
use crate::error::Result;
use crate::gateway::Attempted;
use crate::parse::parse_entailment;
use crate::postprocess::{map_attempt, Claim};
use crate::prompts::PromptKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntailmentLabel {
    Entailed,
    NotEntailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntailmentVerdict {
    pub method: String,
    pub answer_id: String,
    pub sentence_index: usize,
    pub claim_ordinal: usize,
    pub claim: String,
    /// `None` when the judge output never parsed.
    pub verdict: Option<EntailmentLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
}

/// Judges one claim; `excerpt` is the rendered context with the source sentence in place.
pub fn classify_entailment(judge: &Judge, claim: &Claim, sentence: &str, excerpt: &str, question: &str) -> Result<Attempted<EntailmentLabel>> {
    let outcome = judge.ask(
        PromptKind::Entailment,
        &[("question", question), ("excerpt", excerpt), ("sentence", sentence), ("claim", &claim.text)],
        parse_entailment,
    )?;
    Ok(map_attempt(outcome, |e| if e { EntailmentLabel::Entailed } else { EntailmentLabel::NotEntailed }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailmentRow {
    pub method: String,
    pub n_claims: usize,
    pub n_entailed: usize,
    pub pct_entailed: f64,
}

/// Per-method entailment rates over claims with a known verdict. Methods with
/// no such claims are left out.
pub fn entailment_report(verdicts: &[EntailmentVerdict]) -> Vec<EntailmentRow> {
    let mut groups: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for v in verdicts {
        let g = groups.entry(v.method.as_str()).or_default();
        match v.verdict {
            Some(EntailmentLabel::Entailed) => {
                g.0 += 1;
                g.1 += 1;
            }
            Some(EntailmentLabel::NotEntailed) => g.1 += 1,
            None => {}
        }
    }
    groups
        .into_iter()
        .filter_map(|(method, (ent, n))| {
            if n == 0 {
                log::warn!("no judged claims for method {method}; omitted from report");
                return None;
            }
            Some(EntailmentRow { method: method.to_string(), n_claims: n, n_entailed: ent, pct_entailed: pct1(ent, n) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(method: &str, e: Option<bool>) -> EntailmentVerdict {
        EntailmentVerdict {
            method: method.into(),
            answer_id: "a".into(),
            sentence_index: 0,
            claim_ordinal: 0,
            claim: "c".into(),
            verdict: e.map(|e| if e { EntailmentLabel::Entailed } else { EntailmentLabel::NotEntailed }),
            transcript: None,
        }
    }

    #[test]
    fn report_counts() {
        let mut vs: Vec<_> = (0..7).map(|_| v("m", Some(true))).collect();
        vs.extend((0..3).map(|_| v("m", Some(false))));
        vs.push(v("m", None));
        vs.push(v("empty", None));
        vs.extend((0..99).map(|_| v("x", Some(true))));
        vs.push(v("x", Some(false)));
        let r = entailment_report(&vs);
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].method.as_str(), r[0].n_claims, r[0].pct_entailed), ("m", 10, 70.0));
        assert_eq!((r[1].method.as_str(), r[1].pct_entailed), ("x", 99.0));
    }
}
