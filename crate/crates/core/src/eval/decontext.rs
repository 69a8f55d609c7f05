//! Decontextualization: maximal rewrite, evidence-backed verification and the
//! seven result types.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::retrieval::{gather_evidence, verify_support, EvidenceSet, RetrievalConfig};
use super::{pct1, Judge};
use crate::error::{Error, Result};
use crate::gateway::Attempted;
use crate::parse::parse_cmax;
use crate::postprocess::Claim;
use crate::prompts::{quoted_list, PromptKind};
use crate::records::SentenceKey;
use crate::search::SearchClient;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text")]
pub enum CMaxKind {
    AlreadyMaximal,
    Generated(String),
}

/// Support verdicts for one claim under one retrieval configuration.
/// `ec_supports_cmax` is only computed when `ec_supports_c` is true.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VerdictShape {
    pub already_maximal: bool,
    pub ec_supports_c: Option<bool>,
    pub emax_supports_cmax: Option<bool>,
    pub ec_supports_cmax: Option<bool>,
}

pub fn classify_result(v: &VerdictShape) -> Result<u8> {
    if v.already_maximal {
        return match (v.ec_supports_c, v.emax_supports_cmax, v.ec_supports_cmax) {
            (None, None, None) => Ok(1),
            _ => Err(Error::Contract("no verification happens when the claim is already maximal".into())),
        };
    }
    match (v.ec_supports_c, v.emax_supports_cmax, v.ec_supports_cmax) {
        (Some(true), Some(true), Some(true)) => Ok(2),
        (Some(true), Some(true), Some(false)) => Ok(3),
        (Some(true), Some(false), Some(true)) => Ok(4),
        (Some(true), Some(false), Some(false)) => Ok(5),
        (Some(false), Some(true), None) => Ok(6),
        (Some(false), Some(false), None) => Ok(7),
        (Some(true), Some(_), None) => Err(Error::Contract("E_c supports c but E_c was not checked against c_max".into())),
        (Some(false), Some(_), Some(_)) => Err(Error::Contract("E_c was checked against c_max although it does not support c".into())),
        _ => Err(Error::Contract(format!("incomplete verdicts: {v:?}"))),
    }
}

pub fn is_desirable(result_type: u8) -> bool {
    matches!(result_type, 1 | 2 | 4 | 7)
}

pub fn generate_cmax(judge: &Judge, claim: &str, sentence: &str, excerpt: &str, question: &str, sibling_claims: &[String]) -> Result<Attempted<CMaxKind>> {
    let claims = quoted_list(sibling_claims);
    judge.ask(
        PromptKind::CMax,
        &[("question", question), ("excerpt", excerpt), ("sentence", sentence), ("claims", &claims), ("claim", claim)],
        parse_cmax,
    )
}

/// Outcome for one retrieval configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigOutcome {
    pub retrieval: String,
    pub verdicts: VerdictShape,
    /// `None` when a judgment could not be parsed.
    pub result_type: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_c: Option<EvidenceSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_max: Option<EvidenceSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Everything computed for one (sentence, claim text) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimOutcome {
    pub cmax: Option<CMaxKind>,
    pub configs: Vec<ConfigOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecontextRecord {
    pub method: String,
    pub answer_id: String,
    pub sentence_index: usize,
    pub claim: String,
    pub cmax: Option<CMaxKind>,
    pub retrieval: String,
    pub ec_supports_c: Option<bool>,
    pub emax_supports_cmax: Option<bool>,
    pub ec_supports_cmax: Option<bool>,
    pub result_type: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// First-writer-wins store so identical (sentence, claim text) pairs from
/// different methods receive one shared outcome.
#[derive(Default)]
pub struct SharedResults {
    inner: Mutex<HashMap<(SentenceKey, String), ClaimOutcome>>,
}

impl SharedResults {
    pub fn get_or_compute(&self, key: (SentenceKey, String), compute: impl FnOnce() -> Result<ClaimOutcome>) -> Result<ClaimOutcome> {
        if let Some(hit) = self.inner.lock().expect("shared results poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let value = compute()?;
        let mut map = self.inner.lock().expect("shared results poisoned");
        Ok(map.entry(key).or_insert(value).clone())
    }
}

fn verdict(a: Attempted<bool>) -> Option<bool> {
    match a {
        Attempted::Parsed { value, .. } => Some(value),
        Attempted::Failure { .. } => None,
    }
}

fn evaluate_config(judge: &Judge, search: &SearchClient, claim: &str, cmax: &str, cfg: &RetrievalConfig, keep_evidence: bool) -> Result<ConfigOutcome> {
    let ev_c = gather_evidence(judge, search, claim, cfg)?;
    let ev_max = gather_evidence(judge, search, cmax, cfg)?;
    let ec_c = verdict(verify_support(judge, claim, &ev_c)?);
    let emax = verdict(verify_support(judge, cmax, &ev_max)?);
    let ec_max = match ec_c {
        Some(true) => verdict(verify_support(judge, cmax, &ev_c)?),
        _ => None,
    };
    let verdicts = VerdictShape { already_maximal: false, ec_supports_c: ec_c, emax_supports_cmax: emax, ec_supports_cmax: ec_max };
    let unknown = ec_c.is_none() || emax.is_none() || (ec_c == Some(true) && ec_max.is_none());
    let (result_type, diagnostic) = if unknown {
        (None, Some("verification_parse_failed".to_string()))
    } else {
        (Some(classify_result(&verdicts)?), None)
    };
    Ok(ConfigOutcome {
        retrieval: cfg.name.clone(),
        verdicts,
        result_type,
        evidence_c: keep_evidence.then_some(ev_c),
        evidence_max: keep_evidence.then_some(ev_max),
        diagnostic,
    })
}

/// Inputs for one claim.
pub struct ClaimContext<'a> {
    pub claim: &'a Claim,
    pub sentence: &'a str,
    pub excerpt: &'a str,
    pub question: &'a str,
    pub sibling_claims: &'a [String],
}

/// Runs all three steps for a claim under every retrieval configuration.
/// c_max is generated once and shared by the configurations.
pub fn evaluate_claim(judge: &Judge, search: &SearchClient, ctx: &ClaimContext, configs: &[RetrievalConfig], keep_evidence: bool) -> Result<ClaimOutcome> {
    let claim = ctx.claim.text.as_str();
    let cmax = match generate_cmax(judge, claim, ctx.sentence, ctx.excerpt, ctx.question, ctx.sibling_claims)? {
        Attempted::Parsed { value, .. } => value,
        Attempted::Failure { .. } => {
            return Ok(ClaimOutcome { cmax: None, configs: Vec::new(), diagnostic: Some("cmax_parse_failed".into()) })
        }
    };
    let configs = match &cmax {
        CMaxKind::AlreadyMaximal => configs
            .iter()
            .map(|c| ConfigOutcome {
                retrieval: c.name.clone(),
                verdicts: VerdictShape { already_maximal: true, ..Default::default() },
                result_type: Some(1),
                evidence_c: None,
                evidence_max: None,
                diagnostic: None,
            })
            .collect(),
        CMaxKind::Generated(text) => configs
            .iter()
            .map(|c| evaluate_config(judge, search, claim, text, c, keep_evidence))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(ClaimOutcome { cmax: Some(cmax), configs, diagnostic: None })
}

/// Flattens a claim outcome into one record per retrieval configuration.
pub fn records_for(claim: &Claim, outcome: &ClaimOutcome, configs: &[RetrievalConfig]) -> Vec<DecontextRecord> {
    configs
        .iter()
        .map(|cfg| {
            let co = outcome.configs.iter().find(|c| c.retrieval == cfg.name);
            DecontextRecord {
                method: claim.method_id.clone(),
                answer_id: claim.answer_id.clone(),
                sentence_index: claim.sentence_index,
                claim: claim.text.clone(),
                cmax: outcome.cmax.clone(),
                retrieval: cfg.name.clone(),
                ec_supports_c: co.and_then(|c| c.verdicts.ec_supports_c),
                emax_supports_cmax: co.and_then(|c| c.verdicts.emax_supports_cmax),
                ec_supports_cmax: co.and_then(|c| c.verdicts.ec_supports_cmax),
                result_type: co.and_then(|c| c.result_type),
                diagnostic: co.and_then(|c| c.diagnostic.clone()).or_else(|| outcome.diagnostic.clone()),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecontextConfigRow {
    pub retrieval: String,
    pub n: usize,
    /// Percentages of result types 1 through 7 (index 0 is type 1).
    pub pct: [f64; 7],
    /// Sum of the type 1, 2, 4 and 7 percentages.
    pub desirable: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecontextRow {
    pub method: String,
    /// Shared by all configurations, since c_max does not depend on retrieval.
    pub type1_pct: f64,
    pub configs: Vec<DecontextConfigRow>,
}

/// Percentage distribution of result types per method and configuration over
/// records with a known type.
pub fn decontext_report(records: &[DecontextRecord]) -> Vec<DecontextRow> {
    let mut counts: BTreeMap<&str, BTreeMap<&str, [usize; 8]>> = BTreeMap::new();
    for r in records {
        if let Some(t) = r.result_type.filter(|t| (1..=7).contains(t)) {
            counts.entry(&r.method).or_default().entry(&r.retrieval).or_insert([0; 8])[t as usize] += 1;
        }
    }
    counts
        .into_iter()
        .map(|(method, by_cfg)| {
            let configs: Vec<DecontextConfigRow> = by_cfg
                .into_iter()
                .map(|(cfg, c)| {
                    let n: usize = c.iter().sum();
                    let p = |t: usize| pct1(c[t], n);
                    let desirable = ((p(1) + p(2) + p(4) + p(7)) * 10.0).round() / 10.0;
                    DecontextConfigRow { retrieval: cfg.to_string(), n, pct: [p(1), p(2), p(3), p(4), p(5), p(6), p(7)], desirable }
                })
                .collect();
            let type1_pct = configs.first().map_or(0.0, |c| c.pct[0]);
            DecontextRow { method: method.to_string(), type1_pct, configs }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(ec: Option<bool>, emax: Option<bool>, ecm: Option<bool>) -> VerdictShape {
        VerdictShape { already_maximal: false, ec_supports_c: ec, emax_supports_cmax: emax, ec_supports_cmax: ecm }
    }

    #[test]
    fn illegal_shapes_are_contract_errors() {
        let t = Some(true);
        let f = Some(false);
        assert!(classify_result(&shape(t, t, None)).is_err());
        assert!(classify_result(&shape(f, t, t)).is_err());
        assert!(classify_result(&shape(None, t, None)).is_err());
        let mut m = shape(t, t, t);
        m.already_maximal = true;
        assert!(classify_result(&m).is_err());
    }

    #[test]
    fn shared_results_first_writer_wins() {
        let shared = SharedResults::default();
        let key = (SentenceKey::new("a", 0), "c".to_string());
        let mk = |d: &str| ClaimOutcome { cmax: None, configs: vec![], diagnostic: Some(d.into()) };
        let a = shared.get_or_compute(key.clone(), || Ok(mk("first"))).unwrap();
        let b = shared.get_or_compute(key, || Ok(mk("second"))).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.diagnostic.as_deref(), Some("first"));
    }

    fn rec(method: &str, cfg: &str, t: Option<u8>) -> DecontextRecord {
        DecontextRecord {
            method: method.into(),
            answer_id: "a".into(),
            sentence_index: 0,
            claim: "c".into(),
            cmax: None,
            retrieval: cfg.into(),
            ec_supports_c: None,
            emax_supports_cmax: None,
            ec_supports_cmax: None,
            result_type: t,
            diagnostic: None,
        }
    }

    #[test]
    fn all_type_one_is_fully_desirable() {
        let rs: Vec<_> = (0..4).map(|_| rec("m", "google", Some(1))).collect();
        let r = decontext_report(&rs);
        assert_eq!(r[0].type1_pct, 100.0);
        assert_eq!(r[0].configs[0].desirable, 100.0);
    }

    #[test]
    fn unknown_types_are_not_counted() {
        let rs = vec![rec("m", "google", Some(2)), rec("m", "google", None)];
        let r = decontext_report(&rs);
        assert_eq!(r[0].configs[0].n, 1);
        assert_eq!(r[0].configs[0].pct[1], 100.0);
    }
}
