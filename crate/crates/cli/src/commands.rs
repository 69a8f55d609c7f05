//! Subcommand bodies. Each reads its inputs, fans work out on the session's
//! pool and writes manifest-headed JSON-Lines files into the work directory.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use claimify::eval::coverage::{
    confusion_cell, consistency_filter, element_level_scores, extract_elements, label_coverage, sentence_level_scores, Confusion,
    ConfusionCell, CoverageLabel, Element,
};
use claimify::eval::decontext::{decontext_report, evaluate_claim, is_desirable, records_for, ClaimContext, DecontextRecord, SharedResults};
use claimify::eval::entailment::{classify_entailment, entailment_report, EntailmentLabel, EntailmentVerdict};
use claimify::eval::Judge;
use claimify::gateway::{Attempted, Gateway};
use claimify::pipeline::{run_pipeline, SentenceLabel, SentenceVerdict};
use claimify::postprocess::{
    build_claim_sample, build_sentence_sample, dedupe, detect_invalid_claim, detect_invalid_sentence, Claim, EvalKind, ReasonClass,
    SampleInputs,
};
use claimify::records::{read_jsonl, ClaimKey, DatasetRecord, SentenceKey};
use claimify::stats::{aggregate_tag_strings, krippendorff_alpha, pairwise_comparisons, ComparisonRow};
use claimify::textseg::{split_into_sentences, ContextSpec, SentenceRecord};
use claimify::{AgreementReport64, ScoreCard64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifest::{write_jsonl, Manifest};
use crate::{ClaimArgs, CoverageArgs, GoldArgs, RunSummary, Session};

pub struct Answer {
    pub question: String,
    pub answer: String,
    pub sentences: Vec<SentenceRecord>,
}

/// Dataset answers keyed by question id, plus the file order.
pub struct Dataset {
    pub order: Vec<String>,
    pub answers: HashMap<String, Answer>,
}

impl Dataset {
    pub fn load(path: &Path) -> Result<Self> {
        let records: Vec<DatasetRecord> = read_jsonl(path).with_context(|| format!("dataset {}", path.display()))?;
        let mut order = Vec::with_capacity(records.len());
        let mut answers = HashMap::new();
        for (i, r) in records.into_iter().enumerate() {
            let sentences = split_into_sentences(&r.question_id, &r.answer);
            if answers.insert(r.question_id.clone(), Answer { question: r.question, answer: r.answer, sentences }).is_some() {
                bail!("{}: record {} repeats question_id {:?}", path.display(), i + 1, r.question_id);
            }
            order.push(r.question_id);
        }
        Ok(Dataset { order, answers })
    }

    fn sentence(&self, key: &SentenceKey) -> Option<(&Answer, &SentenceRecord)> {
        let a = self.answers.get(&key.answer_id)?;
        Some((a, a.sentences.get(key.sentence_index)?))
    }

    fn keys(&self) -> Vec<SentenceKey> {
        self.order
            .iter()
            .flat_map(|id| self.answers[id].sentences.iter().map(|s| SentenceKey::new(&s.answer_id, s.sentence_index)))
            .collect()
    }

    /// The sentence rendered inside its context window.
    fn excerpt(&self, key: &SentenceKey, spec: ContextSpec) -> Result<String> {
        let (a, s) = self.sentence(key).ok_or_else(|| anyhow!("unknown sentence {key:?}"))?;
        Ok(spec.window(&a.sentences, key.sentence_index)?.render(&s.text))
    }
}

/// Claim input row. Extra fields are ignored, so both pipeline output and
/// third-party claim files load.
#[derive(Deserialize)]
struct ClaimIn {
    method_id: String,
    answer_id: String,
    sentence_index: usize,
    text: String,
}

fn load_claims(paths: &[PathBuf], dataset: &Dataset) -> Result<Vec<Claim>> {
    let mut claims = Vec::new();
    for path in paths {
        let rows: Vec<ClaimIn> = read_jsonl(path).with_context(|| format!("claims {}", path.display()))?;
        for (i, r) in rows.into_iter().enumerate() {
            let key = SentenceKey::new(&r.answer_id, r.sentence_index);
            if dataset.sentence(&key).is_none() {
                bail!("{}: claim {} points at {}#{} which is not in the dataset", path.display(), i + 1, r.answer_id, r.sentence_index);
            }
            claims.push(Claim::new(&r.method_id, &r.answer_id, r.sentence_index, &r.text));
        }
    }
    Ok(dedupe(claims))
}

fn parsed<T>(a: Attempted<T>) -> Option<T> {
    match a {
        Attempted::Parsed { value, .. } => Some(value),
        Attempted::Failure { .. } => None,
    }
}

struct Out<'a> {
    session: &'a Session,
    manifest: Manifest,
    provider_ids: Vec<String>,
    summary: RunSummary,
}

impl<'a> Out<'a> {
    fn new(session: &'a Session, command: &str, model_id: &str) -> Self {
        Out {
            session,
            manifest: Manifest::new(command, &session.config_digest, model_id),
            provider_ids: Vec::new(),
            summary: RunSummary { command: command.into(), ..Default::default() },
        }
    }

    fn input(&mut self, name: &str, path: &Path) -> Result<()> {
        self.manifest.input(name, path)
    }

    fn write<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = write_jsonl(&self.session.dir, name, rows, &self.manifest, &self.provider_ids)?;
        self.summary.outputs.push(p);
        Ok(())
    }

    fn finish(mut self, gw: Option<&Gateway>, search_calls: usize) -> RunSummary {
        if let Some(gw) = gw {
            self.summary.gateway = gw.stats();
        }
        self.summary.search_calls = search_calls;
        self.summary
    }
}

fn claim_inputs(out: &mut Out, args: &ClaimArgs) -> Result<()> {
    out.input("dataset", &args.dataset)?;
    for (i, p) in args.claims.iter().enumerate() {
        out.input(&format!("claims.{i}"), p)?;
    }
    Ok(())
}

pub fn extract(session: &Session, dataset: &Path) -> Result<RunSummary> {
    let cfg = &session.cfg.pipeline;
    let data = Dataset::load(dataset)?;
    let gw = session.gateway()?;
    let mut out = Out::new(session, "extract", &cfg.model_id);
    out.input("dataset", dataset)?;
    out.provider_ids = vec![gw.provider_id().to_string()];

    let verdicts: Vec<Vec<SentenceVerdict>> = session.pool.install(|| {
        data.order
            .par_iter()
            .map(|id| run_pipeline(&gw, id, &data.answers[id].question, &data.answers[id].answer, cfg))
            .collect::<claimify::Result<_>>()
    })?;
    let sentences: Vec<&SentenceRecord> = data.order.iter().flat_map(|id| &data.answers[id].sentences).collect();
    let verdicts: Vec<SentenceVerdict> = verdicts.into_iter().flatten().collect();
    let claims: Vec<&Claim> = verdicts.iter().flat_map(|v| &v.claims).collect();
    let errors = verdicts.iter().filter(|v| v.error.is_some()).count();
    if errors > 0 {
        log::warn!("{errors} sentences stopped on provider errors; rerun to resume from cache");
    }
    out.write("sentences.jsonl", &sentences)?;
    out.write("verdicts.jsonl", &verdicts)?;
    out.write("claims.jsonl", &claims)?;
    Ok(out.finish(Some(&gw), 0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentenceValidityRow {
    pub answer_id: String,
    pub sentence_index: usize,
    pub sentence: String,
    /// `None` when the judge output never parsed.
    pub valid: Option<bool>,
    pub reason_class: Option<ReasonClass>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClaimValidityRow {
    pub claim: String,
    pub valid: Option<bool>,
    pub reason_class: Option<ReasonClass>,
}

pub fn validate(session: &Session, args: &ClaimArgs) -> Result<RunSummary> {
    let eval = &session.cfg.eval;
    let data = Dataset::load(&args.dataset)?;
    let claims = load_claims(&args.claims, &data)?;
    let gw = session.gateway()?;
    let judge = Judge::new(&gw, &eval.model_id, eval.max_retries);
    let mut out = Out::new(session, "validate", &eval.model_id);
    claim_inputs(&mut out, args)?;
    out.provider_ids = vec![gw.provider_id().to_string()];

    let keys = data.keys();
    let texts: Vec<&String> = claims.iter().map(|c| &c.text).collect::<BTreeSet<_>>().into_iter().collect();
    let (sentence_rows, claim_rows) = session.pool.install(|| -> Result<_> {
        let s = keys
            .par_iter()
            .map(|k| {
                let (a, rec) = data.sentence(k).expect("key from dataset");
                let excerpt = data.excerpt(k, ContextSpec::STANDARD)?;
                let v = parsed(detect_invalid_sentence(&judge, &rec.text, &excerpt, &a.question)?);
                Ok(SentenceValidityRow {
                    answer_id: k.answer_id.clone(),
                    sentence_index: k.sentence_index,
                    sentence: rec.text.clone(),
                    valid: v.map(|v| v.valid),
                    reason_class: v.map(|v| v.reason_class),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let c = texts
            .par_iter()
            .map(|t| {
                let v = parsed(detect_invalid_claim(&judge, t)?);
                Ok(ClaimValidityRow { claim: t.to_string(), valid: v.map(|v| v.valid), reason_class: v.map(|v| v.reason_class) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((s, c))
    })?;
    out.write("sentence_validity.jsonl", &sentence_rows)?;
    out.write("claim_validity.jsonl", &claim_rows)?;
    Ok(out.finish(Some(&gw), 0))
}

fn work_file(session: &Session, name: &str, hint: &str) -> Result<PathBuf> {
    let p = session.dir.join(name);
    if !p.exists() {
        bail!("{} is missing; run `{hint}` first", p.display());
    }
    Ok(p)
}

fn validity_inputs(session: &Session, out: &mut Out) -> Result<SampleInputs> {
    let sp = work_file(session, "sentence_validity.jsonl", "claimify validate")?;
    let cp = work_file(session, "claim_validity.jsonl", "claimify validate")?;
    out.input("sentence_validity", &sp)?;
    out.input("claim_validity", &cp)?;
    let sentences: Vec<SentenceValidityRow> = read_jsonl(&sp)?;
    let claims: Vec<ClaimValidityRow> = read_jsonl(&cp)?;
    Ok(SampleInputs {
        sentence_validity: Some(sentences.into_iter().map(|r| (SentenceKey::new(&r.answer_id, r.sentence_index), r.valid)).collect()),
        claim_validity: Some(claims.into_iter().map(|r| (r.claim, r.valid)).collect()),
        ..Default::default()
    })
}

/// Position of each claim among the claims of its method and sentence.
fn ordinals(claims: &[Claim]) -> HashMap<ClaimKey, usize> {
    let mut next: HashMap<(String, SentenceKey), usize> = HashMap::new();
    claims
        .iter()
        .map(|c| {
            let n = next.entry((c.method_id.clone(), c.sentence_key())).or_default();
            *n += 1;
            (c.key(), *n - 1)
        })
        .collect()
}

pub fn entailment(session: &Session, args: &ClaimArgs) -> Result<RunSummary> {
    let eval = &session.cfg.eval;
    let data = Dataset::load(&args.dataset)?;
    let claims = load_claims(&args.claims, &data)?;
    let gw = session.gateway()?;
    let judge = Judge::new(&gw, &eval.model_id, eval.max_retries);
    let mut out = Out::new(session, "evaluate entailment", &eval.model_id);
    claim_inputs(&mut out, args)?;
    let inputs = validity_inputs(session, &mut out)?;
    out.provider_ids = vec![gw.provider_id().to_string()];

    let sample = build_claim_sample(EvalKind::Entailment, &claims, &inputs)?;
    let ordinal = ordinals(&claims);
    let verdicts = session.pool.install(|| {
        sample
            .par_iter()
            .filter(|e| e.included())
            .map(|e| {
                let c = &e.item;
                let sk = c.sentence_key();
                let (a, rec) = data.sentence(&sk).expect("checked on load");
                let excerpt = data.excerpt(&sk, ContextSpec::for_method(&c.method_id))?;
                let verdict = parsed(classify_entailment(&judge, c, &rec.text, &excerpt, &a.question)?);
                Ok(EntailmentVerdict {
                    method: c.method_id.clone(),
                    answer_id: c.answer_id.clone(),
                    sentence_index: c.sentence_index,
                    claim_ordinal: ordinal[&c.key()],
                    claim: c.text.clone(),
                    verdict,
                    transcript: None,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    out.write("entailment_sample.jsonl", &sample)?;
    out.write("entailment.jsonl", &verdicts)?;
    Ok(out.finish(Some(&gw), 0))
}

/// Gold sentence label: a boolean, or the annotators' tags to aggregate.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldRow {
    pub answer_id: String,
    pub sentence_index: usize,
    #[serde(default)]
    pub verifiable: Option<bool>,
    #[serde(default)]
    pub tags: Option<Vec<String>>,
}

fn load_gold(path: &Path) -> Result<HashMap<SentenceKey, bool>> {
    let rows: Vec<GoldRow> = read_jsonl(path).with_context(|| format!("gold labels {}", path.display()))?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let label = match (r.verifiable, &r.tags) {
                (Some(v), None) => v,
                (None, Some(tags)) => {
                    let tags: Vec<&str> = tags.iter().map(String::as_str).collect();
                    aggregate_tag_strings(&tags).with_context(|| format!("{}: row {}", path.display(), i + 1))?.contains
                }
                _ => bail!("{}: row {} needs exactly one of `verifiable` or `tags`", path.display(), i + 1),
            };
            Ok((SentenceKey::new(&r.answer_id, r.sentence_index), label))
        })
        .collect()
}

fn claims_by_sentence(claims: &[Claim]) -> HashMap<(&str, SentenceKey), Vec<String>> {
    let mut map: HashMap<(&str, SentenceKey), Vec<String>> = HashMap::new();
    for c in claims {
        map.entry((c.method_id.as_str(), c.sentence_key())).or_default().push(c.text.clone());
    }
    map
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementRow {
    pub answer_id: String,
    pub sentence_index: usize,
    pub elements: Option<Vec<Element>>,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentenceCoverageRow {
    pub method: String,
    pub answer_id: String,
    pub sentence_index: usize,
    /// The method extracted at least one claim.
    pub predicted: bool,
    pub gold: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementCoverageRow {
    pub method: String,
    pub answer_id: String,
    pub sentence_index: usize,
    pub labels: Option<Vec<Option<CoverageLabel>>>,
    pub cells: Vec<Option<ConfusionCell>>,
}

pub fn coverage(session: &Session, args: &CoverageArgs) -> Result<RunSummary> {
    let eval = &session.cfg.eval;
    let base = &args.gold.base;
    let data = Dataset::load(&base.dataset)?;
    let claims = load_claims(&base.claims, &data)?;
    let gold = load_gold(&args.gold.gold)?;
    let gw = session.gateway()?;
    let judge = Judge::new(&gw, &eval.model_id, eval.max_retries);
    let mut out = Out::new(session, "evaluate coverage", &eval.model_id);
    claim_inputs(&mut out, base)?;
    out.input("gold", &args.gold.gold)?;
    let mut inputs = validity_inputs(session, &mut out)?;
    let verdict_path = args.verdicts.clone().or_else(|| Some(session.dir.join("verdicts.jsonl")).filter(|p| p.exists()));
    inputs.cannot_disambiguate = Some(match &verdict_path {
        Some(p) => {
            out.input("verdicts", p)?;
            let verdicts: Vec<SentenceVerdict> = read_jsonl(p)?;
            verdicts
                .into_iter()
                .filter(|v| v.label == SentenceLabel::CannotBeDisambiguated)
                .map(|v| SentenceKey::new(&v.answer_id, v.sentence_index))
                .collect()
        }
        None => {
            log::warn!("no extraction verdicts; no sentence is excluded as ambiguous");
            HashSet::new()
        }
    });
    out.provider_ids = vec![gw.provider_id().to_string()];

    let sample = build_sentence_sample(EvalKind::CoverageSentence, &data.keys(), &inputs)?;
    let labelled: Vec<&SentenceKey> = sample.iter().filter(|e| e.included()).map(|e| &e.item).filter(|k| gold.contains_key(*k)).collect();
    let methods: BTreeSet<&str> = claims.iter().map(|c| c.method_id.as_str()).collect();
    let by_sentence = claims_by_sentence(&claims);
    let has_claims = |m: &str, k: &SentenceKey| by_sentence.get(&(m, k.clone())).is_some_and(|v| !v.is_empty());

    let sentence_rows: Vec<SentenceCoverageRow> = methods
        .iter()
        .flat_map(|m| {
            labelled.iter().map(|k| SentenceCoverageRow {
                method: m.to_string(),
                answer_id: k.answer_id.clone(),
                sentence_index: k.sentence_index,
                predicted: has_claims(m, k),
                gold: gold[*k],
            })
        })
        .collect();

    let extracted: Vec<(SentenceKey, Option<Vec<Element>>)> = session.pool.install(|| {
        labelled
            .par_iter()
            .map(|k| {
                let (a, rec) = data.sentence(k).expect("key from dataset");
                let excerpt = data.excerpt(k, ContextSpec::STANDARD)?;
                Ok(((*k).clone(), parsed(extract_elements(&judge, &rec.text, &excerpt, &a.question)?)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let parsed_elements: Vec<(SentenceKey, Vec<Element>)> =
        extracted.iter().filter_map(|(k, e)| e.clone().map(|e| (k.clone(), e))).collect();
    let consistent: HashSet<SentenceKey> = consistency_filter(&parsed_elements, &gold).into_iter().collect();
    let element_rows: Vec<ElementRow> = extracted
        .iter()
        .map(|(k, e)| ElementRow {
            answer_id: k.answer_id.clone(),
            sentence_index: k.sentence_index,
            elements: e.clone(),
            consistent: consistent.contains(k),
        })
        .collect();

    let jobs: Vec<(&str, &SentenceKey, &Vec<Element>)> = methods
        .iter()
        .flat_map(|m| parsed_elements.iter().filter(|(k, _)| consistent.contains(k)).map(move |(k, e)| (*m, k, e)))
        .collect();
    let coverage_rows = session.pool.install(|| {
        jobs.par_iter()
            .map(|&(m, k, elements)| {
                let (a, _) = data.sentence(k).expect("key from dataset");
                let excerpt = data.excerpt(k, ContextSpec::STANDARD)?;
                let own = by_sentence.get(&(m, k.clone())).cloned().unwrap_or_default();
                let labels = parsed(label_coverage(&judge, elements, &own, &excerpt, &a.question)?);
                let cells = match &labels {
                    Some(ls) => elements.iter().zip(ls).map(|(e, l)| l.map(|l| confusion_cell(e.verifiable, l))).collect(),
                    None => vec![None; elements.len()],
                };
                Ok(ElementCoverageRow { method: m.to_string(), answer_id: k.answer_id.clone(), sentence_index: k.sentence_index, labels, cells })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    out.write("coverage_sample.jsonl", &sample)?;
    out.write("elements.jsonl", &element_rows)?;
    out.write("coverage_sentences.jsonl", &sentence_rows)?;
    out.write("coverage_elements.jsonl", &coverage_rows)?;
    Ok(out.finish(Some(&gw), 0))
}

pub fn decontext(session: &Session, args: &GoldArgs) -> Result<RunSummary> {
    let eval = &session.cfg.eval;
    let data = Dataset::load(&args.base.dataset)?;
    let claims = load_claims(&args.base.claims, &data)?;
    let gw = session.gateway()?;
    let search = session.search()?;
    let judge = Judge::new(&gw, &eval.model_id, eval.max_retries);
    let mut out = Out::new(session, "evaluate decontext", &eval.model_id);
    claim_inputs(&mut out, &args.base)?;
    out.input("gold", &args.gold)?;
    let mut inputs = validity_inputs(session, &mut out)?;
    let ep = work_file(session, "entailment.jsonl", "claimify evaluate entailment")?;
    out.input("entailment", &ep)?;
    let entailed: Vec<EntailmentVerdict> = read_jsonl(&ep)?;
    inputs.entailment = Some(
        entailed
            .into_iter()
            .map(|v| {
                let key = ClaimKey { method_id: v.method, answer_id: v.answer_id, sentence_index: v.sentence_index, text: v.claim };
                (key, v.verdict.map(|l| l == EntailmentLabel::Entailed))
            })
            .collect(),
    );
    inputs.gold_verifiable = Some(load_gold(&args.gold)?);
    out.provider_ids = vec![gw.provider_id().to_string(), search.provider_id()];

    let sample = build_claim_sample(EvalKind::Decontext, &claims, &inputs)?;
    let by_sentence = claims_by_sentence(&claims);
    let shared = SharedResults::default();
    let configs = &eval.retrieval;
    let records: Vec<Vec<DecontextRecord>> = session.pool.install(|| {
        sample
            .par_iter()
            .filter(|e| e.included())
            .map(|e| {
                let c = &e.item;
                let sk = c.sentence_key();
                let (a, rec) = data.sentence(&sk).expect("checked on load");
                let excerpt = data.excerpt(&sk, ContextSpec::STANDARD)?;
                let siblings: Vec<String> = by_sentence[&(c.method_id.as_str(), sk.clone())].iter().filter(|t| **t != c.text).cloned().collect();
                let ctx = ClaimContext { claim: c, sentence: &rec.text, excerpt: &excerpt, question: &a.question, sibling_claims: &siblings };
                let outcome = shared.get_or_compute((sk, c.text.clone()), || evaluate_claim(&judge, &search, &ctx, configs, false))?;
                Ok(records_for(c, &outcome, configs))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let records: Vec<DecontextRecord> = records.into_iter().flatten().collect();
    out.write("decontext_sample.jsonl", &sample)?;
    out.write("decontext.jsonl", &records)?;
    let calls = search.provider_calls();
    Ok(out.finish(Some(&gw), calls))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReportRow {
    pub method: String,
    pub n_sentences: usize,
    pub sentence: ScoreCard64,
    pub n_elements: usize,
    pub element: Option<ScoreCard64>,
}

fn optional_input<T: serde::de::DeserializeOwned>(session: &Session, out: &mut Out, name: &str) -> Result<Option<Vec<T>>> {
    let p = session.dir.join(name);
    if !p.exists() {
        return Ok(None);
    }
    out.input(name, &p)?;
    Ok(Some(read_jsonl(&p)?))
}

fn accuracy_counts(c: &Confusion) -> (usize, usize) {
    (c.tp + c.tn, c.total())
}

pub fn report(session: &Session) -> Result<RunSummary> {
    let alpha = session.cfg.eval.alpha;
    let mut out = Out::new(session, "report", &session.cfg.eval.model_id);
    let entailment: Option<Vec<EntailmentVerdict>> = optional_input(session, &mut out, "entailment.jsonl")?;
    let sentences: Option<Vec<SentenceCoverageRow>> = optional_input(session, &mut out, "coverage_sentences.jsonl")?;
    let elements: Option<Vec<ElementCoverageRow>> = optional_input(session, &mut out, "coverage_elements.jsonl")?;
    let decontext: Option<Vec<DecontextRecord>> = optional_input(session, &mut out, "decontext.jsonl")?;
    if entailment.is_none() && sentences.is_none() && decontext.is_none() {
        bail!("no evaluation outputs in {}", session.dir.display());
    }
    let mut comparisons: Vec<ComparisonRow> = Vec::new();

    if let Some(v) = &entailment {
        let rows = entailment_report(v);
        let groups: Vec<(String, usize, usize)> = rows.iter().map(|r| (r.method.clone(), r.n_entailed, r.n_claims)).collect();
        comparisons.extend(pairwise_comparisons("entailment", "entailed", &groups, alpha)?);
        out.write("report_entailment.jsonl", &rows)?;
    }

    if let Some(s) = &sentences {
        let mut per_method: BTreeMap<&str, (Vec<bool>, Vec<bool>)> = BTreeMap::new();
        for r in s {
            let e = per_method.entry(&r.method).or_default();
            e.0.push(r.predicted);
            e.1.push(r.gold);
        }
        let mut cells: BTreeMap<&str, Vec<ConfusionCell>> = BTreeMap::new();
        for r in elements.iter().flatten() {
            cells.entry(&r.method).or_default().extend(r.cells.iter().flatten());
        }
        let mut rows = Vec::new();
        let (mut sent_groups, mut elem_groups) = (Vec::new(), Vec::new());
        for (m, (pred, gold)) in &per_method {
            let sc = claimify::eval::coverage::sentence_confusion(pred, gold)?;
            sent_groups.push((m.to_string(), accuracy_counts(&sc).0, accuracy_counts(&sc).1));
            let mc = cells.get(m).filter(|c| !c.is_empty());
            if let Some(c) = mc {
                let (ok, n) = accuracy_counts(&Confusion::from_cells(c));
                elem_groups.push((m.to_string(), ok, n));
            }
            rows.push(CoverageReportRow {
                method: m.to_string(),
                n_sentences: pred.len(),
                sentence: sentence_level_scores(pred, gold)?,
                n_elements: mc.map_or(0, Vec::len),
                element: mc.map(|c| element_level_scores(c)).transpose()?,
            });
        }
        comparisons.extend(pairwise_comparisons("sentence_accuracy", "accuracy", &sent_groups, alpha)?);
        comparisons.extend(pairwise_comparisons("element_accuracy", "accuracy", &elem_groups, alpha)?);
        out.write("report_coverage.jsonl", &rows)?;
    }

    if let Some(d) = &decontext {
        let rows = decontext_report(d);
        let mut groups: BTreeMap<&str, BTreeMap<&str, (usize, usize)>> = BTreeMap::new();
        for r in d {
            if let Some(t) = r.result_type {
                let g = groups.entry(&r.retrieval).or_default().entry(&r.method).or_default();
                g.0 += usize::from(is_desirable(t));
                g.1 += 1;
            }
        }
        for (retrieval, by_method) in groups {
            let g: Vec<(String, usize, usize)> = by_method.into_iter().map(|(m, (x, n))| (m.to_string(), x, n)).collect();
            comparisons.extend(pairwise_comparisons(&format!("desirable:{retrieval}"), "desirable", &g, alpha)?);
        }
        out.write("report_decontext.jsonl", &rows)?;
    }

    out.write("comparisons.jsonl", &comparisons)?;
    Ok(out.finish(None, 0))
}

/// One annotated item; `labels[j]` is annotator j's label, null when absent.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRow {
    pub item_id: String,
    pub labels: Vec<Option<String>>,
}

pub fn agreement(session: &Session, annotations: &Path) -> Result<RunSummary> {
    let rows: Vec<AnnotationRow> = read_jsonl(annotations).with_context(|| format!("annotations {}", annotations.display()))?;
    let matrix: Vec<Vec<Option<String>>> = rows.into_iter().map(|r| r.labels).collect();
    let report: AgreementReport64 = krippendorff_alpha(&matrix)?;
    let mut out = Out::new(session, "agreement", "");
    out.input("annotations", annotations)?;
    out.write("agreement.jsonl", &[report])?;
    Ok(out.finish(None, 0))
}
