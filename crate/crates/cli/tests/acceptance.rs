//! One PASS/FAIL line per acceptance criterion, each with a pinned runtime limit.
//! Runs without the libtest harness so the lines always reach the terminal.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use claimify::eval::coverage::*;
use claimify::eval::decontext::*;
use claimify::eval::retrieval::RetrievalConfig;
use claimify::eval::Judge;
use claimify::gateway::{Gateway, MockProvider};
use claimify::parse::*;
use claimify::pipeline::{vote, SentenceVerdict, SlotResult, StageConfig};
use claimify::postprocess::{parse_brackets, reinsert, Claim};
use claimify::records::read_jsonl;
use claimify::search::{MockSearch, SearchClient};
use claimify::stats::*;
use claimify::textseg::split_into_sentences;
use claimify::ScoreCard64;
use common::*;
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;
use serde_json::Value;
use statrs::distribution::{ContinuousCDF, Normal};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn ensure(ok: bool, why: impl Into<String>) -> Result<(), String> {
    ok.then_some(()).ok_or_else(|| why.into())
}

fn outcome(r: Result<String, String>) -> Outcome {
    match r {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

// ---- result-type calculus ----

/// Result type read straight off the three verdicts, independent of the library.
fn expected_type(v: &VerdictShape) -> Option<u8> {
    let (t, f) = (Some(true), Some(false));
    if v.already_maximal {
        return (v.ec_supports_c.is_none() && v.emax_supports_cmax.is_none() && v.ec_supports_cmax.is_none()).then_some(1);
    }
    let table = [((t, t, t), 2), ((t, t, f), 3), ((t, f, t), 4), ((t, f, f), 5), ((f, t, None), 6), ((f, f, None), 7)];
    table.iter().find(|(k, _)| *k == (v.ec_supports_c, v.emax_supports_cmax, v.ec_supports_cmax)).map(|(_, t)| *t)
}

fn calculus() -> Outcome {
    outcome((|| {
        let tri = [None, Some(true), Some(false)];
        let mut legal = BTreeSet::new();
        for am in [false, true] {
            for a in tri {
                for b in tri {
                    for c in tri {
                        let v = VerdictShape { already_maximal: am, ec_supports_c: a, emax_supports_cmax: b, ec_supports_cmax: c };
                        match (classify_result(&v), expected_type(&v)) {
                            (Ok(got), Some(want)) if got == want => {
                                legal.insert(got);
                            }
                            (Err(_), None) => {}
                            (got, want) => return Err(format!("{v:?}: got {got:?}, want {want:?}")),
                        }
                    }
                }
            }
        }
        ensure(legal == (1..=7).collect(), format!("legal types {legal:?}"))?;
        let desirable: Vec<u8> = (0..=9).filter(|&t| is_desirable(t)).collect();
        ensure(desirable == [1, 2, 4, 7], format!("desirable {desirable:?}"))?;

        let gw = Gateway::new(Arc::new(MockProvider::new(vec![], true)), None);
        let judge = Judge::new(&gw, "m", 2);
        let search = SearchClient::new(Arc::new(MockSearch { rules: vec![], echo: true }), None);
        let configs = [RetrievalConfig::google(), RetrievalConfig::bing()];
        let texts = ["Marie Curie won the Nobel Prize in 1903.", "She won the Nobel Prize in 1903.", "It orbits Earth.", "They have stripes."];
        let mut records = 0;
        for (i, text) in texts.iter().enumerate() {
            let claim = Claim::new("m", "a", i, text);
            let ctx = ClaimContext { claim: &claim, sentence: text, excerpt: text, question: "Tell me about history", sibling_claims: &[] };
            let outcome = evaluate_claim(&judge, &search, &ctx, &configs, false).map_err(|e| e.to_string())?;
            for r in records_for(&claim, &outcome, &configs) {
                let maximal = r.cmax == Some(CMaxKind::AlreadyMaximal);
                let lazy = if maximal {
                    r.ec_supports_c.is_none() && r.emax_supports_cmax.is_none() && r.ec_supports_cmax.is_none()
                } else {
                    r.ec_supports_cmax.is_some() == (r.ec_supports_c == Some(true))
                };
                ensure(lazy, format!("laziness broken: {r:?}"))?;
                records += 1;
            }
        }
        Ok(format!("54 shapes, 7 legal, {records} constructed records lazy"))
    })())
}

// ---- element confusion mapping and the flag example ----

fn confusion() -> Outcome {
    outcome((|| {
        use ConfusionCell::*;
        use CoverageLabel::*;
        let cases = [(true, Explicit, TP), (true, Implicit, TP), (true, NotCovered, FN), (false, Explicit, FP), (false, Implicit, TN), (false, NotCovered, TN)];
        for (v, l, want) in cases {
            ensure(confusion_cell(v, l) == want, format!("{v} {l:?}"))?;
        }
        // iconic (unverifiable), 50 stars, 13 stripes
        let verifiable = [false, true, true];
        let cells = |labels: [CoverageLabel; 3]| verifiable.iter().zip(labels).map(|(&v, l)| confusion_cell(v, l)).collect::<Vec<_>>();
        let a = Confusion::from_cells(&cells([Explicit, NotCovered, NotCovered]));
        let b = Confusion::from_cells(&cells([NotCovered, Explicit, Explicit]));
        ensure(a == Confusion { tp: 0, tn: 0, fp: 1, fn_: 2 }, format!("A {a:?}"))?;
        ensure(b == Confusion { tp: 2, tn: 1, fp: 0, fn_: 0 }, format!("B {b:?}"))?;
        let fa = ScoreCard64::from_confusion(&a).map_err(|e| e.to_string())?.macro_f1;
        let fb = ScoreCard64::from_confusion(&b).map_err(|e| e.to_string())?.macro_f1;
        ensure(fb > fa, format!("macro F1 A {fa} B {fb}"))?;
        Ok(format!("6 cases; flag A {{FP=1, FN=2}} F1 {fa:.3} < B {{TP=2, TN=1}} F1 {fb:.3}"))
    })())
}

// ---- voting ----

fn voting() -> Outcome {
    outcome((|| {
        let mut runner = TestRunner::new(PropConfig { cases: 2000, failure_persistence: None, ..PropConfig::default() });
        let strategy = (prop::collection::vec(any::<bool>(), 0..=7), 0usize..=7);
        runner
            .run(&strategy, |(outcomes, threshold)| {
                let slots: Vec<SlotResult<usize>> = outcomes.iter().enumerate().map(|(i, &ok)| SlotResult { success: ok, payload: ok.then_some(i) }).collect();
                let successes = outcomes.iter().filter(|&&b| b).count();
                prop_assert_eq!(vote(&slots, threshold).pass, successes >= threshold);
                Ok(())
            })
            .map_err(|e| e.to_string())?;
        for (cfg, n, k) in [(StageConfig::SELECTION, 3, 2), (StageConfig::DISAMBIGUATION, 3, 2), (StageConfig::DECOMPOSITION, 1, 1)] {
            ensure((cfg.completions, cfg.min_successes) == (n, k), format!("defaults {cfg:?}"))?;
            for mask in 0u32..(1 << n) {
                let slots: Vec<SlotResult<()>> = (0..n).map(|i| SlotResult { success: mask >> i & 1 == 1, payload: Some(()) }).collect();
                ensure(vote(&slots, cfg.min_successes).pass == (mask.count_ones() as usize >= k), format!("{n}/{k} mask {mask:b}"))?;
            }
        }
        Ok("2000 random vectors; defaults 3/2, 3/2, 1/1 exhaustive".into())
    })())
}

// ---- statistics ----

fn holm_brute_force(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut reject = vec![false; m];
    for (rank, &i) in order.iter().enumerate() {
        if p[i] * (m - rank) as f64 >= alpha {
            break;
        }
        reject[i] = true;
    }
    reject
}

fn alpha_coincidence(data: &[Vec<Option<u8>>]) -> f64 {
    let k = 8;
    let mut o = vec![vec![0.0f64; k]; k];
    for row in data {
        let vals: Vec<usize> = row.iter().flatten().map(|&v| v as usize).collect();
        let m = vals.len();
        if m < 2 {
            continue;
        }
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    o[vals[i]][vals[j]] += 1.0 / (m - 1) as f64;
                }
            }
        }
    }
    let n_c: Vec<f64> = o.iter().map(|r| r.iter().sum()).collect();
    let n: f64 = n_c.iter().sum();
    let (mut d_o, mut d_e) = (0.0, 0.0);
    for c in 0..k {
        for j in 0..k {
            if c != j {
                d_o += o[c][j];
                d_e += n_c[c] * n_c[j];
            }
        }
    }
    1.0 - (n - 1.0) * d_o / d_e
}

fn statistics() -> Outcome {
    outcome((|| {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let mut worst = 0.0f64;
        let mut pairs = 0;
        while pairs < 100 {
            let (n1, n2) = (rng.gen_range(5..500), rng.gen_range(5..500));
            let (x1, x2) = (rng.gen_range(0..=n1), rng.gen_range(0..=n2));
            let t: ZTest<f64> = two_proportion_z_test(&ProportionPair { x1, n1, x2, n2 }).map_err(|e| e.to_string())?;
            if t.degenerate {
                continue;
            }
            let oracle = 2.0 * normal.sf(t.z.abs());
            worst = worst.max((t.p_value - oracle).abs());
            pairs += 1;
        }
        ensure(worst < 1e-9, format!("z-test p off by {worst:e}"))?;

        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let m = rng.gen_range(1..=8);
            let p: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.3) { rng.gen_range(0.0..0.02) } else { rng.gen::<f64>() }).collect();
            let ours = holm_bonferroni(&p, 0.05).map_err(|e| e.to_string())?;
            ensure(ours.reject == holm_brute_force(&p, 0.05), format!("Holm differs on {p:?}"))?;
        }

        let perfect = vec![vec![Some(0u8), Some(0), None], vec![Some(1), Some(1), Some(1)]];
        ensure(krippendorff_alpha::<f64, u8>(&perfect).map_err(|e| e.to_string())?.alpha == 1.0, "perfect agreement is not 1")?;
        let mut rng = StdRng::seed_from_u64(23);
        let mut checked = 0;
        while checked < 50 {
            let (items, raters, values) = (rng.gen_range(2..12), rng.gen_range(2..6), rng.gen_range(2..5u8));
            let data: Vec<Vec<Option<u8>>> =
                (0..items).map(|_| (0..raters).map(|_| rng.gen_bool(0.75).then(|| rng.gen_range(0..values))).collect()).collect();
            let expected = alpha_coincidence(&data);
            let Ok(ours) = krippendorff_alpha::<f64, u8>(&data) else { continue };
            if !expected.is_finite() {
                continue;
            }
            ensure((ours.alpha - expected).abs() < 1e-6, format!("alpha {} vs {expected} on {data:?}", ours.alpha))?;
            checked += 1;
        }
        Ok(format!("z-test max |dp| {worst:.1e} over 100 pairs; Holm 1000/1000; alpha 50/50 within 1e-6"))
    })())
}

// ---- parser golden files ----

#[derive(Deserialize)]
struct ParserFixture {
    name: String,
    parser: String,
    output: String,
    #[serde(default)]
    sentence: String,
    #[serde(default)]
    n_elements: usize,
    expected: Value,
}

fn run_parser(f: &ParserFixture) -> Result<Value, String> {
    let v = match f.parser.as_str() {
        "selection" => parse_selection(&f.output, &f.sentence).map(serde_json::to_value),
        "disambiguation" => parse_disambiguation(&f.output, &f.sentence).map(serde_json::to_value),
        "decomposition" => parse_decomposition(&f.output).map(serde_json::to_value),
        "cmax" => parse_cmax(&f.output).map(serde_json::to_value),
        "entailment" => parse_entailment(&f.output).map(serde_json::to_value),
        "sentence_validity" => parse_sentence_validity(&f.output).map(serde_json::to_value),
        "claim_validity" => parse_claim_validity(&f.output).map(serde_json::to_value),
        "coverage" => parse_coverage(&f.output, f.n_elements).map(serde_json::to_value),
        other => return Err(format!("unknown parser {other}")),
    };
    v.map_err(|e| format!("{}: {e}", f.name))?.map_err(|e| e.to_string())
}

fn parsers() -> Outcome {
    outcome((|| {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/parser_golden.json");
        let fixtures: Vec<ParserFixture> = serde_json::from_str(&std::fs::read_to_string(path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(fixtures.len() >= 12, format!("only {} fixtures", fixtures.len()))?;
        for f in &fixtures {
            let got = run_parser(f)?;
            ensure(got == f.expected, format!("{}: got {got}", f.name))?;
        }
        let cannot = fixtures.iter().filter(|f| f.output.contains("Cannot be decontextualized")).count();
        ensure(cannot > 0, "no Cannot-be-decontextualized fixture")?;
        let celeb = fixtures.iter().find(|f| f.name == "decomposition_celebrity_brackets").ok_or("celebrity fixture missing")?;
        let claim = parse_decomposition(&celeb.output).map_err(|e| e.to_string())?.remove(0);
        let (core, segs) = parse_brackets(&claim).map_err(|e| e.to_string())?;
        ensure(core == "John has called for peace", format!("core {core:?}"))?;
        let texts: Vec<&str> = segs.iter().map(|s| s.text.as_str()).collect();
        ensure(texts == ["a celebrity", "in the Middle East"], format!("segments {texts:?}"))?;
        ensure(reinsert(&core, &segs) == claim, "reinsertion changed the claim")?;
        Ok(format!("{} fixtures, {cannot} Cannot-be-decontextualized, celebrity brackets exact", fixtures.len()))
    })())
}

// ---- end-to-end determinism ----

fn end_to_end() -> Outcome {
    outcome((|| {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let t = tmp.path();
        let first = run_chain(&t.join("run1"), &t.join("cache1"), "mock").map_err(|e| format!("{e:#}"))?;
        run_chain(&t.join("run2"), &t.join("cache2"), "mock").map_err(|e| format!("{e:#}"))?;
        let replay = run_chain(&t.join("replay"), &t.join("cache1"), "cache-only").map_err(|e| format!("{e:#}"))?;
        if let Some(d) = first_difference(&t.join("run1"), &t.join("run2")) {
            return Err(format!("mock reruns differ: {d}"));
        }
        if let Some(d) = first_difference(&t.join("run1"), &t.join("replay")) {
            return Err(format!("cache-only replay differs: {d}"));
        }
        let sentences: Vec<Value> = read_jsonl(&t.join("run1/sentences.jsonl")).map_err(|e| e.to_string())?;
        ensure(sentences.len() == 20, format!("{} sentences", sentences.len()))?;
        let calls: usize = replay.iter().map(|r| r.gateway.provider_calls + r.search_calls).sum();
        ensure(calls == 0, format!("{calls} network calls in cache-only mode"))?;
        let mock_calls: usize = first.iter().map(|r| r.gateway.provider_calls).sum();
        Ok(format!("20 sentences, {} files identical over 3 runs; {mock_calls} mock calls, 0 in cache-only", jsonl_files(&t.join("run1")).len()))
    })())
}

// ---- segmenter ----

#[derive(Deserialize)]
struct GoldenDoc {
    doc_id: String,
    text: String,
    sentences: Vec<String>,
}

fn segmenter() -> Outcome {
    outcome((|| {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/segmenter_golden.jsonl");
        let docs: Vec<GoldenDoc> = read_jsonl(&path).map_err(|e| e.to_string())?;
        let (mut hit, mut total, mut bullets) = (0, 0, 0);
        for d in &docs {
            let mut pool: HashMap<String, usize> = HashMap::new();
            for s in split_into_sentences(&d.doc_id, &d.text) {
                *pool.entry(s.text).or_default() += 1;
            }
            for g in &d.sentences {
                bullets += usize::from(g.starts_with("- "));
                if let Some(n) = pool.get_mut(g).filter(|n| **n > 0) {
                    *n -= 1;
                    hit += 1;
                }
            }
            total += d.sentences.len();
        }
        ensure(total >= 200 && bullets > 0, format!("corpus has {total} sentences, {bullets} bullets"))?;
        let rate = hit as f64 / total as f64;
        ensure(rate >= 0.95, format!("exact match {hit}/{total}"))?;
        Ok(format!("{hit}/{total} = {:.1}% exact ({bullets} bullet items)", rate * 100.0))
    })())
}

// ---- live smoke test ----

fn live_smoke() -> Outcome {
    let key_var = std::env::var("CLAIMIFY_SMOKE_KEY_ENV").unwrap_or_else(|_| "OPENAI_API_KEY".into());
    if std::env::var(&key_var).map_or(true, |v| v.is_empty()) {
        return Outcome::Skip(format!("no credentials in ${key_var}"));
    }
    outcome((|| {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cfg = tmp.path().join("live.toml");
        let base = std::env::var("CLAIMIFY_SMOKE_BASE_URL").unwrap_or_else(|_| "https://api.openai.com/v1".into());
        std::fs::write(&cfg, format!("[provider]\nbase_url = {base:?}\napi_key_env = {key_var:?}\n")).map_err(|e| e.to_string())?;
        let dir = tmp.path().join("w");
        let ds = fixture("e2e/dataset.jsonl");
        let global = ["--dir", dir.to_str().unwrap(), "--provider", "live", "--config", cfg.to_str().unwrap()];
        claimify(&global, &["extract", "--dataset", ds.to_str().unwrap()]).map_err(|e| format!("{e:#}"))?;
        let verdicts: Vec<SentenceVerdict> = read_jsonl(&dir.join("verdicts.jsonl")).map_err(|e| e.to_string())?;
        let failed = verdicts
            .iter()
            .filter(|v| v.error.is_some() || v.diagnostics.iter().any(|d| d.contains("parse_failed") || d == "decomposition_failed"))
            .count();
        let rate = failed as f64 / verdicts.len() as f64;
        ensure(rate < 0.05, format!("{failed}/{} sentences hit parser failures", verdicts.len()))?;
        Ok(format!("{} sentences schema-valid, parser failures {failed}", verdicts.len()))
    })())
}

fn main() {
    let criteria: [(&str, Check, u64, bool); 8] = [
        ("result-type calculus", calculus, 1_000, true),
        ("element confusion mapping + flag example", confusion, 1_000, true),
        ("stage voting", voting, 5_000, true),
        ("statistics vs oracles", statistics, 10_000, true),
        ("parser golden files", parsers, 1_000, true),
        ("end-to-end determinism", end_to_end, 30_000, true),
        ("segmenter golden corpus", segmenter, 5_000, true),
        ("live smoke test (non-blocking)", live_smoke, 600_000, false),
    ];
    let mut failed = 0;
    for (name, check, limit_ms, blocking) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome::Fail(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let limit = Duration::from_millis(limit_ms);
        let result = match result {
            Outcome::Pass(_) if elapsed > limit => Outcome::Fail(format!("took {elapsed:?}")),
            r => r,
        };
        let (tag, detail) = match &result {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => ("FAIL", d),
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag}  {name}  [{} ms / limit {limit_ms} ms]  {detail}", elapsed.as_millis());
        if blocking && matches!(result, Outcome::Fail(_)) {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
