use std::collections::HashSet;

use claimify::eval::coverage::{confusion_cell, element_level_scores, ConfusionCell, CoverageLabel};
use claimify::pipeline::{vote, SlotResult, StageConfig};
use claimify::postprocess::*;
use claimify::records::SentenceKey;
use claimify::textseg::{build_context, reconstruct, split_into_sentences, ELLIPSIS};
use claimify::ScoreCard64;
use proptest::prelude::*;

fn answer_text() -> impl Strategy<Value = String> {
    let word = prop::sample::select(vec![
        "The", "cat", "sat", "Dr.", "U.S.", "3.5", "e.g.", "John", "F.", "Kennedy", "left", "it", "works", "\"Yes.\"", "(see",
        "above)", "- item", "1.", "Why?", "Wow!", "ok", "...", "[1]", "**bold**", "é", "naïve",
    ]);
    let sep = prop::sample::select(vec![" ", " ", " ", ". ", "! ", "? ", "\n", "\n\n", "  ", "\t", ".\n"]);
    prop::collection::vec((word, sep), 0..40).prop_map(|parts| parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
}

fn claim_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "[a-zA-Z]{1,6}".prop_map(|s| s),
        "[a-z ]{1,8}".prop_map(|s| format!("[{s}]")),
        Just(" ".to_string()),
    ];
    prop::collection::vec(piece, 1..8).prop_map(|v| v.concat())
}

proptest! {
    #[test]
    fn segmentation_round_trips(text in answer_text()) {
        let s = split_into_sentences("a", &text);
        prop_assert_eq!(reconstruct(&s), text);
    }

    #[test]
    fn spans_are_ordered_trimmed_and_indexed(text in answer_text()) {
        let s = split_into_sentences("a", &text);
        let mut offset = 0usize;
        let mut last_paragraph = 0usize;
        for (i, r) in s.iter().enumerate() {
            prop_assert_eq!(r.sentence_index, i);
            prop_assert!(!r.text.is_empty());
            prop_assert_eq!(r.text.trim(), r.text.as_str());
            prop_assert!(!r.text.contains('\n'));
            prop_assert!(r.paragraph_index >= last_paragraph);
            last_paragraph = r.paragraph_index;
            offset += r.leading.len();
            prop_assert_eq!(&text[offset..offset + r.text.len()], r.text.as_str());
            offset += r.text.len();
        }
    }

    #[test]
    fn window_bounds(text in answer_text(), p in 0usize..7, f in 0usize..7, pick in 0usize..100) {
        let s = split_into_sentences("a", &text);
        prop_assume!(!s.is_empty());
        let i = pick % s.len();
        let w = build_context(&s, i, p, f).unwrap();
        let before: Vec<String> = s[i.saturating_sub(p)..i].iter().map(|r| r.text.clone()).collect();
        let after: Vec<String> = s[i + 1..(i + 1 + f).min(s.len())].iter().map(|r| r.text.clone()).collect();
        prop_assert_eq!(&w.preceding, &before);
        prop_assert_eq!(&w.following, &after);
        prop_assert_eq!(w.truncated_before, i > p);
        prop_assert_eq!(w.truncated_after, i + f + 1 < s.len());
        let rendered = w.render(&s[i].text);
        prop_assert_eq!(rendered.starts_with(ELLIPSIS), w.truncated_before);
        prop_assert_eq!(rendered.ends_with(ELLIPSIS), w.truncated_after);
        prop_assert!(rendered.contains(&s[i].text));
        prop_assert!(build_context(&s, s.len(), p, f).is_err());
    }

    #[test]
    fn brackets_reinsert_exactly(text in claim_text()) {
        let (core, segs) = parse_brackets(&text).unwrap();
        prop_assert!(!core.contains('[') && !core.contains(']'));
        prop_assert_eq!(reinsert(&core, &segs), text);
    }

    #[test]
    fn dedupe_is_idempotent_and_keeps_first(texts in prop::collection::vec(prop::sample::select(vec!["A b", " A b ", "C d", "Cafe\u{301}", "Caf\u{e9}", "E"]), 0..12), methods in prop::collection::vec(0usize..2, 12)) {
        let claims: Vec<Claim> = texts.iter().enumerate().map(|(i, t)| Claim::new(["m1", "m2"][methods[i]], "a", i % 2, t)).collect();
        let once = dedupe(claims.clone());
        prop_assert_eq!(dedupe(once.clone()), once.clone());
        let keys: HashSet<(String, usize, String)> = once.iter().map(|c| (c.method_id.clone(), c.sentence_index, c.text.clone())).collect();
        prop_assert_eq!(keys.len(), once.len());
        // survivors appear in their original order
        let positions: Vec<usize> = once.iter().map(|c| claims.iter().position(|o| o == c).unwrap()).collect();
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn stricter_judgments_never_grow_the_sample(
        verdicts in prop::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 1..15),
        flips in prop::collection::vec(any::<bool>(), 15),
        blocked in prop::collection::vec(any::<bool>(), 15),
    ) {
        let claims: Vec<Claim> = (0..verdicts.len()).map(|i| Claim::new("m", "a", i, &format!("claim {i}"))).collect();
        let keys: Vec<SentenceKey> = claims.iter().map(Claim::sentence_key).collect();
        let inputs = |strict: bool| {
            let flip = |i: usize, v: bool| if strict && flips[i] { false } else { v };
            SampleInputs {
                sentence_validity: Some(claims.iter().enumerate().map(|(i, c)| (c.sentence_key(), Some(flip(i, verdicts[i].0)))).collect()),
                claim_validity: Some(claims.iter().enumerate().map(|(i, c)| (c.text.clone(), Some(verdicts[i].1))).collect()),
                cannot_disambiguate: Some(keys.iter().enumerate().filter(|(i, _)| blocked[*i] && (strict || *i % 2 == 0)).map(|(_, k)| k.clone()).collect()),
                entailment: Some(claims.iter().enumerate().map(|(i, c)| (c.key(), Some(flip(i, verdicts[i].2)))).collect()),
                gold_verifiable: Some(keys.iter().map(|k| (k.clone(), true)).collect()),
            }
        };
        let (loose, strict) = (inputs(false), inputs(true));
        for kind in [EvalKind::Entailment, EvalKind::Decontext] {
            let a: HashSet<usize> = build_claim_sample(kind, &claims, &loose).unwrap().iter().filter(|e| e.included()).map(|e| e.item.sentence_index).collect();
            let b: HashSet<usize> = build_claim_sample(kind, &claims, &strict).unwrap().iter().filter(|e| e.included()).map(|e| e.item.sentence_index).collect();
            prop_assert!(b.is_subset(&a));
        }
        for kind in [EvalKind::CoverageSentence, EvalKind::CoverageElement] {
            let a: HashSet<SentenceKey> = build_sentence_sample(kind, &keys, &loose).unwrap().into_iter().filter(|e| e.included()).map(|e| e.item).collect();
            let b: HashSet<SentenceKey> = build_sentence_sample(kind, &keys, &strict).unwrap().into_iter().filter(|e| e.included()).map(|e| e.item).collect();
            prop_assert!(b.is_subset(&a));
        }
    }

    #[test]
    fn scorecard_matches_brute_force(items in prop::collection::vec((any::<bool>(), 0u8..3), 1..40)) {
        let label = |k: u8| [CoverageLabel::NotCovered, CoverageLabel::Implicit, CoverageLabel::Explicit][k as usize];
        let cells: Vec<ConfusionCell> = items.iter().map(|&(v, k)| confusion_cell(v, label(k))).collect();
        let ours: ScoreCard64 = element_level_scores(&cells).unwrap();
        // brute force: "predicted verifiable" means counted as covered for
        // verifiable elements and explicitly covered for unverifiable ones
        let predicted: Vec<bool> = items.iter().map(|&(v, k)| if v { k > 0 } else { k == 2 }).collect();
        let gold: Vec<bool> = items.iter().map(|&(v, _)| v).collect();
        let count = |g: bool, p: bool| gold.iter().zip(&predicted).filter(|(a, b)| **a == g && **b == p).count() as f64;
        let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
        let f1 = |p: f64, r: f64| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        let (tp, tn, fp, fnn) = (count(true, true), count(false, false), count(false, true), count(true, false));
        let (pv, rv, puv, ruv) = (div(tp, tp + fp), div(tp, tp + fnn), div(tn, tn + fnn), div(tn, tn + fp));
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        prop_assert!(close(ours.accuracy, (tp + tn) / items.len() as f64));
        prop_assert!(close(ours.precision_v, pv) && close(ours.recall_v, rv));
        prop_assert!(close(ours.precision_uv, puv) && close(ours.recall_uv, ruv));
        prop_assert!(close(ours.macro_f1, (f1(pv, rv) + f1(puv, ruv)) / 2.0));
        let ours32 = element_level_scores::<f32>(&cells).unwrap();
        prop_assert!((ours32.macro_f1 as f64 - ours.macro_f1).abs() < 1e-5);
    }

    #[test]
    fn vote_passes_iff_enough_successes(outcomes in prop::collection::vec(any::<bool>(), 0..=7), threshold in 0usize..=7) {
        let slots: Vec<SlotResult<usize>> = outcomes.iter().enumerate().map(|(i, &ok)| SlotResult { success: ok, payload: ok.then_some(i) }).collect();
        let d = vote(&slots, threshold);
        let successes = outcomes.iter().filter(|&&b| b).count();
        prop_assert_eq!(d.successes, successes);
        prop_assert_eq!(d.pass, successes >= threshold);
        prop_assert_eq!(d.payload, outcomes.iter().position(|&b| b));
    }
}

#[test]
fn default_stage_votes() {
    let cases = [(StageConfig::SELECTION, 3, 2), (StageConfig::DISAMBIGUATION, 3, 2), (StageConfig::DECOMPOSITION, 1, 1)];
    for (cfg, n, k) in cases {
        assert_eq!((cfg.completions, cfg.min_successes, cfg.max_retries), (n, k, 2));
        cfg.validate("stage").unwrap();
        for mask in 0u32..(1 << n) {
            let slots: Vec<SlotResult<()>> = (0..n).map(|i| SlotResult { success: mask >> i & 1 == 1, payload: Some(()) }).collect();
            assert_eq!(vote(&slots, cfg.min_successes).pass, mask.count_ones() as usize >= k);
        }
    }
    assert_eq!((StageConfig::SELECTION.p, StageConfig::SELECTION.f), (5, 5));
    assert_eq!((StageConfig::DISAMBIGUATION.p, StageConfig::DISAMBIGUATION.f), (5, 0));
    assert_eq!((StageConfig::DECOMPOSITION.p, StageConfig::DECOMPOSITION.f), (5, 0));
}

#[test]
fn empty_scorecard_is_an_error() {
    assert!(element_level_scores::<f64>(&[]).is_err());
}
