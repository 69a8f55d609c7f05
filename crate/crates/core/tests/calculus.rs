use std::collections::BTreeSet;
use std::sync::Arc;

use claimify::eval::coverage::*;
use claimify::eval::decontext::*;
use claimify::eval::retrieval::RetrievalConfig;
use claimify::eval::Judge;
use claimify::gateway::{Gateway, MockProvider};
use claimify::postprocess::Claim;
use claimify::search::{MockSearch, MockSearchRule, SearchClient, SearchHit};
use claimify::ScoreCard64;

const TRI: [Option<bool>; 3] = [None, Some(true), Some(false)];

fn shape(am: bool, a: Option<bool>, b: Option<bool>, c: Option<bool>) -> VerdictShape {
    VerdictShape { already_maximal: am, ec_supports_c: a, emax_supports_cmax: b, ec_supports_cmax: c }
}

/// Independent reading of the seven results: 1 when c is already maximal,
/// otherwise enumerate the three support verdicts in order.
fn expected_type(v: &VerdictShape) -> Option<u8> {
    let t = Some(true);
    let f = Some(false);
    if v.already_maximal {
        return (v.ec_supports_c.is_none() && v.emax_supports_cmax.is_none() && v.ec_supports_cmax.is_none()).then_some(1);
    }
    let table = [
        ((t, t, t), 2),
        ((t, t, f), 3),
        ((t, f, t), 4),
        ((t, f, f), 5),
        ((f, t, None), 6),
        ((f, f, None), 7),
    ];
    table
        .iter()
        .find(|(k, _)| *k == (v.ec_supports_c, v.emax_supports_cmax, v.ec_supports_cmax))
        .map(|(_, t)| *t)
}

#[test]
fn all_shapes_classify_exactly() {
    let mut legal = BTreeSet::new();
    for am in [false, true] {
        for a in TRI {
            for b in TRI {
                for c in TRI {
                    let v = shape(am, a, b, c);
                    match (classify_result(&v), expected_type(&v)) {
                        (Ok(got), Some(want)) => {
                            assert_eq!(got, want, "{v:?}");
                            legal.insert(got);
                        }
                        (Err(_), None) => {}
                        (got, want) => panic!("{v:?}: got {got:?}, want {want:?}"),
                    }
                }
            }
        }
    }
    assert_eq!(legal, (1..=7).collect());
}

#[test]
fn desirable_types_are_one_two_four_seven() {
    let desirable: Vec<u8> = (0..=9).filter(|&t| is_desirable(t)).collect();
    assert_eq!(desirable, vec![1, 2, 4, 7]);
}

#[test]
fn confusion_cells_for_all_six_cases() {
    use ConfusionCell::*;
    use CoverageLabel::*;
    let cases = [
        (true, Explicit, TP),
        (true, Implicit, TP),
        (true, NotCovered, FN),
        (false, Explicit, FP),
        (false, Implicit, TN),
        (false, NotCovered, TN),
    ];
    for (v, l, want) in cases {
        assert_eq!(confusion_cell(v, l), want, "{v} {l:?}");
    }
}

#[test]
fn flag_example_method_b_beats_method_a() {
    use CoverageLabel::*;
    // elements: iconic (unverifiable), 50 stars, 13 stripes
    let verifiable = [false, true, true];
    let a = [Explicit, NotCovered, NotCovered];
    let b = [NotCovered, Explicit, Explicit];
    let cells = |labels: &[CoverageLabel]| verifiable.iter().zip(labels).map(|(&v, &l)| confusion_cell(v, l)).collect::<Vec<_>>();
    let ca = Confusion::from_cells(&cells(&a));
    let cb = Confusion::from_cells(&cells(&b));
    assert_eq!(ca, Confusion { tp: 0, tn: 0, fp: 1, fn_: 2 });
    assert_eq!(cb, Confusion { tp: 2, tn: 1, fp: 0, fn_: 0 });
    let sa = ScoreCard64::from_confusion(&ca).unwrap();
    let sb = ScoreCard64::from_confusion(&cb).unwrap();
    assert!(sb.macro_f1 > sa.macro_f1);
    // both methods found a claim in the sentence, so sentence level cannot tell them apart
    let sent = sentence_level_scores::<f64>(&[true], &[true]).unwrap();
    assert_eq!(sent.accuracy, 1.0);
}

fn hit(s: &str) -> SearchHit {
    SearchHit { title: "t".into(), url: "https://example.org".into(), snippet: s.into() }
}

#[test]
fn every_constructed_record_respects_laziness() {
    let gw = Gateway::new(Arc::new(MockProvider::new(vec![], true)), None);
    let judge = Judge::new(&gw, "m", 2);
    let search = SearchClient::new(
        Arc::new(MockSearch {
            rules: vec![
                MockSearchRule { contains: "Marie".into(), hits: vec![hit("Marie Curie won the Nobel Prize in Physics in 1903.")] },
                MockSearchRule { contains: "orbit".into(), hits: vec![hit("The station orbits Earth every ninety minutes.")] },
                MockSearchRule { contains: "stripes".into(), hits: vec![hit("The flag has stripes.")] },
            ],
            echo: false,
        }),
        None,
    );
    let question = "Tell me about science history";
    let texts = [
        "Marie Curie won the Nobel Prize in Physics in 1903.",
        "She won the Nobel Prize in Physics in 1903.",
        "It orbits Earth every ninety minutes.",
        "They have thirteen stripes.",
        "The flag has thirteen stripes.",
        "He invented nothing.",
    ];
    let configs = [RetrievalConfig::google(), RetrievalConfig::bing()];
    let mut types = BTreeSet::new();
    for (i, text) in texts.iter().enumerate() {
        let claim = Claim::new("m", "a", i, text);
        let ctx = ClaimContext { claim: &claim, sentence: text, excerpt: text, question, sibling_claims: &[] };
        let outcome = evaluate_claim(&judge, &search, &ctx, &configs, false).unwrap();
        for r in records_for(&claim, &outcome, &configs) {
            let maximal = r.cmax == Some(CMaxKind::AlreadyMaximal);
            if maximal {
                assert!(r.ec_supports_c.is_none() && r.emax_supports_cmax.is_none() && r.ec_supports_cmax.is_none());
            } else {
                assert_eq!(r.ec_supports_cmax.is_some(), r.ec_supports_c == Some(true), "{r:?}");
            }
            let v = shape(maximal, r.ec_supports_c, r.emax_supports_cmax, r.ec_supports_cmax);
            assert_eq!(r.result_type, expected_type(&v), "{r:?}");
            types.extend(r.result_type);
        }
    }
    assert!(types.len() >= 3, "{types:?}");
}
