//! Property tests over the public API.

use crowdarg::aggregate::{centroid, extract_components};
use crowdarg::analysis::Histogram;
use crowdarg::argmodel::spans_from_labels;
use crowdarg::metrics::{
    alpha_u, kripp_alpha_nominal, multi_pi, percentage_agreement, AlphaUOptions, LabelMatrix, UndefinedReason,
};
use crowdarg::quality::{filter, DevotednessRecord, TailRule};
use crowdarg::standoff::{parse_ann, write_ann, Document};
use crowdarg::{
    AnnotationBundle, AnnotationSet, CharSpan, ComponentAnnotation, ComponentLabel, LabeledSpan, Score, Sentiment,
};
use proptest::prelude::*;

fn label_strategy() -> impl Strategy<Value = ComponentLabel> {
    (0..ComponentLabel::COUNT).prop_map(|i| ComponentLabel::from_index(i).expect("in range"))
}

/// Per-character labelings of one document by `m` annotators.
fn labelings(max_m: usize, max_len: usize) -> impl Strategy<Value = Vec<Vec<ComponentLabel>>> {
    (2..=max_m, 1..=max_len)
        .prop_flat_map(|(m, len)| prop::collection::vec(prop::collection::vec(label_strategy(), len), m))
}

fn set_from_labels(annotator: &str, labels: &[ComponentLabel]) -> AnnotationSet {
    let mut set = AnnotationSet::new(annotator, "d");
    set.components = spans_from_labels(labels)
        .into_iter()
        .enumerate()
        .map(|(i, s)| ComponentAnnotation {
            id: format!("T{}", i + 1),
            span: s.span,
            label: s.label,
            sentiment: s.label.takes_sentiment().then_some(Sentiment::Negative),
        })
        .collect();
    set
}

fn matrix(rows: &[Vec<ComponentLabel>]) -> LabelMatrix {
    let rows: Vec<Vec<usize>> = rows.iter().map(|r| r.iter().map(|l| l.index()).collect()).collect();
    LabelMatrix::from_annotator_rows(&rows, ComponentLabel::COUNT).expect("rectangular")
}

fn nominal(m: &LabelMatrix) -> [Score; 3] {
    [percentage_agreement(m), multi_pi(m), kripp_alpha_nominal(m)]
}

fn close(a: Score, b: Score) -> bool {
    match (a.value(), b.value()) {
        (Some(x), Some(y)) => (x - y).abs() < 1e-12,
        (None, None) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn nominal_metrics_ignore_annotator_order(rows in labelings(5, 20)) {
        let mut reversed = rows.clone();
        reversed.reverse();
        for (a, b) in nominal(&matrix(&rows)).into_iter().zip(nominal(&matrix(&reversed))) {
            prop_assert!(close(a, b), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn nominal_metrics_are_bounded(rows in labelings(5, 20)) {
        let [p, pi, alpha] = nominal(&matrix(&rows));
        let p = p.value().expect("two annotators on every item");
        prop_assert!((0.0..=1.0).contains(&p));
        for s in [pi, alpha].into_iter().filter_map(|s| s.value()) {
            prop_assert!(s <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn identical_rows_agree_perfectly(row in prop::collection::vec(label_strategy(), 1..30), m in 2usize..6) {
        let rows = vec![row; m];
        for s in nominal(&matrix(&rows)) {
            prop_assert!(s.value().is_none() || s == Score::Value(1.0), "{s:?}");
        }
    }

    #[test]
    fn alpha_u_is_translation_and_permutation_invariant(rows in labelings(4, 40), shift in 0usize..500) {
        let spans: Vec<Vec<LabeledSpan>> = rows.iter().map(|r| spans_from_labels(r)).collect();
        let len = rows[0].len();
        let opts = AlphaUOptions::default();
        let base = alpha_u(&spans, CharSpan { start: 0, end: len }, &ComponentLabel::ARGUMENTATIVE, &opts).expect("valid");
        let moved: Vec<Vec<LabeledSpan>> = spans
            .iter()
            .map(|s| s.iter().map(|l| LabeledSpan { span: l.span.shifted(shift), label: l.label }).collect())
            .collect();
        let translated = alpha_u(&moved, CharSpan { start: shift, end: shift + len }, &ComponentLabel::ARGUMENTATIVE, &opts).expect("valid");
        let mut reversed = spans.clone();
        reversed.reverse();
        let permuted = alpha_u(&reversed, CharSpan { start: 0, end: len }, &ComponentLabel::ARGUMENTATIVE, &opts).expect("valid");
        prop_assert!(close(base.score, translated.score), "{:?} vs {:?}", base.score, translated.score);
        prop_assert!(close(base.score, permuted.score), "{:?} vs {:?}", base.score, permuted.score);
    }

    #[test]
    fn standoff_round_trip(labels in prop::collection::vec(label_strategy(), 1..60)) {
        let text: String = labels.iter().enumerate().map(|(i, _)| if i % 9 == 8 { '。' } else { '好' }).collect();
        let doc = Document::new("d", &text);
        let set = set_from_labels("a", &labels);
        let parsed = parse_ann(&write_ann(&set, &doc), &doc, "a").expect("parse");
        prop_assert_eq!(parsed.set.canonicalized(), set.canonicalized());
    }

    #[test]
    fn centroid_ignores_annotator_order(rows in labelings(6, 30)) {
        let len = rows[0].len();
        let sets: Vec<AnnotationSet> = rows.iter().enumerate().map(|(i, r)| set_from_labels(&format!("a{i}"), r)).collect();
        let mut reversed = sets.clone();
        reversed.reverse();
        let a = centroid(&sets, len).expect("centroid");
        let b = centroid(&reversed, len).expect("centroid");
        for i in 0..len {
            prop_assert_eq!(a.counts(i), b.counts(i));
            prop_assert!((a.vector(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(extract_components(&a), extract_components(&b));
    }

    #[test]
    fn extracted_components_are_disjoint_and_ordered(rows in labelings(5, 40)) {
        let len = rows[0].len();
        let sets: Vec<AnnotationSet> = rows.iter().enumerate().map(|(i, r)| set_from_labels(&format!("a{i}"), r)).collect();
        let comps = extract_components(&centroid(&sets, len).expect("centroid"));
        for w in comps.windows(2) {
            prop_assert!(w[0].span.end <= w[1].span.start);
        }
        for c in &comps {
            prop_assert!(c.label.is_argumentative() && c.span.end <= len && !c.span.is_empty());
            prop_assert!(c.confidence > 0.0 && c.confidence <= 1.0);
        }
    }

    #[test]
    fn tail_rule_flags_at_least_the_quota(scores in prop::collection::vec(-1.0f64..=1.0, 2..60)) {
        let ids: Vec<String> = (0..scores.len()).map(|i| format!("s{i:02}")).collect();
        let input: Vec<(f64, &str)> = scores.iter().zip(&ids).map(|(&s, id)| (s, id.as_str())).collect();
        let flagged = TailRule::default().flag(&input);
        let varies = scores.iter().any(|&s| s != scores[0]);
        if varies {
            let quota = ((0.1 * scores.len() as f64).floor() as usize).max(1);
            prop_assert!(flagged.len() >= quota);
            let worst_flagged = flagged.iter().map(|&i| scores[i]).fold(f64::MIN, f64::max);
            for (i, &s) in scores.iter().enumerate() {
                prop_assert_eq!(flagged.contains(&i), s <= worst_flagged);
            }
        } else {
            prop_assert!(flagged.is_empty());
        }
    }

    #[test]
    fn raising_the_threshold_never_removes_more(penalties in prop::collection::vec(0u32..5, 2..12), t in 1u32..5) {
        let records: Vec<DevotednessRecord> = penalties
            .iter()
            .enumerate()
            .map(|(i, &penalty)| DevotednessRecord { annotator_id: format!("s{i:02}"), penalty, scores: Vec::new() })
            .collect();
        let bundles: Vec<AnnotationBundle> = (0..penalties.len())
            .map(|d| AnnotationBundle {
                document: Document::new(format!("d{d}"), "好的。"),
                sets: (0..3)
                    .map(|k| {
                        let mut s = AnnotationSet::new(format!("s{:02}", (d + k) % penalties.len()), format!("d{d}"));
                        s.components.clear();
                        s
                    })
                    .collect(),
                gold: None,
            })
            .collect();
        let (_, low) = filter(&records, bundles.clone(), t, 2);
        let (_, high) = filter(&records, bundles, t + 1, 2);
        prop_assert!(high.removed_annotators.len() <= low.removed_annotators.len());
        prop_assert!(high.removed_annotators.iter().all(|a| low.removed_annotators.contains(a)));
    }

    #[test]
    fn histogram_counts_every_defined_score(values in prop::collection::vec(prop::option::of(-1.5f64..=1.0), 0..80)) {
        let scores: Vec<Score> = values
            .iter()
            .map(|v| v.map_or_else(|| Score::undefined(UndefinedReason::NoUnits), Score::Value))
            .collect();
        let h = Histogram::from_scores(scores, 0.1);
        prop_assert_eq!(h.bins.len(), 20);
        prop_assert_eq!(h.bins.iter().map(|b| b.count).sum::<u64>(), h.scored);
        prop_assert_eq!(h.scored + h.undefined, values.len() as u64);
    }
}
