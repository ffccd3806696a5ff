//! Annotator devotedness scoring against gold-standard documents.
//!
//! Every sentence of a gold document ranks its annotators by their two-way
//! α_U against the gold annotation of that sentence. The bottom tail of
//! each ranking gets one penalty point; annotators reaching the penalty
//! threshold lose all their annotation sets, and documents left with too
//! few sets are dropped.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::Histogram;
use crate::metrics::{gold_agreement, AlphaUOptions, MetricError, Score};
use crate::standoff::AnnotationBundle;

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("annotator {0} has no gold document")]
    MissingGold(String),
    #[error("document {0} has no gold annotation set")]
    NoGoldSet(String),
    #[error("gold document {doc_id}: {source}")]
    Metric {
        doc_id: String,
        #[source]
        source: MetricError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldSentenceScore {
    pub doc_id: String,
    pub sentence_index: usize,
    pub alpha_u: Score,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevotednessRecord {
    pub annotator_id: String,
    pub penalty: u32,
    pub scores: Vec<GoldSentenceScore>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TailRule {
    /// Share of a sentence's ranked annotators flagged, rounded down.
    pub share: f64,
    /// Lower bound on the flagged count when the scores vary.
    pub min_flagged: usize,
}

impl Default for TailRule {
    fn default() -> Self {
        TailRule { share: 0.1, min_flagged: 1 }
    }
}

impl TailRule {
    /// Positions (into `scores`) flagged on one sentence. Undefined scores
    /// are not ranked; ties at the cutoff score are all flagged.
    pub fn flag(&self, scores: &[(f64, &str)]) -> Vec<usize> {
        let n = scores.len();
        if n < 2 {
            return Vec::new();
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0).then_with(|| scores[a].1.cmp(scores[b].1)));
        let lowest = scores[order[0]].0;
        if scores.iter().all(|s| s.0 == lowest) {
            return Vec::new();
        }
        let k = ((self.share * n as f64).floor() as usize).max(self.min_flagged).min(n);
        if k == 0 {
            return Vec::new();
        }
        let cutoff = scores[order[k - 1]].0;
        order.into_iter().filter(|&i| scores[i].0 <= cutoff).collect()
    }
}

/// Penalty records for every annotator in `annotators`, scored on the
/// sentences of the `gold` bundles.
pub fn score_devotedness(
    gold: &[AnnotationBundle],
    annotators: &[String],
    rule: &TailRule,
    opts: &AlphaUOptions,
) -> Result<Vec<DevotednessRecord>, QualityError> {
    let per_doc: Vec<Vec<(String, GoldSentenceScore)>> =
        gold.par_iter().map(|bundle| score_document(bundle, rule, opts)).collect::<Result<_, _>>()?;

    let mut records: BTreeMap<&str, DevotednessRecord> = annotators
        .iter()
        .map(|a| (a.as_str(), DevotednessRecord { annotator_id: a.clone(), penalty: 0, scores: Vec::new() }))
        .collect();
    for (annotator, score) in per_doc.into_iter().flatten() {
        if let Some(record) = records.get_mut(annotator.as_str()) {
            record.penalty += u32::from(score.flagged);
            record.scores.push(score);
        }
    }
    let covered: BTreeSet<&str> = gold.iter().flat_map(AnnotationBundle::annotator_ids).collect();
    if let Some(missing) = annotators.iter().find(|a| !covered.contains(a.as_str())) {
        return Err(QualityError::MissingGold(missing.clone()));
    }
    Ok(records.into_values().collect())
}

fn score_document(
    bundle: &AnnotationBundle,
    rule: &TailRule,
    opts: &AlphaUOptions,
) -> Result<Vec<(String, GoldSentenceScore)>, QualityError> {
    let doc_id = &bundle.document.id;
    let gold = bundle.gold.as_ref().ok_or_else(|| QualityError::NoGoldSet(doc_id.clone()))?;
    let mut out = Vec::new();
    for (index, window) in bundle.document.sentence_spans().into_iter().enumerate() {
        let scores: Vec<Score> = bundle
            .sets
            .iter()
            .map(|s| gold_agreement(s, gold, window, opts).map(|a| a.score))
            .collect::<Result<_, _>>()
            .map_err(|source| QualityError::Metric { doc_id: doc_id.clone(), source })?;
        let ranked: Vec<(usize, (f64, &str))> = scores
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.value().map(|v| (i, (v, bundle.sets[i].annotator_id.as_str()))))
            .collect();
        let values: Vec<(f64, &str)> = ranked.iter().map(|r| r.1).collect();
        let flagged: BTreeSet<usize> = rule.flag(&values).into_iter().map(|p| ranked[p].0).collect();
        for (i, (set, score)) in bundle.sets.iter().zip(scores).enumerate() {
            out.push((
                set.annotator_id.clone(),
                GoldSentenceScore {
                    doc_id: doc_id.clone(),
                    sentence_index: index,
                    alpha_u: score,
                    flagged: flagged.contains(&i),
                },
            ));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RemovalReport {
    pub threshold: u32,
    pub min_sets: usize,
    pub removed_annotators: Vec<String>,
    pub removed_sets: usize,
    pub removed_documents: Vec<String>,
    pub retained_documents: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_histogram: Option<Histogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_histogram: Option<Histogram>,
}

/// Removes every set of annotators whose penalty reaches `threshold`, then
/// every document left with fewer than `min_sets` sets.
pub fn filter(
    records: &[DevotednessRecord],
    bundles: Vec<AnnotationBundle>,
    threshold: u32,
    min_sets: usize,
) -> (Vec<AnnotationBundle>, RemovalReport) {
    let removed: BTreeSet<&str> =
        records.iter().filter(|r| r.penalty >= threshold).map(|r| r.annotator_id.as_str()).collect();
    let mut report = RemovalReport {
        threshold,
        min_sets,
        removed_annotators: removed.iter().map(|s| s.to_string()).collect(),
        ..RemovalReport::default()
    };
    let mut kept = Vec::with_capacity(bundles.len());
    for mut bundle in bundles {
        let before = bundle.sets.len();
        bundle.sets.retain(|s| !removed.contains(s.annotator_id.as_str()));
        report.removed_sets += before - bundle.sets.len();
        if bundle.sets.len() < min_sets {
            report.removed_documents.push(bundle.document.id.clone());
        } else {
            kept.push(bundle);
        }
    }
    report.retained_documents = kept.len();
    (kept, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argmodel::{AnnotationSet, CharSpan, ComponentAnnotation, ComponentLabel, Sentiment};
    use crate::standoff::Document;

    fn set(name: &str, comps: &[(usize, usize, ComponentLabel)]) -> AnnotationSet {
        let mut s = AnnotationSet::new(name, "g");
        s.components = comps
            .iter()
            .enumerate()
            .map(|(i, &(start, end, label))| ComponentAnnotation {
                id: format!("T{}", i + 1),
                span: CharSpan { start, end },
                label,
                sentiment: label.takes_sentiment().then_some(Sentiment::Positive),
            })
            .collect();
        s
    }

    const TEXT: &str = "房间很好，干净。服务不错，很热情！";

    fn gold_bundle(sets: Vec<AnnotationSet>) -> AnnotationBundle {
        AnnotationBundle {
            document: Document::new("g", TEXT),
            sets,
            gold: Some(set("gold", &[(0, 4, ComponentLabel::Claim), (8, 12, ComponentLabel::Claim)])),
        }
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("a{i:02}")).collect()
    }

    #[test]
    fn gold_identical_annotator_has_no_penalty() {
        let perfect = [(0, 4, ComponentLabel::Claim), (8, 12, ComponentLabel::Claim)];
        let sets = vec![
            set("a00", &perfect),
            set("a01", &perfect),
            set("a02", &[(1, 6, ComponentLabel::Premise), (9, 16, ComponentLabel::Premise)]),
        ];
        let records =
            score_devotedness(&[gold_bundle(sets)], &ids(3), &TailRule::default(), &AlphaUOptions::default()).unwrap();
        let penalties: Vec<u32> = records.iter().map(|r| r.penalty).collect();
        assert_eq!(penalties, vec![0, 0, 2]);
        assert_eq!(records[2].scores.len(), 2);
    }

    #[test]
    fn bottom_tail_of_twenty() {
        let mut scores: Vec<(f64, String)> = (0..20).map(|i| (0.5 + i as f64 * 0.01, format!("a{i:02}"))).collect();
        scores[7].0 = 0.1;
        scores[13].0 = 0.2;
        let view: Vec<(f64, &str)> = scores.iter().map(|(v, s)| (*v, s.as_str())).collect();
        let mut flagged = TailRule::default().flag(&view);
        flagged.sort();
        assert_eq!(flagged, vec![7, 13]);
    }

    #[test]
    fn ties_at_cutoff_all_flagged() {
        let view = [(0.1, "a"), (0.3, "b"), (0.3, "c"), (0.9, "d"), (0.9, "e")];
        let mut flagged = TailRule::default().flag(&view);
        flagged.sort();
        assert_eq!(flagged, vec![0]);
        let view = [(0.3, "a"), (0.3, "b"), (0.9, "c")];
        let mut flagged = TailRule::default().flag(&view);
        flagged.sort();
        assert_eq!(flagged, vec![0, 1]);
    }

    #[test]
    fn constant_scores_flag_nobody() {
        assert!(TailRule::default().flag(&[(0.5, "a"), (0.5, "b")]).is_empty());
        assert!(TailRule::default().flag(&[(0.5, "a")]).is_empty());
    }

    #[test]
    fn annotator_without_gold() {
        let sets = vec![set("a00", &[]), set("a01", &[])];
        let err = score_devotedness(&[gold_bundle(sets)], &ids(3), &TailRule::default(), &AlphaUOptions::default());
        assert!(matches!(err, Err(QualityError::MissingGold(a)) if a == "a02"));
    }

    fn record(id: &str, penalty: u32) -> DevotednessRecord {
        DevotednessRecord { annotator_id: id.into(), penalty, scores: Vec::new() }
    }

    #[test]
    fn filter_removes_and_prunes() {
        let doc = |id: &str, who: &[&str]| AnnotationBundle {
            document: Document::new(id, TEXT),
            sets: who.iter().map(|w| set(w, &[])).collect(),
            gold: None,
        };
        let bundles = vec![doc("d1", &["a", "b", "c"]), doc("d2", &["a", "c"]), doc("d3", &["b", "c"])];
        let records = [record("a", 2), record("b", 1), record("c", 0)];
        let (kept, report) = filter(&records, bundles, 2, 2);
        assert_eq!(report.removed_annotators, vec!["a"]);
        assert_eq!(report.removed_sets, 2);
        assert_eq!(report.removed_documents, vec!["d2"]);
        assert_eq!(kept.iter().map(|b| b.document.id.as_str()).collect::<Vec<_>>(), vec!["d1", "d3"]);
        assert!(kept.iter().all(|b| b.sets.len() >= 2));
    }
}
