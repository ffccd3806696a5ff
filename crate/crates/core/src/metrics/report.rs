use serde::{Deserialize, Serialize};

use super::{alpha_u, kripp_alpha_nominal, multi_pi, percentage_agreement, AlphaU, AlphaUOptions, LabelMatrix};
use super::{MetricError, Score};
use crate::argmodel::{AnnotationSet, CharSpan, ComponentLabel};
use crate::standoff::AnnotationBundle;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scope {
    Document { doc_id: String },
    Sentence { doc_id: String, index: usize, start: usize, end: usize },
}

impl Scope {
    pub fn doc_id(&self) -> &str {
        match self {
            Scope::Document { doc_id } | Scope::Sentence { doc_id, .. } => doc_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportScope {
    Document,
    PerSentence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub percentage: Score,
    pub multi_pi: Score,
    pub alpha: Score,
    pub alpha_u: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScores {
    pub label: ComponentLabel,
    #[serde(flatten)]
    pub scores: MetricScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub scope: Scope,
    pub annotators: usize,
    pub length: usize,
    /// Nominal scores over all five labels; `alpha_u` is the joint
    /// component-type score.
    pub overall: MetricScores,
    /// One-vs-rest nominal scores and per-category α_U.
    pub per_category: Vec<CategoryScores>,
}

impl AgreementReport {
    pub fn alpha_u(&self) -> Score {
        self.overall.alpha_u
    }
}

/// Percentage, multi-π and α for one matrix.
pub fn nominal_scores(matrix: &LabelMatrix) -> (Score, Score, Score) {
    (percentage_agreement(matrix), multi_pi(matrix), kripp_alpha_nominal(matrix))
}

/// Agreement reports for a bundle's annotation sets (gold excluded), either
/// one for the whole document or one per sentence.
pub fn report(
    bundle: &AnnotationBundle,
    scope: ReportScope,
    opts: &AlphaUOptions,
) -> Result<Vec<AgreementReport>, MetricError> {
    if bundle.sets.len() < 2 {
        return Err(MetricError::DegenerateInput(format!(
            "document {} has {} annotation set(s)",
            bundle.document.id,
            bundle.sets.len()
        )));
    }
    let doc = &bundle.document;
    let rows = char_rows(&bundle.sets, doc.len())?;
    let spans: Vec<_> = bundle.sets.iter().map(AnnotationSet::labeled_spans).collect();
    let windows: Vec<(Scope, CharSpan)> = match scope {
        ReportScope::Document => vec![(Scope::Document { doc_id: doc.id.clone() }, doc.full_span())],
        ReportScope::PerSentence => doc
            .sentence_spans()
            .into_iter()
            .enumerate()
            .map(|(index, s)| (Scope::Sentence { doc_id: doc.id.clone(), index, start: s.start, end: s.end }, s))
            .collect(),
    };
    windows
        .into_iter()
        .filter(|(_, w)| !w.is_empty())
        .map(|(scope, window)| window_report(scope, window, &rows, &spans, opts))
        .collect()
}

pub(crate) fn char_rows(sets: &[AnnotationSet], length: usize) -> Result<Vec<Vec<ComponentLabel>>, MetricError> {
    sets.iter()
        .map(|s| s.to_char_labels(length).map_err(|e| MetricError::DegenerateInput(format!("{}: {e}", s.annotator_id))))
        .collect()
}

fn window_report(
    scope: Scope,
    window: CharSpan,
    rows: &[Vec<ComponentLabel>],
    spans: &[Vec<crate::argmodel::LabeledSpan>],
    opts: &AlphaUOptions,
) -> Result<AgreementReport, MetricError> {
    let matrix = LabelMatrix::from_items(
        rows.len(),
        ComponentLabel::COUNT,
        (window.start..window.end).map(|pos| rows.iter().map(|r| Some(r[pos].index())).collect()),
    )?;
    let unitized: AlphaU = alpha_u(spans, window, &ComponentLabel::ARGUMENTATIVE, opts)?;
    let (percentage, multi_pi, alpha) = nominal_scores(&matrix);
    let per_category = ComponentLabel::ARGUMENTATIVE
        .iter()
        .zip(&unitized.per_category)
        .map(|(&label, cat)| {
            let (percentage, multi_pi, alpha) = nominal_scores(&matrix.binarize(label.index()));
            CategoryScores { label, scores: MetricScores { percentage, multi_pi, alpha, alpha_u: cat.score } }
        })
        .collect();
    Ok(AgreementReport {
        scope,
        annotators: rows.len(),
        length: window.len(),
        overall: MetricScores { percentage, multi_pi, alpha, alpha_u: unitized.score },
        per_category,
    })
}

/// Two-way α_U of one annotator against the gold annotation on `window`.
pub fn gold_agreement(
    student: &AnnotationSet,
    gold: &AnnotationSet,
    window: CharSpan,
    opts: &AlphaUOptions,
) -> Result<AlphaU, MetricError> {
    alpha_u(&[student.labeled_spans(), gold.labeled_spans()], window, &ComponentLabel::ARGUMENTATIVE, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argmodel::{ComponentAnnotation, Sentiment};
    use crate::standoff::Document;

    fn set(annotator: &str, comps: &[(usize, usize, ComponentLabel)]) -> AnnotationSet {
        let mut s = AnnotationSet::new(annotator, "d");
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

    fn bundle(sets: Vec<AnnotationSet>) -> AnnotationBundle {
        AnnotationBundle {
            document: Document::new("d", "房间很好，干净。服务不错，很热情！"), sets, gold: None
        }
    }

    #[test]
    fn identical_sets_score_one_everywhere() {
        let comps =
            [(0, 4, ComponentLabel::Claim), (8, 12, ComponentLabel::MajorClaim), (13, 16, ComponentLabel::Psic)];
        let b = bundle(vec![set("a", &comps), set("b", &comps), set("c", &comps), set("d", &comps)]);
        let doc = report(&b, ReportScope::Document, &AlphaUOptions::default()).unwrap();
        let sentences = report(&b, ReportScope::PerSentence, &AlphaUOptions::default()).unwrap();
        assert_eq!(doc.len(), 1);
        assert_eq!(sentences.len(), 2);
        for r in doc.iter().chain(&sentences) {
            for s in [r.overall.percentage, r.overall.multi_pi, r.overall.alpha, r.overall.alpha_u] {
                assert_eq!(s, Score::Value(1.0), "{:?}", r.scope);
            }
        }
        assert_eq!(doc[0].per_category[0].scores.alpha_u, Score::Value(1.0));
    }

    #[test]
    fn needs_two_sets() {
        let b = bundle(vec![set("a", &[])]);
        assert!(report(&b, ReportScope::Document, &AlphaUOptions::default()).is_err());
    }

    #[test]
    fn gold_comparison_on_sentence() {
        let gold = set("gold", &[(0, 4, ComponentLabel::Claim)]);
        let good = set("s1", &[(0, 4, ComponentLabel::Claim)]);
        let poor = set("s2", &[(2, 7, ComponentLabel::Premise)]);
        let w = CharSpan { start: 0, end: 8 };
        let opts = AlphaUOptions::default();
        let g = gold_agreement(&good, &gold, w, &opts).unwrap().score.value().unwrap();
        let p = gold_agreement(&poor, &gold, w, &opts).unwrap().score.value().unwrap();
        assert_eq!(g, 1.0);
        assert!(p < g);
    }

    #[test]
    fn report_serializes_scope_tag() {
        let comps = [(0, 4, ComponentLabel::Claim)];
        let b = bundle(vec![set("a", &comps), set("b", &[])]);
        let r = report(&b, ReportScope::PerSentence, &AlphaUOptions::default()).unwrap();
        let json = serde_json::to_string(&r[1]).unwrap();
        assert!(
            json.starts_with(r#"{"scope":{"kind":"sentence","doc_id":"d","index":1,"start":8,"end":17}"#),
            "{json}"
        );
    }
}
