//! Corpus construction from filtered annotation bundles.
//!
//! Documents whose α_U reaches the easy threshold are aggregated whole,
//! relations included. The remaining, controversial documents are split
//! into sentences and only sentences reaching the sentence threshold are
//! aggregated, without relations. Statistics tables summarize both corpora.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{
    aggregate_window, aligned_relations, centroid, AggregateError, AggregatedComponent, AggregatedRelation,
    AggregationOptions,
};
use crate::argmodel::{AnnotationSet, CharSpan, ComponentLabel, LabeledSpan, RelationKind, Sentiment};
use crate::metrics::{
    alpha_u, kripp_alpha_nominal, mean_defined, multi_pi, percentage_agreement, report::char_rows, AlphaU,
    AlphaUOptions, LabelMatrix, MetricError, Score,
};
use crate::standoff::AnnotationBundle;
use crate::table::{fmt_opt, fmt_score, Table};

pub use crate::segment::segment_sentences;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("threshold {name} = {value} is outside [-1, 1]")]
    InvalidThreshold { name: &'static str, value: f64 },
    #[error("document {doc_id}: {source}")]
    Metric {
        doc_id: String,
        #[source]
        source: MetricError,
    },
    #[error("document {doc_id}: {source}")]
    Aggregate {
        doc_id: String,
        #[source]
        source: AggregateError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub easy_threshold: f64,
    pub sentence_threshold: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { easy_threshold: 0.6, sentence_threshold: 0.7 }
    }
}

impl Thresholds {
    pub fn new(easy_threshold: f64, sentence_threshold: f64) -> Result<Self, CorpusError> {
        let t = Thresholds { easy_threshold, sentence_threshold };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, value) in [("easy_threshold", self.easy_threshold), ("sentence_threshold", self.sentence_threshold)]
        {
            if !(-1.0..=1.0).contains(&value) {
                return Err(CorpusError::InvalidThreshold { name, value });
            }
        }
        Ok(())
    }

    /// Whether a document with this α_U is an easy review.
    pub fn is_easy(&self, score: Score) -> bool {
        score.at_least(self.easy_threshold)
    }

    /// Whether a controversial document's sentence with this α_U is kept.
    pub fn is_selected(&self, score: Score) -> bool {
        score.at_least(self.sentence_threshold)
    }
}

/// Partitions scored documents at `easy_threshold` (inclusive). Undefined
/// scores count as controversial.
pub fn split<'a, T>(scored: &'a [(T, Score)], thresholds: &Thresholds) -> (Vec<&'a T>, Vec<&'a T>) {
    let (easy, hard): (Vec<_>, Vec<_>) = scored.iter().partition(|(_, score)| thresholds.is_easy(*score));
    (easy.into_iter().map(|(t, _)| t).collect(), hard.into_iter().map(|(t, _)| t).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_index: Option<usize>,
    pub text: String,
    pub alpha_u: Score,
    /// Offsets are relative to `text`.
    pub components: Vec<AggregatedComponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<AggregatedRelation>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentClass {
    Easy,
    Controversial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceDecision {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub alpha_u: Score,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentDecision {
    pub doc_id: String,
    pub alpha_u: Score,
    pub class: DocumentClass,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sentences: Vec<SentenceDecision>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub documents: usize,
    pub easy: usize,
    pub controversial: usize,
    pub undefined_documents: usize,
    pub controversial_sentences: usize,
    pub selected_sentences: usize,
    pub undefined_sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub label: String,
    pub total: usize,
    pub avg: Option<f64>,
    pub percentage: Score,
    pub multi_pi: Score,
    pub alpha: Score,
    pub alpha_u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusTables {
    pub records: usize,
    pub components: Vec<StatRow>,
    pub sentiments: Vec<StatRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<StatRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStatistics {
    pub counts: CorpusCounts,
    pub easy: CorpusTables,
    pub sentence: CorpusTables,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub easy: Vec<CorpusRecord>,
    pub sentences: Vec<CorpusRecord>,
    pub decisions: Vec<DocumentDecision>,
    pub statistics: CorpusStatistics,
}

/// Sentiment categories in item order: (MajorClaim, Claim) × sentiments;
/// every other character takes the extra category.
const SENTIMENT_CATEGORIES: usize = 7;

fn sentiment_category(label: ComponentLabel, sentiment: Sentiment) -> Option<usize> {
    let base = match label {
        ComponentLabel::MajorClaim => 0,
        ComponentLabel::Claim => 3,
        _ => return None,
    };
    let offset = Sentiment::ALL.iter().position(|s| *s == sentiment)?;
    Some(base + offset)
}

/// Items contributed by one record: rows of optional category values.
#[derive(Debug, Default)]
struct RecordItems {
    labels: Vec<Vec<Option<usize>>>,
    sentiments: Vec<Vec<Option<usize>>>,
    relations: Vec<Vec<Option<usize>>>,
}

struct Built {
    record: CorpusRecord,
    per_category: Vec<Score>,
    items: RecordItems,
}

struct DocumentOutcome {
    decision: DocumentDecision,
    easy: Option<Built>,
    sentences: Vec<Built>,
}

/// Builds the easy and sentence corpora. Bundles are expected to be
/// filtered already; bundles with fewer than two sets are rejected.
pub fn build(
    bundles: &[AnnotationBundle],
    thresholds: &Thresholds,
    alpha_opts: &AlphaUOptions,
    agg_opts: &AggregationOptions,
) -> Result<Corpus, CorpusError> {
    thresholds.validate()?;
    let mut outcomes: Vec<DocumentOutcome> =
        bundles.par_iter().map(|b| build_document(b, thresholds, alpha_opts, agg_opts)).collect::<Result<_, _>>()?;
    outcomes.sort_by(|a, b| a.decision.doc_id.cmp(&b.decision.doc_id));

    let mut counts = CorpusCounts { documents: outcomes.len(), ..CorpusCounts::default() };
    let mut easy = Vec::new();
    let mut sentences = Vec::new();
    let mut decisions = Vec::new();
    for o in outcomes {
        match o.decision.class {
            DocumentClass::Easy => counts.easy += 1,
            DocumentClass::Controversial => counts.controversial += 1,
        }
        counts.undefined_documents += usize::from(!o.decision.alpha_u.is_defined());
        counts.controversial_sentences += o.decision.sentences.len();
        counts.selected_sentences += o.decision.sentences.iter().filter(|s| s.selected).count();
        counts.undefined_sentences += o.decision.sentences.iter().filter(|s| !s.alpha_u.is_defined()).count();
        easy.extend(o.easy);
        sentences.extend(o.sentences);
        decisions.push(o.decision);
    }
    let statistics = CorpusStatistics { counts, easy: tables(&easy, true), sentence: tables(&sentences, false) };
    Ok(Corpus {
        easy: easy.into_iter().map(|b| b.record).collect(),
        sentences: sentences.into_iter().map(|b| b.record).collect(),
        decisions,
        statistics,
    })
}

fn build_document(
    bundle: &AnnotationBundle,
    thresholds: &Thresholds,
    alpha_opts: &AlphaUOptions,
    agg_opts: &AggregationOptions,
) -> Result<DocumentOutcome, CorpusError> {
    let doc = &bundle.document;
    let metric_err = |source| CorpusError::Metric { doc_id: doc.id.clone(), source };
    let spans: Vec<Vec<LabeledSpan>> = bundle.sets.iter().map(AnnotationSet::labeled_spans).collect();
    let rows = char_rows(&bundle.sets, doc.len()).map_err(metric_err)?;
    let dist = centroid(&bundle.sets, doc.len())
        .map_err(|source| CorpusError::Aggregate { doc_id: doc.id.clone(), source })?;
    let unitized = |window: CharSpan| -> Result<AlphaU, CorpusError> {
        alpha_u(&spans, window, &ComponentLabel::ARGUMENTATIVE, alpha_opts).map_err(metric_err)
    };
    let record = |window: CharSpan, index: Option<usize>, a: &AlphaU| -> Built {
        let with_relations = index.is_none();
        let agg = aggregate_window(&bundle.sets, &dist, window, with_relations, agg_opts);
        let items = record_items(&bundle.sets, &rows, window, &agg.components, with_relations, agg_opts);
        Built {
            record: CorpusRecord {
                doc_id: doc.id.clone(),
                sentence_index: index,
                text: doc.slice(window).unwrap_or_default().to_string(),
                alpha_u: a.score,
                components: agg
                    .components
                    .into_iter()
                    .map(|mut c| {
                        c.span = c.span.relative_to(window.start);
                        c
                    })
                    .collect(),
                relations: with_relations.then_some(agg.relations),
            },
            per_category: a.per_category.iter().map(|c| c.score).collect(),
            items,
        }
    };

    let whole = doc.full_span();
    let doc_alpha = unitized(whole)?;
    if thresholds.is_easy(doc_alpha.score) {
        return Ok(DocumentOutcome {
            decision: DocumentDecision {
                doc_id: doc.id.clone(),
                alpha_u: doc_alpha.score,
                class: DocumentClass::Easy,
                sentences: Vec::new(),
            },
            easy: Some(record(whole, None, &doc_alpha)),
            sentences: Vec::new(),
        });
    }
    let mut decisions = Vec::new();
    let mut selected = Vec::new();
    for (index, window) in doc.sentence_spans().into_iter().enumerate() {
        let a = unitized(window)?;
        let keep = thresholds.is_selected(a.score);
        decisions.push(SentenceDecision {
            index,
            start: window.start,
            end: window.end,
            alpha_u: a.score,
            selected: keep,
        });
        if keep {
            selected.push(record(window, Some(index), &a));
        }
    }
    Ok(DocumentOutcome {
        decision: DocumentDecision {
            doc_id: doc.id.clone(),
            alpha_u: doc_alpha.score,
            class: DocumentClass::Controversial,
            sentences: decisions,
        },
        easy: None,
        sentences: selected,
    })
}

fn record_items(
    sets: &[AnnotationSet],
    rows: &[Vec<ComponentLabel>],
    window: CharSpan,
    components: &[AggregatedComponent],
    with_relations: bool,
    agg_opts: &AggregationOptions,
) -> RecordItems {
    let labels = (window.start..window.end).map(|pos| rows.iter().map(|r| Some(r[pos].index())).collect()).collect();

    let other = SENTIMENT_CATEGORIES - 1;
    let sentiment_rows: Vec<Vec<usize>> = sets
        .iter()
        .map(|set| {
            let mut row = vec![other; window.len()];
            for c in &set.components {
                let (Some(s), Some(span)) = (c.sentiment, c.span.clip(&window)) else {
                    continue;
                };
                if let Some(cat) = sentiment_category(c.label, s) {
                    row[span.start - window.start..span.end - window.start].fill(cat);
                }
            }
            row
        })
        .collect();
    let sentiments = (0..window.len()).map(|i| sentiment_rows.iter().map(|r| Some(r[i])).collect()).collect();

    let mut relations = Vec::new();
    if with_relations && components.len() >= 2 {
        let (asserted, _) = aligned_relations(sets, components, agg_opts);
        for s in 0..components.len() {
            for t in (0..components.len()).filter(|&t| t != s) {
                relations.push(
                    asserted
                        .iter()
                        .map(|a| Some(a.get(&(s, t)).map_or(RelationKind::ALL.len(), |k| *k as usize)))
                        .collect(),
                );
            }
        }
    }
    RecordItems { labels, sentiments, relations }
}

fn pooled(items: Vec<&Vec<Option<usize>>>, categories: usize) -> Option<LabelMatrix> {
    let width = items.iter().map(|i| i.len()).max()?;
    LabelMatrix::from_items(
        width,
        categories,
        items.into_iter().map(|i| {
            let mut row = i.clone();
            row.resize(width, None);
            row
        }),
    )
    .ok()
}

fn nominal_row(
    label: String,
    total: usize,
    records: usize,
    matrix: Option<&LabelMatrix>,
    alpha_u: Option<f64>,
) -> StatRow {
    let (percentage, multi_pi, alpha) = match matrix {
        Some(m) => (percentage_agreement(m), multi_pi(m), kripp_alpha_nominal(m)),
        None => {
            let u = Score::undefined(crate::metrics::UndefinedReason::NoPairableValues);
            (u, u, u)
        }
    };
    StatRow {
        label,
        total,
        avg: (records > 0).then(|| total as f64 / records as f64),
        percentage,
        multi_pi,
        alpha,
        alpha_u,
    }
}

fn tables(built: &[Built], with_relations: bool) -> CorpusTables {
    let records = built.len();
    let labels = pooled(built.iter().flat_map(|b| &b.items.labels).collect(), ComponentLabel::COUNT);
    let mut components: Vec<StatRow> = ComponentLabel::ARGUMENTATIVE
        .iter()
        .enumerate()
        .map(|(k, &label)| {
            let total = built.iter().map(|b| b.record.components.iter().filter(|c| c.label == label).count()).sum();
            let binary = labels.as_ref().map(|m| m.binarize(label.index()));
            let alpha_u = mean_defined(built.iter().map(|b| b.per_category[k]));
            nominal_row(label.short().to_string(), total, records, binary.as_ref(), alpha_u)
        })
        .collect();
    let all_total = built.iter().map(|b| b.record.components.len()).sum();
    components.push(nominal_row(
        "All".into(),
        all_total,
        records,
        labels.as_ref(),
        mean_defined(built.iter().map(|b| b.record.alpha_u)),
    ));

    let sentiment_matrix = pooled(built.iter().flat_map(|b| &b.items.sentiments).collect(), SENTIMENT_CATEGORIES);
    let mut sentiments = Vec::new();
    for label in [ComponentLabel::MajorClaim, ComponentLabel::Claim] {
        for s in Sentiment::ALL {
            let cat = sentiment_category(label, s).expect("sentiment-bearing label");
            let total = built
                .iter()
                .map(|b| b.record.components.iter().filter(|c| c.label == label && c.sentiment == Some(s)).count())
                .sum();
            let binary = sentiment_matrix.as_ref().map(|m| m.binarize(cat));
            sentiments.push(nominal_row(
                format!("{} {}", label.short(), s.as_str()),
                total,
                records,
                binary.as_ref(),
                None,
            ));
        }
    }

    let relations = with_relations.then(|| {
        let matrix = pooled(built.iter().flat_map(|b| &b.items.relations).collect(), RelationKind::ALL.len() + 1);
        let mut rows: Vec<StatRow> = RelationKind::ALL
            .iter()
            .map(|&kind| {
                let total =
                    built.iter().flat_map(|b| b.record.relations.iter().flatten()).filter(|r| r.kind == kind).count();
                let binary = matrix.as_ref().map(|m| m.binarize(kind as usize));
                nominal_row(kind.as_str().to_string(), total, records, binary.as_ref(), None)
            })
            .collect();
        let total = built.iter().flat_map(|b| b.record.relations.iter().flatten()).count();
        rows.push(nominal_row("All".into(), total, records, matrix.as_ref(), None));
        rows
    });

    CorpusTables { records, components, sentiments, relations }
}

fn stat_table(title: &str, rows: &[StatRow]) -> Table {
    let mut t = Table::new(["Label", "Total", "avg.", "%", "pi", "alpha", "alpha_u"]).titled(title);
    for r in rows {
        t.row([
            r.label.clone(),
            r.total.to_string(),
            fmt_opt(r.avg),
            fmt_score(r.percentage),
            fmt_score(r.multi_pi),
            fmt_score(r.alpha),
            fmt_opt(r.alpha_u),
        ]);
    }
    t
}

impl CorpusStatistics {
    /// Plain-text rendering of every table plus the bookkeeping counts.
    pub fn render(&self) -> String {
        let c = &self.counts;
        let mut out = format!(
            "documents: {}\neasy: {}\ncontroversial: {} ({} undefined)\nselected sentences: {}/{} ({} undefined)\n\n",
            c.documents,
            c.easy,
            c.controversial,
            c.undefined_documents,
            c.selected_sentences,
            c.controversial_sentences,
            c.undefined_sentences
        );
        let sections = [
            ("Easy reviews: argument components", Some(&self.easy.components)),
            ("Easy reviews: sentiments", Some(&self.easy.sentiments)),
            ("Easy reviews: relations", self.easy.relations.as_ref()),
            ("Less-controversial sentences: argument components", Some(&self.sentence.components)),
            ("Less-controversial sentences: sentiments", Some(&self.sentence.sentiments)),
        ];
        for (title, rows) in sections {
            if let Some(rows) = rows {
                out.push_str(&stat_table(title, rows).render());
                out.push('\n');
            }
        }
        out
    }
}
