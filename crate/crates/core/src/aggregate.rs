//! Consensus annotations from several annotators.
//!
//! Every annotator's labeling is vectorized one-hot per character (five
//! digits in canonical label order). A single-cluster K-means over those
//! vectors converges to their arithmetic mean, so the centroid is computed
//! directly as the mean. The argmax of each character's centroid gives the
//! consensus label and its mass the confidence; maximal runs of equal
//! argument labels become consensus components. Sentiments and relations
//! are then decided by majority vote over aligned annotator components.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argmodel::{AnnotationSet, CharSpan, ComponentLabel, RelationKind, Sentiment};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AggregationOptions {
    /// Minimum overlap, as a share of the shorter span, for two spans to be
    /// considered the same component when voting.
    pub overlap: f64,
}

impl Default for AggregationOptions {
    fn default() -> Self {
        AggregationOptions { overlap: 0.5 }
    }
}

/// Per-character centroid of one-hot label vectors over a window of a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDistribution {
    offset: usize,
    annotators: usize,
    counts: Vec<[u32; ComponentLabel::COUNT]>,
}

impl LabelDistribution {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Absolute offset of the first character.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn annotators(&self) -> usize {
        self.annotators
    }

    pub fn span(&self) -> CharSpan {
        CharSpan { start: self.offset, end: self.offset + self.len() }
    }

    /// Label counts at relative position `i`.
    pub fn counts(&self, i: usize) -> [u32; ComponentLabel::COUNT] {
        self.counts[i]
    }

    /// Centroid vector at relative position `i`.
    pub fn vector(&self, i: usize) -> [f64; ComponentLabel::COUNT] {
        let m = self.annotators as f64;
        self.counts[i].map(|c| c as f64 / m)
    }

    /// Consensus label at relative position `i` and whether the maximum was
    /// shared. Ties prefer argument labels over NA, then canonical order.
    pub fn argmax(&self, i: usize) -> (ComponentLabel, bool) {
        let counts = &self.counts[i];
        let best = *counts.iter().max().unwrap_or(&0);
        let tied = counts.iter().filter(|&&c| c == best).count() > 1;
        let label =
            ComponentLabel::ARGUMENTATIVE.into_iter().find(|l| counts[l.index()] == best).unwrap_or(ComponentLabel::Na);
        (label, tied)
    }

    /// Mass of the consensus label at relative position `i`.
    pub fn confidence(&self, i: usize) -> f64 {
        *self.counts[i].iter().max().unwrap_or(&0) as f64 / self.annotators as f64
    }

    /// Restriction to an absolute `window` (clipped to this distribution).
    pub fn window(&self, window: CharSpan) -> LabelDistribution {
        let start = window.start.clamp(self.offset, self.offset + self.len());
        let end = window.end.clamp(start, self.offset + self.len());
        LabelDistribution {
            offset: start,
            annotators: self.annotators,
            counts: self.counts[start - self.offset..end - self.offset].to_vec(),
        }
    }
}

/// Mean of the annotators' one-hot character vectors over `[0, doc_length)`.
pub fn centroid(sets: &[AnnotationSet], doc_length: usize) -> Result<LabelDistribution, AggregateError> {
    if sets.len() < 2 {
        return Err(AggregateError::DegenerateInput(format!(
            "at least 2 annotation sets required, got {}",
            sets.len()
        )));
    }
    let mut counts = vec![[0u32; ComponentLabel::COUNT]; doc_length];
    for set in sets {
        let labels = set
            .to_char_labels(doc_length)
            .map_err(|e| AggregateError::DegenerateInput(format!("{}: {e}", set.annotator_id)))?;
        for (slot, label) in counts.iter_mut().zip(labels) {
            slot[label.index()] += 1;
        }
    }
    Ok(LabelDistribution { offset: 0, annotators: sets.len(), counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedComponent {
    #[serde(flatten)]
    pub span: CharSpan,
    pub label: ComponentLabel,
    pub confidence: f64,
    pub tie: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<Sentiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sentiment_tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedRelation {
    pub source: usize,
    pub target: usize,
    pub kind: RelationKind,
    pub confidence: f64,
}

/// Consensus components of `dist`, with absolute spans.
pub fn extract_components(dist: &LabelDistribution) -> Vec<AggregatedComponent> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < dist.len() {
        let (label, tie) = dist.argmax(i);
        let start = i;
        let mut any_tie = tie;
        let mut mass = dist.confidence(i);
        i += 1;
        while i < dist.len() {
            let (next, next_tie) = dist.argmax(i);
            if next != label {
                break;
            }
            any_tie |= next_tie;
            mass += dist.confidence(i);
            i += 1;
        }
        if label.is_argumentative() {
            out.push(AggregatedComponent {
                span: CharSpan { start: dist.offset + start, end: dist.offset + i },
                label,
                confidence: mass / (i - start) as f64,
                tie: any_tie,
                sentiment: None,
                sentiment_confidence: None,
                sentiment_tie: false,
            });
        }
    }
    out
}

fn aligned(a: &CharSpan, b: &CharSpan, threshold: f64) -> bool {
    let overlap = a.overlap(b);
    overlap > 0 && overlap as f64 >= threshold * a.len().min(b.len()) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentVote {
    pub sentiment: Sentiment,
    pub confidence: f64,
    pub tie: bool,
    pub votes: usize,
}

/// Majority sentiment among annotator components aligned with `component`
/// and carrying the same label; one vote per annotator. An exact tie
/// yields Neutral with the tie flag set. `None` when nobody voted.
pub fn vote_sentiment(
    component: &AggregatedComponent,
    sets: &[AnnotationSet],
    opts: &AggregationOptions,
) -> Option<SentimentVote> {
    if !component.label.takes_sentiment() {
        return None;
    }
    let mut tally = [0usize; 3];
    for set in sets {
        let best = set
            .components
            .iter()
            .filter(|c| c.label == component.label && c.sentiment.is_some())
            .filter(|c| aligned(&c.span, &component.span, opts.overlap))
            .max_by_key(|c| (c.span.overlap(&component.span), std::cmp::Reverse(c.span.start)));
        if let Some(s) = best.and_then(|c| c.sentiment) {
            tally[sentiment_slot(s)] += 1;
        }
    }
    let cast: usize = tally.iter().sum();
    if cast == 0 {
        return None;
    }
    let top = *tally.iter().max().unwrap();
    let leaders: Vec<Sentiment> = Sentiment::ALL.into_iter().filter(|s| tally[sentiment_slot(*s)] == top).collect();
    let tie = leaders.len() > 1;
    Some(SentimentVote {
        sentiment: if tie { Sentiment::Neutral } else { leaders[0] },
        confidence: top as f64 / cast as f64,
        tie,
        votes: cast,
    })
}

fn sentiment_slot(s: Sentiment) -> usize {
    match s {
        Sentiment::Positive => 0,
        Sentiment::Negative => 1,
        Sentiment::Neutral => 2,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDiagnostics {
    pub annotator_relations: usize,
    pub unaligned: usize,
    pub collapsed: usize,
    pub duplicate: usize,
}

/// For each annotator, the aggregated component each of its components
/// aligns with (maximal overlap, lowest index on ties).
fn alignment<'a>(
    set: &'a AnnotationSet,
    components: &[AggregatedComponent],
    threshold: f64,
) -> BTreeMap<&'a str, usize> {
    set.components
        .iter()
        .filter_map(|c| {
            components
                .iter()
                .enumerate()
                .filter(|(_, agg)| aligned(&c.span, &agg.span, threshold))
                .max_by_key(|(i, agg)| (c.span.overlap(&agg.span), std::cmp::Reverse(*i)))
                .map(|(i, _)| (c.id.as_str(), i))
        })
        .collect()
}

/// Relation kinds one annotator asserts, keyed by aligned component indices.
pub type AlignedRelations = BTreeMap<(usize, usize), RelationKind>;

/// Per annotator, the relation kinds asserted between aligned component pairs.
pub fn aligned_relations(
    sets: &[AnnotationSet],
    components: &[AggregatedComponent],
    opts: &AggregationOptions,
) -> (Vec<AlignedRelations>, RelationDiagnostics) {
    let mut diagnostics = RelationDiagnostics::default();
    let per_annotator = sets
        .iter()
        .map(|set| {
            let map = alignment(set, components, opts.overlap);
            let mut asserted = BTreeMap::new();
            for r in &set.relations {
                diagnostics.annotator_relations += 1;
                let (Some(&s), Some(&t)) = (map.get(r.source.as_str()), map.get(r.target.as_str())) else {
                    diagnostics.unaligned += 1;
                    continue;
                };
                if s == t {
                    diagnostics.collapsed += 1;
                    continue;
                }
                if asserted.insert((s, t), r.kind).is_some() {
                    diagnostics.duplicate += 1;
                }
            }
            asserted
        })
        .collect();
    (per_annotator, diagnostics)
}

/// Relations asserted by more than half of the document's annotators between
/// the same aligned pair. The kind is the majority among asserting
/// annotators, Support on a tie; confidence is the asserting share.
pub fn vote_relations(
    sets: &[AnnotationSet],
    components: &[AggregatedComponent],
    opts: &AggregationOptions,
) -> (Vec<AggregatedRelation>, RelationDiagnostics) {
    let (per_annotator, diagnostics) = aligned_relations(sets, components, opts);
    let mut votes: BTreeMap<(usize, usize), [usize; 2]> = BTreeMap::new();
    for asserted in &per_annotator {
        for (&pair, &kind) in asserted {
            votes.entry(pair).or_default()[kind as usize] += 1;
        }
    }
    let m = sets.len();
    let relations = votes
        .into_iter()
        .filter(|(_, [support, attack])| 2 * (support + attack) > m)
        .map(|((source, target), [support, attack])| AggregatedRelation {
            source,
            target,
            kind: if support >= attack { RelationKind::Support } else { RelationKind::Attack },
            confidence: (support + attack) as f64 / m as f64,
        })
        .collect();
    (relations, diagnostics)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedDocument {
    pub components: Vec<AggregatedComponent>,
    pub relations: Vec<AggregatedRelation>,
    pub diagnostics: RelationDiagnostics,
}

/// Components with voted sentiments over `window`, plus relations when
/// `with_relations` is set.
pub fn aggregate_window(
    sets: &[AnnotationSet],
    dist: &LabelDistribution,
    window: CharSpan,
    with_relations: bool,
    opts: &AggregationOptions,
) -> AggregatedDocument {
    let mut components = extract_components(&dist.window(window));
    for c in &mut components {
        if let Some(vote) = vote_sentiment(c, sets, opts) {
            c.sentiment = Some(vote.sentiment);
            c.sentiment_confidence = Some(vote.confidence);
            c.sentiment_tie = vote.tie;
        }
    }
    let (relations, diagnostics) = if with_relations {
        vote_relations(sets, &components, opts)
    } else {
        (Vec::new(), RelationDiagnostics::default())
    };
    AggregatedDocument { components, relations, diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argmodel::{ComponentAnnotation, RelationAnnotation};
    use ComponentLabel::*;

    fn set(name: &str, comps: &[(usize, usize, ComponentLabel, Option<Sentiment>)]) -> AnnotationSet {
        let mut s = AnnotationSet::new(name, "d");
        s.components = comps
            .iter()
            .enumerate()
            .map(|(i, &(start, end, label, sentiment))| ComponentAnnotation {
                id: format!("T{}", i + 1),
                span: CharSpan { start, end },
                label,
                sentiment,
            })
            .collect();
        s
    }

    fn with_rel(mut s: AnnotationSet, kind: RelationKind, source: &str, target: &str) -> AnnotationSet {
        s.relations.push(RelationAnnotation {
            id: format!("R{}", s.relations.len() + 1),
            kind,
            source: source.into(),
            target: target.into(),
        });
        s
    }

    #[test]
    fn one_of_three_says_major_claim() {
        let sets = [set("a", &[(0, 3, MajorClaim, Some(Sentiment::Positive))]), set("b", &[]), set("c", &[])];
        let dist = centroid(&sets, 3).unwrap();
        let v = dist.vector(0);
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-9 && (v[4] - 2.0 / 3.0).abs() < 1e-9);
        assert_eq!(&v[1..4], &[0.0, 0.0, 0.0]);
        assert_eq!(dist.argmax(0), (Na, false));
        assert!((dist.confidence(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!(extract_components(&dist).is_empty());
    }

    #[test]
    fn unanimous_claim() {
        let s = [(0, 2, Claim, Some(Sentiment::Positive))];
        let sets = [set("a", &s), set("b", &s), set("c", &s)];
        let dist = centroid(&sets, 4).unwrap();
        assert_eq!(dist.vector(0), [0.0, 1.0, 0.0, 0.0, 0.0]);
        let comps = extract_components(&dist);
        assert_eq!(comps.len(), 1);
        assert_eq!(
            (comps[0].span, comps[0].label, comps[0].confidence, comps[0].tie),
            (CharSpan { start: 0, end: 2 }, Claim, 1.0, false)
        );
    }

    #[test]
    fn mixed_four_annotators() {
        let sets = [
            set("a", &[(0, 1, Claim, Some(Sentiment::Positive))]),
            set("b", &[(0, 1, Claim, Some(Sentiment::Positive))]),
            set("c", &[(0, 1, Premise, None)]),
            set("d", &[]),
        ];
        let dist = centroid(&sets, 1).unwrap();
        assert_eq!(dist.vector(0), [0.0, 0.5, 0.25, 0.0, 0.25]);
        assert_eq!(dist.argmax(0), (Claim, false));
        assert_eq!(dist.confidence(0), 0.5);
    }

    #[test]
    fn half_claim_half_na_breaks_toward_claim() {
        let sets = [set("a", &[(0, 2, Claim, Some(Sentiment::Positive))]), set("b", &[])];
        let dist = centroid(&sets, 2).unwrap();
        assert_eq!(dist.argmax(0), (Claim, true));
        let comps = extract_components(&dist);
        assert_eq!((comps[0].label, comps[0].tie, comps[0].confidence), (Claim, true, 0.5));
    }

    #[test]
    fn argmax_switching_mid_span() {
        // chars 0..6; a: Claim[0,6); b: Claim[0,3) Premise[3,6); c: Premise[2,6)
        let sets = [
            set("a", &[(0, 6, Claim, Some(Sentiment::Positive))]),
            set("b", &[(0, 3, Claim, Some(Sentiment::Positive)), (3, 6, Premise, None)]),
            set("c", &[(2, 6, Premise, None)]),
        ];
        let dist = centroid(&sets, 6).unwrap();
        let comps = extract_components(&dist);
        // per char argmax: 0,1 Claim 2/3 (NA 1/3); 2 Claim 2/3; 3..6 Premise 2/3
        assert_eq!(comps.len(), 2);
        assert_eq!((comps[0].span, comps[0].label), (CharSpan { start: 0, end: 3 }, Claim));
        assert_eq!((comps[1].span, comps[1].label), (CharSpan { start: 3, end: 6 }, Premise));
        assert!((comps[0].confidence - 2.0 / 3.0).abs() < 1e-12);
        assert!((comps[1].confidence - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn centroid_needs_two_sets() {
        assert!(centroid(&[set("a", &[])], 3).is_err());
    }

    fn claim(span: (usize, usize)) -> AggregatedComponent {
        AggregatedComponent {
            span: CharSpan { start: span.0, end: span.1 },
            label: Claim,
            confidence: 1.0,
            tie: false,
            sentiment: None,
            sentiment_confidence: None,
            sentiment_tie: false,
        }
    }

    #[test]
    fn sentiment_votes() {
        let agg = claim((0, 4));
        let pos = Some(Sentiment::Positive);
        let neg = Some(Sentiment::Negative);
        let sets = [set("a", &[(0, 4, Claim, pos)]), set("b", &[(0, 3, Claim, pos)]), set("c", &[(1, 4, Claim, neg)])];
        let v = vote_sentiment(&agg, &sets, &AggregationOptions::default()).unwrap();
        assert_eq!((v.sentiment, v.tie), (Sentiment::Positive, false));
        assert!((v.confidence - 2.0 / 3.0).abs() < 1e-12);

        let v = vote_sentiment(&agg, &sets[1..], &AggregationOptions::default()).unwrap();
        assert_eq!((v.sentiment, v.tie), (Sentiment::Neutral, true));

        let far = [set("a", &[(10, 14, Claim, pos)]), set("b", &[(0, 4, Premise, None)])];
        assert!(vote_sentiment(&agg, &far, &AggregationOptions::default()).is_none());
    }

    fn premise_claim_sets(kinds: &[Option<RelationKind>]) -> Vec<AnnotationSet> {
        kinds
            .iter()
            .enumerate()
            .map(|(i, kind)| {
                let s = set(&format!("a{i}"), &[(0, 4, Claim, Some(Sentiment::Positive)), (5, 9, Premise, None)]);
                match kind {
                    Some(k) => with_rel(s, *k, "T2", "T1"),
                    None => s,
                }
            })
            .collect()
    }

    fn two_components() -> Vec<AggregatedComponent> {
        let mut p = claim((5, 9));
        p.label = Premise;
        vec![claim((0, 4)), p]
    }

    #[test]
    fn relation_majority() {
        use RelationKind::*;
        let opts = AggregationOptions::default();
        let (rels, _) = vote_relations(
            &premise_claim_sets(&[Some(Support), Some(Support), Some(Support), None]),
            &two_components(),
            &opts,
        );
        assert_eq!(rels, vec![AggregatedRelation { source: 1, target: 0, kind: Support, confidence: 0.75 }]);

        let (rels, _) =
            vote_relations(&premise_claim_sets(&[Some(Support), Some(Support), None, None]), &two_components(), &opts);
        assert!(rels.is_empty());

        let (rels, _) = vote_relations(
            &premise_claim_sets(&[Some(Support), Some(Attack), Some(Support), None]),
            &two_components(),
            &opts,
        );
        assert_eq!((rels[0].kind, rels[0].confidence), (Support, 0.75));

        let (rels, _) = vote_relations(
            &premise_claim_sets(&[Some(Attack), Some(Attack), Some(Support), None]),
            &two_components(),
            &opts,
        );
        assert_eq!(rels[0].kind, Attack);
    }

    #[test]
    fn unalignable_relations_are_counted() {
        let s = with_rel(
            set("a", &[(0, 4, Claim, Some(Sentiment::Positive)), (20, 24, Premise, None)]),
            RelationKind::Support,
            "T2",
            "T1",
        );
        let (rels, diag) = vote_relations(&[s.clone(), s], &two_components(), &AggregationOptions::default());
        assert!(rels.is_empty());
        assert_eq!((diag.annotator_relations, diag.unaligned), (2, 2));
    }

    #[test]
    fn component_json_shape() {
        let mut c = claim((2, 5));
        c.sentiment = Some(Sentiment::Negative);
        c.sentiment_confidence = Some(1.0);
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"start":2,"end":5,"label":"Claim","confidence":1.0,"tie":false,"sentiment":"Negative","sentiment_confidence":1.0}"#
        );
    }
}
