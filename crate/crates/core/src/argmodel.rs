//! Argumentation model for hotel-review annotation.
//!
//! A review is partitioned into argument components (MajorClaim, Claim,
//! Premise, PSIC) and non-argumentative text. MajorClaims and Claims carry a
//! sentiment; Premises support or attack Claims. This module holds the domain
//! types and the legality rules an annotation set must satisfy.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Argument component type. The declaration order is the canonical order
/// used for vectorization indices and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentLabel {
    MajorClaim,
    Claim,
    Premise,
    #[serde(rename = "PSIC")]
    Psic,
    #[serde(rename = "NA")]
    Na,
}

impl ComponentLabel {
    pub const COUNT: usize = 5;
    pub const ALL: [ComponentLabel; 5] = [
        ComponentLabel::MajorClaim,
        ComponentLabel::Claim,
        ComponentLabel::Premise,
        ComponentLabel::Psic,
        ComponentLabel::Na,
    ];
    /// Every label except NA.
    pub const ARGUMENTATIVE: [ComponentLabel; 4] =
        [ComponentLabel::MajorClaim, ComponentLabel::Claim, ComponentLabel::Premise, ComponentLabel::Psic];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentLabel::MajorClaim => "MajorClaim",
            ComponentLabel::Claim => "Claim",
            ComponentLabel::Premise => "Premise",
            ComponentLabel::Psic => "PSIC",
            ComponentLabel::Na => "NA",
        }
    }

    /// Abbreviation used in table headers.
    pub fn short(self) -> &'static str {
        match self {
            ComponentLabel::MajorClaim => "MC",
            other => other.as_str(),
        }
    }

    pub fn is_argumentative(self) -> bool {
        self != ComponentLabel::Na
    }

    /// MajorClaims and Claims are subjective and must carry a sentiment.
    pub fn takes_sentiment(self) -> bool {
        matches!(self, ComponentLabel::MajorClaim | ComponentLabel::Claim)
    }
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for ComponentLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "MajorClaim" | "Major_Claim" | "MC" => Ok(ComponentLabel::MajorClaim),
            "Claim" => Ok(ComponentLabel::Claim),
            "Premise" => Ok(ComponentLabel::Premise),
            "PSIC" | "Psic" => Ok(ComponentLabel::Psic),
            "NA" => Ok(ComponentLabel::Na),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "Positive",
            Sentiment::Negative => "Negative",
            Sentiment::Neutral => "Neutral",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Positive" => Ok(Sentiment::Positive),
            "Negative" => Ok(Sentiment::Negative),
            "Neutral" => Ok(Sentiment::Neutral),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    Support,
    Attack,
}

impl RelationKind {
    pub const ALL: [RelationKind; 2] = [RelationKind::Support, RelationKind::Attack];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Support => "Support",
            RelationKind::Attack => "Attack",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationKind {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Support" => Ok(RelationKind::Support),
            "Attack" => Ok(RelationKind::Attack),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

/// Half-open range `[start, end)` of Unicode code point offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    /// Returns `None` unless `start < end`.
    pub fn new(start: usize, end: usize) -> Option<Self> {
        (start < end).then_some(CharSpan { start, end })
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Number of code points shared with `other`.
    pub fn overlap(&self, other: &CharSpan) -> usize {
        self.end.min(other.end).saturating_sub(self.start.max(other.start))
    }

    pub fn intersects(&self, other: &CharSpan) -> bool {
        self.overlap(other) > 0
    }

    pub fn contains_span(&self, other: &CharSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn clip(&self, window: &CharSpan) -> Option<CharSpan> {
        CharSpan::new(self.start.max(window.start), self.end.min(window.end))
    }

    /// Re-expresses the span relative to `origin`. Caller guarantees `origin <= start`.
    pub fn relative_to(&self, origin: usize) -> CharSpan {
        CharSpan { start: self.start - origin, end: self.end - origin }
    }

    pub fn shifted(&self, delta: usize) -> CharSpan {
        CharSpan { start: self.start + delta, end: self.end + delta }
    }
}

impl fmt::Display for CharSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// A span with a component label, the unit of comparison for agreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LabeledSpan {
    pub span: CharSpan,
    pub label: ComponentLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentAnnotation {
    pub id: String,
    pub span: CharSpan,
    pub label: ComponentLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<Sentiment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationAnnotation {
    pub id: String,
    pub kind: RelationKind,
    pub source: String,
    pub target: String,
}

/// One annotator's complete labeling of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub annotator_id: String,
    pub document_id: String,
    pub components: Vec<ComponentAnnotation>,
    pub relations: Vec<RelationAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("components `{first}` and `{second}` overlap")]
pub struct OverlapError {
    pub first: String,
    pub second: String,
}

impl AnnotationSet {
    pub fn new(annotator_id: impl Into<String>, document_id: impl Into<String>) -> Self {
        AnnotationSet {
            annotator_id: annotator_id.into(),
            document_id: document_id.into(),
            components: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn component(&self, id: &str) -> Option<&ComponentAnnotation> {
        self.components.iter().find(|c| c.id == id)
    }

    /// Argumentative components as labeled spans, sorted by position.
    pub fn labeled_spans(&self) -> Vec<LabeledSpan> {
        let mut spans: Vec<LabeledSpan> = self
            .components
            .iter()
            .filter(|c| c.label.is_argumentative())
            .map(|c| LabeledSpan { span: c.span, label: c.label })
            .collect();
        spans.sort();
        spans
    }

    /// Projects the components onto a per-character label sequence.
    /// Characters beyond `doc_length` are ignored; uncovered characters are NA.
    pub fn to_char_labels(&self, doc_length: usize) -> Result<Vec<ComponentLabel>, OverlapError> {
        let mut labels = vec![ComponentLabel::Na; doc_length];
        let mut owner: Vec<Option<usize>> = vec![None; doc_length];
        for (idx, component) in self.components.iter().enumerate() {
            if !component.label.is_argumentative() {
                continue;
            }
            let end = component.span.end.min(doc_length);
            for pos in component.span.start.min(end)..end {
                if let Some(prev) = owner[pos] {
                    return Err(OverlapError { first: self.components[prev].id.clone(), second: component.id.clone() });
                }
                owner[pos] = Some(idx);
                labels[pos] = component.label;
            }
        }
        Ok(labels)
    }

    /// Renumbers ids to `T1..`, `R1..` in span order so sets can be compared
    /// independently of how their ids were assigned.
    pub fn canonicalized(&self) -> AnnotationSet {
        let mut components = self.components.clone();
        components.sort_by_key(|c| (c.span, c.label));
        let renames: HashMap<String, String> =
            components.iter().enumerate().map(|(i, c)| (c.id.clone(), format!("T{}", i + 1))).collect();
        let mut relations: Vec<RelationAnnotation> = self
            .relations
            .iter()
            .map(|r| RelationAnnotation {
                id: String::new(),
                kind: r.kind,
                source: renames.get(r.source.as_str()).cloned().unwrap_or_else(|| r.source.clone()),
                target: renames.get(r.target.as_str()).cloned().unwrap_or_else(|| r.target.clone()),
            })
            .collect();
        relations.sort_by(|a, b| (&a.source, &a.target, a.kind).cmp(&(&b.source, &b.target, b.kind)));
        for (i, r) in relations.iter_mut().enumerate() {
            r.id = format!("R{}", i + 1);
        }
        let components = components
            .into_iter()
            .map(|mut c: ComponentAnnotation| {
                c.id = renames[c.id.as_str()].clone();
                c
            })
            .collect();
        AnnotationSet {
            annotator_id: self.annotator_id.clone(),
            document_id: self.document_id.clone(),
            components,
            relations,
        }
    }
}

/// Maximal runs of equal non-NA labels.
pub fn spans_from_labels(labels: &[ComponentLabel]) -> Vec<LabeledSpan> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < labels.len() {
        let label = labels[pos];
        let start = pos;
        while pos < labels.len() && labels[pos] == label {
            pos += 1;
        }
        if label.is_argumentative() {
            out.push(LabeledSpan { span: CharSpan { start, end: pos }, label });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    SpanOutOfBounds,
    EmptySpan,
    OverlappingComponents,
    NonArgumentativeComponent,
    DuplicateId,
    MissingSentiment,
    UnexpectedSentiment,
    DanglingRelation,
    SelfRelation,
    DuplicateRelation,
    IllegalRelationEndpoints,
    UnattachedPremise,
    MultipleTargets,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub doc_id: String,
    pub annotator_id: String,
    pub rule: Rule,
    pub target_id: String,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationPolicy {
    /// Whether a Premise may support or attack a MajorClaim.
    pub allow_premise_to_major_claim: bool,
    /// Whether a Premise may relate to more than one claim.
    pub allow_multiple_targets: bool,
    /// Per-rule severity overrides; every rule is an error otherwise.
    pub severities: BTreeMap<Rule, Severity>,
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        ValidationPolicy {
            allow_premise_to_major_claim: true,
            allow_multiple_targets: true,
            severities: BTreeMap::new(),
        }
    }
}

impl ValidationPolicy {
    pub fn severity(&self, rule: Rule) -> Severity {
        self.severities.get(&rule).copied().unwrap_or(Severity::Error)
    }

    pub fn downgrade(mut self, rule: Rule) -> Self {
        self.severities.insert(rule, Severity::Warning);
        self
    }

    fn legal_endpoints(&self, source: ComponentLabel, target: ComponentLabel) -> bool {
        source == ComponentLabel::Premise
            && (target == ComponentLabel::Claim
                || (self.allow_premise_to_major_claim && target == ComponentLabel::MajorClaim))
    }
}

/// Checks `set` against the argumentation model. Violations are returned as
/// data in a deterministic order: component rules first, then relation
/// rules, then premise attachment.
pub fn validate(set: &AnnotationSet, doc_length: usize, policy: &ValidationPolicy) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule: Rule, target: &str, message: String| {
        out.push(Violation {
            doc_id: set.document_id.clone(),
            annotator_id: set.annotator_id.clone(),
            rule,
            target_id: target.to_string(),
            severity: policy.severity(rule),
            message,
        });
    };

    let mut seen_ids = HashSet::new();
    for c in &set.components {
        if !seen_ids.insert(c.id.as_str()) {
            push(Rule::DuplicateId, &c.id, format!("id `{}` used more than once", c.id));
        }
        if c.span.is_empty() {
            push(Rule::EmptySpan, &c.id, format!("span {} is empty", c.span));
        } else if c.span.end > doc_length {
            push(Rule::SpanOutOfBounds, &c.id, format!("span {} exceeds document length {doc_length}", c.span));
        }
        if !c.label.is_argumentative() {
            push(Rule::NonArgumentativeComponent, &c.id, "NA is not an annotatable component type".to_string());
        }
        match (c.label.takes_sentiment(), c.sentiment) {
            (true, None) => push(Rule::MissingSentiment, &c.id, format!("{} `{}` has no sentiment", c.label, c.id)),
            (false, Some(s)) => {
                push(Rule::UnexpectedSentiment, &c.id, format!("{} `{}` carries sentiment {s}", c.label, c.id))
            }
            _ => {}
        }
    }

    let mut by_start: Vec<&ComponentAnnotation> = set.components.iter().filter(|c| !c.span.is_empty()).collect();
    by_start.sort_by_key(|c| (c.span.start, c.span.end));
    for pair in by_start.windows(2) {
        if pair[0].span.intersects(&pair[1].span) {
            push(
                Rule::OverlappingComponents,
                &pair[1].id,
                format!("`{}` {} overlaps `{}` {}", pair[1].id, pair[1].span, pair[0].id, pair[0].span),
            );
        }
    }

    let labels: HashMap<&str, ComponentLabel> = set.components.iter().map(|c| (c.id.as_str(), c.label)).collect();
    let mut pairs = HashSet::new();
    let mut targets_per_source: BTreeMap<&str, usize> = BTreeMap::new();
    let mut attached: HashSet<&str> = HashSet::new();
    for r in &set.relations {
        let (Some(&source), Some(&target)) = (labels.get(r.source.as_str()), labels.get(r.target.as_str())) else {
            push(Rule::DanglingRelation, &r.id, format!("relation `{}` references a missing component", r.id));
            continue;
        };
        if r.source == r.target {
            push(Rule::SelfRelation, &r.id, format!("relation `{}` links `{}` to itself", r.id, r.source));
            continue;
        }
        if !pairs.insert((r.source.as_str(), r.target.as_str())) {
            push(Rule::DuplicateRelation, &r.id, format!("second relation from `{}` to `{}`", r.source, r.target));
        }
        if !policy.legal_endpoints(source, target) {
            push(
                Rule::IllegalRelationEndpoints,
                &r.id,
                format!("{} may not {} a {}", source, r.kind.as_str().to_lowercase(), target),
            );
            continue;
        }
        attached.insert(r.source.as_str());
        *targets_per_source.entry(r.source.as_str()).or_default() += 1;
    }

    if !policy.allow_multiple_targets {
        for (source, count) in &targets_per_source {
            if *count > 1 {
                push(Rule::MultipleTargets, source, format!("premise `{source}` relates to {count} claims"));
            }
        }
    }

    for c in &set.components {
        if c.label == ComponentLabel::Premise && !attached.contains(c.id.as_str()) {
            push(Rule::UnattachedPremise, &c.id, format!("premise `{}` neither supports nor attacks a claim", c.id));
        }
    }
    out
}

/// True when no violation has severity [`Severity::Error`].
pub fn is_acceptable(violations: &[Violation]) -> bool {
    violations.iter().all(|v| v.severity != Severity::Error)
}
