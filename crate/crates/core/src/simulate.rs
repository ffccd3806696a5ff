//! Synthetic annotation campaigns with known ground truth.
//!
//! Documents are generated sentence by sentence from a small character
//! pool, with a ground-truth argument annotation per clause. Devoted
//! annotators copy the truth through a noise model (geometric boundary
//! jitter, label flips, dropped relations, flipped sentiments); spammers
//! ignore it and place random spans. Every generated set is repaired into
//! a structurally valid one, and violations can then be injected on purpose.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argmodel::{
    AnnotationSet, CharSpan, ComponentAnnotation, ComponentLabel, RelationAnnotation, RelationKind, Rule, Sentiment,
};
use crate::metrics::mix;
use crate::standoff::{write_campaign, AnnotationBundle, Document, StandoffError, GOLD_ANNOTATOR};

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid campaign configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Standoff(#[from] StandoffError),
    #[error("cannot write ground truth: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot serialize ground truth: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotatorKind {
    Devoted,
    Spammer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotatorProfile {
    /// Mean of the geometric shift applied to each span boundary.
    pub sigma: f64,
    /// Probability of relabeling a component.
    pub epsilon: f64,
    /// Relabeling weights, row = true label, in canonical label order. The
    /// diagonal is ignored; choosing NA drops the component.
    pub flip: [[f64; ComponentLabel::COUNT]; ComponentLabel::COUNT],
    pub relation_drop: f64,
    pub sentiment_flip: f64,
    /// Spammers only: probability of placing a random span in a sentence.
    pub density: f64,
}

impl Default for AnnotatorProfile {
    fn default() -> Self {
        AnnotatorProfile {
            sigma: 1.0,
            epsilon: 0.05,
            flip: [[1.0; ComponentLabel::COUNT]; ComponentLabel::COUNT],
            relation_drop: 0.1,
            sentiment_flip: 0.05,
            density: 0.7,
        }
    }
}

impl AnnotatorProfile {
    pub fn noiseless() -> Self {
        AnnotatorProfile {
            sigma: 0.0,
            epsilon: 0.0,
            relation_drop: 0.0,
            sentiment_flip: 0.0,
            ..AnnotatorProfile::default()
        }
    }

    fn validate(&self, name: &str) -> Result<(), SimulateError> {
        let probabilities = [
            ("epsilon", self.epsilon),
            ("relation_drop", self.relation_drop),
            ("sentiment_flip", self.sentiment_flip),
            ("density", self.density),
        ];
        for (field, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimulateError::Config(format!("{name}.{field} = {p} is not a probability")));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(SimulateError::Config(format!("{name}.sigma = {} must be >= 0", self.sigma)));
        }
        for (i, row) in self.flip.iter().enumerate() {
            let off: f64 = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, w)| *w).sum();
            if row.iter().any(|w| *w < 0.0 || !w.is_finite()) || off <= 0.0 {
                return Err(SimulateError::Config(format!("{name}.flip row {i} needs non-negative off-diagonal mass")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub documents: usize,
    pub min_length: usize,
    pub max_length: usize,
    pub annotators: usize,
    pub annotators_per_document: usize,
    pub gold_documents: usize,
    pub gold_per_annotator: usize,
    pub spammer_fraction: f64,
    pub devoted: AnnotatorProfile,
    pub spammer: AnnotatorProfile,
    /// Probability that a generated set receives one injected violation.
    pub violation_rate: f64,
    pub seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            documents: 200,
            min_length: 100,
            max_length: 150,
            annotators: 50,
            annotators_per_document: 4,
            gold_documents: 1,
            gold_per_annotator: 1,
            spammer_fraction: 0.0,
            devoted: AnnotatorProfile::default(),
            spammer: AnnotatorProfile::default(),
            violation_rate: 0.0,
            seed: 0,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), SimulateError> {
        let fail = |msg: String| Err(SimulateError::Config(msg));
        if self.annotators_per_document < 2 {
            return fail("annotators_per_document must be at least 2".into());
        }
        if self.annotators_per_document > self.annotators {
            return fail(format!(
                "annotators_per_document {} exceeds annotators {}",
                self.annotators_per_document, self.annotators
            ));
        }
        if self.min_length < 4 || self.min_length > self.max_length {
            return fail(format!("invalid length range {}..={}", self.min_length, self.max_length));
        }
        if self.gold_per_annotator > self.gold_documents {
            return fail(format!(
                "gold_per_annotator {} exceeds gold_documents {}",
                self.gold_per_annotator, self.gold_documents
            ));
        }
        if self.gold_documents > 0 && self.gold_per_annotator == 0 {
            return fail("gold documents need gold_per_annotator >= 1".into());
        }
        for (name, p) in [("spammer_fraction", self.spammer_fraction), ("violation_rate", self.violation_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} = {p} is not a probability"));
            }
        }
        self.devoted.validate("devoted")?;
        self.spammer.validate("spammer")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorTruth {
    pub annotator_id: String,
    pub kind: AnnotatorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedViolation {
    pub doc_id: String,
    pub annotator_id: String,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDocument {
    pub doc_id: String,
    pub gold: bool,
    pub annotation: AnnotationSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub annotators: Vec<AnnotatorTruth>,
    pub documents: Vec<TruthDocument>,
    pub injected: Vec<InjectedViolation>,
}

impl GroundTruth {
    pub fn spammers(&self) -> impl Iterator<Item = &str> {
        self.annotators.iter().filter(|a| a.kind == AnnotatorKind::Spammer).map(|a| a.annotator_id.as_str())
    }

    pub fn document(&self, doc_id: &str) -> Option<&TruthDocument> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }
}

#[derive(Debug, Clone)]
pub struct Campaign {
    /// Regular documents first, then gold documents, each sorted by id.
    pub bundles: Vec<AnnotationBundle>,
    pub truth: GroundTruth,
}

impl Campaign {
    /// Writes the standoff campaign directory plus `ground_truth.json` next to it.
    pub fn write(&self, campaign_root: &Path, truth_path: &Path) -> Result<(), SimulateError> {
        write_campaign(campaign_root, &self.bundles)?;
        if let Some(parent) = truth_path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(truth_path, serde_json::to_string_pretty(&self.truth)? + "\n")?;
        Ok(())
    }
}

const CONTENT: &[char] = &[
    '房', '间', '服', '务', '早', '餐', '位', '置', '干', '净', '安', '静', '热', '情', '方', '便', '舒', '适', '价',
    '格', '设', '施', '前', '台', '环', '境', '不', '错', '很', '好', '一', '般', '差', '床', '卫', '生', '交', '通',
];
const ENDINGS: [char; 3] = ['。', '！', '？'];

/// Derived seed for the `index`-th stream of `salt` under `seed`.
fn stream(seed: u64, salt: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(seed ^ mix(salt)) ^ index))
}

struct Skeleton {
    text: String,
    /// Clause content spans (punctuation excluded), grouped by sentence.
    clauses: Vec<Vec<CharSpan>>,
    sentences: Vec<CharSpan>,
}

/// Sentence lengths, commas per sentence and the shortest clause are set so
/// that a 100 to 150 character review carries about seven components.
const SENTENCE_LENGTH: std::ops::RangeInclusive<usize> = 16..=36;
const MAX_COMMAS: usize = 2;
const MIN_CLAUSE: usize = 5;

fn skeleton(rng: &mut ChaCha8Rng, length: usize) -> Skeleton {
    let mut lengths = Vec::new();
    let mut total = 0;
    while total < length {
        let l = rng.gen_range(SENTENCE_LENGTH);
        lengths.push(l);
        total += l;
    }
    let excess = total - length;
    let last = lengths.len() - 1;
    if lengths[last] - excess > MIN_CLAUSE || last == 0 {
        lengths[last] -= excess;
    } else {
        let tail = lengths.pop().expect("non-empty") - excess;
        *lengths.last_mut().expect("two sentences") += tail;
    }

    let mut text = String::with_capacity(length * 3);
    let mut clauses = Vec::new();
    let mut sentences = Vec::new();
    let mut pos = 0;
    for l in lengths {
        let commas = clause_breaks(rng, l);
        let mut sentence_clauses = Vec::new();
        let mut clause_start = pos;
        for i in 0..l {
            let comma = commas.contains(&i);
            let c = if i + 1 == l {
                ENDINGS[rng.gen_range(0..ENDINGS.len())]
            } else if comma {
                '，'
            } else {
                CONTENT[rng.gen_range(0..CONTENT.len())]
            };
            text.push(c);
            if i + 1 == l || comma {
                sentence_clauses.push(CharSpan { start: clause_start, end: pos + i });
                clause_start = pos + i + 1;
            }
        }
        clauses.push(sentence_clauses);
        sentences.push(CharSpan { start: pos, end: pos + l });
        pos += l;
    }
    Skeleton { text, clauses, sentences }
}

/// Comma offsets inside a sentence of `l` characters (the last one being
/// the terminator), keeping every clause at least `MIN_CLAUSE` long.
fn clause_breaks(rng: &mut ChaCha8Rng, l: usize) -> Vec<usize> {
    let content = l.saturating_sub(1);
    let fit = (content + 1) / (MIN_CLAUSE + 1);
    let k = rng.gen_range(0..=MAX_COMMAS.min(fit.saturating_sub(1)));
    let mut clause_lengths = vec![MIN_CLAUSE; k + 1];
    for _ in 0..content.saturating_sub(MIN_CLAUSE * (k + 1) + k) {
        clause_lengths[rng.gen_range(0..=k)] += 1;
    }
    let mut breaks = Vec::with_capacity(k);
    let mut at = 0;
    for len in &clause_lengths[..k] {
        at += len;
        breaks.push(at);
        at += 1;
    }
    breaks
}

fn random_sentiment(rng: &mut ChaCha8Rng) -> Sentiment {
    Sentiment::ALL[rng.gen_range(0..Sentiment::ALL.len())]
}

fn truth_annotation(rng: &mut ChaCha8Rng, doc_id: &str, sk: &Skeleton) -> AnnotationSet {
    let mut comps: Vec<(CharSpan, ComponentLabel)> = Vec::new();
    for clause in sk.clauses.iter().flatten() {
        if clause.len() < 2 || !rng.gen_bool(0.85) {
            continue;
        }
        let label = if comps.is_empty() && rng.gen_bool(0.4) {
            ComponentLabel::MajorClaim
        } else {
            match rng.gen_range(0..100) {
                0..=61 => ComponentLabel::Claim,
                62..=93 => ComponentLabel::Premise,
                _ => ComponentLabel::Psic,
            }
        };
        comps.push((*clause, label));
    }
    let mut set = AnnotationSet::new(GOLD_ANNOTATOR, doc_id);
    set.components = comps
        .into_iter()
        .enumerate()
        .map(|(i, (span, label))| ComponentAnnotation { id: format!("T{}", i + 1), span, label, sentiment: None })
        .collect();
    for c in &mut set.components {
        if c.label.takes_sentiment() {
            c.sentiment = Some(random_sentiment(rng));
        }
    }
    repair(&mut set, rng);
    set
}

/// Makes `set` structurally valid under any validation policy: ids are
/// renumbered, sentiments match labels, relations run Premise → Claim
/// only, and every Premise gets attached to its nearest Claim or becomes
/// a PSIC when there is none.
fn repair(set: &mut AnnotationSet, rng: &mut ChaCha8Rng) {
    set.components.sort_by_key(|c| (c.span.start, c.span.end));
    let renames: HashMap<String, String> =
        set.components.iter().enumerate().map(|(i, c)| (c.id.clone(), format!("T{}", i + 1))).collect();
    for c in &mut set.components {
        c.id = renames[&c.id].clone();
        match (c.label.takes_sentiment(), c.sentiment) {
            (true, None) => c.sentiment = Some(random_sentiment(rng)),
            (false, Some(_)) => c.sentiment = None,
            _ => {}
        }
    }
    let labels: HashMap<&str, ComponentLabel> = set.components.iter().map(|c| (c.id.as_str(), c.label)).collect();
    let mut kept: BTreeMap<(String, String), RelationKind> = BTreeMap::new();
    for r in &set.relations {
        let (Some(source), Some(target)) = (renames.get(&r.source), renames.get(&r.target)) else {
            continue;
        };
        if labels[source.as_str()] == ComponentLabel::Premise && labels[target.as_str()] == ComponentLabel::Claim {
            kept.entry((source.clone(), target.clone())).or_insert(r.kind);
        }
    }
    let claims: Vec<(usize, &ComponentAnnotation)> =
        set.components.iter().enumerate().filter(|(_, c)| c.label == ComponentLabel::Claim).collect();
    let mut relabel = Vec::new();
    for (i, c) in set.components.iter().enumerate() {
        if c.label != ComponentLabel::Premise || kept.keys().any(|(s, _)| *s == c.id) {
            continue;
        }
        match claims.iter().min_by_key(|(j, _)| (i.abs_diff(*j), *j)) {
            Some((_, claim)) => {
                let kind = if rng.gen_bool(0.85) { RelationKind::Support } else { RelationKind::Attack };
                kept.insert((c.id.clone(), claim.id.clone()), kind);
            }
            None => relabel.push(i),
        }
    }
    for i in relabel {
        set.components[i].label = ComponentLabel::Psic;
    }
    set.relations = kept
        .into_iter()
        .enumerate()
        .map(|(i, ((source, target), kind))| RelationAnnotation { id: format!("R{}", i + 1), kind, source, target })
        .collect();
}

fn jitter(rng: &mut ChaCha8Rng, geometric: Option<&Geometric>) -> i64 {
    match geometric {
        None => 0,
        Some(g) => {
            let k = g.sample(rng) as i64;
            if rng.gen_bool(0.5) {
                k
            } else {
                -k
            }
        }
    }
}

fn geometric(sigma: f64) -> Option<Geometric> {
    (sigma > 0.0).then(|| Geometric::new(1.0 / (1.0 + sigma)).expect("p in (0, 1]"))
}

/// Removes overlaps left by independent boundary shifts, keeping earlier spans whole.
fn resolve_overlaps(components: &mut Vec<ComponentAnnotation>) {
    components.sort_by_key(|c| (c.span.start, c.span.end));
    let mut prev_end = 0;
    components.retain_mut(|c| {
        c.span.start = c.span.start.max(prev_end);
        if c.span.start >= c.span.end {
            return false;
        }
        prev_end = c.span.end;
        true
    });
}

fn devoted_annotation(
    rng: &mut ChaCha8Rng,
    truth: &AnnotationSet,
    length: usize,
    profile: &AnnotatorProfile,
    annotator_id: &str,
) -> AnnotationSet {
    let geo = geometric(profile.sigma);
    let mut set = AnnotationSet::new(annotator_id, truth.document_id.clone());
    for c in &truth.components {
        let label = if rng.gen_bool(profile.epsilon) {
            let row = &profile.flip[c.label.index()];
            let weights: Vec<f64> =
                row.iter().enumerate().map(|(j, w)| if j == c.label.index() { 0.0 } else { *w }).collect();
            let pick = WeightedIndex::new(&weights).expect("validated flip row").sample(rng);
            ComponentLabel::from_index(pick).expect("label index")
        } else {
            c.label
        };
        let start = (c.span.start as i64 + jitter(rng, geo.as_ref())).clamp(0, length as i64 - 1) as usize;
        let end = (c.span.end as i64 + jitter(rng, geo.as_ref())).clamp(start as i64 + 1, length as i64) as usize;
        if label == ComponentLabel::Na {
            continue;
        }
        let sentiment = match c.sentiment {
            Some(s) if rng.gen_bool(profile.sentiment_flip) => {
                let others: Vec<Sentiment> = Sentiment::ALL.into_iter().filter(|o| *o != s).collect();
                Some(others[rng.gen_range(0..others.len())])
            }
            other => other,
        };
        set.components.push(ComponentAnnotation { id: c.id.clone(), span: CharSpan { start, end }, label, sentiment });
    }
    resolve_overlaps(&mut set.components);
    set.relations = truth.relations.iter().filter(|_| !rng.gen_bool(profile.relation_drop)).cloned().collect();
    repair(&mut set, rng);
    set
}

fn spammer_annotation(
    rng: &mut ChaCha8Rng,
    sk: &Skeleton,
    doc_id: &str,
    profile: &AnnotatorProfile,
    annotator_id: &str,
) -> AnnotationSet {
    let mut set = AnnotationSet::new(annotator_id, doc_id);
    for (i, sentence) in sk.sentences.iter().enumerate() {
        if !rng.gen_bool(profile.density) {
            continue;
        }
        let len = rng.gen_range(2..=sentence.len());
        let start = rng.gen_range(sentence.start..=sentence.end - len);
        set.components.push(ComponentAnnotation {
            id: format!("S{i}"),
            span: CharSpan { start, end: start + len },
            label: ComponentLabel::ARGUMENTATIVE[rng.gen_range(0..ComponentLabel::ARGUMENTATIVE.len())],
            sentiment: None,
        });
    }
    repair(&mut set, rng);
    set
}

/// Adds one violation of a rule the set can exhibit, if any.
fn inject(rng: &mut ChaCha8Rng, set: &mut AnnotationSet) -> Option<Rule> {
    let premise = set.components.iter().position(|c| c.label == ComponentLabel::Premise);
    let subjective = set.components.iter().position(|c| c.label.takes_sentiment());
    let non_premise = set.components.iter().position(|c| c.label != ComponentLabel::Premise);
    let mut options = Vec::new();
    if premise.is_some() {
        options.push(Rule::UnattachedPremise);
    }
    if subjective.is_some() {
        options.push(Rule::MissingSentiment);
    }
    if non_premise.is_some() && set.components.len() >= 2 {
        options.push(Rule::IllegalRelationEndpoints);
    }
    let rule = *options.choose(rng)?;
    match rule {
        Rule::UnattachedPremise => {
            let id = set.components[premise?].id.clone();
            set.relations.retain(|r| r.source != id);
        }
        Rule::MissingSentiment => set.components[subjective?].sentiment = None,
        _ => {
            let source = non_premise?;
            let target = (0..set.components.len()).find(|&j| j != source)?;
            set.relations.push(RelationAnnotation {
                id: format!("R{}", set.relations.len() + 1),
                kind: RelationKind::Support,
                source: set.components[source].id.clone(),
                target: set.components[target].id.clone(),
            });
        }
    }
    Some(rule)
}

struct Generated {
    bundle: AnnotationBundle,
    truth: TruthDocument,
    injected: Vec<InjectedViolation>,
}

/// Position of one document in the campaign.
struct Slot {
    doc_id: String,
    salt: u64,
    index: u64,
    gold: bool,
}

fn generate_document(
    config: &CampaignConfig,
    slot: Slot,
    assigned: Vec<usize>,
    kinds: &[AnnotatorKind],
    ids: &[String],
) -> Generated {
    let Slot { doc_id, salt, index, gold } = slot;
    let mut rng = stream(config.seed, salt, index);
    let length = rng.gen_range(config.min_length..=config.max_length);
    let sk = skeleton(&mut rng, length);
    let document = Document::new(doc_id.clone(), &sk.text);
    let truth = truth_annotation(&mut rng, &doc_id, &sk);
    let mut sets = Vec::with_capacity(assigned.len());
    let mut injected = Vec::new();
    for a in assigned {
        let id = &ids[a];
        let mut set = match kinds[a] {
            AnnotatorKind::Devoted => devoted_annotation(&mut rng, &truth, length, &config.devoted, id),
            AnnotatorKind::Spammer => spammer_annotation(&mut rng, &sk, &doc_id, &config.spammer, id),
        };
        if rng.gen_bool(config.violation_rate) {
            if let Some(rule) = inject(&mut rng, &mut set) {
                injected.push(InjectedViolation { doc_id: doc_id.clone(), annotator_id: id.clone(), rule });
            }
        }
        sets.push(set);
    }
    Generated {
        bundle: AnnotationBundle { document, sets, gold: gold.then(|| truth.clone()) },
        truth: TruthDocument { doc_id, gold, annotation: truth },
        injected,
    }
}

const REGULAR: u64 = 1;
const GOLD: u64 = 2;
const ROSTER: u64 = 3;

/// Generates a campaign. Output depends only on `config`, not on the
/// number of worker threads.
pub fn generate(config: &CampaignConfig) -> Result<Campaign, SimulateError> {
    config.validate()?;
    let n = config.annotators;
    let width = n.to_string().len().max(2);
    let ids: Vec<String> = (1..=n).map(|i| format!("s{i:0width$}")).collect();

    let mut roster = stream(config.seed, ROSTER, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut roster);
    let spammers = ((config.spammer_fraction * n as f64).round() as usize).min(n);
    let mut kinds = vec![AnnotatorKind::Devoted; n];
    for &a in &order[..spammers] {
        kinds[a] = AnnotatorKind::Spammer;
    }

    // interleave spammers and devoted annotators so every gold document
    // sees a similar mix
    let mut gold_members: Vec<Vec<usize>> = vec![Vec::new(); config.gold_documents];
    if config.gold_documents > 0 {
        let (spam, devoted): (Vec<usize>, Vec<usize>) =
            order.iter().partition(|&&a| kinds[a] == AnnotatorKind::Spammer);
        for (rank, a) in spam.into_iter().chain(devoted).enumerate() {
            for j in 0..config.gold_per_annotator {
                gold_members[(rank + j) % config.gold_documents].push(a);
            }
        }
        for m in &mut gold_members {
            m.sort_unstable();
        }
    }

    let doc_width = config.documents.to_string().len().max(4);
    let regular: Vec<Generated> = (0..config.documents)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream(config.seed, REGULAR ^ 0xa5a5, d as u64);
            let mut assigned = rand::seq::index::sample(&mut rng, n, config.annotators_per_document).into_vec();
            assigned.sort_unstable();
            {
                let slot =
                    Slot { doc_id: format!("d{:0doc_width$}", d + 1), salt: REGULAR, index: d as u64, gold: false };
                generate_document(config, slot, assigned, &kinds, &ids)
            }
        })
        .collect();
    let gold_width = config.gold_documents.to_string().len().max(2);
    let gold: Vec<Generated> = gold_members
        .into_par_iter()
        .enumerate()
        .map(|(g, members)| {
            let slot = Slot { doc_id: format!("g{:0gold_width$}", g + 1), salt: GOLD, index: g as u64, gold: true };
            generate_document(config, slot, members, &kinds, &ids)
        })
        .collect();

    let mut bundles = Vec::new();
    let mut documents = Vec::new();
    let mut injected = Vec::new();
    for g in regular.into_iter().chain(gold) {
        bundles.push(g.bundle);
        documents.push(g.truth);
        injected.extend(g.injected);
    }
    Ok(Campaign {
        bundles,
        truth: GroundTruth {
            seed: config.seed,
            annotators: ids
                .into_iter()
                .zip(kinds)
                .map(|(annotator_id, kind)| AnnotatorTruth { annotator_id, kind })
                .collect(),
            documents,
            injected,
        },
    })
}
