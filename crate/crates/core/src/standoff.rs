//! brat standoff ingestion and output.
//!
//! A campaign directory holds one sub-directory per document:
//!
//! ```text
//! root/
//!   doc-0001/
//!     doc-0001.txt      document text (root/doc-0001.txt is also accepted)
//!     ann-007.ann       one file per annotator
//!     gold.ann          optional expert annotation
//! ```
//!
//! Offsets are Unicode code points. Only component entities, `Sentiment`
//! attributes and `Support`/`Attack` relations are consumed; every other
//! brat construct is reported as unsupported.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argmodel::{
    self, AnnotationSet, CharSpan, ComponentAnnotation, ComponentLabel, RelationAnnotation, RelationKind, Rule,
    Sentiment, Severity, ValidationPolicy, Violation,
};
use crate::segment::segment_sentences;

pub const GOLD_ANNOTATOR: &str = "gold";

#[derive(Debug, Error)]
pub enum StandoffError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Offset { line: usize, message: String },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("sentence spans must partition [0, {length}) in order")]
    InvalidSentences { length: usize },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StandoffError + '_ {
    move |source| StandoffError::Io { path: path.to_path_buf(), source }
}

/// Document text addressed by code point offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    text: String,
    // byte offset of every code point, plus text.len()
    boundaries: Vec<usize>,
    sentences: Option<Vec<CharSpan>>,
}

impl Document {
    /// Builds a document, dropping a leading byte-order mark and normalizing
    /// `\r\n` and lone `\r` to `\n`.
    pub fn new(id: impl Into<String>, text: &str) -> Self {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let text = if text.contains('\r') { text.replace("\r\n", "\n").replace('\r', "\n") } else { text.to_string() };
        let mut boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
        boundaries.push(text.len());
        Document { id: id.into(), text, boundaries, sentences: None }
    }

    /// Attaches explicit sentence spans, which must partition the text.
    pub fn with_sentences(mut self, sentences: Vec<CharSpan>) -> Result<Self, StandoffError> {
        let mut expected = 0;
        for s in &sentences {
            if s.start != expected || s.is_empty() {
                return Err(StandoffError::InvalidSentences { length: self.len() });
            }
            expected = s.end;
        }
        if expected != self.len() {
            return Err(StandoffError::InvalidSentences { length: self.len() });
        }
        self.sentences = Some(sentences);
        Ok(self)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Length in code points.
    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice(&self, span: CharSpan) -> Option<&str> {
        if span.start > span.end || span.end > self.len() {
            return None;
        }
        Some(&self.text[self.boundaries[span.start]..self.boundaries[span.end]])
    }

    /// Explicit sentence spans when attached, otherwise the default segmentation.
    pub fn sentence_spans(&self) -> Vec<CharSpan> {
        match &self.sentences {
            Some(s) => s.clone(),
            None => segment_sentences(&self.text),
        }
    }

    pub fn full_span(&self) -> CharSpan {
        CharSpan { start: 0, end: self.len() }
    }
}

/// All annotations collected for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationBundle {
    pub document: Document,
    pub sets: Vec<AnnotationSet>,
    pub gold: Option<AnnotationSet>,
}

impl AnnotationBundle {
    pub fn annotator_ids(&self) -> impl Iterator<Item = &str> {
        self.sets.iter().map(|s| s.annotator_id.as_str())
    }
}

/// A brat line this crate does not consume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsupportedLine {
    pub line: usize,
    pub kind: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAnn {
    pub set: AnnotationSet,
    pub unsupported: Vec<UnsupportedLine>,
}

/// Parses one `.ann` file for `doc`, cross-checking every offset and
/// quoted surface string against the document text.
pub fn parse_ann(ann_text: &str, doc: &Document, annotator_id: &str) -> Result<ParsedAnn, StandoffError> {
    let ann_text = ann_text.strip_prefix('\u{feff}').unwrap_or(ann_text);
    let mut set = AnnotationSet::new(annotator_id, doc.id.clone());
    let mut unsupported = Vec::new();
    let mut deferred: Vec<(usize, &str, &str)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for (n, raw) in ann_text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = line.split_once('\t').ok_or_else(|| StandoffError::Parse {
            line: line_no,
            message: "expected a tab after the annotation id".into(),
        })?;
        match id.chars().next() {
            Some('T') => {
                let component = parse_text_bound(line_no, id, rest, doc)?;
                if index.insert(component.id.clone(), set.components.len()).is_some() {
                    return Err(StandoffError::Parse { line: line_no, message: format!("duplicate id `{id}`") });
                }
                set.components.push(component);
            }
            Some('A') | Some('R') => deferred.push((line_no, id, rest)),
            _ => unsupported.push(UnsupportedLine {
                line: line_no,
                kind: unsupported_kind(id).into(),
                content: line.to_string(),
            }),
        }
    }

    for (line_no, id, rest) in deferred {
        let mut fields = rest.split_whitespace();
        let name = fields.next().unwrap_or_default();
        if id.starts_with('A') {
            if name != "Sentiment" {
                unsupported.push(UnsupportedLine {
                    line: line_no,
                    kind: format!("attribute {name}"),
                    content: format!("{id}\t{rest}"),
                });
                continue;
            }
            let (Some(target), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(StandoffError::Parse {
                    line: line_no,
                    message: "expected `Sentiment <Tid> <value>`".into(),
                });
            };
            let sentiment: Sentiment =
                value.parse().map_err(|_| StandoffError::UnknownLabel { line: line_no, label: value.to_string() })?;
            let &slot = index.get(target).ok_or_else(|| StandoffError::Parse {
                line: line_no,
                message: format!("attribute target `{target}` is not a text-bound annotation"),
            })?;
            let component = &mut set.components[slot];
            if component.sentiment.is_some() {
                return Err(StandoffError::Parse {
                    line: line_no,
                    message: format!("second sentiment for `{target}`"),
                });
            }
            component.sentiment = Some(sentiment);
        } else {
            let kind: RelationKind =
                name.parse().map_err(|_| StandoffError::UnknownLabel { line: line_no, label: name.to_string() })?;
            let mut arg = |key: &str| -> Result<String, StandoffError> {
                let value = fields
                    .next()
                    .and_then(|f| f.strip_prefix(key))
                    .ok_or_else(|| StandoffError::Parse { line: line_no, message: format!("expected `{key}<Tid>`") })?;
                if !index.contains_key(value) {
                    return Err(StandoffError::Parse {
                        line: line_no,
                        message: format!("relation argument `{value}` is not a text-bound annotation"),
                    });
                }
                Ok(value.to_string())
            };
            let source = arg("Arg1:")?;
            let target = arg("Arg2:")?;
            set.relations.push(RelationAnnotation { id: id.to_string(), kind, source, target });
        }
    }

    Ok(ParsedAnn { set, unsupported })
}

fn unsupported_kind(id: &str) -> &'static str {
    match id.chars().next() {
        Some('E') => "event",
        Some('N') => "normalization",
        Some('M') => "modifier",
        Some('#') => "note",
        Some('*') => "equivalence",
        _ => "unknown",
    }
}

fn parse_text_bound(line: usize, id: &str, rest: &str, doc: &Document) -> Result<ComponentAnnotation, StandoffError> {
    let (header, surface) = rest
        .split_once('\t')
        .ok_or_else(|| StandoffError::Parse { line, message: "text-bound annotation lacks its surface text".into() })?;
    if header.contains(';') {
        return Err(StandoffError::Parse { line, message: "discontinuous spans are not supported".into() });
    }
    let mut fields = header.split_whitespace();
    let (Some(label), Some(start), Some(end), None) = (fields.next(), fields.next(), fields.next(), fields.next())
    else {
        return Err(StandoffError::Parse { line, message: "expected `<Label> <start> <end>`".into() });
    };
    let label: ComponentLabel = label
        .parse()
        .ok()
        .filter(|l: &ComponentLabel| l.is_argumentative())
        .ok_or_else(|| StandoffError::UnknownLabel { line, label: label.to_string() })?;
    let offset = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| StandoffError::Parse { line, message: format!("offset `{s}` is not a non-negative integer") })
    };
    let (start, end) = (offset(start)?, offset(end)?);
    let span = CharSpan::new(start, end)
        .ok_or_else(|| StandoffError::Offset { line, message: format!("empty or inverted span {start} {end}") })?;
    let actual = doc.slice(span).ok_or_else(|| StandoffError::Offset {
        line,
        message: format!("span {span} exceeds document length {}", doc.len()),
    })?;
    if actual != surface {
        return Err(StandoffError::Offset {
            line,
            message: format!("surface `{surface}` does not match document text `{actual}` at {span}"),
        });
    }
    Ok(ComponentAnnotation { id: id.to_string(), span, label, sentiment: None })
}

/// Serializes `set` as brat standoff. Components are renumbered `T1..` in
/// span order, sentiments become `A` lines and relations `R` lines.
pub fn write_ann(set: &AnnotationSet, doc: &Document) -> String {
    let mut order: Vec<&ComponentAnnotation> = set.components.iter().collect();
    order.sort_by_key(|c| (c.span, c.label));
    let ids: HashMap<&str, String> =
        order.iter().enumerate().map(|(i, c)| (c.id.as_str(), format!("T{}", i + 1))).collect();

    let mut out = String::new();
    for c in &order {
        let surface = doc.slice(c.span).unwrap_or_default();
        out.push_str(&format!(
            "{}\t{} {} {}\t{}\n",
            ids[c.id.as_str()],
            c.label.as_str(),
            c.span.start,
            c.span.end,
            surface
        ));
    }
    let mut attr = 0;
    for c in &order {
        if let Some(s) = c.sentiment {
            attr += 1;
            out.push_str(&format!("A{attr}\tSentiment {} {}\n", ids[c.id.as_str()], s));
        }
    }
    for (i, r) in set.relations.iter().enumerate() {
        let (Some(source), Some(target)) = (ids.get(r.source.as_str()), ids.get(r.target.as_str())) else {
            continue;
        };
        out.push_str(&format!("R{}\t{} Arg1:{source} Arg2:{target}\n", i + 1, r.kind));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub documents: usize,
    /// Non-gold sets kept after validation.
    pub sets: usize,
    pub skipped_documents: Vec<SkippedDocument>,
    pub parse_errors: Vec<FileError>,
    pub unsupported: Vec<UnsupportedEntry>,
    pub removed_sets: Vec<RemovedSet>,
    pub gold_only_documents: Vec<String>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedDocument {
    pub doc_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileError {
    pub doc_id: String,
    pub annotator_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsupportedEntry {
    pub doc_id: String,
    pub annotator_id: String,
    pub line: usize,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedSet {
    pub doc_id: String,
    pub annotator_id: String,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Default)]
struct DocLoad {
    bundle: Option<AnnotationBundle>,
    report: LoadReport,
}

/// Loads every document under `root`, validating each annotation set and
/// dropping those with error-severity violations. Output is sorted by
/// document id, then annotator id.
pub fn load_campaign(
    root: &Path,
    policy: &ValidationPolicy,
) -> Result<(Vec<AnnotationBundle>, LoadReport), StandoffError> {
    let mut doc_dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        let path = entry.path();
        if path.is_dir() {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                doc_dirs.push((name.to_string(), path));
            }
        }
    }
    doc_dirs.sort();

    let loads: Vec<DocLoad> =
        doc_dirs.par_iter().map(|(doc_id, dir)| load_document(root, doc_id, dir, policy)).collect::<Result<_, _>>()?;

    let mut bundles = Vec::new();
    let mut report = LoadReport::default();
    for load in loads {
        let r = load.report;
        report.skipped_documents.extend(r.skipped_documents);
        report.parse_errors.extend(r.parse_errors);
        report.unsupported.extend(r.unsupported);
        report.removed_sets.extend(r.removed_sets);
        report.gold_only_documents.extend(r.gold_only_documents);
        report.violations.extend(r.violations);
        if let Some(b) = load.bundle {
            report.sets += b.sets.len();
            bundles.push(b);
        }
    }
    report.documents = bundles.len();
    for removed in &report.removed_sets {
        log::info!("dropped annotation set {}/{}: {:?}", removed.doc_id, removed.annotator_id, removed.rules);
    }
    Ok((bundles, report))
}

fn load_document(root: &Path, doc_id: &str, dir: &Path, policy: &ValidationPolicy) -> Result<DocLoad, StandoffError> {
    let mut load = DocLoad::default();
    let text_path =
        [dir.join(format!("{doc_id}.txt")), root.join(format!("{doc_id}.txt"))].into_iter().find(|p| p.is_file());
    let Some(text_path) = text_path else {
        load.report
            .skipped_documents
            .push(SkippedDocument { doc_id: doc_id.to_string(), reason: "no document text".into() });
        return Ok(load);
    };
    let text = fs::read_to_string(&text_path).map_err(io_err(&text_path))?;
    let document = Document::new(doc_id, &text);

    let mut ann_files: Vec<(String, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("ann") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ann_files.push((stem.to_string(), path.clone()));
            }
        }
    }
    ann_files.sort();

    let mut sets = Vec::new();
    let mut gold = None;
    for (annotator, path) in ann_files {
        let raw = fs::read_to_string(&path).map_err(io_err(&path))?;
        let parsed = match parse_ann(&raw, &document, &annotator) {
            Ok(p) => p,
            Err(e) => {
                load.report.parse_errors.push(FileError {
                    doc_id: doc_id.to_string(),
                    annotator_id: annotator,
                    error: e.to_string(),
                });
                continue;
            }
        };
        load.report.unsupported.extend(parsed.unsupported.iter().map(|u| UnsupportedEntry {
            doc_id: doc_id.to_string(),
            annotator_id: annotator.clone(),
            line: u.line,
            kind: u.kind.clone(),
        }));
        let violations = argmodel::validate(&parsed.set, document.len(), policy);
        let errors: Vec<Rule> = violations.iter().filter(|v| v.severity == Severity::Error).map(|v| v.rule).collect();
        load.report.violations.extend(violations);
        if !errors.is_empty() {
            load.report.removed_sets.push(RemovedSet {
                doc_id: doc_id.to_string(),
                annotator_id: annotator,
                rules: errors,
            });
            continue;
        }
        if annotator == GOLD_ANNOTATOR {
            gold = Some(parsed.set);
        } else {
            sets.push(parsed.set);
        }
    }

    match (sets.is_empty(), gold.is_some()) {
        (true, false) => load
            .report
            .skipped_documents
            .push(SkippedDocument { doc_id: doc_id.to_string(), reason: "no parseable annotation sets".into() }),
        (true, true) => load.report.gold_only_documents.push(doc_id.to_string()),
        _ => {}
    }
    if !sets.is_empty() || gold.is_some() {
        load.bundle = Some(AnnotationBundle { document, sets, gold });
    }
    Ok(load)
}

/// Writes `bundles` as a campaign directory under `root`.
pub fn write_campaign(root: &Path, bundles: &[AnnotationBundle]) -> Result<(), StandoffError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    bundles.par_iter().try_for_each(|bundle| {
        let dir = root.join(&bundle.document.id);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut files: BTreeMap<PathBuf, String> = BTreeMap::new();
        files.insert(dir.join(format!("{}.txt", bundle.document.id)), bundle.document.text().to_string());
        for set in &bundle.sets {
            files.insert(dir.join(format!("{}.ann", set.annotator_id)), write_ann(set, &bundle.document));
        }
        if let Some(gold) = &bundle.gold {
            files.insert(dir.join(format!("{GOLD_ANNOTATOR}.ann")), write_ann(gold, &bundle.document));
        }
        for (path, body) in files {
            fs::write(&path, body).map_err(io_err(&path))?;
        }
        Ok(())
    })
}
