//! File-based pipeline stages driven by one configuration.
//!
//! Every stage reads the campaign from the input root, reads earlier stages'
//! artifacts from the output root and writes its own artifacts there. The
//! order is validate → agreement → filter → aggregate → build → cpm →
//! report; `simulate` writes a synthetic campaign into the input root.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{aggregate_window, centroid, AggregatedDocument, AggregationOptions};
use crate::analysis::{comparison_table, cpm, Cpm, CpmInput, Granularity, Histogram};
use crate::argmodel::{AnnotationSet, CharSpan, ComponentLabel, Rule, Severity, ValidationPolicy};
use crate::corpus::{build, DocumentClass, DocumentDecision, Thresholds};
use crate::metrics::{alpha_u, mean_defined, report, AgreementReport, AlphaUOptions, ReportScope, Score};
use crate::quality::{filter, score_devotedness, DevotednessRecord, RemovalReport, TailRule};
use crate::simulate::{generate, CampaignConfig};
use crate::standoff::{load_campaign, AnnotationBundle, LoadReport};
use crate::table::{fmt_opt, Table};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage `{stage}` needs `{missing}` from stage `{requires}`; run it first")]
    MissingStage { stage: Stage, requires: Stage, missing: String },
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit status: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn input_err(e: impl fmt::Display) -> PipelineError {
    PipelineError::Input(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Simulate,
    Validate,
    Agreement,
    Filter,
    Aggregate,
    Build,
    Cpm,
    Report,
}

impl Stage {
    /// The analysis stages in execution order.
    pub const CHAIN: [Stage; 7] =
        [Stage::Validate, Stage::Agreement, Stage::Filter, Stage::Aggregate, Stage::Build, Stage::Cpm, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Validate => "validate",
            Stage::Agreement => "agreement",
            Stage::Filter => "filter",
            Stage::Aggregate => "aggregate",
            Stage::Build => "build",
            Stage::Cpm => "cpm",
            Stage::Report => "report",
        }
    }

    /// Artifact whose presence marks the stage as done.
    pub fn marker(self) -> &'static str {
        match self {
            Stage::Simulate => "ground_truth.json",
            Stage::Validate => artifacts::VALIDATION,
            Stage::Agreement => artifacts::AGREEMENT_SUMMARY,
            Stage::Filter => artifacts::RETAINED,
            Stage::Aggregate => artifacts::AGGREGATED,
            Stage::Build => artifacts::DECISIONS,
            Stage::Cpm => artifacts::CPM,
            Stage::Report => artifacts::REPORT,
        }
    }

    fn prerequisites(self) -> &'static [Stage] {
        let at = Stage::CHAIN.iter().position(|s| *s == self).unwrap_or(0);
        &Stage::CHAIN[..at]
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Artifact paths relative to the output root.
pub mod artifacts {
    pub const VALIDATION: &str = "validation/report.json";
    pub const VALIDATION_TXT: &str = "validation/summary.txt";
    pub const AGREEMENT_DOCS: &str = "agreement/documents.jsonl";
    pub const AGREEMENT_SUMMARY: &str = "agreement/summary.json";
    pub const AGREEMENT_TXT: &str = "agreement/summary.txt";
    pub const HISTOGRAM: &str = "agreement/histogram.json";
    pub const DEVOTEDNESS: &str = "filter/devotedness.json";
    pub const REMOVAL: &str = "filter/removal.json";
    pub const RETAINED: &str = "filter/retained.json";
    pub const FILTER_TXT: &str = "filter/summary.txt";
    pub const AGGREGATED: &str = "aggregate/documents.jsonl";
    pub const EASY: &str = "corpus/easy.jsonl";
    pub const SENTENCES: &str = "corpus/sentences.jsonl";
    pub const DECISIONS: &str = "corpus/decisions.json";
    pub const STATISTICS: &str = "corpus/statistics.json";
    pub const STATISTICS_TXT: &str = "corpus/statistics.txt";
    pub const CPM: &str = "cpm/cpm.json";
    pub const CPM_TXT: &str = "cpm/cpm.txt";
    pub const REPORT: &str = "report.json";
    pub const REPORT_TXT: &str = "report.txt";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualityConfig {
    pub penalty_threshold: u32,
    pub min_sets: usize,
    pub tail: TailRule,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig { penalty_threshold: 2, min_sets: 2, tail: TailRule::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CpmConfig {
    pub granularity: Granularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Campaign directory (one subdirectory per document).
    pub input: PathBuf,
    /// Directory receiving every artifact.
    pub output: PathBuf,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub thresholds: Thresholds,
    pub quality: QualityConfig,
    pub validation: ValidationPolicy,
    pub alpha_u: AlphaUOptions,
    pub aggregation: AggregationOptions,
    pub cpm: CpmConfig,
    pub simulate: CampaignConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PathBuf::from("campaign"),
            output: PathBuf::from("out"),
            threads: 0,
            thresholds: Thresholds::default(),
            quality: QualityConfig::default(),
            validation: ValidationPolicy::default(),
            alpha_u: AlphaUOptions::default(),
            aggregation: AggregationOptions::default(),
            cpm: CpmConfig::default(),
            simulate: CampaignConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a TOML file; relative `input`/`output` paths resolve against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if config.input.is_relative() {
            config.input = base.join(&config.input);
        }
        if config.output.is_relative() {
            config.output = base.join(&config.output);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg = |e: &dyn fmt::Display| PipelineError::Config(e.to_string());
        self.thresholds.validate().map_err(|e| cfg(&e))?;
        self.simulate.validate().map_err(|e| cfg(&e))?;
        if self.quality.min_sets < 2 {
            return Err(PipelineError::Config("quality.min_sets must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.quality.tail.share) {
            return Err(PipelineError::Config("quality.tail.share must lie in [0, 1]".into()));
        }
        if !(self.aggregation.overlap > 0.0 && self.aggregation.overlap <= 1.0) {
            return Err(PipelineError::Config("aggregation.overlap must lie in (0, 1]".into()));
        }
        if let crate::metrics::ExpectedMode::Randomization { resamples, .. } = self.alpha_u.expected {
            if resamples == 0 {
                return Err(PipelineError::Config("alpha_u.expected.resamples must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Runs `stage` on a dedicated thread pool.
pub fn run(stage: Stage, config: &PipelineConfig) -> Result<(), PipelineError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    pool.install(|| {
        let ctx = Context { config };
        ctx.check_prerequisites(stage)?;
        match stage {
            Stage::Simulate => ctx.simulate(),
            Stage::Validate => ctx.validate(),
            Stage::Agreement => ctx.agreement(),
            Stage::Filter => ctx.filter(),
            Stage::Aggregate => ctx.aggregate(),
            Stage::Build => ctx.build(),
            Stage::Cpm => ctx.cpm(),
            Stage::Report => ctx.report(),
        }
    })
}

/// Runs every analysis stage in order.
pub fn run_all(config: &PipelineConfig) -> Result<(), PipelineError> {
    Stage::CHAIN.iter().try_for_each(|&s| run(s, config))
}

struct Context<'a> {
    config: &'a PipelineConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ValidationSummary {
    policy: ValidationPolicy,
    violation_counts: BTreeMap<Rule, usize>,
    error_count: usize,
    warning_count: usize,
    report: LoadReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AgreementSummary {
    documents: usize,
    skipped_documents: Vec<String>,
    gold_documents: Vec<String>,
    rows: Vec<AgreementRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AgreementRow {
    label: String,
    percentage: Option<f64>,
    multi_pi: Option<f64>,
    alpha: Option<f64>,
    alpha_u: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RetainedDocument {
    doc_id: String,
    annotators: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Retained {
    documents: Vec<RetainedDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AggregatedEntry {
    doc_id: String,
    #[serde(flatten)]
    aggregated: AggregatedDocument,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CpmArtifact {
    easy: Option<Cpm>,
    sentences: Option<Cpm>,
}

struct Loaded {
    regular: Vec<AnnotationBundle>,
    gold: Vec<AnnotationBundle>,
    report: LoadReport,
}

impl Context<'_> {
    fn out(&self, rel: &str) -> PathBuf {
        self.config.output.join(rel)
    }

    fn check_prerequisites(&self, stage: Stage) -> Result<(), PipelineError> {
        if stage != Stage::Simulate && !self.config.input.is_dir() {
            return Err(PipelineError::Input(format!(
                "input campaign {} is not a directory",
                self.config.input.display()
            )));
        }
        for &requires in stage.prerequisites() {
            if !self.out(requires.marker()).is_file() {
                return Err(PipelineError::MissingStage { stage, requires, missing: requires.marker().to_string() });
            }
        }
        Ok(())
    }

    fn write(&self, rel: &str, body: &str) -> Result<(), PipelineError> {
        let path = self.out(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|source| PipelineError::Io { path: dir.to_path_buf(), source })?;
        }
        fs::write(&path, body).map_err(|source| PipelineError::Io { path, source })
    }

    fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<(), PipelineError> {
        let body = serde_json::to_string_pretty(value).map_err(input_err)?;
        self.write(rel, &(body + "\n"))
    }

    fn write_jsonl<T: Serialize>(&self, rel: &str, values: &[T]) -> Result<(), PipelineError> {
        let mut body = String::new();
        for v in values {
            body.push_str(&serde_json::to_string(v).map_err(input_err)?);
            body.push('\n');
        }
        self.write(rel, &body)
    }

    fn read_string(&self, rel: &str) -> Result<String, PipelineError> {
        let path = self.out(rel);
        fs::read_to_string(&path).map_err(|source| PipelineError::Io { path, source })
    }

    fn read_json<T: DeserializeOwned>(&self, rel: &str) -> Result<T, PipelineError> {
        serde_json::from_str(&self.read_string(rel)?).map_err(|e| PipelineError::Input(format!("{rel}: {e}")))
    }

    fn load(&self) -> Result<Loaded, PipelineError> {
        let (bundles, report) = load_campaign(&self.config.input, &self.config.validation).map_err(input_err)?;
        let (gold, regular) = bundles.into_iter().partition(|b| b.gold.is_some());
        Ok(Loaded { regular, gold, report })
    }

    /// Regular bundles restricted to the documents and annotators kept by `filter`.
    fn load_filtered(&self) -> Result<Vec<AnnotationBundle>, PipelineError> {
        let retained: Retained = self.read_json(artifacts::RETAINED)?;
        let keep: BTreeMap<String, BTreeSet<String>> =
            retained.documents.into_iter().map(|d| (d.doc_id, d.annotators.into_iter().collect())).collect();
        let mut out = Vec::new();
        for mut b in self.load()?.regular {
            let Some(annotators) = keep.get(&b.document.id) else {
                continue;
            };
            b.sets.retain(|s| annotators.contains(&s.annotator_id));
            if b.sets.len() < self.config.quality.min_sets {
                return Err(PipelineError::Input(format!(
                    "document {} changed since `filter` ran; rerun it",
                    b.document.id
                )));
            }
            out.push(b);
        }
        Ok(out)
    }

    fn simulate(&self) -> Result<(), PipelineError> {
        let campaign = generate(&self.config.simulate).map_err(|e| match e {
            crate::simulate::SimulateError::Config(m) => PipelineError::Config(m),
            other => input_err(other),
        })?;
        let input = &self.config.input;
        if input.exists() && fs::read_dir(input).map(|mut d| d.next().is_some()).unwrap_or(false) {
            return Err(PipelineError::Input(format!(
                "refusing to simulate into non-empty directory {}",
                input.display()
            )));
        }
        campaign.write(input, &input.join(Stage::Simulate.marker())).map_err(input_err)?;
        log::info!(
            "simulated {} documents ({} gold) into {}",
            campaign.bundles.len(),
            campaign.bundles.iter().filter(|b| b.gold.is_some()).count(),
            input.display()
        );
        Ok(())
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let loaded = self.load()?;
        let mut violation_counts = BTreeMap::new();
        let (mut error_count, mut warning_count) = (0, 0);
        for v in &loaded.report.violations {
            *violation_counts.entry(v.rule).or_insert(0) += 1;
            match v.severity {
                Severity::Error => error_count += 1,
                Severity::Warning => warning_count += 1,
            }
        }
        let summary = ValidationSummary {
            policy: self.config.validation.clone(),
            violation_counts,
            error_count,
            warning_count,
            report: loaded.report,
        };
        let mut table = Table::new(["Rule", "Severity", "Count"]).titled("Validation");
        for (rule, count) in &summary.violation_counts {
            table.row([rule.to_string(), format!("{:?}", summary.policy.severity(*rule)), count.to_string()]);
        }
        let r = &summary.report;
        let text = format!(
            "documents: {}\nannotation sets retained: {}\nannotation sets removed: {}\nparse errors: {}\nskipped documents: {}\nviolations: {} ({} errors, {} warnings)\n\n{}",
            r.documents,
            r.sets,
            r.removed_sets.len(),
            r.parse_errors.len(),
            r.skipped_documents.len(),
            r.violations.len(),
            summary.error_count,
            summary.warning_count,
            table.render()
        );
        self.write_json(artifacts::VALIDATION, &summary)?;
        self.write(artifacts::VALIDATION_TXT, &text)
    }

    fn agreement(&self) -> Result<(), PipelineError> {
        let loaded = self.load()?;
        let (scorable, skipped): (Vec<&AnnotationBundle>, Vec<&AnnotationBundle>) =
            loaded.regular.iter().partition(|b| b.sets.len() >= 2 && !b.document.is_empty());
        let reports: Vec<AgreementReport> = scorable
            .par_iter()
            .map(|b| {
                report(b, ReportScope::Document, &self.config.alpha_u)
                    .map(|mut r| r.remove(0))
                    .map_err(|e| PipelineError::Input(format!("{}: {e}", b.document.id)))
            })
            .collect::<Result<_, _>>()?;

        let mean = |f: &dyn Fn(&AgreementReport) -> Score| mean_defined(reports.iter().map(f));
        let mut rows: Vec<AgreementRow> = ComponentLabel::ARGUMENTATIVE
            .iter()
            .enumerate()
            .map(|(k, label)| AgreementRow {
                label: label.short().to_string(),
                percentage: mean(&|r| r.per_category[k].scores.percentage),
                multi_pi: mean(&|r| r.per_category[k].scores.multi_pi),
                alpha: mean(&|r| r.per_category[k].scores.alpha),
                alpha_u: mean(&|r| r.per_category[k].scores.alpha_u),
            })
            .collect();
        rows.push(AgreementRow {
            label: "All".into(),
            percentage: mean(&|r| r.overall.percentage),
            multi_pi: mean(&|r| r.overall.multi_pi),
            alpha: mean(&|r| r.overall.alpha),
            alpha_u: mean(&|r| r.overall.alpha_u),
        });
        let summary = AgreementSummary {
            documents: reports.len(),
            skipped_documents: skipped.iter().map(|b| b.document.id.clone()).collect(),
            gold_documents: loaded.gold.iter().map(|b| b.document.id.clone()).collect(),
            rows,
        };
        let histogram = Histogram::from_scores(reports.iter().map(|r| r.alpha_u()), 0.1);

        let mut table = Table::new(["Label", "%", "pi", "alpha", "alpha_u"])
            .titled(format!("Mean per-document agreement over {} documents", summary.documents));
        for r in &summary.rows {
            table.row([
                r.label.clone(),
                fmt_opt(r.percentage),
                fmt_opt(r.multi_pi),
                fmt_opt(r.alpha),
                fmt_opt(r.alpha_u),
            ]);
        }
        let text = format!("{}\n{}", table.render(), histogram.table("Distribution of document alpha_u").render());
        self.write_jsonl(artifacts::AGREEMENT_DOCS, &reports)?;
        self.write_json(artifacts::HISTOGRAM, &histogram)?;
        self.write_json(artifacts::AGREEMENT_SUMMARY, &summary)?;
        self.write(artifacts::AGREEMENT_TXT, &text)
    }

    fn document_alphas(&self, bundles: &[AnnotationBundle]) -> Result<Vec<Score>, PipelineError> {
        bundles
            .par_iter()
            .filter(|b| b.sets.len() >= 2 && !b.document.is_empty())
            .map(|b| {
                let spans: Vec<_> = b.sets.iter().map(AnnotationSet::labeled_spans).collect();
                alpha_u(&spans, b.document.full_span(), &ComponentLabel::ARGUMENTATIVE, &self.config.alpha_u)
                    .map(|a| a.score)
                    .map_err(|e| PipelineError::Input(format!("{}: {e}", b.document.id)))
            })
            .collect()
    }

    fn filter(&self) -> Result<(), PipelineError> {
        let loaded = self.load()?;
        if loaded.gold.is_empty() {
            return Err(PipelineError::Input("the campaign contains no gold document (gold.ann)".into()));
        }
        let annotators: Vec<String> = loaded
            .regular
            .iter()
            .chain(&loaded.gold)
            .flat_map(|b| b.sets.iter().map(|s| s.annotator_id.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let records: Vec<DevotednessRecord> =
            score_devotedness(&loaded.gold, &annotators, &self.config.quality.tail, &self.config.alpha_u)
                .map_err(input_err)?;
        let pre = Histogram::from_scores(self.document_alphas(&loaded.regular)?, 0.1);
        let (kept, mut removal): (Vec<AnnotationBundle>, RemovalReport) =
            filter(&records, loaded.regular, self.config.quality.penalty_threshold, self.config.quality.min_sets);
        let post = Histogram::from_scores(self.document_alphas(&kept)?, 0.1);

        let mut penalties: BTreeMap<u32, usize> = BTreeMap::new();
        for r in &records {
            *penalties.entry(r.penalty).or_default() += 1;
        }
        let mut table = Table::new(["Penalty", "Annotators"]).titled("Less-devotedness degrees");
        for (p, n) in &penalties {
            table.row([p.to_string(), n.to_string()]);
        }
        let text = format!(
            "annotators: {}\nremoved annotators: {}\nremoved annotation sets: {}\nremoved documents: {}\nretained documents: {}\n\n{}\n{}",
            records.len(),
            removal.removed_annotators.len(),
            removal.removed_sets,
            removal.removed_documents.len(),
            removal.retained_documents,
            table.render(),
            comparison_table("Document alpha_u before and after filtering", &[("before", &pre), ("after", &post)]).render()
        );
        removal.pre_histogram = Some(pre);
        removal.post_histogram = Some(post);
        let retained = Retained {
            documents: kept
                .iter()
                .map(|b| RetainedDocument {
                    doc_id: b.document.id.clone(),
                    annotators: b.sets.iter().map(|s| s.annotator_id.clone()).collect(),
                })
                .collect(),
        };
        self.write_json(artifacts::DEVOTEDNESS, &records)?;
        self.write_json(artifacts::REMOVAL, &removal)?;
        self.write(artifacts::FILTER_TXT, &text)?;
        self.write_json(artifacts::RETAINED, &retained)
    }

    fn aggregate(&self) -> Result<(), PipelineError> {
        let bundles = self.load_filtered()?;
        let entries: Vec<AggregatedEntry> = bundles
            .par_iter()
            .map(|b| {
                let dist = centroid(&b.sets, b.document.len())
                    .map_err(|e| PipelineError::Input(format!("{}: {e}", b.document.id)))?;
                Ok(AggregatedEntry {
                    doc_id: b.document.id.clone(),
                    aggregated: aggregate_window(
                        &b.sets,
                        &dist,
                        b.document.full_span(),
                        true,
                        &self.config.aggregation,
                    ),
                })
            })
            .collect::<Result<_, PipelineError>>()?;
        self.write_jsonl(artifacts::AGGREGATED, &entries)
    }

    fn build(&self) -> Result<(), PipelineError> {
        let bundles = self.load_filtered()?;
        let corpus = build(&bundles, &self.config.thresholds, &self.config.alpha_u, &self.config.aggregation)
            .map_err(input_err)?;
        self.write_jsonl(artifacts::EASY, &corpus.easy)?;
        self.write_jsonl(artifacts::SENTENCES, &corpus.sentences)?;
        self.write_json(artifacts::STATISTICS, &corpus.statistics)?;
        self.write(artifacts::STATISTICS_TXT, &corpus.statistics.render())?;
        self.write_json(artifacts::DECISIONS, &corpus.decisions)
    }

    fn cpm(&self) -> Result<(), PipelineError> {
        let bundles = self.load_filtered()?;
        let decisions: Vec<DocumentDecision> = self.read_json(artifacts::DECISIONS)?;
        let by_id: BTreeMap<&str, &AnnotationBundle> = bundles.iter().map(|b| (b.document.id.as_str(), b)).collect();
        let mut easy = Vec::new();
        let mut sentences = Vec::new();
        for d in &decisions {
            let Some(&bundle) = by_id.get(d.doc_id.as_str()) else {
                return Err(PipelineError::Input(format!("document {} changed since `build` ran", d.doc_id)));
            };
            match d.class {
                DocumentClass::Easy => easy.push(CpmInput { bundle, window: bundle.document.full_span() }),
                DocumentClass::Controversial => sentences.extend(
                    d.sentences
                        .iter()
                        .filter(|s| s.selected)
                        .map(|s| CpmInput { bundle, window: CharSpan { start: s.start, end: s.end } }),
                ),
            }
        }
        let granularity = self.config.cpm.granularity;
        let compute = |inputs: &[CpmInput]| -> Result<Option<Cpm>, PipelineError> {
            if inputs.is_empty() {
                return Ok(None);
            }
            cpm(inputs, granularity).map(Some).map_err(input_err)
        };
        let artifact = CpmArtifact { easy: compute(&easy)?, sentences: compute(&sentences)? };
        let mut text = String::new();
        for (title, m) in
            [("CPM: easy reviews", &artifact.easy), ("CPM: less-controversial sentences", &artifact.sentences)]
        {
            match m {
                Some(m) => text.push_str(&m.table(title).render()),
                None => text.push_str(&format!("{title}\n(no records)\n")),
            }
            text.push('\n');
        }
        self.write_json(artifacts::CPM, &artifact)?;
        self.write(artifacts::CPM_TXT, &text)
    }

    fn report(&self) -> Result<(), PipelineError> {
        let sections = [
            ("validation", artifacts::VALIDATION, artifacts::VALIDATION_TXT),
            ("agreement", artifacts::AGREEMENT_SUMMARY, artifacts::AGREEMENT_TXT),
            ("filter", artifacts::REMOVAL, artifacts::FILTER_TXT),
            ("corpus", artifacts::STATISTICS, artifacts::STATISTICS_TXT),
            ("cpm", artifacts::CPM, artifacts::CPM_TXT),
        ];
        let mut json = serde_json::Map::new();
        let mut text = String::new();
        for (name, json_path, text_path) in sections {
            let mut value: serde_json::Value = self.read_json(json_path)?;
            if name == "validation" {
                // the full violation list stays in its own artifact
                if let Some(report) = value.get_mut("report").and_then(|r| r.as_object_mut()) {
                    report.remove("violations");
                    report.remove("unsupported");
                }
            }
            json.insert(name.to_string(), value);
            text.push_str(&format!("== {name} ==\n\n"));
            text.push_str(&self.read_string(text_path)?);
            text.push('\n');
        }
        json.insert("histogram".into(), self.read_json::<serde_json::Value>(artifacts::HISTOGRAM)?);
        self.write_json(artifacts::REPORT, &json)?;
        self.write(artifacts::REPORT_TXT, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let c = PipelineConfig::default();
        assert_eq!((c.thresholds.easy_threshold, c.thresholds.sentence_threshold), (0.6, 0.7));
        assert_eq!((c.quality.penalty_threshold, c.quality.min_sets), (2, 2));
        assert!(c.validation.allow_premise_to_major_claim);
        assert_eq!(c.cpm.granularity, Granularity::Character);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
        let partial = PipelineConfig::from_toml(
            "input = \"x\"\n[thresholds]\neasy_threshold = 0.5\n[alpha_u.expected]\nmode = \"randomization\"\nresamples = 100\nseed = 3\n[cpm]\ngranularity = \"clause\"\n",
        )
        .unwrap();
        assert_eq!(partial.thresholds.easy_threshold, 0.5);
        assert_eq!(partial.thresholds.sentence_threshold, 0.7);
        assert_eq!(partial.cpm.granularity, Granularity::Clause);
        assert!(matches!(
            partial.alpha_u.expected,
            crate::metrics::ExpectedMode::Randomization { resamples: 100, seed: 3 }
        ));
    }

    #[test]
    fn config_errors_exit_two() {
        let err = PipelineConfig::from_toml("thresholds = 3").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let mut c = PipelineConfig::default();
        c.thresholds.easy_threshold = 1.5;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn prerequisites_follow_chain() {
        assert!(Stage::Validate.prerequisites().is_empty());
        assert_eq!(Stage::Build.prerequisites(), &[Stage::Validate, Stage::Agreement, Stage::Filter, Stage::Aggregate]);
        assert!(Stage::Simulate.prerequisites().is_empty());
    }
}
