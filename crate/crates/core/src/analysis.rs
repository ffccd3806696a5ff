//! Error analysis: confusion probability matrices between annotators and
//! the distribution of per-document α_U.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argmodel::{CharSpan, ComponentLabel};
use crate::metrics::{report::char_rows, Score};
use crate::segment::segment_clauses;
use crate::standoff::AnnotationBundle;
use crate::table::{fmt_opt, Table};

const K: usize = ComponentLabel::COUNT;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

/// Unit of comparison between two annotators' labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    Character,
    /// Clauses split at sentence terminators and commas; an annotator's
    /// clause label is its most frequent character label there.
    Clause,
}

/// Confusion probability matrix: row = one annotator's label, column = the
/// other annotator's label, over ordered pairs of distinct annotators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpm {
    pub granularity: Granularity,
    pub items: u64,
    pub counts: [[u64; K]; K],
    /// Row-normalized counts; `None` for labels that never occur.
    pub probabilities: [[Option<f64>; K]; K],
}

/// A window of one document whose annotation sets feed the matrix.
#[derive(Debug, Clone, Copy)]
pub struct CpmInput<'a> {
    pub bundle: &'a AnnotationBundle,
    pub window: CharSpan,
}

pub fn cpm(inputs: &[CpmInput<'_>], granularity: Granularity) -> Result<Cpm, AnalysisError> {
    let usable: Vec<&CpmInput> = inputs.iter().filter(|i| i.bundle.sets.len() >= 2).collect();
    if usable.is_empty() {
        return Err(AnalysisError::DegenerateInput("no document with at least 2 annotation sets".into()));
    }
    let (items, counts) = usable
        .par_iter()
        .map(|input| input_counts(input, granularity))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold((0u64, [[0u64; K]; K]), |(n, mut acc), (m, c)| {
            for (row, add) in acc.iter_mut().zip(c) {
                for (x, y) in row.iter_mut().zip(add) {
                    *x += y;
                }
            }
            (n + m, acc)
        });
    let probabilities = counts.map(|row| {
        let total: u64 = row.iter().sum();
        row.map(|c| (total > 0).then(|| c as f64 / total as f64))
    });
    Ok(Cpm { granularity, items, counts, probabilities })
}

fn input_counts(input: &CpmInput<'_>, granularity: Granularity) -> Result<(u64, [[u64; K]; K]), AnalysisError> {
    let doc = &input.bundle.document;
    let rows = char_rows(&input.bundle.sets, doc.len()).map_err(|e| AnalysisError::DegenerateInput(e.to_string()))?;
    let window = input.window.clip(&doc.full_span()).unwrap_or(CharSpan { start: 0, end: 0 });
    let mut counts = [[0u64; K]; K];
    let mut items = 0u64;
    let mut add = |tally: &[u64; K]| {
        items += 1;
        for a in 0..K {
            for b in 0..K {
                counts[a][b] += if a == b { tally[a] * tally[a].saturating_sub(1) } else { tally[a] * tally[b] };
            }
        }
    };
    match granularity {
        Granularity::Character => {
            for pos in window.start..window.end {
                let mut tally = [0u64; K];
                for row in &rows {
                    tally[row[pos].index()] += 1;
                }
                add(&tally);
            }
        }
        Granularity::Clause => {
            let text = doc.slice(window).unwrap_or("");
            for clause in segment_clauses(text) {
                let clause = clause.shifted(window.start);
                let mut tally = [0u64; K];
                for row in &rows {
                    tally[majority(&row[clause.start..clause.end]).index()] += 1;
                }
                add(&tally);
            }
        }
    }
    Ok((items, counts))
}

/// Most frequent label, preferring argument labels and then canonical order.
fn majority(labels: &[ComponentLabel]) -> ComponentLabel {
    let mut tally = [0usize; K];
    for l in labels {
        tally[l.index()] += 1;
    }
    let best = *tally.iter().max().unwrap_or(&0);
    ComponentLabel::ARGUMENTATIVE
        .into_iter()
        .find(|l| best > 0 && tally[l.index()] == best)
        .unwrap_or(ComponentLabel::Na)
}

impl Cpm {
    pub fn probability(&self, given: ComponentLabel, other: ComponentLabel) -> Option<f64> {
        self.probabilities[given.index()][other.index()]
    }

    pub fn table(&self, title: &str) -> Table {
        let mut t = Table::new(std::iter::once("").chain(ComponentLabel::ALL.iter().map(|l| l.short()))).titled(title);
        for label in ComponentLabel::ALL {
            t.row(
                std::iter::once(label.short().to_string())
                    .chain(self.probabilities[label.index()].iter().map(|p| fmt_opt(*p))),
            );
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Share {
    pub threshold: f64,
    pub share: Option<f64>,
}

/// Thresholds whose at-least shares are always reported.
pub const REPORTED_THRESHOLDS: [f64; 3] = [0.5, 0.6, 0.7];

/// Score counts in fixed-width bins over `[-1, 1]`. Scores below -1 fall in
/// the first bin; undefined scores are counted separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub bins: Vec<Bin>,
    pub scored: u64,
    pub undefined: u64,
    pub shares: Vec<Share>,
    #[serde(skip)]
    values: Vec<f64>,
}

impl Histogram {
    pub fn from_scores<I: IntoIterator<Item = Score>>(scores: I, bin_width: f64) -> Histogram {
        assert!(bin_width > 0.0 && bin_width <= 2.0, "bin width must lie in (0, 2]");
        let n = (2.0 / bin_width).round().max(1.0) as usize;
        let mut bins: Vec<Bin> = (0..n)
            .map(|i| Bin {
                lower: -1.0 + i as f64 * bin_width,
                upper: if i + 1 == n { 1.0 } else { -1.0 + (i + 1) as f64 * bin_width },
                count: 0,
            })
            .collect();
        let mut values = Vec::new();
        let mut undefined = 0;
        for s in scores {
            match s.value() {
                Some(v) => {
                    let idx = (((v + 1.0) / bin_width + 1e-9).floor().max(0.0) as usize).min(n - 1);
                    bins[idx].count += 1;
                    values.push(v);
                }
                None => undefined += 1,
            }
        }
        values.sort_by(f64::total_cmp);
        let mut h = Histogram { bin_width, bins, scored: values.len() as u64, undefined, shares: Vec::new(), values };
        h.shares = REPORTED_THRESHOLDS.iter().map(|&t| Share { threshold: t, share: h.share_at_least(t) }).collect();
        h
    }

    /// Share of scored values `>= threshold`; `None` when nothing was scored.
    pub fn share_at_least(&self, threshold: f64) -> Option<f64> {
        if self.values.is_empty() {
            return self.shares.iter().find(|s| s.threshold == threshold).and_then(|s| s.share);
        }
        let below = self.values.partition_point(|&v| v < threshold);
        Some((self.values.len() - below) as f64 / self.values.len() as f64)
    }

    pub fn table(&self, title: &str) -> Table {
        comparison_table(title, &[("documents", self)])
    }
}

/// Histograms side by side, one column each, followed by the reported shares.
pub fn comparison_table(title: &str, columns: &[(&str, &Histogram)]) -> Table {
    let mut t = Table::new(std::iter::once("alpha_u").chain(columns.iter().map(|c| c.0))).titled(title);
    let Some((_, first)) = columns.first() else {
        return t;
    };
    for (i, bin) in first.bins.iter().enumerate() {
        let close = if i + 1 == first.bins.len() { ']' } else { ')' };
        t.row(
            std::iter::once(format!("[{:.1}, {:.1}{close}", bin.lower, bin.upper))
                .chain(columns.iter().map(|(_, h)| h.bins.get(i).map_or(0, |b| b.count).to_string())),
        );
    }
    t.row(std::iter::once("undefined".to_string()).chain(columns.iter().map(|(_, h)| h.undefined.to_string())));
    for &threshold in &REPORTED_THRESHOLDS {
        t.row(
            std::iter::once(format!("share >= {threshold:.1}"))
                .chain(columns.iter().map(|(_, h)| fmt_opt(h.share_at_least(threshold)))),
        );
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argmodel::{AnnotationSet, ComponentAnnotation, Sentiment};
    use crate::metrics::UndefinedReason;
    use crate::standoff::Document;
    use ComponentLabel::*;

    fn set(name: &str, comps: &[(usize, usize, ComponentLabel)]) -> AnnotationSet {
        let mut s = AnnotationSet::new(name, "d");
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

    fn bundle(text: &str, sets: Vec<AnnotationSet>) -> AnnotationBundle {
        AnnotationBundle { document: Document::new("d", text), sets, gold: None }
    }

    fn whole(b: &AnnotationBundle) -> CpmInput<'_> {
        CpmInput { bundle: b, window: b.document.full_span() }
    }

    #[test]
    fn identical_annotators_give_identity() {
        let comps = [(0, 2, Claim), (3, 5, Premise)];
        let b = bundle("abcdef", vec![set("a", &comps), set("b", &comps)]);
        let m = cpm(&[whole(&b)], Granularity::Character).unwrap();
        for given in ComponentLabel::ALL {
            for other in ComponentLabel::ALL {
                let p = m.probability(given, other);
                match given {
                    Claim | Premise | Na => assert_eq!(p, Some(if given == other { 1.0 } else { 0.0 })),
                    _ => assert_eq!(p, None),
                }
            }
        }
        assert_eq!(m.items, 6);
    }

    #[test]
    fn two_character_example() {
        // char 0: (Claim, Claim); char 1: (NA, Premise)
        let b = bundle("ab", vec![set("a", &[(0, 1, Claim)]), set("b", &[(0, 1, Claim), (1, 2, Premise)])]);
        let m = cpm(&[whole(&b)], Granularity::Character).unwrap();
        assert_eq!(m.probability(Claim, Claim), Some(1.0));
        assert_eq!(m.probability(Na, Premise), Some(1.0));
        assert_eq!(m.probability(Premise, Na), Some(1.0));
        assert_eq!(m.counts[Premise.index()][Na.index()], 1);
    }

    #[test]
    fn counts_symmetric_rows_normalized() {
        let b = bundle(
            "abcdefghij",
            vec![set("a", &[(0, 4, Claim)]), set("b", &[(2, 6, Premise)]), set("c", &[(1, 9, MajorClaim)])],
        );
        let m = cpm(&[whole(&b)], Granularity::Character).unwrap();
        let total: u64 = m.counts.iter().flatten().sum();
        assert_eq!(total, 10 * 3 * 2);
        for a in 0..K {
            for b in 0..K {
                assert_eq!(m.counts[a][b], m.counts[b][a]);
            }
            if let Some(sum) = m.probabilities[a].iter().map(|p| p.unwrap_or(0.0)).reduce(|x, y| x + y) {
                if m.counts[a].iter().sum::<u64>() > 0 {
                    assert!((sum - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn clause_granularity() {
        // clauses [0,3) and [3,6)
        let b = bundle("ab，cd。", vec![set("a", &[(0, 2, Claim)]), set("b", &[(0, 2, Claim), (3, 5, Premise)])]);
        let m = cpm(&[whole(&b)], Granularity::Clause).unwrap();
        assert_eq!(m.items, 2);
        assert_eq!(m.probability(Claim, Claim), Some(1.0));
        assert_eq!(m.probability(Na, Premise), Some(1.0));
    }

    #[test]
    fn needs_two_sets() {
        let b = bundle("ab", vec![set("a", &[])]);
        assert!(cpm(&[whole(&b)], Granularity::Character).is_err());
        assert!(cpm(&[], Granularity::Character).is_err());
    }

    #[test]
    fn table_layout() {
        let b = bundle("ab", vec![set("a", &[(0, 1, Claim)]), set("b", &[(0, 1, Claim), (1, 2, Premise)])]);
        let text = cpm(&[whole(&b)], Granularity::Character).unwrap().table("CPM").render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "        |    MC | Claim | Premise |  PSIC |    NA");
        assert_eq!(lines[4], "Claim   | 0.000 | 1.000 |   0.000 | 0.000 | 0.000");
    }

    #[test]
    fn histogram_bins_and_shares() {
        let h = Histogram::from_scores(vec![Score::Value(1.0); 3], 0.1);
        assert_eq!(h.bins.len(), 20);
        assert_eq!(h.bins[19].count, 3);
        assert_eq!(h.share_at_least(0.5), Some(1.0));

        let h = Histogram::from_scores(
            [Score::Value(0.4), Score::Value(0.6), Score::undefined(UndefinedReason::NoUnits), Score::Value(-3.0)],
            0.1,
        );
        assert_eq!((h.scored, h.undefined), (3, 1));
        assert_eq!(h.bins[14].count, 1);
        assert_eq!(h.bins[16].count, 1);
        assert_eq!(h.bins[0].count, 1);
        assert_eq!(h.bins.iter().map(|b| b.count).sum::<u64>(), h.scored);

        let h = Histogram::from_scores([Score::Value(0.4), Score::Value(0.6)], 0.1);
        assert_eq!(h.share_at_least(0.5), Some(0.5));
        let bin_of = |v: f64| Histogram::from_scores([Score::Value(v)], 0.1).bins.iter().position(|b| b.count == 1);
        assert_eq!(bin_of(-0.7), Some(3));
        assert_eq!(bin_of(0.0), Some(10));
    }

    #[test]
    fn shares_survive_serialization() {
        let h = Histogram::from_scores([Score::Value(0.4), Score::Value(0.6)], 0.1);
        let back: Histogram = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        assert_eq!(back.share_at_least(0.5), Some(0.5));
    }

    #[test]
    fn comparison_side_by_side() {
        let pre = Histogram::from_scores([Score::Value(0.4), Score::Value(0.6)], 0.5);
        let post = Histogram::from_scores([Score::Value(0.6)], 0.5);
        let text = comparison_table("H", &[("pre", &pre), ("post", &post)]).render();
        assert!(text.contains("[0.5, 1.0]   |     1 |     1"), "{text}");
        assert!(text.contains("share >= 0.5 | 0.500 | 1.000"), "{text}");
    }
}
