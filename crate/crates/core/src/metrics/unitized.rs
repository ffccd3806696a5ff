//! Krippendorff's unitized α (α_U) over a continuum of characters.
//!
//! Each annotator partitions the continuum into categorized units and gaps.
//! For one category `c`, sections of two annotators that intersect
//! contribute a squared distance:
//!
//! * two `c` units: `(b_u − b_v)² + (e_u − e_v)²`
//! * a `c` unit lying wholly inside the other annotator's gap: `l²`
//! * anything else: 0
//!
//! Observed disagreement sums this over all ordered annotator pairs,
//! normalized by `m(m−1)L²`. Expected disagreement is the same quantity
//! when every unit is dropped at a uniformly random admissible position
//! (length preserved) against the partner's actual sections. It is available
//! in closed form or as a seeded randomization estimate.
//!
//! Summing over ordered pairs, the section sum equals a unit-centric sum:
//! every unit `u` of annotator `i` contributes, against partner `j`,
//! `Σ_v d(u, v)` over the `c` units `v` of `j` it overlaps, or `2l²` when it
//! overlaps none. The expectation is taken over that form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MetricError, Score, UndefinedReason};
use crate::argmodel::{CharSpan, ComponentLabel, LabeledSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ExpectedMode {
    ClosedForm,
    Randomization { resamples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlphaUOptions {
    pub expected: ExpectedMode,
}

impl Default for AlphaUOptions {
    fn default() -> Self {
        AlphaUOptions { expected: ExpectedMode::ClosedForm }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAlpha {
    pub label: ComponentLabel,
    pub units: usize,
    pub observed: f64,
    pub expected: f64,
    /// Standard error of `expected` under randomization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_se: Option<f64>,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaU {
    /// Joint score `1 − ΣDo / ΣDe` over categories, equivalently the
    /// per-category scores weighted by expected disagreement.
    pub score: Score,
    pub observed: f64,
    pub expected: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_se: Option<f64>,
    pub annotators: usize,
    pub length: usize,
    pub per_category: Vec<CategoryAlpha>,
}

impl AlphaU {
    pub fn category(&self, label: ComponentLabel) -> Option<&CategoryAlpha> {
        self.per_category.iter().find(|c| c.label == label)
    }
}

type Unit = (usize, usize);

#[derive(Debug, Clone, Copy)]
struct Section {
    start: usize,
    end: usize,
    unit: bool,
}

/// Computes α_U for `annotations` (one list of labeled spans per annotator)
/// restricted to `continuum`, over the given `categories`. Spans are clipped
/// to the continuum; NA spans are ignored.
pub fn alpha_u(
    annotations: &[Vec<LabeledSpan>],
    continuum: CharSpan,
    categories: &[ComponentLabel],
    opts: &AlphaUOptions,
) -> Result<AlphaU, MetricError> {
    let m = annotations.len();
    if m < 2 {
        return Err(MetricError::DegenerateInput(format!("at least 2 annotators required, got {m}")));
    }
    let length = continuum.len();
    if length == 0 {
        return Err(MetricError::DegenerateInput("empty continuum".into()));
    }

    let clipped: Vec<Vec<LabeledSpan>> = annotations
        .iter()
        .map(|spans| {
            let mut out: Vec<LabeledSpan> = spans
                .iter()
                .filter(|s| s.label.is_argumentative())
                .filter_map(|s| {
                    s.span
                        .clip(&continuum)
                        .map(|span| LabeledSpan { span: span.relative_to(continuum.start), label: s.label })
                })
                .collect();
            out.sort();
            out
        })
        .collect();
    for (i, spans) in clipped.iter().enumerate() {
        if spans.windows(2).any(|w| w[0].span.intersects(&w[1].span)) {
            return Err(MetricError::DegenerateInput(format!("annotator #{i} has overlapping units")));
        }
    }

    let norm = (m * (m - 1)) as f64 * (length as f64).powi(2);
    let mut per_category = Vec::with_capacity(categories.len());
    for (slot, &label) in categories.iter().enumerate() {
        let units: Vec<Vec<Unit>> = clipped
            .iter()
            .map(|spans| spans.iter().filter(|s| s.label == label).map(|s| (s.span.start, s.span.end)).collect())
            .collect();
        let count: usize = units.iter().map(Vec::len).sum();
        let observed = observed_sum(&units, length) / norm;
        let (expected, expected_se) = match opts.expected {
            ExpectedMode::ClosedForm => (expected_sum(&units, length) / norm, None),
            ExpectedMode::Randomization { resamples, seed } => {
                let (mean, se) = expected_randomized(&units, length, resamples, seed ^ mix(slot as u64));
                (mean / norm, Some(se / norm))
            }
        };
        let score = ratio_score(count, observed, expected);
        per_category.push(CategoryAlpha { label, units: count, observed, expected, expected_se, score });
    }

    let units: usize = per_category.iter().map(|c| c.units).sum();
    let observed: f64 = per_category.iter().map(|c| c.observed).sum();
    let expected: f64 = per_category.iter().map(|c| c.expected).sum();
    let expected_se = match opts.expected {
        ExpectedMode::ClosedForm => None,
        ExpectedMode::Randomization { .. } => {
            Some(per_category.iter().filter_map(|c| c.expected_se).map(|s| s * s).sum::<f64>().sqrt())
        }
    };
    Ok(AlphaU {
        score: ratio_score(units, observed, expected),
        observed,
        expected,
        expected_se,
        annotators: m,
        length,
        per_category,
    })
}

fn ratio_score(units: usize, observed: f64, expected: f64) -> Score {
    if units == 0 {
        Score::undefined(UndefinedReason::NoUnits)
    } else if expected <= 0.0 {
        Score::undefined(UndefinedReason::ZeroExpectedDisagreement)
    } else if observed == 0.0 {
        Score::Value(1.0)
    } else {
        Score::Value(1.0 - observed / expected)
    }
}

pub(crate) fn mix(x: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sections(units: &[Unit], length: usize) -> Vec<Section> {
    let mut out = Vec::with_capacity(2 * units.len() + 1);
    let mut pos = 0;
    for &(start, end) in units {
        if start > pos {
            out.push(Section { start: pos, end: start, unit: false });
        }
        out.push(Section { start, end, unit: true });
        pos = end;
    }
    if pos < length {
        out.push(Section { start: pos, end: length, unit: false });
    }
    out
}

fn sq(x: i64) -> u128 {
    (x as i128 * x as i128) as u128
}

fn delta(g: &Section, h: &Section) -> u128 {
    match (g.unit, h.unit) {
        (true, true) => sq(g.start as i64 - h.start as i64) + sq(g.end as i64 - h.end as i64),
        (true, false) if h.start <= g.start && g.end <= h.end => sq((g.end - g.start) as i64),
        (false, true) if g.start <= h.start && h.end <= g.end => sq((h.end - h.start) as i64),
        _ => 0,
    }
}

/// Σ over ordered annotator pairs and intersecting sections of δ².
fn observed_sum(units: &[Vec<Unit>], length: usize) -> f64 {
    let secs: Vec<Vec<Section>> = units.iter().map(|u| sections(u, length)).collect();
    let mut total: u128 = 0;
    for (i, a) in secs.iter().enumerate() {
        for (j, b) in secs.iter().enumerate() {
            if i == j {
                continue;
            }
            let (mut x, mut y) = (0, 0);
            while x < a.len() && y < b.len() {
                total += delta(&a[x], &b[y]);
                match a[x].end.cmp(&b[y].end) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        x += 1;
                        y += 1;
                    }
                }
            }
        }
    }
    total as f64
}

/// Σ_{k=lo}^{hi} k² for integers, possibly negative.
fn square_sum(lo: i64, hi: i64) -> i128 {
    fn cumulative(n: i128) -> i128 {
        n * (n + 1) * (2 * n + 1) / 6
    }
    if lo > hi {
        return 0;
    }
    cumulative(hi as i128) - cumulative(lo as i128 - 1)
}

/// Exact expectation of the unit-centric disagreement of one unit of length
/// `len` placed uniformly at random against the partner's `units`,
/// multiplied by the number of placements.
fn placement_total(len: usize, partner: &[Unit], length: usize) -> i128 {
    let last = (length - len) as i64;
    let l = len as i64;
    let mut distance: i128 = 0;
    for &(b, e) in partner {
        let (b, e) = (b as i64, e as i64);
        let lo = (b - l + 1).max(0);
        let hi = (e - 1).min(last);
        if lo <= hi {
            distance += square_sum(lo - b, hi - b) + square_sum(lo - (e - l), hi - (e - l));
        }
    }
    let mut isolated: i128 = 0;
    let mut pos = 0;
    for &(b, e) in partner.iter().chain(std::iter::once(&(length, length))) {
        let gap = b.saturating_sub(pos);
        if gap >= len {
            isolated += (gap - len + 1) as i128;
        }
        pos = e;
    }
    distance + 2 * (l as i128) * (l as i128) * isolated
}

fn expected_sum(units: &[Vec<Unit>], length: usize) -> f64 {
    let mut total = 0.0;
    for (i, own) in units.iter().enumerate() {
        for (j, partner) in units.iter().enumerate() {
            if i == j {
                continue;
            }
            for &(b, e) in own {
                let len = e - b;
                let placements = (length - len + 1) as f64;
                total += placement_total(len, partner, length) as f64 / placements;
            }
        }
    }
    total
}

/// Unit-centric disagreement of a unit at `[start, start + len)` against `partner`.
fn placed_disagreement(start: usize, len: usize, partner: &[Unit]) -> u128 {
    let end = start + len;
    let first = partner.partition_point(|&(_, e)| e <= start);
    let mut total = 0;
    let mut hit = false;
    for &(b, e) in &partner[first..] {
        if b >= end {
            break;
        }
        hit = true;
        total += sq(start as i64 - b as i64) + sq(end as i64 - e as i64);
    }
    if hit {
        total
    } else {
        2 * sq(len as i64)
    }
}

/// Monte Carlo estimate of `expected_sum`: mean and standard error over
/// `resamples` independent relocations of every unit.
fn expected_randomized(units: &[Vec<Unit>], length: usize, resamples: usize, seed: u64) -> (f64, f64) {
    let resamples = resamples.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for r in 0..resamples {
        let mut total: u128 = 0;
        for (i, own) in units.iter().enumerate() {
            for (j, partner) in units.iter().enumerate() {
                if i == j {
                    continue;
                }
                for &(b, e) in own {
                    let len = e - b;
                    let start = rng.gen_range(0..=length - len);
                    total += placed_disagreement(start, len, partner);
                }
            }
        }
        // Welford
        let x = total as f64;
        let delta = x - mean;
        mean += delta / (r + 1) as f64;
        m2 += delta * (x - mean);
    }
    let variance = m2 / (resamples - 1) as f64;
    (mean, (variance / resamples as f64).sqrt())
}
