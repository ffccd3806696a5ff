use super::{MetricError, Score, UndefinedReason};

/// Category assignments for `items × annotators`, with optional missing cells.
///
/// Only the multiset of values on each item matters to the metrics here, so
/// a column need not be the same person on every item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    categories: usize,
    annotators: usize,
    cells: Vec<Option<u16>>,
}

impl LabelMatrix {
    /// Builds a complete matrix from one row of item values per annotator.
    pub fn from_annotator_rows(rows: &[Vec<usize>], categories: usize) -> Result<Self, MetricError> {
        let items = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != items) {
            return Err(MetricError::DegenerateInput("annotator rows differ in length".into()));
        }
        Self::from_items(rows.len(), categories, (0..items).map(|i| rows.iter().map(|r| Some(r[i])).collect()))
    }

    /// Builds a matrix item by item; each item lists one optional value per annotator.
    pub fn from_items<I>(annotators: usize, categories: usize, items: I) -> Result<Self, MetricError>
    where
        I: IntoIterator<Item = Vec<Option<usize>>>,
    {
        if annotators < 2 {
            return Err(MetricError::DegenerateInput(format!("at least 2 annotators required, got {annotators}")));
        }
        if categories == 0 || categories > u16::MAX as usize {
            return Err(MetricError::DegenerateInput(format!("unsupported category count {categories}")));
        }
        let mut cells = Vec::new();
        for item in items {
            if item.len() != annotators {
                return Err(MetricError::DegenerateInput("item width differs from annotator count".into()));
            }
            for v in item {
                match v {
                    Some(c) if c >= categories => {
                        return Err(MetricError::DegenerateInput(format!("category {c} out of range")));
                    }
                    v => cells.push(v.map(|c| c as u16)),
                }
            }
        }
        Ok(LabelMatrix { categories, annotators, cells })
    }

    pub fn annotators(&self) -> usize {
        self.annotators
    }

    pub fn items(&self) -> usize {
        self.cells.len() / self.annotators
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn value(&self, item: usize, annotator: usize) -> Option<usize> {
        self.cells[item * self.annotators + annotator].map(usize::from)
    }

    /// One-vs-rest view: category 1 where the value is `category`, 0 elsewhere.
    pub fn binarize(&self, category: usize) -> LabelMatrix {
        LabelMatrix {
            categories: 2,
            annotators: self.annotators,
            cells: self.cells.iter().map(|v| v.map(|c| u16::from(c as usize == category))).collect(),
        }
    }

    fn tally(&self) -> Tally {
        let mut t = Tally { totals: vec![0; self.categories], ..Tally::default() };
        let mut counts = vec![0u64; self.categories];
        let mut common_m = None;
        let mut constant = true;
        for item in self.cells.chunks(self.annotators) {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut m = 0u64;
            for c in item.iter().flatten() {
                counts[*c as usize] += 1;
                m += 1;
            }
            if m < 2 {
                continue;
            }
            match common_m {
                None => common_m = Some(m),
                Some(prev) if prev != m => constant = false,
                _ => {}
            }
            let agree: u64 = counts.iter().map(|n| n * n.saturating_sub(1)).sum();
            let pairs = m * (m - 1);
            // ordered pairs of differing values
            let disagree = pairs - agree;
            t.items += 1;
            t.agree += agree as u128;
            t.agree_ratio += agree as f64 / pairs as f64;
            t.disagree += disagree as u128;
            t.disagree_weighted += disagree as f64 / (m - 1) as f64;
            for (total, n) in t.totals.iter_mut().zip(&counts) {
                *total += n;
            }
        }
        t.constant_m = if constant { common_m } else { None };
        t
    }
}

#[derive(Debug, Default)]
struct Tally {
    items: u64,
    constant_m: Option<u64>,
    agree: u128,
    agree_ratio: f64,
    disagree: u128,
    disagree_weighted: f64,
    totals: Vec<u64>,
}

impl Tally {
    fn n(&self) -> u128 {
        self.totals.iter().map(|&n| n as u128).sum()
    }

    fn sum_squares(&self) -> u128 {
        self.totals.iter().map(|&n| (n as u128) * (n as u128)).sum()
    }

    fn mean_agreement(&self) -> f64 {
        match self.constant_m {
            Some(m) => self.agree as f64 / (self.items as f64 * (m * (m - 1)) as f64),
            None => self.agree_ratio / self.items as f64,
        }
    }
}

/// Mean over items of the share of agreeing annotator pairs.
pub fn percentage_agreement(matrix: &LabelMatrix) -> Score {
    let t = matrix.tally();
    if t.items == 0 {
        return Score::undefined(UndefinedReason::NoPairableValues);
    }
    Score::Value(t.mean_agreement())
}

/// Fleiss' multi-rater π: `(P − Pe) / (1 − Pe)` with `Pe` from pooled
/// category proportions.
pub fn multi_pi(matrix: &LabelMatrix) -> Score {
    let t = matrix.tally();
    if t.items == 0 {
        return Score::undefined(UndefinedReason::NoPairableValues);
    }
    let n = t.n();
    let squares = t.sum_squares();
    if squares == n * n {
        return Score::undefined(UndefinedReason::NoVariation);
    }
    match t.constant_m {
        Some(m) => {
            // (A/B − C/D) / (1 − C/D) = (A·D − C·B) / (B·(D − C)), all integers
            let a = t.agree as i128;
            let b = (t.items as i128) * ((m * (m - 1)) as i128);
            let (c, d) = (squares as i128, (n * n) as i128);
            Score::Value((a * d - c * b) as f64 / (b * (d - c)) as f64)
        }
        None => {
            let expected = squares as f64 / (n * n) as f64;
            Score::Value((t.mean_agreement() - expected) / (1.0 - expected))
        }
    }
}

/// Krippendorff's α with the nominal distance, computed from the
/// coincidence matrix of pairable values. Items with fewer than two values
/// are skipped.
pub fn kripp_alpha_nominal(matrix: &LabelMatrix) -> Score {
    let t = matrix.tally();
    if t.items == 0 {
        return Score::undefined(UndefinedReason::NoPairableValues);
    }
    let n = t.n();
    let expected_pairs = n * n - t.sum_squares();
    if expected_pairs == 0 {
        return Score::undefined(UndefinedReason::NoVariation);
    }
    match t.constant_m {
        Some(m) => {
            let num = (n - 1) * t.disagree;
            let den = (m as u128 - 1) * expected_pairs;
            Score::Value((den as i128 - num as i128) as f64 / den as f64)
        }
        None => Score::Value(1.0 - (n - 1) as f64 * t.disagree_weighted / expected_pairs as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // item1 = (A, A, B), item2 = (B, B, B); A = 0, B = 1
    fn worked() -> LabelMatrix {
        LabelMatrix::from_annotator_rows(&[vec![0, 1], vec![0, 1], vec![1, 1]], 2).unwrap()
    }

    #[test]
    fn worked_instance() {
        assert_eq!(percentage_agreement(&worked()), Score::Value(2.0 / 3.0));
        assert_eq!(multi_pi(&worked()), Score::Value(0.25));
        assert_eq!(kripp_alpha_nominal(&worked()), Score::Value(0.375));
    }

    #[test]
    fn perfect_agreement() {
        let m = LabelMatrix::from_annotator_rows(&[vec![0, 1, 2, 1], vec![0, 1, 2, 1], vec![0, 1, 2, 1]], 3).unwrap();
        assert_eq!(percentage_agreement(&m), Score::Value(1.0));
        assert_eq!(multi_pi(&m), Score::Value(1.0));
        assert_eq!(kripp_alpha_nominal(&m), Score::Value(1.0));
    }

    #[test]
    fn total_disagreement() {
        let m = LabelMatrix::from_annotator_rows(&[vec![0, 1, 0], vec![1, 0, 1]], 2).unwrap();
        assert_eq!(percentage_agreement(&m), Score::Value(0.0));
    }

    #[test]
    fn single_category_is_undefined_for_chance_corrected() {
        let m = LabelMatrix::from_annotator_rows(&[vec![1, 1], vec![1, 1]], 3).unwrap();
        assert_eq!(percentage_agreement(&m), Score::Value(1.0));
        assert_eq!(multi_pi(&m), Score::undefined(UndefinedReason::NoVariation));
        assert_eq!(kripp_alpha_nominal(&m), Score::undefined(UndefinedReason::NoVariation));
    }

    #[test]
    fn disagreement_on_one_item_is_chance_level() {
        // one item, two values: observed and expected disagreement coincide
        let one = LabelMatrix::from_annotator_rows(&[vec![0], vec![1]], 2).unwrap();
        assert_eq!(kripp_alpha_nominal(&one), Score::Value(0.0));
        let two = LabelMatrix::from_annotator_rows(&[vec![0, 1], vec![1, 0]], 2).unwrap();
        assert_eq!(kripp_alpha_nominal(&two), Score::Value(-0.5));
    }

    #[test]
    fn missing_values() {
        let m = LabelMatrix::from_items(
            3,
            2,
            vec![vec![Some(0), Some(0), None], vec![Some(1), None, None], vec![Some(1), Some(0), Some(1)]],
        )
        .unwrap();
        // item 2 is unpairable; agreement = (1 + 1/3) / 2
        let pct = percentage_agreement(&m).value().unwrap();
        assert!((pct - 2.0 / 3.0).abs() < 1e-12);
        // coincidences: item1 o00 = 2; item3 o01 = o10 = 1, o11 = 1
        // n0 = 3, n1 = 2, n = 5; alpha = 1 - 4 * 2 / 12
        let alpha = kripp_alpha_nominal(&m).value().unwrap();
        assert!((alpha - (1.0 - 8.0 / 12.0)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(LabelMatrix::from_annotator_rows(&[vec![0, 1]], 2).is_err());
        assert!(LabelMatrix::from_annotator_rows(&[vec![0, 1], vec![0]], 2).is_err());
        assert!(LabelMatrix::from_annotator_rows(&[vec![0, 5], vec![0, 1]], 2).is_err());
        let empty = LabelMatrix::from_annotator_rows(&[vec![], vec![]], 2).unwrap();
        assert_eq!(percentage_agreement(&empty), Score::undefined(UndefinedReason::NoPairableValues));
    }

    #[test]
    fn binarize_one_vs_rest() {
        let m = LabelMatrix::from_annotator_rows(&[vec![0, 2], vec![1, 2]], 3).unwrap();
        let b = m.binarize(2);
        assert_eq!((b.value(0, 0), b.value(0, 1), b.value(1, 0)), (Some(0), Some(0), Some(1)));
    }
}
