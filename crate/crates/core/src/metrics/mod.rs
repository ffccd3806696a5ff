//! Inter-rater agreement statistics.
//!
//! Nominal metrics (percentage agreement, multi-π, Krippendorff's α) treat
//! every character as an item and NA as an ordinary category. Unitized α
//! treats NA as the gap between units.

mod nominal;
pub(crate) mod report;
mod unitized;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use nominal::{kripp_alpha_nominal, multi_pi, percentage_agreement, LabelMatrix};
pub use report::{
    gold_agreement, nominal_scores, report, AgreementReport, CategoryScores, MetricScores, ReportScope, Scope,
};
pub(crate) use unitized::mix;
pub use unitized::{alpha_u, AlphaU, AlphaUOptions, CategoryAlpha, ExpectedMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    /// Chance agreement is 1: a single category was used everywhere.
    NoVariation,
    /// No item carries two or more values.
    NoPairableValues,
    /// No annotator produced a categorized unit inside the continuum.
    NoUnits,
    /// Expected unitized disagreement is zero.
    ZeroExpectedDisagreement,
}

impl fmt::Display for UndefinedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UndefinedReason::NoVariation => "no variation",
            UndefinedReason::NoPairableValues => "no pairable values",
            UndefinedReason::NoUnits => "no units",
            UndefinedReason::ZeroExpectedDisagreement => "zero expected disagreement",
        };
        f.write_str(s)
    }
}

/// A metric value, or an explicit marker that it is undefined for the input.
/// Serialized as a bare number or `{"undefined": "<reason>"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Score {
    Value(f64),
    Undefined { undefined: UndefinedReason },
}

impl Score {
    pub fn undefined(reason: UndefinedReason) -> Self {
        Score::Undefined { undefined: reason }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(v),
            Score::Undefined { .. } => None,
        }
    }

    pub fn is_defined(self) -> bool {
        self.value().is_some()
    }

    /// `true` only when defined and at least `threshold`.
    pub fn at_least(self, threshold: f64) -> bool {
        self.value().is_some_and(|v| v >= threshold)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Value(v) => write!(f, "{v:.3}"),
            Score::Undefined { .. } => f.write_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

/// Mean of the defined scores, `None` when there are none.
pub fn mean_defined<I: IntoIterator<Item = Score>>(scores: I) -> Option<f64> {
    let (sum, n) = scores.into_iter().filter_map(Score::value).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_json() {
        assert_eq!(serde_json::to_string(&Score::Value(0.5)).unwrap(), "0.5");
        let u = Score::undefined(UndefinedReason::NoUnits);
        let json = serde_json::to_string(&u).unwrap();
        assert_eq!(json, r#"{"undefined":"no_units"}"#);
        assert_eq!(serde_json::from_str::<Score>(&json).unwrap(), u);
        assert_eq!(serde_json::from_str::<Score>("-0.25").unwrap(), Score::Value(-0.25));
    }

    #[test]
    fn undefined_is_never_at_least() {
        assert!(!Score::undefined(UndefinedReason::NoVariation).at_least(-10.0));
        assert!(Score::Value(0.6).at_least(0.6));
        assert_eq!(
            mean_defined([Score::Value(1.0), Score::undefined(UndefinedReason::NoUnits), Score::Value(0.0)]),
            Some(0.5)
        );
    }
}
