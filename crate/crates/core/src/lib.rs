//! Reliability measurement, quality control and aggregation for
//! crowdsourced argument annotations of short reviews.
//!
//! The pipeline mirrors how such a corpus is assembled after collection:
//! ingest brat standoff annotations ([`standoff`]), check them against the
//! argumentation model ([`argmodel`]), measure agreement ([`metrics`]),
//! remove less-devoted annotators using gold documents ([`quality`]),
//! aggregate the survivors into a confidence-scored corpus ([`aggregate`],
//! [`corpus`]) and analyse the remaining confusion ([`analysis`]).
//! [`simulate`] fabricates campaigns with known ground truth and
//! [`pipeline`] runs every stage from a single configuration.

pub mod aggregate;
pub mod analysis;
pub mod argmodel;
pub mod corpus;
pub mod metrics;
pub mod pipeline;
pub mod quality;
pub mod segment;
pub mod simulate;
pub mod standoff;
pub mod table;

pub use argmodel::{
    AnnotationSet, CharSpan, ComponentAnnotation, ComponentLabel, LabeledSpan, RelationAnnotation, RelationKind,
    Sentiment,
};
pub use metrics::Score;
pub use standoff::{AnnotationBundle, Document};
