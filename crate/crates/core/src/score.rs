//! Result types shared by all metric implementations.

use serde::Serialize;
use thiserror::Error;

use crate::ter::EditCounts;
use crate::token::NormalizationMode;

/// Every metric name the tool accepts and emits.
pub const METRIC_NAMES: [&str; 15] = [
    "SubER",
    "SubER-cased",
    "WER",
    "WER-cased",
    "WER-break",
    "t-WER",
    "BLEU-block",
    "BLEU-sent",
    "BLEU-sent-break",
    "TER-block",
    "TER-sent",
    "TER-sent-break",
    "chrF-sent",
    "TER-br-block",
    "TER-br-sent",
];

/// Granularity at which hypothesis and reference were compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentLevel {
    File,
    Block,
    Sentence,
    TSegment,
    None,
}

/// Matched/total n-gram counts per order, plus token lengths.
#[derive(Debug, Clone, Default, Serialize)]
pub struct NGramStats {
    pub matched: Vec<u64>,
    pub hyp_total: Vec<u64>,
    pub ref_total: Vec<u64>,
    pub hyp_length: u64,
    pub ref_length: u64,
}

impl NGramStats {
    pub fn with_orders(n: usize) -> Self {
        NGramStats {
            matched: vec![0; n],
            hyp_total: vec![0; n],
            ref_total: vec![0; n],
            hyp_length: 0,
            ref_length: 0,
        }
    }
}

/// The numbers behind a score: either edit counts or n-gram statistics.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ScoreDetails {
    Edits(EditCounts),
    NGrams(NGramStats),
}

/// A computed metric value together with everything needed to interpret it.
#[derive(Debug, Clone, Serialize)]
pub struct MetricScore {
    pub metric: String,
    /// Percent for the error-rate family, points in [0, 100] for BLEU/chrF.
    pub value: f64,
    pub mode: NormalizationMode,
    pub segment_level: SegmentLevel,
    pub details: ScoreDetails,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("reference contains no tokens")]
    EmptyReference,
    #[error("no reference segments to align against")]
    NoReferenceSegments,
    #[error("reference segment has no time span")]
    SegmentWithoutSpan,
    #[error("a scoring region holds {tokens} tokens, over the {limit}-token limit; split the files or raise the limit")]
    RegionTooLarge { tokens: usize, limit: usize },
    #[error("unknown metric {name:?}; valid names: {}", METRIC_NAMES.join(", "))]
    UnknownMetric { name: String },
}
