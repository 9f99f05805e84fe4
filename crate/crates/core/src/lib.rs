//! Quality metrics for subtitle files.
//!
//! This crate scores an automatically generated SRT file against a
//! reference SRT file. Its central metric is SubER (subtitle edit rate):
//! an edit distance with phrase shifts computed over words and line/block
//! break tokens, where matches, substitutions and shifts are only allowed
//! between subtitles that overlap in time. A catalogue of baseline
//! metrics (WER variants, segment-aligned BLEU/TER/chrF, TER-br, t-WER)
//! is built from the same parts.
//!
//! The pieces compose bottom-up:
//!
//! * [`srt`] parses and renders SRT files;
//! * [`token`] turns blocks into token streams and segments;
//! * [`align`] pairs hypothesis tokens with reference segments when no
//!   alignment is given (by edit distance or by interpolated timings);
//! * [`ter`] is the edit-distance-with-shifts core and the SubER metric;
//! * [`metrics`] assembles the full metric catalogue;
//! * [`score`] holds the result types shared by all of them.
//!
//! Everything is a pure function over immutable data; values can be
//! shared freely across threads.

pub mod align;
pub mod metrics;
pub mod score;
pub mod srt;
pub mod ter;
pub mod token;

pub use align::{interpolate_word_timings, levenshtein_align, time_align, SegmentPair, TimedWord};
pub use metrics::{
    compute_metric, pairs_for_metric, segmented_metric, t_wer, ter_br, wer, MetricOptions,
    SegmentationLevel, SegmentedKind,
};
pub use score::{MetricError, MetricScore, ScoreDetails, SegmentLevel, METRIC_NAMES};
pub use srt::{
    parse_srt, parse_srt_lenient, render_srt, strip_file_markup, strip_markup, ParseError,
    SubtitleBlock, SubtitleFile, TimeSpan, Timestamp,
};
pub use ter::{
    split_scoring_regions, suber, suber_with_config, ter_with_shifts, EditCounts, MatchPredicate,
    RegionPair, ScoreConfig, ShiftConfig,
};
pub use token::{
    block_segments, mask_words, split_sentences, tokenize_file, NormalizationMode,
    PunctuationHandling, Segment, SegmentOrigin, Token, TokenKind,
};
