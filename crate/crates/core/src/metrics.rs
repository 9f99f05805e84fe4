//! The metric catalogue, assembled from parsing, tokenization, alignment
//! and the edit-distance core.
//!
//! Every metric accepts two parsed subtitle files and returns a
//! [`MetricScore`]. [`compute_metric`] dispatches on the canonical metric
//! names listed in [`crate::score::METRIC_NAMES`], applying each metric's
//! default normalization mode.

use std::collections::HashMap;
use std::hash::Hash;

use crate::align::{interpolate_word_timings, levenshtein_align, time_align, AlignmentMethod, SegmentPair};
use crate::score::{MetricError, MetricScore, NGramStats, ScoreDetails, SegmentLevel};
use crate::srt::SubtitleFile;
use crate::ter::{
    suber_with_config, ter_with_shifts_detailed, EditCounts, MatchPredicate, ScoreConfig, ShiftConfig,
};
use crate::token::{
    block_segments, mask_words, split_sentences, tokenize_file, NormalizationMode, Segment, Token,
};

/// Reference segmentation for the segment-aligned metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentationLevel {
    Block,
    Sentence,
}

impl SegmentationLevel {
    fn segments(self, file: &SubtitleFile, mode: NormalizationMode, with_breaks: bool) -> Vec<Segment> {
        match self {
            SegmentationLevel::Block => block_segments(file, mode, with_breaks),
            SegmentationLevel::Sentence => split_sentences(file, mode, with_breaks),
        }
    }

    fn reported(self) -> SegmentLevel {
        match self {
            SegmentationLevel::Block => SegmentLevel::Block,
            SegmentationLevel::Sentence => SegmentLevel::Sentence,
        }
    }
}

/// Which corpus metric to compute over aligned segment pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentedKind {
    Bleu,
    Ter,
    Chrf,
}

// Word-level edit counts without shifts. Substitutions are minimized as a
// secondary objective so the ins/del/sub composition is deterministic;
// with distance and substitutions fixed, the rest follows from the
// sequence lengths and no backtrace is needed.
fn wer_counts(hyp: &[Token], reference: &[Token]) -> EditCounts {
    const D: u64 = 1 << 32;
    const S: u64 = D | 1;
    let mut prev: Vec<u64> = (0..=reference.len() as u64).map(|j| j * D).collect();
    let mut cur = vec![0u64; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = (i as u64 + 1) * D;
        for (j, r) in reference.iter().enumerate() {
            let diag = prev[j] + if h.same_content(r) { 0 } else { S };
            cur[j + 1] = diag.min(prev[j + 1] + D).min(cur[j] + D);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let packed = prev[reference.len()];
    let (dist, subs) = ((packed >> 32) as i64, (packed & 0xffff_ffff) as i64);
    let (h_len, r_len) = (hyp.len() as i64, reference.len() as i64);
    // insertions - deletions == |hyp| - |ref|, insertions + deletions == dist - subs
    let insertions = (dist - subs + h_len - r_len) / 2;
    let deletions = (dist - subs) - insertions;
    EditCounts {
        insertions: insertions as usize,
        deletions: deletions as usize,
        substitutions: subs as usize,
        shifts: 0,
        ref_length: reference.len(),
    }
}

/// Word error rate over whole-file token streams: plain Levenshtein
/// distance, no shifts, any token may substitute any other. With
/// `with_breaks` the break tokens take part like ordinary words.
pub fn wer(
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    mode: NormalizationMode,
    with_breaks: bool,
) -> Result<MetricScore, MetricError> {
    let hyp_tokens = tokenize_file(hyp, mode, with_breaks);
    let ref_tokens = tokenize_file(reference, mode, with_breaks);
    if ref_tokens.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let counts = wer_counts(&hyp_tokens, &ref_tokens);
    Ok(MetricScore {
        metric: "WER".to_string(),
        value: counts.score_percent(),
        mode,
        segment_level: SegmentLevel::File,
        details: ScoreDetails::Edits(counts),
        warnings: Vec::new(),
    })
}

/// Time-constrained word error rate: hypothesis words get interpolated
/// timings, are assigned to the reference block they overlap most, and
/// each block is scored by plain edit distance. Hypothesis words
/// overlapping no reference block are dropped (and reported).
pub fn t_wer(
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    mode: NormalizationMode,
) -> Result<MetricScore, MetricError> {
    let ref_segments = block_segments(reference, mode, false);
    if ref_segments.iter().all(|s| s.is_empty()) {
        return Err(MetricError::EmptyReference);
    }
    let hyp_words = interpolate_word_timings(hyp, mode);
    let (pairs, dropped) = time_align(&hyp_words, &ref_segments)?;
    let mut counts = EditCounts::default();
    for pair in &pairs {
        counts += wer_counts(&pair.hyp.tokens, &pair.reference.tokens);
    }
    let mut warnings = Vec::new();
    if dropped > 0 {
        warnings.push(format!(
            "{dropped} hypothesis word(s) overlapped no reference block and were dropped"
        ));
    }
    Ok(MetricScore {
        metric: "t-WER".to_string(),
        value: counts.score_percent(),
        mode,
        segment_level: SegmentLevel::TSegment,
        details: ScoreDetails::Edits(counts),
        warnings,
    })
}

fn is_template_translation(hyp: &SubtitleFile, reference: &SubtitleFile) -> bool {
    hyp.blocks.len() == reference.blocks.len()
        && hyp
            .blocks
            .iter()
            .zip(&reference.blocks)
            .all(|(h, r)| h.span() == r.span())
}

/// Pairs hypothesis content with reference segments at the given level.
/// Block level with identical block timings on both sides (template
/// translation) pairs blocks directly; everything else goes through the
/// edit-distance alignment of the hypothesis token stream.
pub fn aligned_pairs(
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    level: SegmentationLevel,
    mode: NormalizationMode,
    with_breaks: bool,
    masked: bool,
) -> Result<Vec<SegmentPair>, MetricError> {
    let mut ref_segments = level.segments(reference, mode, with_breaks);
    if ref_segments.iter().map(Segment::len).sum::<usize>() == 0 {
        return Err(MetricError::EmptyReference);
    }
    if masked {
        for seg in &mut ref_segments {
            seg.tokens = mask_words(&seg.tokens);
        }
    }
    if level == SegmentationLevel::Block && is_template_translation(hyp, reference) {
        let hyp_segments = block_segments(hyp, mode, with_breaks);
        return Ok(hyp_segments
            .into_iter()
            .zip(ref_segments)
            .map(|(mut h, r)| {
                if masked {
                    h.tokens = mask_words(&h.tokens);
                }
                SegmentPair { hyp: h, reference: r, method: AlignmentMethod::BlockParallel }
            })
            .collect());
    }
    let mut hyp_tokens = tokenize_file(hyp, mode, with_breaks);
    if masked {
        hyp_tokens = mask_words(&hyp_tokens);
    }
    levenshtein_align(&hyp_tokens, &ref_segments)
}

fn ngram_tally<T: Eq + Hash>(hyp: &[T], reference: &[T], n: usize) -> (u64, u64, u64) {
    let mut ref_counts: HashMap<&[T], u64> = HashMap::new();
    for w in reference.windows(n) {
        *ref_counts.entry(w).or_insert(0) += 1;
    }
    let mut hyp_counts: HashMap<&[T], u64> = HashMap::new();
    for w in hyp.windows(n) {
        *hyp_counts.entry(w).or_insert(0) += 1;
    }
    let matched = hyp_counts
        .iter()
        .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    let hyp_total = hyp.len().saturating_sub(n - 1) as u64;
    let ref_total = reference.len().saturating_sub(n - 1) as u64;
    (matched, hyp_total, ref_total)
}

const BLEU_ORDERS: usize = 4;

/// Corpus-level BLEU over aligned segment pairs: clipped n-gram precisions
/// up to 4-grams, geometric mean, brevity penalty. Orders for which either
/// side has no n-grams at all are skipped; zero precisions are floored at
/// `1/(2 * total)`. Both conditions are reported as warnings.
pub fn bleu_over_pairs(pairs: &[SegmentPair]) -> (f64, NGramStats, Vec<String>) {
    let mut stats = NGramStats::with_orders(BLEU_ORDERS);
    for pair in pairs {
        let hyp: Vec<&str> = pair.hyp.tokens.iter().map(|t| t.surface.as_str()).collect();
        let reference: Vec<&str> = pair.reference.tokens.iter().map(|t| t.surface.as_str()).collect();
        stats.hyp_length += hyp.len() as u64;
        stats.ref_length += reference.len() as u64;
        for n in 1..=BLEU_ORDERS {
            let (m, h, r) = ngram_tally(&hyp, &reference, n);
            stats.matched[n - 1] += m;
            stats.hyp_total[n - 1] += h;
            stats.ref_total[n - 1] += r;
        }
    }

    let mut warnings = Vec::new();
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=BLEU_ORDERS {
        let (m, h, r) = (stats.matched[n - 1], stats.hyp_total[n - 1], stats.ref_total[n - 1]);
        if h == 0 || r == 0 {
            warnings.push(format!("no {n}-grams on one side; order skipped"));
            continue;
        }
        let precision = if m == 0 {
            warnings.push(format!("no matching {n}-grams; precision floored at 1/{}", 2 * h));
            1.0 / (2.0 * h as f64)
        } else {
            m as f64 / h as f64
        };
        log_sum += precision.ln();
        orders += 1;
    }
    if orders == 0 || stats.hyp_length == 0 {
        warnings.push("hypothesis too short to score; BLEU set to 0".to_string());
        return (0.0, stats, warnings);
    }
    let brevity = if stats.hyp_length >= stats.ref_length {
        1.0
    } else {
        (1.0 - stats.ref_length as f64 / stats.hyp_length as f64).exp()
    };
    let score = 100.0 * brevity * (log_sum / orders as f64).exp();
    (score, stats, warnings)
}

const CHRF_ORDERS: usize = 6;
const CHRF_BETA: f64 = 2.0;

/// Corpus-level chrF over aligned segment pairs: character n-grams up to
/// order 6, whitespace excluded, F-score with beta = 2 averaged over the
/// orders present in the data.
pub fn chrf_over_pairs(pairs: &[SegmentPair]) -> (f64, NGramStats) {
    let mut stats = NGramStats::with_orders(CHRF_ORDERS);
    for pair in pairs {
        let hyp: Vec<char> = pair.hyp.tokens.iter().flat_map(|t| t.surface.chars()).collect();
        let reference: Vec<char> =
            pair.reference.tokens.iter().flat_map(|t| t.surface.chars()).collect();
        stats.hyp_length += hyp.len() as u64;
        stats.ref_length += reference.len() as u64;
        for n in 1..=CHRF_ORDERS {
            let (m, h, r) = ngram_tally(&hyp, &reference, n);
            stats.matched[n - 1] += m;
            stats.hyp_total[n - 1] += h;
            stats.ref_total[n - 1] += r;
        }
    }

    let beta2 = CHRF_BETA * CHRF_BETA;
    let mut f_sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=CHRF_ORDERS {
        let (m, h, r) = (stats.matched[n - 1], stats.hyp_total[n - 1], stats.ref_total[n - 1]);
        if h == 0 && r == 0 {
            continue;
        }
        let precision = if h > 0 { m as f64 / h as f64 } else { 0.0 };
        let recall = if r > 0 { m as f64 / r as f64 } else { 0.0 };
        let denom = beta2 * precision + recall;
        if denom > 0.0 {
            f_sum += (1.0 + beta2) * precision * recall / denom;
        }
        orders += 1;
    }
    let score = if orders == 0 { 0.0 } else { 100.0 * f_sum / orders as f64 };
    (score, stats)
}

fn ter_over_pairs(pairs: &[SegmentPair], shifts: ShiftConfig) -> EditCounts {
    let mut counts = EditCounts::default();
    for pair in pairs {
        counts += ter_with_shifts_detailed(
            &pair.hyp.tokens,
            &pair.reference.tokens,
            MatchPredicate::Plain,
            shifts,
        )
        .counts;
    }
    counts
}

/// BLEU, TER or chrF over reference segments at block or sentence level.
pub fn segmented_metric(
    kind: SegmentedKind,
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    level: SegmentationLevel,
    mode: NormalizationMode,
    with_breaks: bool,
    shifts: ShiftConfig,
) -> Result<MetricScore, MetricError> {
    let pairs = aligned_pairs(hyp, reference, level, mode, with_breaks, false)?;
    let (metric, value, details, warnings) = match kind {
        SegmentedKind::Bleu => {
            let (value, stats, warnings) = bleu_over_pairs(&pairs);
            ("BLEU", value, ScoreDetails::NGrams(stats), warnings)
        }
        SegmentedKind::Chrf => {
            let (value, stats) = chrf_over_pairs(&pairs);
            ("chrF", value, ScoreDetails::NGrams(stats), Vec::new())
        }
        SegmentedKind::Ter => {
            let counts = ter_over_pairs(&pairs, shifts);
            ("TER", counts.score_percent(), ScoreDetails::Edits(counts), Vec::new())
        }
    };
    Ok(MetricScore {
        metric: metric.to_string(),
        value,
        mode,
        segment_level: level.reported(),
        details,
        warnings,
    })
}

/// Segmentation-only TER: every word on both sides is replaced by a mask
/// token before alignment and scoring, so only the break structure can
/// differ.
pub fn ter_br(
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    level: SegmentationLevel,
    shifts: ShiftConfig,
) -> Result<MetricScore, MetricError> {
    let mode = NormalizationMode::CASED_ATTACH;
    let pairs = aligned_pairs(hyp, reference, level, mode, true, true)?;
    let counts = ter_over_pairs(&pairs, shifts);
    Ok(MetricScore {
        metric: "TER-br".to_string(),
        value: counts.score_percent(),
        mode,
        segment_level: level.reported(),
        details: ScoreDetails::Edits(counts),
        warnings: Vec::new(),
    })
}

/// Knobs shared by all metrics when dispatching by name.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricOptions {
    /// Overrides each metric's default casing behaviour.
    pub lowercase: Option<bool>,
    /// Overrides each metric's default punctuation handling.
    pub punctuation: Option<crate::token::PunctuationHandling>,
    pub config: ScoreConfig,
}

impl MetricOptions {
    fn pick(&self, default: NormalizationMode) -> NormalizationMode {
        NormalizationMode {
            lowercase: self.lowercase.unwrap_or(default.lowercase),
            punctuation: self.punctuation.unwrap_or(default.punctuation),
        }
    }
}

/// Computes a metric by its canonical name, applying the metric's default
/// normalization unless overridden.
pub fn compute_metric(
    name: &str,
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    options: &MetricOptions,
) -> Result<MetricScore, MetricError> {
    let config = options.config;
    let shifts = config.shifts;
    let mut score = match name {
        "SubER" => {
            suber_with_config(hyp, reference, options.pick(NormalizationMode::LOWER_ATTACH), true, config)?
        }
        "SubER-cased" => {
            suber_with_config(hyp, reference, options.pick(NormalizationMode::CASED_ATTACH), true, config)?
        }
        "WER" => wer(hyp, reference, options.pick(NormalizationMode::LOWER_REMOVE), false)?,
        "WER-cased" => wer(hyp, reference, options.pick(NormalizationMode::CASED_ATTACH), false)?,
        "WER-break" => wer(hyp, reference, options.pick(NormalizationMode::LOWER_REMOVE), true)?,
        "t-WER" => t_wer(hyp, reference, options.pick(NormalizationMode::LOWER_REMOVE))?,
        "BLEU-block" => segmented_metric(
            SegmentedKind::Bleu,
            hyp,
            reference,
            SegmentationLevel::Block,
            options.pick(NormalizationMode::CASED_ATTACH),
            false,
            shifts,
        )?,
        "BLEU-sent" => segmented_metric(
            SegmentedKind::Bleu,
            hyp,
            reference,
            SegmentationLevel::Sentence,
            options.pick(NormalizationMode::CASED_ATTACH),
            false,
            shifts,
        )?,
        "BLEU-sent-break" => segmented_metric(
            SegmentedKind::Bleu,
            hyp,
            reference,
            SegmentationLevel::Sentence,
            options.pick(NormalizationMode::CASED_ATTACH),
            true,
            shifts,
        )?,
        "TER-block" => segmented_metric(
            SegmentedKind::Ter,
            hyp,
            reference,
            SegmentationLevel::Block,
            options.pick(NormalizationMode::CASED_ATTACH),
            false,
            shifts,
        )?,
        "TER-sent" => segmented_metric(
            SegmentedKind::Ter,
            hyp,
            reference,
            SegmentationLevel::Sentence,
            options.pick(NormalizationMode::CASED_ATTACH),
            false,
            shifts,
        )?,
        "TER-sent-break" => segmented_metric(
            SegmentedKind::Ter,
            hyp,
            reference,
            SegmentationLevel::Sentence,
            options.pick(NormalizationMode::CASED_ATTACH),
            true,
            shifts,
        )?,
        "chrF-sent" => segmented_metric(
            SegmentedKind::Chrf,
            hyp,
            reference,
            SegmentationLevel::Sentence,
            options.pick(NormalizationMode::CASED_ATTACH),
            false,
            shifts,
        )?,
        "TER-br-block" => ter_br(hyp, reference, SegmentationLevel::Block, shifts)?,
        "TER-br-sent" => ter_br(hyp, reference, SegmentationLevel::Sentence, shifts)?,
        _ => return Err(MetricError::UnknownMetric { name: name.to_string() }),
    };
    score.metric = name.to_string();
    Ok(score)
}

/// The segment pairing a named metric scores over, for inspection.
/// Metrics that do not align segments (SubER, the WER family) yield
/// `None`.
pub fn pairs_for_metric(
    name: &str,
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    options: &MetricOptions,
) -> Result<Option<Vec<SegmentPair>>, MetricError> {
    let cased = options.pick(NormalizationMode::CASED_ATTACH);
    let pairs = match name {
        "t-WER" => {
            let mode = options.pick(NormalizationMode::LOWER_REMOVE);
            let ref_segments = block_segments(reference, mode, false);
            if ref_segments.iter().all(|s| s.is_empty()) {
                return Err(MetricError::EmptyReference);
            }
            let hyp_words = interpolate_word_timings(hyp, mode);
            time_align(&hyp_words, &ref_segments)?.0
        }
        "BLEU-block" | "TER-block" => {
            aligned_pairs(hyp, reference, SegmentationLevel::Block, cased, false, false)?
        }
        "BLEU-sent" | "TER-sent" | "chrF-sent" => {
            aligned_pairs(hyp, reference, SegmentationLevel::Sentence, cased, false, false)?
        }
        "BLEU-sent-break" | "TER-sent-break" => {
            aligned_pairs(hyp, reference, SegmentationLevel::Sentence, cased, true, false)?
        }
        "TER-br-block" => aligned_pairs(hyp, reference, SegmentationLevel::Block, cased, true, true)?,
        "TER-br-sent" => {
            aligned_pairs(hyp, reference, SegmentationLevel::Sentence, cased, true, true)?
        }
        "SubER" | "SubER-cased" | "WER" | "WER-cased" | "WER-break" => return Ok(None),
        _ => return Err(MetricError::UnknownMetric { name: name.to_string() }),
    };
    Ok(Some(pairs))
}
