//! Edit distance with phrase shifts, and the SubER metric built on it.
//!
//! The core is a translation-edit-rate computation parameterized by a
//! [`MatchPredicate`]: with the plain predicate it is ordinary TER, with
//! the time-overlap predicate it becomes SubER, where a hypothesis token
//! only counts as correct (or substitutable, or shiftable) if its subtitle
//! block overlaps in time with the block of the reference token it is
//! compared against.
//!
//! Shift search follows the classical greedy scheme: among all allowed
//! shifts, apply the one that reduces the edit distance the most, and
//! repeat until no shift reduces it further. A shift moves a contiguous
//! hypothesis phrase (words and break tokens in any mix) that matches a
//! reference phrase token-for-token under the predicate. The phrase may be
//! at most [`ShiftConfig::max_shift_size`] tokens long and move at most
//! [`ShiftConfig::max_shift_distance`] positions; every destination within
//! that range is evaluated, so the chosen move depends only on the token
//! sequences and never on which of several equally good alignments a
//! backtrace would pick. That keeps results reproducible when files are
//! split into scoring regions.

use std::collections::HashMap;

use serde::Serialize;

use crate::score::{MetricError, MetricScore, ScoreDetails, SegmentLevel};
use crate::srt::{SubtitleBlock, SubtitleFile, TimeSpan};
use crate::token::{tokenize_blocks, NormalizationMode, Token};

/// When two tokens count as the same, and when substitution is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatchPredicate {
    /// Tokens match iff surfaces and kinds are equal.
    Plain,
    /// Tokens match iff surfaces and kinds are equal and their blocks'
    /// display intervals overlap.
    TimeOverlap,
}

/// Caps on the shift search, as in classical TER implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShiftConfig {
    /// Longest phrase, in tokens, that a single shift may move.
    pub max_shift_size: usize,
    /// Furthest, in token positions, that a phrase may move.
    pub max_shift_distance: usize,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        ShiftConfig { max_shift_size: 10, max_shift_distance: 50 }
    }
}

/// Knobs threaded through [`suber_with_config`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ScoreConfig {
    pub shifts: ShiftConfig,
    /// When set, refuse to score a region holding more tokens than this
    /// (the edit-distance matrix within a region is quadratic).
    pub max_region_tokens: Option<usize>,
}

/// The numerator and denominator parts of a TER-family score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EditCounts {
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub shifts: usize,
    /// Reference length in tokens (words plus break tokens).
    pub ref_length: usize,
}

impl EditCounts {
    pub fn total_edits(&self) -> usize {
        self.insertions + self.deletions + self.substitutions + self.shifts
    }

    /// Edits over reference length, as a percentage. May exceed 100. An
    /// empty reference scores 0 against an empty hypothesis; otherwise the
    /// denominator is clamped to 1.
    pub fn score_percent(&self) -> f64 {
        if self.ref_length == 0 && self.total_edits() == 0 {
            0.0
        } else {
            100.0 * self.total_edits() as f64 / self.ref_length.max(1) as f64
        }
    }
}

impl std::ops::AddAssign for EditCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.insertions += rhs.insertions;
        self.deletions += rhs.deletions;
        self.substitutions += rhs.substitutions;
        self.shifts += rhs.shifts;
        self.ref_length += rhs.ref_length;
    }
}

/// One step of the final alignment between (shifted) hypothesis and
/// reference. Indices refer to [`TerOutcome::hyp_order`] positions and to
/// the reference sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EditOp {
    Match(usize, usize),
    Substitute(usize, usize),
    /// Hypothesis token with no reference counterpart.
    Insert(usize),
    /// Reference token with no hypothesis counterpart.
    Delete(usize),
}

/// Record of one applied shift, for inspection and testing.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AppliedShift {
    pub phrase_start: usize,
    pub phrase_len: usize,
    /// Start position of the phrase after the move.
    pub destination: usize,
    /// Earliest reference position the phrase matches under the predicate.
    pub ref_position: usize,
    pub distance_before: usize,
    pub distance_after: usize,
}

/// Full result of a TER computation.
#[derive(Debug, Clone)]
pub struct TerOutcome {
    pub counts: EditCounts,
    pub applied_shifts: Vec<AppliedShift>,
    /// Alignment of the shifted hypothesis against the reference.
    pub script: Vec<EditOp>,
    /// Original hypothesis index of each token in the shifted arrangement.
    pub hyp_order: Vec<usize>,
}

/// A compact token for the DP inner loops: content identity folded into
/// one id, kind reduced to the word/break divide, span kept for the
/// time-overlap predicate.
#[derive(Debug, Clone, Copy)]
struct Tok {
    content: u32,
    is_break: bool,
    span: TimeSpan,
}

fn intern(seqs: &[&[Token]]) -> Vec<Vec<Tok>> {
    let mut ids: HashMap<(crate::token::TokenKind, &str), u32> = HashMap::new();
    seqs.iter()
        .map(|seq| {
            seq.iter()
                .map(|t| {
                    let next = ids.len() as u32;
                    let content = *ids.entry((t.kind, t.surface.as_str())).or_insert(next);
                    Tok { content, is_break: t.kind.is_break(), span: t.span }
                })
                .collect()
        })
        .collect()
}

impl MatchPredicate {
    fn spans_allow(self, a: &Tok, b: &Tok) -> bool {
        match self {
            MatchPredicate::Plain => true,
            MatchPredicate::TimeOverlap => a.span.overlaps(b.span),
        }
    }

    fn toks_match(self, a: &Tok, b: &Tok) -> bool {
        a.content == b.content && self.spans_allow(a, b)
    }

    /// Substitution never crosses the word/break divide: words substitute
    /// words, end-of-line substitutes end-of-block, nothing else.
    fn toks_substitutable(self, a: &Tok, b: &Tok) -> bool {
        a.is_break == b.is_break && self.spans_allow(a, b)
    }

    /// Content equality plus, for the time-overlap predicate, overlapping
    /// block spans.
    pub fn tokens_match(self, a: &Token, b: &Token) -> bool {
        let spans_ok = match self {
            MatchPredicate::Plain => true,
            MatchPredicate::TimeOverlap => a.span.overlaps(b.span),
        };
        a.same_content(b) && spans_ok
    }
}

const FORBIDDEN: u32 = u32::MAX / 2;

/// Constrained edit distance, cost only, O(min-dimension) memory.
fn distance_only(hyp: &[Tok], reference: &[Tok], pred: MatchPredicate) -> usize {
    distance_within(hyp, reference, pred, usize::MAX).expect("unbounded")
}

/// As [`distance_only`], but gives up with `None` as soon as the distance
/// is provably above `bound`. Row minima only ever grow, so they are a
/// sound lower bound on the final value.
fn distance_within(hyp: &[Tok], reference: &[Tok], pred: MatchPredicate, bound: usize) -> Option<usize> {
    let bound32 = bound.min(FORBIDDEN as usize) as u32;
    let mut prev: Vec<u32> = (0..=reference.len() as u32).collect();
    let mut cur = vec![0u32; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i as u32 + 1;
        let mut row_min = cur[0];
        for (j, r) in reference.iter().enumerate() {
            let diag = if pred.toks_match(h, r) {
                prev[j]
            } else if pred.toks_substitutable(h, r) {
                prev[j] + 1
            } else {
                FORBIDDEN
            };
            cur[j + 1] = diag.min(prev[j + 1] + 1).min(cur[j] + 1);
            row_min = row_min.min(cur[j + 1]);
        }
        if row_min > bound32 {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[reference.len()] as usize;
    (d <= bound).then_some(d)
}

// Matrix cells hold (distance, substitutions) packed into one u64 so that
// integer `min` is lexicographic. Minimizing substitutions as a secondary
// objective pins down the ins/del/sub composition uniquely: optimal
// scripts can trade two substitutions for an insertion plus a deletion,
// and without the tiebreak summed counts over scoring regions would not
// be reproducible against an unsplit computation.
const DIST_UNIT: u64 = 1 << 32;
const SUB_UNIT: u64 = DIST_UNIT | 1;
const PACKED_FORBIDDEN: u64 = u64::MAX / 4;

/// Constrained edit distance with a full cost matrix for backtracing.
fn distance_matrix(hyp: &[Tok], reference: &[Tok], pred: MatchPredicate) -> Vec<u64> {
    let w = reference.len() + 1;
    let mut m = vec![0u64; (hyp.len() + 1) * w];
    for (j, cell) in m.iter_mut().take(w).enumerate() {
        *cell = j as u64 * DIST_UNIT;
    }
    for (i, h) in hyp.iter().enumerate() {
        let (above, row) = m.split_at_mut((i + 1) * w);
        let above = &above[i * w..];
        row[0] = (i as u64 + 1) * DIST_UNIT;
        for (j, r) in reference.iter().enumerate() {
            let diag = if pred.toks_match(h, r) {
                above[j]
            } else if pred.toks_substitutable(h, r) {
                above[j] + SUB_UNIT
            } else {
                PACKED_FORBIDDEN
            };
            row[j + 1] = diag.min(above[j + 1] + DIST_UNIT).min(row[j] + DIST_UNIT);
        }
    }
    m
}

/// Walks the cost matrix back from the far corner. Ties are resolved
/// match > substitution > deletion > insertion, for stable alignments.
fn backtrace(m: &[u64], hyp: &[Tok], reference: &[Tok], pred: MatchPredicate) -> Vec<EditOp> {
    let w = reference.len() + 1;
    let at = |i: usize, j: usize| m[i * w + j];
    let (mut i, mut j) = (hyp.len(), reference.len());
    let mut ops = Vec::with_capacity(i.max(j));
    while i > 0 || j > 0 {
        let d = at(i, j);
        if i > 0 && j > 0 && pred.toks_match(&hyp[i - 1], &reference[j - 1]) && at(i - 1, j - 1) == d {
            ops.push(EditOp::Match(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0
            && j > 0
            && pred.toks_substitutable(&hyp[i - 1], &reference[j - 1])
            && at(i - 1, j - 1) + SUB_UNIT == d
        {
            ops.push(EditOp::Substitute(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if j > 0 && at(i, j - 1) + DIST_UNIT == d {
            ops.push(EditOp::Delete(j - 1));
            j -= 1;
        } else {
            debug_assert!(i > 0 && at(i - 1, j) + DIST_UNIT == d);
            ops.push(EditOp::Insert(i - 1));
            i -= 1;
        }
    }
    ops.reverse();
    ops
}

fn counts_from_script(script: &[EditOp]) -> (usize, usize, usize) {
    let (mut ins, mut del, mut sub) = (0, 0, 0);
    for op in script {
        match op {
            EditOp::Insert(_) => ins += 1,
            EditOp::Delete(_) => del += 1,
            EditOp::Substitute(..) => sub += 1,
            EditOp::Match(..) => {}
        }
    }
    (ins, del, sub)
}

/// A moved phrase must end up next to at least one token whose display
/// interval overlaps the combined interval of the phrase and its matched
/// reference phrase. Placements amid tokens from stretches of time the
/// phrase has nothing to do with are worthless to the alignment and would
/// make results depend on how files are split into scoring regions.
fn destination_touches_phrase_time(
    cur: &[Tok],
    ref_toks: &[Tok],
    h_start: usize,
    len: usize,
    r_start: usize,
    dest: usize,
) -> bool {
    let mut hull = cur[h_start].span;
    for t in cur[h_start..h_start + len].iter().chain(&ref_toks[r_start..r_start + len]) {
        hull.start = hull.start.min(t.span.start);
        hull.end = hull.end.max(t.span.end);
    }
    // Neighbours in the sequence with the phrase removed.
    let rest_len = cur.len() - len;
    let rest = |i: usize| if i < h_start { &cur[i] } else { &cur[i + len] };
    rest_len == 0
        || (dest > 0 && rest(dest - 1).span.overlaps(hull))
        || (dest < rest_len && rest(dest).span.overlaps(hull))
}

/// Moves `len` tokens starting at `from` so that they start at `to`,
/// where `to` is a position in the sequence with the phrase removed.
fn splice<T: Copy>(seq: &[T], from: usize, len: usize, to: usize) -> Vec<T> {
    let mut rest: Vec<T> = Vec::with_capacity(seq.len());
    rest.extend_from_slice(&seq[..from]);
    rest.extend_from_slice(&seq[from + len..]);
    let mut out = Vec::with_capacity(seq.len());
    out.extend_from_slice(&rest[..to]);
    out.extend_from_slice(&seq[from..from + len]);
    out.extend_from_slice(&rest[to..]);
    out
}

/// Edit distance with shifts. Returns the edit counts of the final
/// alignment plus the number of shifts applied.
pub fn ter_with_shifts(hyp: &[Token], reference: &[Token], pred: MatchPredicate) -> EditCounts {
    ter_with_shifts_detailed(hyp, reference, pred, ShiftConfig::default()).counts
}

/// As [`ter_with_shifts`], with configurable caps and a full trace of what
/// happened.
pub fn ter_with_shifts_detailed(
    hyp: &[Token],
    reference: &[Token],
    pred: MatchPredicate,
    config: ShiftConfig,
) -> TerOutcome {
    let interned = intern(&[hyp, reference]);
    let (hyp_toks, ref_toks) = (&interned[0], &interned[1]);

    let mut cur: Vec<Tok> = hyp_toks.clone();
    let mut order: Vec<usize> = (0..cur.len()).collect();
    let mut applied: Vec<AppliedShift> = Vec::new();
    let mut dist = distance_only(&cur, ref_toks, pred);

    // Reference positions grouped by content, for candidate enumeration.
    let mut ref_by_content: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, r) in ref_toks.iter().enumerate() {
        ref_by_content.entry(r.content).or_default().push(j);
    }

    while dist > 0 {
        // Shiftable phrases: contiguous, matching a reference phrase
        // somewhere under the predicate, within the size cap. Under the
        // time-overlap predicate a phrase must also be chain-connected:
        // consecutive positions must overlap across (hypothesis token to
        // next reference token, or vice versa). Phrases gluing together
        // unrelated stretches of time fail this, so shift decisions stay
        // local to one time-connected neighbourhood and summing over
        // scoring regions reproduces the unsplit computation.
        let mut phrases: Vec<(usize, usize, Vec<usize>)> = Vec::new(); // (h, len, matching rs)
        for h_start in 0..cur.len() {
            let Some(starts) = ref_by_content.get(&cur[h_start].content) else { continue };
            let mut rs_by_len: Vec<Vec<usize>> = vec![Vec::new(); config.max_shift_size];
            for &r_start in starts {
                let mut len = 0;
                while len < config.max_shift_size
                    && h_start + len < cur.len()
                    && r_start + len < ref_toks.len()
                    && pred.toks_match(&cur[h_start + len], &ref_toks[r_start + len])
                    && (len == 0
                        || pred == MatchPredicate::Plain
                        || cur[h_start + len - 1].span.overlaps(ref_toks[r_start + len].span)
                        || cur[h_start + len].span.overlaps(ref_toks[r_start + len - 1].span))
                {
                    rs_by_len[len].push(r_start); // ascending, starts iterate in order
                    len += 1;
                }
            }
            for (len_minus_1, rs) in rs_by_len.into_iter().enumerate() {
                if !rs.is_empty() {
                    phrases.push((h_start, len_minus_1 + 1, rs));
                }
            }
        }

        // Greedy step: try every destination within the displacement cap
        // for every phrase and keep the largest reduction. Ties go to the
        // earliest phrase start, then the earliest matching reference
        // position, then the earliest destination, then the shortest
        // phrase. Candidates provably no better than the best so far are
        // abandoned early.
        let mut best: Option<AppliedShift> = None;
        for (h_start, len, rs) in &phrases {
            let (h_start, len) = (*h_start, *len);
            let lo = h_start.saturating_sub(config.max_shift_distance);
            let hi = (h_start + config.max_shift_distance).min(cur.len() - len);
            for dest in lo..=hi {
                if dest == h_start {
                    continue;
                }
                // Under the time-overlap predicate the phrase must land
                // next to a token from the stretch of time it belongs to.
                let r_min = match pred {
                    MatchPredicate::Plain => rs[0],
                    MatchPredicate::TimeOverlap => {
                        let compatible = rs.iter().copied().find(|&r| {
                            destination_touches_phrase_time(&cur, ref_toks, h_start, len, r, dest)
                        });
                        match compatible {
                            Some(r) => r,
                            None => continue,
                        }
                    }
                };
                let bound = best.as_ref().map_or(dist - 1, |b| b.distance_after);
                let shifted = splice(&cur, h_start, len, dest);
                let Some(new_dist) = distance_within(&shifted, ref_toks, pred, bound) else {
                    continue;
                };
                let key = (new_dist, h_start, r_min, dest, len);
                let better = best.as_ref().is_none_or(|b| {
                    key < (b.distance_after, b.phrase_start, b.ref_position, b.destination, b.phrase_len)
                });
                if better {
                    best = Some(AppliedShift {
                        phrase_start: h_start,
                        phrase_len: len,
                        destination: dest,
                        ref_position: r_min,
                        distance_before: dist,
                        distance_after: new_dist,
                    });
                }
            }
        }

        match best {
            Some(shift) => {
                cur = splice(&cur, shift.phrase_start, shift.phrase_len, shift.destination);
                order = splice(&order, shift.phrase_start, shift.phrase_len, shift.destination);
                dist = shift.distance_after;
                applied.push(shift);
            }
            None => break,
        }
    }

    let final_script = if dist == 0 {
        (0..cur.len()).map(|i| EditOp::Match(i, i)).collect()
    } else {
        let matrix = distance_matrix(&cur, ref_toks, pred);
        backtrace(&matrix, &cur, ref_toks, pred)
    };
    let (insertions, deletions, substitutions) = counts_from_script(&final_script);
    TerOutcome {
        counts: EditCounts {
            insertions,
            deletions,
            substitutions,
            shifts: applied.len(),
            ref_length: reference.len(),
        },
        applied_shifts: applied,
        script: final_script,
        hyp_order: order,
    }
}

/// Hypothesis and reference blocks sharing one connected stretch of
/// display time.
#[derive(Debug, Clone, Serialize)]
pub struct RegionPair {
    pub hyp_blocks: Vec<SubtitleBlock>,
    pub ref_blocks: Vec<SubtitleBlock>,
    /// Positional ids of the blocks within their files.
    pub hyp_ids: Vec<usize>,
    pub ref_ids: Vec<usize>,
    pub span: TimeSpan,
}

/// Splits both files into independent scoring regions at every point in
/// time where neither file displays a subtitle. Every block lands in
/// exactly one region; summed edit counts over regions equal the counts
/// of an unsplit computation.
pub fn split_scoring_regions(hyp: &SubtitleFile, reference: &SubtitleFile) -> Vec<RegionPair> {
    let mut items: Vec<(TimeSpan, bool, usize)> = hyp
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.span(), true, i))
        .chain(reference.blocks.iter().enumerate().map(|(i, b)| (b.span(), false, i)))
        .collect();
    items.sort_by_key(|(span, _, _)| (span.start, span.end));

    let mut regions: Vec<RegionPair> = Vec::new();
    let mut current: Vec<(TimeSpan, bool, usize)> = Vec::new();
    let mut current_span = TimeSpan::new(0, 0);
    let mut flush = |current: &mut Vec<(TimeSpan, bool, usize)>, span: TimeSpan| {
        if current.is_empty() {
            return;
        }
        let mut hyp_ids: Vec<usize> =
            current.iter().filter(|(_, is_hyp, _)| *is_hyp).map(|&(_, _, i)| i).collect();
        let mut ref_ids: Vec<usize> =
            current.iter().filter(|(_, is_hyp, _)| !*is_hyp).map(|&(_, _, i)| i).collect();
        hyp_ids.sort_unstable();
        ref_ids.sort_unstable();
        regions.push(RegionPair {
            hyp_blocks: hyp_ids.iter().map(|&i| hyp.blocks[i].clone()).collect(),
            ref_blocks: ref_ids.iter().map(|&i| reference.blocks[i].clone()).collect(),
            hyp_ids,
            ref_ids,
            span,
        });
        current.clear();
    };

    for item in items {
        let span = item.0;
        if current.is_empty() || span.start < current_span.end {
            // Still connected: no mutual silence since the region began.
            current_span = if current.is_empty() {
                span
            } else {
                TimeSpan::new(current_span.start, current_span.end.max(span.end))
            };
            current.push(item);
        } else {
            flush(&mut current, current_span);
            current_span = span;
            current.push(item);
        }
    }
    flush(&mut current, current_span);
    regions
}

fn region_tokens(
    blocks: &[SubtitleBlock],
    ids: &[usize],
    mode: NormalizationMode,
    with_breaks: bool,
) -> Vec<Token> {
    ids.iter()
        .zip(blocks)
        .flat_map(|(&id, b)| tokenize_blocks(std::slice::from_ref(b), id, mode, with_breaks))
        .collect()
}

/// SubER: edit distance with shifts over words and break tokens under the
/// time-overlap predicate, normalized by reference length.
pub fn suber(
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    mode: NormalizationMode,
    with_breaks: bool,
) -> MetricScore {
    suber_with_config(hyp, reference, mode, with_breaks, ScoreConfig::default())
        .expect("unlimited region size cannot fail")
}

/// As [`suber`], with configurable shift caps and an optional guard
/// against scoring oversized regions.
pub fn suber_with_config(
    hyp: &SubtitleFile,
    reference: &SubtitleFile,
    mode: NormalizationMode,
    with_breaks: bool,
    config: ScoreConfig,
) -> Result<MetricScore, MetricError> {
    let mut counts = EditCounts::default();
    let mut warnings = Vec::new();
    for region in split_scoring_regions(hyp, reference) {
        let hyp_tokens = region_tokens(&region.hyp_blocks, &region.hyp_ids, mode, with_breaks);
        let ref_tokens = region_tokens(&region.ref_blocks, &region.ref_ids, mode, with_breaks);
        if let Some(limit) = config.max_region_tokens {
            let tokens = hyp_tokens.len() + ref_tokens.len();
            if tokens > limit {
                return Err(MetricError::RegionTooLarge { tokens, limit });
            }
        }
        let outcome =
            ter_with_shifts_detailed(&hyp_tokens, &ref_tokens, MatchPredicate::TimeOverlap, config.shifts);
        counts += outcome.counts;
    }
    if counts.ref_length == 0 && counts.total_edits() > 0 {
        warnings.push("reference is empty; scoring with a denominator of 1".to_string());
    }
    Ok(MetricScore {
        metric: "SubER".to_string(),
        value: counts.score_percent(),
        mode,
        segment_level: SegmentLevel::File,
        details: ScoreDetails::Edits(counts),
        warnings,
    })
}
