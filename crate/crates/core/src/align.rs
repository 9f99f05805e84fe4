//! Pairing hypothesis tokens with reference segments.
//!
//! Subtitle files carry no sentence alignment, so one has to be made up.
//! Two methods are provided: segmenting the hypothesis token stream
//! against the reference segments by minimizing total edit distance, and
//! assigning words to segments by interpolated word-level timings.

use serde::Serialize;

use crate::score::MetricError;
use crate::srt::{SubtitleFile, TimeSpan};
use crate::token::{tokenize_blocks, NormalizationMode, Segment, SegmentOrigin, Token};

/// How a hypothesis chunk was paired with its reference segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentMethod {
    Levenshtein,
    Time,
    BlockParallel,
}

/// One hypothesis chunk paired with one reference segment.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentPair {
    pub hyp: Segment,
    pub reference: Segment,
    pub method: AlignmentMethod,
}

/// A word token with an interpolated display interval.
#[derive(Debug, Clone, Serialize)]
pub struct TimedWord {
    pub token: Token,
    pub start: u64,
    pub end: u64,
}

impl TimedWord {
    pub fn interval(&self) -> TimeSpan {
        TimeSpan::new(self.start, self.end)
    }
}

/// Plain word-level Levenshtein distance with unit costs. Any token may
/// substitute any other; equality is content equality.
pub fn levenshtein_distance(hyp: &[Token], reference: &[Token]) -> usize {
    let mut prev: Vec<usize> = (0..=reference.len()).collect();
    let mut cur = vec![0usize; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            let sub = prev[j] + usize::from(!h.same_content(r));
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[reference.len()]
}

const UNREACHABLE: usize = usize::MAX / 2;

/// Partitions the hypothesis token stream into one contiguous (possibly
/// empty) chunk per reference segment such that the total edit distance
/// between chunks and segments is minimal. Ties are broken toward earlier
/// cut positions.
pub fn levenshtein_align(
    hyp: &[Token],
    ref_segments: &[Segment],
) -> Result<Vec<SegmentPair>, MetricError> {
    if ref_segments.is_empty() {
        return Err(MetricError::NoReferenceSegments);
    }
    let h = hyp.len();

    // cost[i]: best total for segments so far against hyp[0..i].
    // cuts[s][i]: where segment s started on the best path ending at i.
    let mut cost: Vec<usize> = vec![UNREACHABLE; h + 1];
    cost[0] = 0;
    let mut cuts: Vec<Vec<usize>> = Vec::with_capacity(ref_segments.len());

    for seg in ref_segments {
        // Multi-source DP: row 0 seeds every possible chunk start with the
        // accumulated cost, then ordinary Levenshtein rows follow. Cells
        // carry (cost, chunk start); lexicographic min prefers earlier cuts.
        let mut row: Vec<(usize, usize)> = Vec::with_capacity(h + 1);
        row.push((cost[0], 0));
        for i in 1..=h {
            let extend = (row[i - 1].0.saturating_add(1), row[i - 1].1);
            let fresh = (cost[i], i);
            row.push(extend.min(fresh));
        }
        for r in &seg.tokens {
            let mut next: Vec<(usize, usize)> = Vec::with_capacity(h + 1);
            next.push((row[0].0.saturating_add(1), row[0].1));
            for i in 1..=h {
                let diag_cost = row[i - 1].0.saturating_add(usize::from(!hyp[i - 1].same_content(r)));
                let cell = (diag_cost, row[i - 1].1)
                    .min((row[i].0.saturating_add(1), row[i].1))
                    .min((next[i - 1].0.saturating_add(1), next[i - 1].1));
                next.push(cell);
            }
            row = next;
        }
        cuts.push(row.iter().map(|&(_, start)| start).collect());
        cost = row.into_iter().map(|(c, _)| c).collect();
    }

    let mut bounds = vec![0usize; ref_segments.len() + 1];
    bounds[ref_segments.len()] = h;
    let mut end = h;
    for s in (0..ref_segments.len()).rev() {
        end = cuts[s][end];
        bounds[s] = end;
    }

    let pairs = ref_segments
        .iter()
        .enumerate()
        .map(|(s, seg)| {
            let chunk = hyp[bounds[s]..bounds[s + 1]].to_vec();
            SegmentPair {
                hyp: Segment { span: enclosing_span(&chunk), tokens: chunk, origin: seg.origin },
                reference: seg.clone(),
                method: AlignmentMethod::Levenshtein,
            }
        })
        .collect();
    Ok(pairs)
}

fn enclosing_span(tokens: &[Token]) -> Option<TimeSpan> {
    let first = tokens.first()?;
    let mut span = first.span;
    for t in tokens {
        span.start = span.start.min(t.span.start);
        span.end = span.end.max(t.span.end);
    }
    Some(span)
}

/// Assigns every word of every block an equal share of the block's display
/// interval. Break tokens receive no time and do not appear. A block with
/// fewer milliseconds than words yields some empty intervals, which later
/// overlap nothing.
pub fn interpolate_word_timings(file: &SubtitleFile, mode: NormalizationMode) -> Vec<TimedWord> {
    let mut out = Vec::new();
    for (id, block) in file.blocks.iter().enumerate() {
        let words = tokenize_blocks(std::slice::from_ref(block), id, mode, false);
        let k = words.len() as u64;
        if k == 0 {
            continue;
        }
        let span = block.span();
        let dur = span.duration();
        // boundary(i) = start + round(i * dur / k); exact at both ends.
        let boundary = |i: u64| span.start + (2 * i * dur + k) / (2 * k);
        for (i, token) in words.into_iter().enumerate() {
            let i = i as u64;
            out.push(TimedWord { token, start: boundary(i), end: boundary(i + 1) });
        }
    }
    out
}

/// Assigns each timed hypothesis word to the reference segment its interval
/// overlaps most (ties go to the earlier segment). Words overlapping no
/// segment are dropped; the count of dropped words is returned.
pub fn time_align(
    hyp_words: &[TimedWord],
    ref_segments: &[Segment],
) -> Result<(Vec<SegmentPair>, usize), MetricError> {
    let spans: Vec<TimeSpan> = ref_segments
        .iter()
        .map(|s| s.span.ok_or(MetricError::SegmentWithoutSpan))
        .collect::<Result<_, _>>()?;

    let mut buckets: Vec<Vec<Token>> = vec![Vec::new(); ref_segments.len()];
    let mut dropped = 0usize;
    for word in hyp_words {
        let mut best: Option<(u64, usize)> = None;
        for (i, span) in spans.iter().enumerate() {
            let overlap = word.interval().overlap_millis(*span);
            if overlap > 0 && best.is_none_or(|(b, _)| overlap > b) {
                best = Some((overlap, i));
            }
        }
        match best {
            Some((_, i)) => buckets[i].push(word.token.clone()),
            None => dropped += 1,
        }
    }

    let pairs = ref_segments
        .iter()
        .zip(buckets)
        .zip(&spans)
        .map(|((seg, tokens), span)| SegmentPair {
            hyp: Segment { tokens, span: Some(*span), origin: SegmentOrigin::TSegment },
            reference: seg.clone(),
            method: AlignmentMethod::Time,
        })
        .collect();
    Ok((pairs, dropped))
}
