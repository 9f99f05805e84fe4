//! Turning subtitle blocks into token streams.
//!
//! Words are whitespace-separated units of a line, normalized according to
//! a [`NormalizationMode`]. Break tokens mark formatting: `<eol>` after
//! every line of a block except the last, `<eob>` after the last. A token
//! remembers which block it came from and the block's display interval, so
//! downstream consumers can apply time constraints.

use serde::Serialize;

use crate::srt::{SubtitleBlock, SubtitleFile, TimeSpan};

/// Fixed surface of an end-of-line break token.
pub const EOL: &str = "<eol>";
/// Fixed surface of an end-of-block break token.
pub const EOB: &str = "<eob>";
/// Fixed surface words are replaced with by [`mask_words`].
pub const MASK: &str = "MASK";

/// What to do with punctuation glued to words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PunctuationHandling {
    /// Strip punctuation characters from word edges; a word reduced to
    /// nothing disappears.
    Remove,
    /// Leave words untouched.
    Attach,
    /// Emit edge punctuation characters as separate word tokens.
    Split,
}

/// Text normalization applied before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NormalizationMode {
    pub lowercase: bool,
    pub punctuation: PunctuationHandling,
}

impl NormalizationMode {
    /// Lower-cased, punctuation removed. Default for the WER family.
    pub const LOWER_REMOVE: Self =
        NormalizationMode { lowercase: true, punctuation: PunctuationHandling::Remove };
    /// Lower-cased, punctuation kept attached. Default for SubER.
    pub const LOWER_ATTACH: Self =
        NormalizationMode { lowercase: true, punctuation: PunctuationHandling::Attach };
    /// Case kept, punctuation attached. Default for BLEU/TER/chrF and the
    /// cased metric variants.
    pub const CASED_ATTACH: Self =
        NormalizationMode { lowercase: false, punctuation: PunctuationHandling::Attach };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TokenKind {
    Word,
    Eol,
    Eob,
}

impl TokenKind {
    pub fn is_break(self) -> bool {
        matches!(self, TokenKind::Eol | TokenKind::Eob)
    }
}

/// One scoring unit: a word or a break marker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
    /// Positional index of the originating block within its file.
    pub block_id: usize,
    /// Display interval of the originating block.
    pub span: TimeSpan,
}

impl Token {
    pub fn word(surface: impl Into<String>, block_id: usize, span: TimeSpan) -> Self {
        Token { surface: surface.into(), kind: TokenKind::Word, block_id, span }
    }

    pub fn eol(block_id: usize, span: TimeSpan) -> Self {
        Token { surface: EOL.to_string(), kind: TokenKind::Eol, block_id, span }
    }

    pub fn eob(block_id: usize, span: TimeSpan) -> Self {
        Token { surface: EOB.to_string(), kind: TokenKind::Eob, block_id, span }
    }

    /// Content equality: same kind and same surface. A word that happens to
    /// spell "<eol>" never equals a break token.
    pub fn same_content(&self, other: &Token) -> bool {
        self.kind == other.kind && self.surface == other.surface
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SegmentOrigin {
    Block,
    Sentence,
    TSegment,
}

/// A contiguous token sequence used as a scoring unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub tokens: Vec<Token>,
    pub span: Option<TimeSpan>,
    pub origin: SegmentOrigin,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Punctuation for normalization purposes: anything that is neither
/// alphanumeric nor whitespace.
fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Normalizes one raw word into zero or more token surfaces.
fn normalize_word(raw: &str, mode: NormalizationMode) -> Vec<String> {
    let word = if mode.lowercase { raw.to_lowercase() } else { raw.to_string() };
    match mode.punctuation {
        PunctuationHandling::Attach => vec![word],
        PunctuationHandling::Remove => {
            let core = word.trim_matches(is_punct);
            if core.is_empty() {
                vec![]
            } else {
                vec![core.to_string()]
            }
        }
        PunctuationHandling::Split => {
            let chars: Vec<char> = word.chars().collect();
            let mut lo = 0;
            let mut hi = chars.len();
            while lo < hi && is_punct(chars[lo]) {
                lo += 1;
            }
            while hi > lo && is_punct(chars[hi - 1]) {
                hi -= 1;
            }
            let mut out: Vec<String> = chars[..lo].iter().map(|c| c.to_string()).collect();
            if lo < hi {
                out.push(chars[lo..hi].iter().collect());
            }
            out.extend(chars[hi..].iter().map(|c| c.to_string()));
            out
        }
    }
}

/// A raw (pre-normalization) word with its position in the file structure.
struct RawWord<'a> {
    text: &'a str,
    block_id: usize,
    span: TimeSpan,
    /// Break token owed after this word: the last word of a line owes an
    /// eol, the last word of a block an eob.
    break_after: Option<TokenKind>,
}

fn raw_words<'a>(blocks: &'a [SubtitleBlock], first_block_id: usize) -> Vec<RawWord<'a>> {
    let mut words = Vec::new();
    for (offset, block) in blocks.iter().enumerate() {
        let block_id = first_block_id + offset;
        let span = block.span();
        let last_line = block.lines.len() - 1;
        for (line_no, line) in block.lines.iter().enumerate() {
            let break_kind = if line_no == last_line { TokenKind::Eob } else { TokenKind::Eol };
            let line_words: Vec<&str> = line.split_whitespace().collect();
            for (i, w) in line_words.iter().enumerate() {
                let is_last = i + 1 == line_words.len();
                words.push(RawWord {
                    text: w,
                    block_id,
                    span,
                    break_after: is_last.then_some(break_kind),
                });
            }
            if line_words.is_empty() {
                // A line that is pure whitespace still marks a break.
                words.push(RawWord { text: "", block_id, span, break_after: Some(break_kind) });
            }
        }
    }
    words
}

fn emit_tokens(word: &RawWord<'_>, mode: NormalizationMode, with_breaks: bool, out: &mut Vec<Token>) {
    if !word.text.is_empty() {
        for surface in normalize_word(word.text, mode) {
            out.push(Token::word(surface, word.block_id, word.span));
        }
    }
    if with_breaks {
        match word.break_after {
            Some(TokenKind::Eol) => out.push(Token::eol(word.block_id, word.span)),
            Some(TokenKind::Eob) => out.push(Token::eob(word.block_id, word.span)),
            _ => {}
        }
    }
}

/// Tokenizes a slice of blocks, numbering them from `first_block_id`.
pub fn tokenize_blocks(
    blocks: &[SubtitleBlock],
    first_block_id: usize,
    mode: NormalizationMode,
    with_breaks: bool,
) -> Vec<Token> {
    let mut out = Vec::new();
    for word in raw_words(blocks, first_block_id) {
        emit_tokens(&word, mode, with_breaks, &mut out);
    }
    out
}

/// Tokenizes a whole file into a single token stream.
pub fn tokenize_file(file: &SubtitleFile, mode: NormalizationMode, with_breaks: bool) -> Vec<Token> {
    tokenize_blocks(&file.blocks, 0, mode, with_breaks)
}

/// One segment per subtitle block, carrying the block's display interval.
pub fn block_segments(file: &SubtitleFile, mode: NormalizationMode, with_breaks: bool) -> Vec<Segment> {
    file.blocks
        .iter()
        .enumerate()
        .map(|(id, block)| Segment {
            tokens: tokenize_blocks(std::slice::from_ref(block), id, mode, with_breaks),
            span: Some(block.span()),
            origin: SegmentOrigin::Block,
        })
        .collect()
}

/// Closing punctuation that may trail a sentence-final mark.
const CLOSERS: [char; 6] = ['"', '\'', '\u{201d}', '\u{2019}', ')', ']'];

/// Does this raw word end a sentence? An ellipsis only counts when nothing
/// follows or the next word starts upper-case, since subtitles use "..."
/// to continue a sentence across blocks.
fn ends_sentence(raw: &str, next_raw: Option<&str>) -> bool {
    let core = raw.trim_end_matches(CLOSERS);
    let next_is_capitalized =
        || next_raw.is_none_or(|w| w.chars().next().is_some_and(|c| c.is_uppercase()));
    if core.ends_with("...") || core.ends_with('\u{2026}') {
        next_is_capitalized()
    } else {
        core.ends_with(['.', '!', '?'])
    }
}

/// Splits a file into sentence segments: the token stream is cut after any
/// word whose raw surface carries sentence-final punctuation, with the cut
/// placed after any break tokens that immediately follow. Sentences may
/// span blocks; a trailing unterminated fragment forms a final segment.
pub fn split_sentences(file: &SubtitleFile, mode: NormalizationMode, with_breaks: bool) -> Vec<Segment> {
    let words = raw_words(&file.blocks, 0);
    let mut segments = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut span: Option<TimeSpan> = None;

    let mut flush = |tokens: &mut Vec<Token>, span: &mut Option<TimeSpan>| {
        if !tokens.is_empty() {
            segments.push(Segment {
                tokens: std::mem::take(tokens),
                span: span.take(),
                origin: SegmentOrigin::Sentence,
            });
        }
    };

    // A sentence-final word followed by break tokens keeps those breaks in
    // its own segment; the cut happens before the next real word.
    let mut pending_cut = false;
    for (i, word) in words.iter().enumerate() {
        if pending_cut && !word.text.is_empty() {
            flush(&mut tokens, &mut span);
            pending_cut = false;
        }
        emit_tokens(word, mode, with_breaks, &mut tokens);
        if !tokens.is_empty() {
            let merged = match span {
                Some(s) => TimeSpan::new(s.start.min(word.span.start), s.end.max(word.span.end)),
                None => word.span,
            };
            span = Some(merged);
        }
        let next = words[i + 1..].iter().find(|w| !w.text.is_empty()).map(|w| w.text);
        if !word.text.is_empty() && ends_sentence(word.text, next) {
            if word.break_after.is_none() {
                flush(&mut tokens, &mut span);
            } else {
                pending_cut = true;
            }
        }
    }
    flush(&mut tokens, &mut span);
    segments
}

/// Replaces every word surface with [`MASK`], leaving breaks untouched.
pub fn mask_words(tokens: &[Token]) -> Vec<Token> {
    tokens
        .iter()
        .map(|t| {
            if t.kind == TokenKind::Word {
                Token { surface: MASK.to_string(), ..t.clone() }
            } else {
                t.clone()
            }
        })
        .collect()
}
