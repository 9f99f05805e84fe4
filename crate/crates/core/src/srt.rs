//! SubRip (SRT) parsing and rendering.
//!
//! The parser is tolerant of the mess found in real subtitle files: CRLF
//! line endings, a UTF-8 BOM, missing or non-sequential index lines,
//! 3-digit hour fields and `.` as millisecond separator. Rendering always
//! produces canonical SRT: sequential 1-based indices, `,` separator, LF
//! endings, one blank line between blocks.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// A point in time, millisecond resolution, measured from file start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn from_parts(hours: u64, minutes: u64, seconds: u64, millis: u64) -> Self {
        Timestamp(((hours * 60 + minutes) * 60 + seconds) * 1000 + millis)
    }

    pub fn millis(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms = self.0 % 1000;
        let total_secs = self.0 / 1000;
        let s = total_secs % 60;
        let m = (total_secs / 60) % 60;
        let h = total_secs / 3600;
        write!(f, "{:02}:{:02}:{:02},{:03}", h, m, s, ms)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid timestamp {0:?}")]
pub struct TimestampError(pub String);

impl FromStr for Timestamp {
    type Err = TimestampError;

    /// Parses `HH:MM:SS,mmm`. Hours may have more than two digits; a `.`
    /// is accepted in place of the comma.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TimestampError(s.to_string());
        let mut fields = s.trim().split(':');
        let (h, m, rest) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(h), Some(m), Some(rest), None) => (h, m, rest),
            _ => return Err(err()),
        };
        let (sec, ms) = rest.split_once([',', '.']).ok_or_else(err)?;
        if h.is_empty() || h.len() > 9 || m.is_empty() || m.len() > 2 || sec.is_empty() || sec.len() > 2 {
            return Err(err());
        }
        if ms.len() != 3 {
            return Err(err());
        }
        let digits = |t: &str| -> Result<u64, TimestampError> {
            if t.bytes().all(|b| b.is_ascii_digit()) {
                t.parse().map_err(|_| err())
            } else {
                Err(err())
            }
        };
        let (h, m, sec, ms) = (digits(h)?, digits(m)?, digits(sec)?, digits(ms)?);
        if m >= 60 || sec >= 60 {
            return Err(err());
        }
        Ok(Timestamp::from_parts(h, m, sec, ms))
    }
}

/// A half-open time interval `[start, end)` in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TimeSpan {
    pub start: u64,
    pub end: u64,
}

impl TimeSpan {
    pub fn new(start: u64, end: u64) -> Self {
        TimeSpan { start, end }
    }

    /// Strict overlap: touching endpoints do not count.
    pub fn overlaps(self, other: TimeSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Length of the intersection in milliseconds (0 when disjoint).
    pub fn overlap_millis(self, other: TimeSpan) -> u64 {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }

    pub fn duration(self) -> u64 {
        self.end - self.start
    }
}

/// One SRT cue: index, display interval and one or more lines of text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubtitleBlock {
    pub index: u32,
    pub start: Timestamp,
    pub end: Timestamp,
    pub lines: Vec<String>,
}

impl SubtitleBlock {
    pub fn span(&self) -> TimeSpan {
        TimeSpan::new(self.start.millis(), self.end.millis())
    }

    /// All lines joined with a single space.
    pub fn text(&self) -> String {
        self.lines.join(" ")
    }
}

/// A parsed subtitle file. Block order follows the file; the index lines
/// are kept but identity is positional.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SubtitleFile {
    pub blocks: Vec<SubtitleBlock>,
    pub source_name: String,
}

impl SubtitleFile {
    pub fn new(blocks: Vec<SubtitleBlock>) -> Self {
        SubtitleFile { blocks, source_name: String::new() }
    }

    pub fn with_source_name(mut self, name: impl Into<String>) -> Self {
        self.source_name = name.into();
        self
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// What went wrong (or looked suspicious) at a given input line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    /// A line containing `-->` that does not parse as a timecode pair.
    MalformedTimecode,
    /// Block end time not strictly after its start time.
    InvalidDuration,
    /// A timecode with no following text lines; the block is dropped.
    EmptyCue,
    /// Block starts directly with a timecode line.
    MissingIndex,
    /// Index line present but not the expected sequential value.
    NonSequentialIndex,
    /// Block start time earlier than the previous block's start.
    NonMonotoneStart,
    /// Text where a block was expected; skipped until the next block.
    StrayText,
}

impl IssueKind {
    pub fn is_error(self) -> bool {
        matches!(self, IssueKind::MalformedTimecode | IssueKind::InvalidDuration)
    }
}

/// A single diagnostic produced while parsing.
#[derive(Debug, Clone)]
pub struct ParseIssue {
    pub kind: IssueKind,
    /// 1-based line number in the input document.
    pub line: usize,
    pub message: String,
}

/// Result of a lenient parse: whatever could be salvaged, plus diagnostics.
#[derive(Debug)]
pub struct ParseReport {
    pub file: SubtitleFile,
    pub issues: Vec<ParseIssue>,
}

impl ParseReport {
    pub fn warnings(&self) -> impl Iterator<Item = &ParseIssue> {
        self.issues.iter().filter(|i| !i.kind.is_error())
    }

    pub fn errors(&self) -> impl Iterator<Item = &ParseIssue> {
        self.issues.iter().filter(|i| i.kind.is_error())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Parses an SRT document, failing on the first malformed block.
///
/// An empty document yields an empty file. Recoverable oddities (missing
/// indices, non-monotone start times, stray text) are tolerated silently
/// here; use [`parse_srt_lenient`] to inspect them.
pub fn parse_srt(document: &str) -> Result<SubtitleFile, ParseError> {
    let report = parse_srt_lenient(document);
    if let Some(issue) = report.errors().next() {
        return Err(ParseError { line: issue.line, message: issue.message.clone() });
    }
    Ok(report.file)
}

/// Parses as much of an SRT document as possible, collecting diagnostics
/// instead of failing. Blocks whose timecode line is malformed are skipped.
pub fn parse_srt_lenient(document: &str) -> ParseReport {
    let document = document.strip_prefix('\u{feff}').unwrap_or(document);
    let lines: Vec<&str> = document.split('\n').map(|l| l.trim_end_matches('\r')).collect();
    let mut parser = Parser { lines: &lines, pos: 0, issues: Vec::new() };
    let blocks = parser.parse_blocks();
    ParseReport { file: SubtitleFile::new(blocks), issues: parser.issues }
}

struct Parser<'a> {
    lines: &'a [&'a str],
    pos: usize,
    issues: Vec<ParseIssue>,
}

impl<'a> Parser<'a> {
    fn issue(&mut self, kind: IssueKind, line: usize, message: impl Into<String>) {
        self.issues.push(ParseIssue { kind, line, message: message.into() });
    }

    fn current(&self) -> Option<&'a str> {
        self.lines.get(self.pos).copied()
    }

    fn is_blank(line: &str) -> bool {
        line.trim().is_empty()
    }

    fn is_index_line(line: &str) -> bool {
        let t = line.trim();
        !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
    }

    fn is_timecode_line(line: &str) -> bool {
        line.contains("-->")
    }

    fn skip_blank(&mut self) {
        while matches!(self.current(), Some(l) if Self::is_blank(l)) {
            self.pos += 1;
        }
    }

    fn parse_blocks(&mut self) -> Vec<SubtitleBlock> {
        let mut blocks = Vec::new();
        let mut prev_start: Option<Timestamp> = None;
        loop {
            self.skip_blank();
            let Some(line) = self.current() else { break };

            let index = if Self::is_timecode_line(line) {
                self.issue(IssueKind::MissingIndex, self.pos + 1, "block has no index line");
                None
            } else if Self::is_index_line(line)
                && matches!(self.lines.get(self.pos + 1), Some(next) if Self::is_timecode_line(next))
            {
                let parsed = line.trim().parse::<u32>().ok();
                self.pos += 1;
                parsed
            } else {
                // Not a plausible block start: skip until one comes along.
                self.issue(IssueKind::StrayText, self.pos + 1, format!("unexpected text {:?}", line.trim()));
                while let Some(l) = self.current() {
                    if Self::is_timecode_line(l)
                        || (Self::is_index_line(l)
                            && matches!(self.lines.get(self.pos + 1), Some(n) if Self::is_timecode_line(n)))
                    {
                        break;
                    }
                    self.pos += 1;
                }
                continue;
            };

            let timecode_line_no = self.pos + 1;
            let Some(timecode) = self.current() else { break };
            let span = self.parse_timecode(timecode, timecode_line_no);
            self.pos += 1;

            // Text lines run until the next blank line or end of input.
            let mut text = Vec::new();
            while let Some(l) = self.current() {
                if Self::is_blank(l) {
                    break;
                }
                text.push(l.trim_end().to_string());
                self.pos += 1;
            }

            let Some((start, end)) = span else { continue };
            if text.is_empty() {
                self.issue(IssueKind::EmptyCue, timecode_line_no, "block has a timecode but no text; dropped");
                continue;
            }

            let expected = blocks.len() as u32 + 1;
            match index {
                Some(i) if i != expected => {
                    self.issue(
                        IssueKind::NonSequentialIndex,
                        timecode_line_no - 1,
                        format!("index {} where {} was expected", i, expected),
                    );
                }
                _ => {}
            }
            if let Some(prev) = prev_start {
                if start < prev {
                    self.issue(
                        IssueKind::NonMonotoneStart,
                        timecode_line_no,
                        format!("start {} is earlier than the previous block's {}", start, prev),
                    );
                }
            }
            prev_start = Some(start);
            blocks.push(SubtitleBlock { index: index.unwrap_or(expected), start, end, lines: text });
        }
        blocks
    }

    fn parse_timecode(&mut self, line: &str, line_no: usize) -> Option<(Timestamp, Timestamp)> {
        let Some((left, right)) = line.split_once("-->") else {
            self.issue(IssueKind::MalformedTimecode, line_no, format!("expected `start --> end`, got {:?}", line));
            return None;
        };
        let start = match left.trim().parse::<Timestamp>() {
            Ok(t) => t,
            Err(e) => {
                self.issue(IssueKind::MalformedTimecode, line_no, e.to_string());
                return None;
            }
        };
        let end = match right.trim().parse::<Timestamp>() {
            Ok(t) => t,
            Err(e) => {
                self.issue(IssueKind::MalformedTimecode, line_no, e.to_string());
                return None;
            }
        };
        if end <= start {
            self.issue(
                IssueKind::InvalidDuration,
                line_no,
                format!("end {} is not after start {}", end, start),
            );
            return None;
        }
        Some((start, end))
    }
}

/// Renders a file as canonical SRT text. Indices are rewritten to be
/// sequential and 1-based; an empty file renders as empty text.
pub fn render_srt(file: &SubtitleFile) -> String {
    let mut out = String::new();
    for (i, block) in file.blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{}\n{} --> {}\n", i + 1, block.start, block.end));
        for line in &block.lines {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

static TAG_RE: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
static MULTISPACE_RE: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();

/// Removes HTML-like tags (`<i>`, `</font>`, ...) and ASS override blocks
/// (`{\an8}`) from a line, collapsing any doubled spaces left behind.
pub fn strip_markup(line: &str) -> String {
    let tag = TAG_RE.get_or_init(|| {
        regex::Regex::new(r"</?[A-Za-z][^<>]*>|\{\\[^{}]*\}").expect("markup pattern")
    });
    let spaces = MULTISPACE_RE.get_or_init(|| regex::Regex::new(r"[ \t]{2,}").expect("space pattern"));
    let stripped = tag.replace_all(line, "");
    spaces.replace_all(&stripped, " ").trim().to_string()
}

/// Applies [`strip_markup`] to every line of a file. Lines left empty are
/// dropped, and blocks consisting solely of markup disappear entirely.
pub fn strip_file_markup(file: &SubtitleFile) -> SubtitleFile {
    let blocks = file
        .blocks
        .iter()
        .filter_map(|b| {
            let lines: Vec<String> =
                b.lines.iter().map(|l| strip_markup(l)).filter(|l| !l.is_empty()).collect();
            if lines.is_empty() {
                None
            } else {
                Some(SubtitleBlock { lines, ..b.clone() })
            }
        })
        .collect();
    SubtitleFile { blocks, source_name: file.source_name.clone() }
}
