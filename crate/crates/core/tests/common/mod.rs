//! Deterministic random generators shared by the integration suites.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subscore::srt::{SubtitleBlock, SubtitleFile, Timestamp};
use subscore::token::Token;
use subscore::TimeSpan;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const SMALL_VOCAB: &[&str] = &["a", "b", "c", "d"];

pub const WORD_VOCAB: &[&str] = &[
    "the", "dance", "is", "about", "to", "begin", "for", "champagne", "and", "brandy", "you",
    "bought", "me", "as", "i", "recall", "booze", "put", "sleep", "little", "prematurely",
];

/// A structurally valid subtitle file: monotone timings, occasional gaps,
/// one or two non-empty lines per block.
pub fn random_file(rng: &mut ChaCha8Rng, max_blocks: usize, vocab: &[&str]) -> SubtitleFile {
    let n_blocks = rng.random_range(1..=max_blocks);
    let mut clock: u64 = rng.random_range(0..2000);
    let mut blocks = Vec::with_capacity(n_blocks);
    for i in 0..n_blocks {
        let start = clock + rng.random_range(0..1500);
        let end = start + rng.random_range(400..4000);
        clock = end;
        let n_lines = rng.random_range(1..=2);
        let lines = (0..n_lines)
            .map(|_| {
                let n_words = rng.random_range(1..=4);
                (0..n_words)
                    .map(|_| *vocab.choose(rng).unwrap())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        blocks.push(SubtitleBlock {
            index: i as u32 + 1,
            start: Timestamp(start),
            end: Timestamp(end),
            lines,
        });
    }
    SubtitleFile::new(blocks)
}

/// A word-or-break token sequence over a shared span.
pub fn random_tokens(rng: &mut ChaCha8Rng, max_len: usize, vocab: &[&str]) -> Vec<Token> {
    let span = TimeSpan::new(0, 1000);
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| match rng.random_range(0..6) {
            0 => Token::eol(0, span),
            1 => Token::eob(0, span),
            _ => Token::word(*vocab.choose(rng).unwrap(), 0, span),
        })
        .collect()
}

/// Perturbs a file's text without touching its timings: substitutes,
/// drops, duplicates words and occasionally rebalances a block's lines.
pub fn perturb_text(rng: &mut ChaCha8Rng, file: &SubtitleFile, vocab: &[&str]) -> SubtitleFile {
    let mut out = file.clone();
    for block in &mut out.blocks {
        let mut words: Vec<String> =
            block.lines.join(" ").split_whitespace().map(String::from).collect();
        for w in &mut words {
            if rng.random_bool(0.2) {
                *w = vocab.choose(rng).unwrap().to_string();
            }
        }
        if words.len() > 1 && rng.random_bool(0.15) {
            let i = rng.random_range(0..words.len());
            words.remove(i);
        }
        if rng.random_bool(0.15) {
            let w = vocab.choose(rng).unwrap().to_string();
            let i = rng.random_range(0..=words.len());
            words.insert(i, w);
        }
        if words.is_empty() {
            words.push(vocab.choose(rng).unwrap().to_string());
        }
        if words.len() > 1 && rng.random_bool(0.5) {
            let cut = rng.random_range(1..words.len());
            block.lines = vec![words[..cut].join(" "), words[cut..].join(" ")];
        } else {
            block.lines = vec![words.join(" ")];
        }
    }
    out
}
