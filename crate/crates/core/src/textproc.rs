//! Text primitives shared by every metric: tokenization, sentence splitting,
//! n-gram multisets, syllable counting and answer normalization.
//!
//! Everything here is a pure function of its input.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
}

/// A lowercased token sequence with byte spans into the original text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSeq {
    tokens: Vec<String>,
    spans: Vec<(usize, usize)>,
}

impl TokenSeq {
    fn push(&mut self, token: String, span: (usize, usize)) {
        debug_assert!(!token.is_empty());
        self.tokens.push(token);
        self.spans.push(span);
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn spans(&self) -> &[(usize, usize)] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

/// Splits a whitespace-delimited chunk into (leading punct, core, trailing punct)
/// byte ranges relative to the chunk.
fn peel_punctuation(chunk: &str) -> (usize, usize) {
    let bytes = chunk.as_bytes();
    let mut start = 0;
    while start < bytes.len() && bytes[start].is_ascii_punctuation() {
        start += 1;
    }
    let mut end = bytes.len();
    while end > start && bytes[end - 1].is_ascii_punctuation() {
        end -= 1;
    }
    (start, end)
}

fn whitespace_chunks(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split_whitespace().map(move |chunk| {
        // split_whitespace yields subslices of `text`
        let offset = chunk.as_ptr() as usize - text.as_ptr() as usize;
        (offset, chunk)
    })
}

/// Lowercases and splits on whitespace; ASCII punctuation at either end of a
/// chunk becomes one token per character.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut seq = TokenSeq::default();
    for (offset, chunk) in whitespace_chunks(text) {
        let (core_start, core_end) = peel_punctuation(chunk);
        for i in 0..core_start {
            seq.push(chunk[i..i + 1].to_string(), (offset + i, offset + i + 1));
        }
        if core_end > core_start {
            seq.push(
                chunk[core_start..core_end].to_lowercase(),
                (offset + core_start, offset + core_end),
            );
        }
        for i in core_end.max(core_start)..chunk.len() {
            seq.push(chunk[i..i + 1].to_string(), (offset + i, offset + i + 1));
        }
    }
    seq
}

/// Splits on `.`, `!` or `?` when followed by whitespace or the end of text.
/// Abbreviations are not special-cased.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            let piece = text[start..end].trim();
            if !piece.is_empty() {
                sentences.push(piece.to_string());
            }
            start = end;
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        sentences.push(rest.to_string());
    }
    sentences
}

/// Multiset of contiguous n-grams of one fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramMultiset {
    n: usize,
    counts: HashMap<Vec<String>, usize>,
}

impl NGramMultiset {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn count(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[String], usize)> {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn contains(&self, gram: &[String]) -> bool {
        self.counts.contains_key(gram)
    }
}

pub fn ngrams(tokens: &TokenSeq, n: usize) -> Result<NGramMultiset, TextError> {
    ngrams_of(tokens.tokens(), n)
}

pub(crate) fn ngrams_of(tokens: &[String], n: usize) -> Result<NGramMultiset, TextError> {
    if n == 0 {
        return Err(TextError::ZeroOrder);
    }
    let mut counts = HashMap::new();
    for window in tokens.windows(n) {
        *counts.entry(window.to_vec()).or_insert(0) += 1;
    }
    Ok(NGramMultiset { n, counts })
}

/// Heuristic syllable count: maximal runs of `aeiouy`, minus one for a final
/// `e` when that leaves at least one. Never less than 1.
pub fn count_syllables(word: &str) -> usize {
    if word.is_empty() || !word.chars().all(char::is_alphabetic) {
        return 1;
    }
    let lower = word.to_lowercase();
    let mut groups = 0;
    let mut in_group = false;
    for c in lower.chars() {
        let vowel = matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
        if vowel && !in_group {
            groups += 1;
        }
        in_group = vowel;
    }
    if lower.ends_with('e') && groups > 1 {
        groups -= 1;
    }
    groups.max(1)
}

/// Answer normalization for token-F1. Articles are kept.
pub fn normalize_answer(text: &str) -> TokenSeq {
    let mut seq = TokenSeq::default();
    for (offset, chunk) in whitespace_chunks(text) {
        let (start, end) = peel_punctuation(chunk);
        if end > start {
            seq.push(
                chunk[start..end].to_lowercase(),
                (offset + start, offset + end),
            );
        }
    }
    seq
}
