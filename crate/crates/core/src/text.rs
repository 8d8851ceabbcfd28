//! Text normalization and tokenization.
//!
//! Every segment goes through the same two steps: Unicode NFC plus whitespace
//! collapsing, then whitespace splitting with a fixed punctuation list detached
//! into standalone tokens. The rule is versioned by [`TOKENIZER_VERSION`] and
//! recorded in every report.

use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// Identifier of the normalization + tokenization rule implemented here.
pub const TOKENIZER_VERSION: &str = "hindeval-tok/1 nfc+ws+punct[।॥.,!?;:\"()]";

pub const DANDA: &str = "।";
pub const DOUBLE_DANDA: &str = "॥";

const DANDA_CHAR: char = '।';
const DOUBLE_DANDA_CHAR: char = '॥';

fn is_detached(c: char) -> bool {
    matches!(
        c,
        DANDA_CHAR | DOUBLE_DANDA_CHAR | '.' | ',' | '!' | '?' | ';' | ':' | '"' | '(' | ')'
    )
}

/// True for the Devanagari sentence terminators `।` and `॥`.
pub fn is_danda(surface: &str) -> bool {
    surface == DANDA || surface == DOUBLE_DANDA
}

/// NFC-normalizes `text`, trims it and collapses internal whitespace runs to a single space.
pub fn normalize(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    let mut out = String::with_capacity(nfc.len());
    for word in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// A single unigram of a segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub index: usize,
}

/// A tokenized sentence; `raw` keeps the line exactly as read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub tokens: Vec<Token>,
    pub raw: String,
}

impl Segment {
    /// Normalizes and tokenizes a raw line.
    pub fn parse(raw: &str) -> Segment {
        let mut segment = tokenize(&normalize(raw));
        segment.raw = raw.to_string();
        segment
    }

    /// Builds a segment directly from already-split words (each word is still tokenized).
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Segment {
        let joined = words.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" ");
        Segment::parse(&joined)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn surface(&self, index: usize) -> &str {
        &self.tokens[index].surface
    }

    /// Space-joined token surfaces.
    pub fn detokenize(&self) -> String {
        self.surfaces().collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detokenize())
    }
}

/// Splits normalized text into tokens.
///
/// Whitespace separates words; `।`, `॥` and ASCII `.,!?;:"()` become tokens of
/// their own. Two adjacent dandas fold into a single `॥`.
pub fn tokenize(text: &str) -> Segment {
    let mut surfaces: Vec<String> = Vec::new();
    for chunk in text.split_whitespace() {
        let mut word = String::new();
        let mut chars = chunk.chars().peekable();
        while let Some(c) = chars.next() {
            if !is_detached(c) {
                word.push(c);
                continue;
            }
            if !word.is_empty() {
                surfaces.push(std::mem::take(&mut word));
            }
            if c == DANDA_CHAR && chars.peek() == Some(&DANDA_CHAR) {
                chars.next();
                surfaces.push(DOUBLE_DANDA.to_string());
            } else {
                surfaces.push(c.to_string());
            }
        }
        if !word.is_empty() {
            surfaces.push(word);
        }
    }
    Segment {
        tokens: surfaces
            .into_iter()
            .enumerate()
            .map(|(index, surface)| Token { surface, index })
            .collect(),
        raw: text.to_string(),
    }
}
