//! Low-level text utilities shared by every stage: tokenization,
//! sentence splitting, suffix-stripping stemming, and stop-word lists.

pub mod stem;

use std::collections::BTreeSet;
use std::io;
use std::path::Path;

pub use stem::stem;

/// A token carrying byte offsets into the original (un-lowercased) text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpannedToken {
    /// Lowercased token text.
    pub text: String,
    /// Byte offset of the first character in the source text.
    pub start: usize,
    /// Byte offset one past the last character in the source text.
    pub end: usize,
}

/// Splits `text` into lowercase tokens on non-alphanumeric boundaries.
///
/// The whole string is lowercased first, so the result is independent of
/// span bookkeeping; digits are kept and there is no sub-word splitting.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in lowered.chars() {
        if ch.is_alphanumeric() {
            current.push(ch);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Like [`tokenize`] but records each token's byte span in the original
/// text, for entity mentions that must point back at their surface form.
pub fn tokenize_spans(text: &str) -> Vec<SpannedToken> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (idx, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            if start.is_none() {
                start = Some(idx);
            }
        } else if let Some(s) = start.take() {
            tokens.push(SpannedToken {
                text: text[s..idx].to_lowercase(),
                start: s,
                end: idx,
            });
        }
    }
    if let Some(s) = start {
        tokens.push(SpannedToken {
            text: text[s..].to_lowercase(),
            start: s,
            end: text.len(),
        });
    }
    tokens
}

/// A sentence slice with byte offsets into the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Splits text into sentences after `.`, `!`, or `?` followed by
/// whitespace; the trailing remainder forms the final sentence. A period
/// that ends a dotted abbreviation (a word with another `.` inside it,
/// such as `e.g.` or `U.S.`) does not end a sentence. Sentences are
/// trimmed but their offsets still cover the trimmed slice.
pub fn split_sentences(text: &str) -> Vec<Sentence<'_>> {
    let mut sentences = Vec::new();
    let bytes = text.as_bytes();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((idx, ch)) = iter.next() {
        if matches!(ch, '.' | '!' | '?') {
            let next_is_space = iter
                .peek()
                .map(|(_, next)| next.is_whitespace())
                .unwrap_or(true);
            if next_is_space && !(ch == '.' && ends_dotted_abbreviation(text, idx)) {
                let end = idx + ch.len_utf8();
                push_trimmed(text, bytes, start, end, &mut sentences);
                start = end;
            }
        }
    }
    push_trimmed(text, bytes, start, text.len(), &mut sentences);
    sentences
}

/// True when the period at `dot_idx` closes a word that already contains
/// a period, e.g. the second dot of `e.g.`.
fn ends_dotted_abbreviation(text: &str, dot_idx: usize) -> bool {
    text[..dot_idx]
        .chars()
        .rev()
        .take_while(|c| !c.is_whitespace())
        .any(|c| c == '.')
}

fn push_trimmed<'a>(
    text: &'a str,
    bytes: &[u8],
    mut start: usize,
    mut end: usize,
    out: &mut Vec<Sentence<'a>>,
) {
    while start < end && bytes[start].is_ascii_whitespace() {
        start += 1;
    }
    while end > start && bytes[end - 1].is_ascii_whitespace() {
        end -= 1;
    }
    if start < end {
        out.push(Sentence {
            text: &text[start..end],
            start,
            end,
        });
    }
}

/// A stop-word set matched against stemmed, lowercased tokens.
///
/// Entries are normalized (lowercased and stemmed) at load time so that
/// lookups work directly on the pipeline's normalized token stream.
#[derive(Debug, Clone, Default)]
pub struct StopWords {
    stems: BTreeSet<String>,
}

impl StopWords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parses the one-word-per-line format; blank lines and lines whose
    /// first non-space character is `#` are ignored.
    pub fn parse(contents: &str) -> Self {
        let mut stems = BTreeSet::new();
        for line in contents.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            stems.insert(stem(&line.to_lowercase()));
        }
        Self { stems }
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, stemmed_token: &str) -> bool {
        self.stems.contains(stemmed_token)
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }
}
