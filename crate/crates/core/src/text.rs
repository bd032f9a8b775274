//! Byte spans, whitespace normalization and the diff tokenizer shared by
//! pairing and the transforms.

use serde::{Deserialize, Serialize};

/// Half-open byte interval `[start, start + len)` into a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

impl Span {
    pub fn new(start: usize, len: usize) -> Self {
        Span { start, len }
    }

    pub fn from_bounds(start: usize, end: usize) -> Self {
        debug_assert!(end >= start);
        Span {
            start,
            len: end - start,
        }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end() && other.start < self.end()
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end() <= self.end()
    }

    /// Returns the covered text, or `None` when the span is out of bounds or
    /// cuts through a UTF-8 sequence.
    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        text.get(self.start..self.end())
    }

    /// Converts to a character-offset span over `text`.
    pub fn to_chars(&self, text: &str) -> (usize, usize) {
        let start = text[..self.start].chars().count();
        let len = text[self.start..self.end()].chars().count();
        (start, len)
    }

    /// Builds a byte span from character offsets, `None` when out of range.
    pub fn from_chars(text: &str, start: usize, len: usize) -> Option<Span> {
        let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
        let begin = indices.nth(start)?;
        let end = if len == 0 { begin } else { indices.nth(len - 1)? };
        Some(Span::from_bounds(begin, end))
    }
}

/// Punctuation split off the end of a whitespace word by [`diff_tokens`].
pub const TERMINAL_PUNCT: &[char] = &['.', ',', ';', '?', '!'];

/// A token with its byte span in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub span: Span,
}

/// Splits on whitespace; each word's trailing terminal punctuation becomes
/// separate one-character tokens.
pub fn diff_tokens(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (start, word) in whitespace_words(text) {
        let stem = word.trim_end_matches(TERMINAL_PUNCT);
        if !stem.is_empty() {
            out.push(Token {
                text: stem,
                span: Span::new(start, stem.len()),
            });
        }
        let mut offset = start + stem.len();
        for ch in word[stem.len()..].chars() {
            let len = ch.len_utf8();
            out.push(Token {
                text: &text[offset..offset + len],
                span: Span::new(offset, len),
            });
            offset += len;
        }
    }
    out
}

/// Whitespace-delimited words with their starting byte offsets.
pub fn whitespace_words(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split_whitespace()
        .map(move |w| (w.as_ptr() as usize - text.as_ptr() as usize, w))
}

/// Collapses whitespace runs to one space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Like [`normalize_whitespace`] but carries a span through the rewrite.
pub fn normalize_with_span(text: &str, span: Span) -> (String, Span) {
    let mut out = String::with_capacity(text.len());
    let mut new_start = None;
    let mut new_end = None;
    for (start, word) in whitespace_words(text) {
        if !out.is_empty() {
            out.push(' ');
        }
        let base = out.len();
        let end = start + word.len();
        if new_start.is_none() && span.start >= start && span.start <= end {
            new_start = Some(base + (span.start - start));
        }
        if span.end() >= start && span.end() <= end {
            new_end = Some(base + (span.end() - start));
        }
        out.push_str(word);
    }
    let start = new_start.unwrap_or(out.len());
    let end = new_end.unwrap_or(start).max(start);
    (out, Span::from_bounds(start, end))
}

/// Case-insensitive (ASCII) search for `needle` as a whole-word match,
/// returning every hit in order. Word boundaries are non-alphanumeric
/// characters or the ends of the text.
pub fn find_word_ci(haystack: &str, needle: &str) -> Vec<Span> {
    let mut hits = Vec::new();
    if needle.is_empty() || needle.len() > haystack.len() {
        return hits;
    }
    let hay = haystack.as_bytes();
    let pat = needle.as_bytes();
    for start in 0..=hay.len() - pat.len() {
        if !haystack.is_char_boundary(start) || !haystack.is_char_boundary(start + pat.len()) {
            continue;
        }
        if !hay[start..start + pat.len()].eq_ignore_ascii_case(pat) {
            continue;
        }
        let before_ok = haystack[..start]
            .chars()
            .next_back()
            .is_none_or(|c| !c.is_alphanumeric());
        let after_ok = haystack[start + pat.len()..]
            .chars()
            .next()
            .is_none_or(|c| !c.is_alphanumeric());
        if before_ok && after_ok {
            hits.push(Span::new(start, pat.len()));
        }
    }
    hits
}

/// Applies non-overlapping replacements, given in any order.
pub fn splice(text: &str, edits: &mut [(Span, String)]) -> String {
    edits.sort_by_key(|(span, _)| span.start);
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (span, replacement) in edits.iter() {
        debug_assert!(span.start >= cursor, "overlapping edits");
        out.push_str(&text[cursor..span.start]);
        out.push_str(replacement);
        cursor = span.end();
    }
    out.push_str(&text[cursor..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_split_terminal_punctuation() {
        let toks: Vec<_> = diff_tokens("it is too large.").iter().map(|t| t.text).collect();
        assert_eq!(toks, ["it", "is", "too", "large", "."]);
        let toks: Vec<_> = diff_tokens("wait?! ok,").iter().map(|t| t.text).collect();
        assert_eq!(toks, ["wait", "?", "!", "ok", ","]);
    }

    #[test]
    fn token_spans_index_source() {
        let s = "  The  trophy, ok";
        for t in diff_tokens(s) {
            assert_eq!(t.span.slice(s), Some(t.text));
        }
    }

    #[test]
    fn char_span_round_trip() {
        let s = "Caf\u{e9} is \u{201c}_\u{201d} here";
        let byte = Span::new(s.find('_').unwrap(), 1);
        let (cs, cl) = byte.to_chars(s);
        assert_eq!((cs, cl), (9, 1));
        assert_eq!(Span::from_chars(s, cs, cl), Some(byte));
        assert_eq!(Span::from_chars(s, 100, 1), None);
    }

    #[test]
    fn normalization_tracks_span() {
        let s = "  doesn't fit   into  because it is";
        let span = Span::new(s.find("it ").unwrap(), 2);
        let (out, moved) = normalize_with_span(s, span);
        assert_eq!(out, "doesn't fit into because it is");
        assert_eq!(moved.slice(&out), Some("it"));
    }

    #[test]
    fn word_search_respects_boundaries() {
        let hits = find_word_ci("The trophy; the trophyism", "the trophy");
        assert_eq!(hits, vec![Span::new(0, 10)]);
        assert!(find_word_ci("Item", "it").is_empty());
    }
}
