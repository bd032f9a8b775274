//! Finds candidate mentions inside a sentence.

use crate::corpus::WinogradInstance;
use crate::text::{find_word_ci, whitespace_words, Span};

use super::part_sent::is_word_marker;

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "his", "her", "their", "its", "my", "your", "our", "some",
    "both", "each", "every",
];

/// Words scanned leftwards from a head word before giving up on a determiner.
const MAX_LEFT_EXPANSION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mention {
    pub span: Span,
    /// True when the full candidate string matched verbatim (ignoring case).
    pub exact: bool,
}

pub(crate) fn is_determiner(word: &str) -> bool {
    DETERMINERS.iter().any(|d| d.eq_ignore_ascii_case(word))
}

/// Locates both candidates. Exact whole-word matches are tried first (longer
/// candidate first); a candidate with no exact match falls back to its head
/// word, expanded leftwards to the nearest determiner. Mentions never overlap
/// each other or the target.
pub fn locate_candidates(inst: &WinogradInstance) -> [Option<Mention>; 2] {
    let mut found: [Option<Mention>; 2] = [None, None];
    let order = if inst.candidates[0].len() >= inst.candidates[1].len() {
        [0, 1]
    } else {
        [1, 0]
    };
    let mut taken = vec![inst.target_span];

    for &c in &order {
        let hit = find_word_ci(&inst.sentence, inst.candidates[c].trim())
            .into_iter()
            .find(|s| taken.iter().all(|t| !t.overlaps(s)));
        if let Some(span) = hit {
            taken.push(span);
            found[c] = Some(Mention { span, exact: true });
        }
    }
    for &c in &order {
        if found[c].is_some() {
            continue;
        }
        if let Some(span) = locate_by_head(&inst.sentence, &inst.candidates[c], &taken) {
            taken.push(span);
            found[c] = Some(Mention { span, exact: false });
        }
    }
    found
}

fn locate_by_head(sentence: &str, candidate: &str, taken: &[Span]) -> Option<Span> {
    let words: Vec<&str> = candidate.split_whitespace().collect();
    let head = words.last()?.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'');
    if head.is_empty() {
        return None;
    }
    let modifiers: Vec<String> = words[..words.len() - 1].iter().map(|w| w.to_lowercase()).collect();
    let head_span = find_word_ci(sentence, head)
        .into_iter()
        .find(|s| taken.iter().all(|t| !t.overlaps(s)))?;

    let preceding: Vec<(usize, &str)> = whitespace_words(sentence)
        .take_while(|(start, _)| *start < head_span.start)
        .collect();
    let mut start = head_span.start;
    for &(wstart, word) in preceding.iter().rev().take(MAX_LEFT_EXPANSION) {
        let wspan = Span::new(wstart, word.len());
        if taken.iter().any(|t| t.overlaps(&wspan))
            || is_word_marker(word)
            || word.ends_with(|c: char| c.is_ascii_punctuation() && c != '\'')
        {
            break;
        }
        if is_determiner(word) || modifiers.first().is_some_and(|m| m == &word.to_lowercase()) {
            start = wstart;
            break;
        }
    }
    Some(Span::from_bounds(start, head_span.end()))
}
