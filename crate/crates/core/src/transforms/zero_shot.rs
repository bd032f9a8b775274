use serde::{Deserialize, Serialize};

use crate::corpus::{TwinGroup, WinogradInstance};
use crate::text::{splice, Span, TERMINAL_PUNCT};

use super::localize::{is_determiner, locate_candidates};
use super::RejectionReason;

/// Literal mask sentinel of the interchange format.
pub const MASK: &str = "[MASK]";

/// A resolved sentence with its special word masked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroShotQuery {
    /// Instance the query was derived from; also the scoring request id.
    pub source_id: String,
    pub source_group: String,
    pub member_index: usize,
    pub text: String,
    /// The group's special words, in member order.
    pub candidates: [String; 2],
    pub gold: usize,
}

impl ZeroShotQuery {
    pub fn gold_word(&self) -> &str {
        &self.candidates[self.gold]
    }
}

/// Span of the special word proper: one trailing punctuation character is
/// excluded (it stays in the text after the sentinel).
fn special_word(inst: &WinogradInstance, span: Span) -> Result<Span, RejectionReason> {
    let surface = span
        .slice(&inst.sentence)
        .ok_or(RejectionReason::TargetNotReplaceable)?;
    let trimmed = match surface.chars().next_back() {
        Some(c) if TERMINAL_PUNCT.contains(&c) || c == ':' => &surface[..surface.len() - c.len_utf8()],
        _ => surface,
    };
    let trimmed_start = trimmed.len() - trimmed.trim_start().len();
    let word = trimmed.trim();
    if word.is_empty() {
        return Err(RejectionReason::EmptySpecial);
    }
    if word.split_whitespace().count() > 1 {
        return Err(RejectionReason::MultiWordSpecial);
    }
    Ok(Span::new(span.start + trimmed_start, word.len()))
}

fn is_sentence_initial(sentence: &str, at: usize) -> bool {
    match sentence[..at]
        .trim_end_matches(|c: char| c.is_whitespace() || matches!(c, '"' | '\'' | '\u{201c}'))
        .chars()
        .next_back()
    {
        None => true,
        Some(c) => matches!(c, '.' | '?' | '!'),
    }
}

/// Surface text that replaces the target: the gold candidate as it appears in
/// the sentence (falling back to the candidate string), with its first letter
/// cased for the target position.
fn replacement_surface(inst: &WinogradInstance) -> String {
    let mentions = locate_candidates(inst);
    let raw = mentions[inst.label]
        .and_then(|m| m.span.slice(&inst.sentence))
        .unwrap_or(inst.gold_candidate())
        .to_string();
    let mut chars = raw.chars();
    let Some(first) = chars.next() else {
        return raw;
    };
    let rest = chars.as_str();
    if is_sentence_initial(&inst.sentence, inst.target_span.start) {
        first.to_uppercase().chain(rest.chars()).collect()
    } else if raw.split_whitespace().next().is_some_and(is_determiner) {
        first.to_lowercase().chain(rest.chars()).collect()
    } else {
        raw
    }
}

fn build_query(
    group: &TwinGroup,
    member_index: usize,
    words: &[Span; 2],
    candidates: &[String; 2],
) -> Result<ZeroShotQuery, RejectionReason> {
    let inst = &group.members[member_index];
    let word = words[member_index];
    if inst.target_span.overlaps(&word) || inst.target_span.is_empty() {
        return Err(RejectionReason::TargetNotReplaceable);
    }
    if inst.sentence.contains(MASK) {
        return Err(RejectionReason::SentinelInSource);
    }
    let mut edits = vec![(inst.target_span, replacement_surface(inst)), (word, MASK.to_string())];
    let text = splice(&inst.sentence, &mut edits);
    Ok(ZeroShotQuery {
        source_id: inst.id.clone(),
        source_group: group.group_id.clone(),
        member_index,
        text,
        candidates: candidates.clone(),
        gold: member_index,
    })
}

/// Resolves the target to the gold candidate and masks the special word, for
/// both members of a twin pair.
pub fn to_zero_shot(group: &TwinGroup) -> Result<[ZeroShotQuery; 2], RejectionReason> {
    if group.members.len() != 2 || group.special_spans.len() != 2 {
        return Err(RejectionReason::GroupSize);
    }
    let words = [
        special_word(&group.members[0], group.special_spans[0])?,
        special_word(&group.members[1], group.special_spans[1])?,
    ];
    let candidates = [0, 1].map(|i| {
        words[i]
            .slice(&group.members[i].sentence)
            .unwrap_or_default()
            .to_string()
    });
    if candidates[0].to_lowercase() == candidates[1].to_lowercase() {
        return Err(RejectionReason::DegenerateTwins);
    }
    Ok([
        build_query(group, 0, &words, &candidates)?,
        build_query(group, 1, &words, &candidates)?,
    ])
}
