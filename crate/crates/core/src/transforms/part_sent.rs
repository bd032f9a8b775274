use crate::corpus::WinogradInstance;
use crate::text::{diff_tokens, normalize_with_span, Span, Token};

use super::{Mode, SkipReason, TransformedInstance};

/// Discourse markers that open a new segment. Matched as standalone tokens,
/// ignoring case and surrounding quotes.
pub const WORD_MARKERS: &[&str] = &["so", "but", "and", "because", "although", "though", "due", "since"];

/// Punctuation that closes a segment when it ends a word.
pub const PUNCT_MARKERS: &[&str] = &[".", ",", ";", "?"];

pub(crate) fn is_word_marker(word: &str) -> bool {
    let core = word.trim_matches(|c: char| matches!(c, '"' | '\'' | '(' | ')' | '\u{201c}' | '\u{201d}'));
    WORD_MARKERS.iter().any(|m| m.eq_ignore_ascii_case(core))
}

#[derive(Debug, Default)]
struct Segment<'a> {
    opener: Option<Token<'a>>,
    content: Vec<Token<'a>>,
    closer: Option<Token<'a>>,
}

impl Segment<'_> {
    fn bounds(&self) -> Option<Span> {
        let first = self.opener.or_else(|| self.content.first().copied())?;
        let last = self.closer.or_else(|| self.content.last().copied()).unwrap_or(first);
        Some(Span::from_bounds(first.span.start, last.span.end()))
    }
}

fn segments(text: &str) -> Vec<Segment<'_>> {
    let mut out = Vec::new();
    let mut cur = Segment::default();
    for tok in diff_tokens(text) {
        if is_word_marker(tok.text) {
            out.push(std::mem::take(&mut cur));
            cur.opener = Some(tok);
        } else if PUNCT_MARKERS.contains(&tok.text) {
            cur.closer = Some(tok);
            out.push(std::mem::take(&mut cur));
        } else {
            cur.content.push(tok);
        }
    }
    out.push(cur);
    out
}

/// Keeps only the segment holding the pronoun, with its opening marker and
/// closing punctuation.
pub fn part_sent(instance: &WinogradInstance) -> Result<TransformedInstance, SkipReason> {
    let target = instance.target_span;
    let segs = segments(&instance.sentence);
    let seg = segs
        .iter()
        .find(|s| {
            s.content
                .iter()
                .any(|t| t.span.overlaps(&target) || t.span.contains(&target))
        })
        .ok_or(SkipReason::TargetNotFound)?;
    let bounds = seg.bounds().ok_or(SkipReason::TargetNotFound)?;
    let piece = &instance.sentence[bounds.start..bounds.end()];
    let local = Span::new(target.start - bounds.start, target.len);
    let (text, target_span) = normalize_with_span(piece, local);

    let mut notes = Vec::new();
    if let Some(op) = seg.opener {
        notes.push(format!("opened by marker {:?}", op.text));
    }
    if let Some(cl) = seg.closer {
        notes.push(format!("closed by {:?}", cl.text));
    }
    notes.push(format!(
        "kept segment {}..{} of {}",
        bounds.start,
        bounds.end(),
        instance.sentence.len()
    ));

    Ok(TransformedInstance {
        source_id: instance.id.clone(),
        mode: Mode::PartSent,
        text,
        target_span,
        label: instance.label,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Source, TargetKind};

    fn inst(sentence: &str, target_at: usize, target_len: usize) -> WinogradInstance {
        WinogradInstance {
            id: "x".into(),
            sentence: sentence.into(),
            candidates: ["a".into(), "b".into()],
            target_span: Span::new(target_at, target_len),
            target_kind: TargetKind::Pronoun,
            label: 0,
            source: Source::Wsc,
            group_hint: None,
        }
    }

    fn run(sentence: &str, target: &str) -> TransformedInstance {
        let span = crate::text::find_word_ci(sentence, target.trim())[0];
        part_sent(&inst(sentence, span.start, span.len)).unwrap()
    }

    #[test]
    fn trophy() {
        let out = run(
            "The trophy doesn't fit into the brown suitcase because it is too large.",
            "it ",
        );
        assert_eq!(out.text, "because it is too large.");
    }

    #[test]
    fn ankles_and_crutches() {
        let s = "Sam broke both his ankles and he's walking with crutches. But a month or so from now they should be unnecessary.";
        let out = run(s, "they");
        assert_eq!(out.text, "so from now they should be unnecessary.");
        assert_eq!(out.target_span.slice(&out.text), Some("they"));
    }

    #[test]
    fn no_marker_keeps_sentence() {
        let out = run("Anna   did a lot worse than her good friend Lucy on the test", "her");
        assert_eq!(out.text, "Anna did a lot worse than her good friend Lucy on the test");
    }

    #[test]
    fn capitalized_marker_opens_segment() {
        let out = run("Joe paid Bill. Because he owed him money, he was happy", "owed");
        assert_eq!(out.text, "Because he owed him money,");
    }

    #[test]
    fn markers_do_not_split_words() {
        assert!(!is_word_marker("sober"));
        assert!(!is_word_marker("so-called"));
        assert!(is_word_marker("\"But"));
        let out = run("The price was 3.5 dollars so _ left.", "_");
        assert_eq!(out.text, "so _ left.");
    }

    #[test]
    fn output_is_fixed_point() {
        let out = run("I poured water from the bottle into the cup until it was full.", "it ");
        let again = part_sent(&inst(&out.text, out.target_span.start, out.target_span.len)).unwrap();
        assert_eq!(again.text, out.text);
    }
}
