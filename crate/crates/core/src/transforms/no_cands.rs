use crate::corpus::WinogradInstance;
use crate::text::{normalize_with_span, splice, Span};

use super::localize::locate_candidates;
use super::{Mode, SkipReason, TransformedInstance};

/// Deletes both candidate mentions, keeping the pronoun or placeholder.
pub fn no_cands(instance: &WinogradInstance) -> Result<TransformedInstance, SkipReason> {
    let mentions = locate_candidates(instance);
    let mut spans = Vec::with_capacity(2);
    let mut notes = Vec::new();
    for (idx, mention) in mentions.iter().enumerate() {
        let m = mention.ok_or(SkipReason::CandidateNotFound { candidate: idx })?;
        let surface = m.span.slice(&instance.sentence).unwrap_or_default();
        notes.push(format!(
            "removed candidate {} as {:?} ({})",
            idx + 1,
            surface,
            if m.exact { "exact" } else { "head-word" }
        ));
        spans.push(m.span);
    }

    let target = instance.target_span;
    let shift: usize = spans.iter().filter(|s| s.end() <= target.start).map(|s| s.len).sum();
    let mut edits: Vec<(Span, String)> = spans.iter().map(|s| (*s, String::new())).collect();
    let removed = splice(&instance.sentence, &mut edits);
    let (text, target_span) = normalize_with_span(&removed, Span::new(target.start - shift, target.len));

    Ok(TransformedInstance {
        source_id: instance.id.clone(),
        mode: Mode::NoCands,
        text,
        target_span,
        label: instance.label,
        notes,
    })
}
