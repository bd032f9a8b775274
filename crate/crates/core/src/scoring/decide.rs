use crate::corpus::WinogradInstance;
use crate::error::{Error, Result};
use crate::transforms::ZeroShotQuery;

use super::Outcome;

/// Discard reason used when the scorer flags a candidate as multi-token.
pub const UNSCORABLE: &str = "candidate not single-token";

fn argmax_first(a: f64, b: f64) -> usize {
    if b > a {
        1
    } else {
        0
    }
}

/// Picks the special word with the higher score. Exact ties go to the first
/// candidate. A candidate without a score (multi-token under the scorer's
/// tokenizer) discards the query.
pub fn zero_shot_decide(query: &ZeroShotQuery, candidate_scores: [Option<f64>; 2]) -> Outcome {
    match candidate_scores {
        [Some(a), Some(b)] => Outcome::Scored {
            prediction: argmax_first(a, b),
            gold: query.gold,
        },
        _ => Outcome::Discarded {
            reason: UNSCORABLE.to_string(),
        },
    }
}

/// Multiple-choice decision over one score per candidate; ties go to
/// candidate 0.
pub fn mc_decide(instance: &WinogradInstance, option_scores: &[Option<f64>]) -> Result<usize> {
    match option_scores {
        [Some(a), Some(b)] => Ok(argmax_first(*a, *b)),
        _ => Err(Error::Instance {
            id: instance.id.clone(),
            message: format!("expected 2 option scores, got {option_scores:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Source, TargetKind};
    use crate::text::Span;

    fn query() -> ZeroShotQuery {
        ZeroShotQuery {
            source_id: "a".into(),
            source_group: "g".into(),
            member_index: 0,
            text: "x [MASK].".into(),
            candidates: ["large".into(), "small".into()],
            gold: 0,
        }
    }

    fn instance() -> WinogradInstance {
        WinogradInstance {
            id: "i".into(),
            sentence: "it".into(),
            candidates: ["a".into(), "b".into()],
            target_span: Span::new(0, 2),
            target_kind: TargetKind::Pronoun,
            label: 0,
            source: Source::Wsc,
            group_hint: None,
        }
    }

    #[test]
    fn zero_shot_examples() {
        let q = query();
        assert_eq!(
            zero_shot_decide(&q, [Some(-1.2), Some(-3.4)]),
            Outcome::Scored { prediction: 0, gold: 0 }
        );
        assert_eq!(
            zero_shot_decide(&q, [Some(-2.0), Some(-2.0)]),
            Outcome::Scored { prediction: 0, gold: 0 }
        );
        assert!(matches!(
            zero_shot_decide(&q, [Some(-2.0), None]),
            Outcome::Discarded { .. }
        ));
    }

    #[test]
    fn mc_examples() {
        let i = instance();
        assert_eq!(mc_decide(&i, &[Some(0.9), Some(0.1)]).unwrap(), 0);
        assert_eq!(mc_decide(&i, &[Some(0.4), Some(0.6)]).unwrap(), 1);
        assert_eq!(mc_decide(&i, &[Some(0.5), Some(0.5)]).unwrap(), 0);
        assert!(mc_decide(&i, &[Some(0.5)]).is_err());
        assert!(mc_decide(&i, &[Some(0.5), None]).is_err());
    }
}
