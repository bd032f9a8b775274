use std::collections::HashMap;

use crate::error::{Error, Result};

/// Which way a per-instance score improves. Group aggregation takes the worst
/// member, so this decides between `min` and `max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

impl Direction {
    pub fn worst(&self, a: f64, b: f64) -> f64 {
        match self {
            Direction::HigherIsBetter => a.min(b),
            Direction::LowerIsBetter => a.max(b),
        }
    }
}

/// Per-instance scorer `f(prediction, gold)` with values in `[0, 1]`.
pub trait ScoreFunction: Sync {
    fn name(&self) -> &str;

    fn score(&self, prediction: usize, gold: usize) -> f64;

    fn direction(&self) -> Direction {
        Direction::HigherIsBetter
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Accuracy;

impl ScoreFunction for Accuracy {
    fn name(&self) -> &str {
        "accuracy"
    }

    fn score(&self, prediction: usize, gold: usize) -> f64 {
        if prediction == gold {
            1.0
        } else {
            0.0
        }
    }
}

/// Mean of `f` over all gold instances. Every gold id needs a prediction and
/// every prediction must belong to a gold id.
pub fn single_score(
    predictions: &HashMap<String, usize>,
    golds: &[(String, usize)],
    f: &dyn ScoreFunction,
) -> Result<f64> {
    let missing: Vec<String> = golds
        .iter()
        .filter(|(id, _)| !predictions.contains_key(id))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPredictions(missing));
    }
    if predictions.len() != golds.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    if golds.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = golds.iter().map(|(id, gold)| f.score(predictions[id], *gold)).sum();
    Ok(total / golds.len() as f64)
}

/// A group of instance ids scored together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRef {
    pub group_id: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupScores {
    /// `(group_id, worst member score)` in input order.
    pub per_group: Vec<(String, f64)>,
    pub mean: f64,
}

/// Worst member score per group, then the mean over groups.
pub fn group_score(groups: &[GroupRef], scores: &HashMap<String, f64>, direction: Direction) -> Result<GroupScores> {
    let mut per_group = Vec::with_capacity(groups.len());
    for g in groups {
        let mut worst: Option<f64> = None;
        for m in &g.members {
            let s = *scores.get(m).ok_or_else(|| Error::MissingMemberScore {
                group: g.group_id.clone(),
                member: m.clone(),
            })?;
            worst = Some(worst.map_or(s, |w| direction.worst(w, s)));
        }
        per_group.push((g.group_id.clone(), worst.unwrap_or(0.0)));
    }
    let mean = if per_group.is_empty() {
        0.0
    } else {
        per_group.iter().map(|(_, s)| s).sum::<f64>() / per_group.len() as f64
    };
    Ok(GroupScores { per_group, mean })
}

/// Chance levels under uniform guessing over `n_classes` balanced classes:
/// `1/c` per instance, `(1/c)^k` for a group of `k`.
pub fn chance_levels(group_size: usize, n_classes: usize) -> (f64, f64) {
    assert!(group_size >= 1 && n_classes >= 2, "need k >= 1 and c >= 2");
    let single = 1.0 / n_classes as f64;
    (single, single.powi(group_size as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preds(pairs: &[(&str, usize)]) -> HashMap<String, usize> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn golds(pairs: &[(&str, usize)]) -> Vec<(String, usize)> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn single_score_examples() {
        let g = golds(&[("a", 0), ("b", 1), ("c", 0), ("d", 1)]);
        assert_eq!(
            single_score(&preds(&[("a", 0), ("b", 1), ("c", 0), ("d", 1)]), &g, &Accuracy).unwrap(),
            1.0
        );
        assert_eq!(
            single_score(&preds(&[("a", 0), ("b", 1), ("c", 0), ("d", 0)]), &g, &Accuracy).unwrap(),
            0.75
        );
        match single_score(&preds(&[("a", 0), ("b", 1), ("c", 0)]), &g, &Accuracy) {
            Err(Error::MissingPredictions(ids)) => assert_eq!(ids, ["d"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_prediction_rejected() {
        let g = golds(&[("a", 0)]);
        assert!(single_score(&preds(&[("a", 0), ("zz", 1)]), &g, &Accuracy).is_err());
    }

    fn one_group(a: f64, b: f64, dir: Direction) -> f64 {
        let groups = [GroupRef {
            group_id: "g".into(),
            members: vec!["x".into(), "y".into()],
        }];
        let scores = HashMap::from([("x".to_string(), a), ("y".to_string(), b)]);
        group_score(&groups, &scores, dir).unwrap().mean
    }

    #[test]
    fn group_score_examples() {
        assert_eq!(one_group(1.0, 1.0, Direction::HigherIsBetter), 1.0);
        assert_eq!(one_group(1.0, 0.0, Direction::HigherIsBetter), 0.0);
        assert_eq!(one_group(0.7, 0.4, Direction::HigherIsBetter), 0.4);
        assert_eq!(one_group(0.7, 0.4, Direction::LowerIsBetter), 0.7);
    }

    #[test]
    fn missing_member_score() {
        let groups = [GroupRef {
            group_id: "g".into(),
            members: vec!["x".into(), "y".into()],
        }];
        let scores = HashMap::from([("x".to_string(), 1.0)]);
        assert!(matches!(
            group_score(&groups, &scores, Direction::HigherIsBetter),
            Err(Error::MissingMemberScore { .. })
        ));
    }

    #[test]
    fn chance_examples() {
        assert_eq!(chance_levels(2, 2), (0.5, 0.25));
        assert_eq!(chance_levels(3, 2), (0.5, 0.125));
        assert_eq!(chance_levels(1, 4), (0.25, 0.25));
    }
}
