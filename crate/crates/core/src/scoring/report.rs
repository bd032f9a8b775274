use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metric::{chance_levels, group_score, GroupRef, ScoreFunction};
use crate::artifact::ArtifactMeta;
use crate::corpus::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setup {
    Original,
    NoCands,
    PartSent,
    ZeroShot,
}

impl Setup {
    pub const ALL: [Setup; 4] = [Setup::Original, Setup::NoCands, Setup::PartSent, Setup::ZeroShot];

    pub fn as_str(&self) -> &'static str {
        match self {
            Setup::Original => "original",
            Setup::NoCands => "no-cands",
            Setup::PartSent => "part-sent",
            Setup::ZeroShot => "zero-shot",
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Setup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Setup::ALL
            .into_iter()
            .find(|x| x.as_str() == s.replace('_', "-"))
            .ok_or_else(|| format!("unknown setup {s:?}"))
    }
}

/// What happened to one instance under a setup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Scored { prediction: usize, gold: usize },
    Discarded { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberScore {
    pub id: String,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBreakdown {
    pub group_id: String,
    pub members: Vec<MemberScore>,
    /// Worst member score; absent when a member was discarded.
    pub group_score: Option<f64>,
}

/// Single and group scores for one dataset under one setup. Scores are raw
/// fractions; rounding happens only when rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<ArtifactMeta>,
    pub dataset: String,
    pub setup: Setup,
    pub score_function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    pub n_instances: usize,
    pub n_scored: usize,
    pub n_discarded: usize,
    pub n_groups: usize,
    pub n_groups_scored: usize,
    /// Mean over scored instances.
    pub single_score: f64,
    /// Mean over groups whose members were all scored.
    pub group_score: f64,
    /// Variant where discarded instances count as wrong.
    pub single_score_skips_wrong: f64,
    pub group_score_skips_wrong: f64,
    pub chance_single: f64,
    pub chance_group: f64,
    pub filter_counts: BTreeMap<String, usize>,
    pub per_group: Vec<GroupBreakdown>,
}

/// Scores every grouped instance of `dataset`. `outcomes` must cover each
/// group member, either scored or discarded with a reason.
pub fn build_report(
    dataset: &Dataset,
    setup: Setup,
    outcomes: &HashMap<String, Outcome>,
    f: &dyn ScoreFunction,
) -> Result<EvaluationReport> {
    let missing: Vec<String> = dataset
        .groups
        .iter()
        .flat_map(|g| g.members.iter())
        .filter(|m| !outcomes.contains_key(&m.id))
        .map(|m| m.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPredictions(missing));
    }

    let mut instance_scores: HashMap<String, f64> = HashMap::new();
    let mut filter_counts = BTreeMap::new();
    let mut n_instances = 0;
    let mut total = 0.0;
    for member in dataset.groups.iter().flat_map(|g| g.members.iter()) {
        n_instances += 1;
        match &outcomes[&member.id] {
            Outcome::Scored { prediction, gold } => {
                let score = f.score(*prediction, *gold);
                total += score;
                instance_scores.insert(member.id.clone(), score);
            }
            Outcome::Discarded { reason } => {
                *filter_counts.entry(reason.clone()).or_insert(0) += 1;
            }
        }
    }
    let n_scored = instance_scores.len();
    let n_discarded = n_instances - n_scored;
    let single_score = if n_scored > 0 { total / n_scored as f64 } else { 0.0 };
    let single_score_skips_wrong = if n_instances > 0 {
        total / n_instances as f64
    } else {
        0.0
    };

    let scored_groups: Vec<GroupRef> = dataset
        .groups
        .iter()
        .filter(|g| g.members.iter().all(|m| instance_scores.contains_key(&m.id)))
        .map(|g| GroupRef {
            group_id: g.group_id.clone(),
            members: g.members.iter().map(|m| m.id.clone()).collect(),
        })
        .collect();
    let grouped = group_score(&scored_groups, &instance_scores, f.direction())?;
    let n_groups = dataset.groups.len();
    let n_groups_scored = scored_groups.len();
    let group_score_skips_wrong = if n_groups > 0 {
        grouped.mean * n_groups_scored as f64 / n_groups as f64
    } else {
        0.0
    };

    let per_group_score: HashMap<&str, f64> = grouped.per_group.iter().map(|(g, s)| (g.as_str(), *s)).collect();
    let per_group = dataset
        .groups
        .iter()
        .map(|g| GroupBreakdown {
            group_id: g.group_id.clone(),
            members: g
                .members
                .iter()
                .map(|m| MemberScore {
                    id: m.id.clone(),
                    score: instance_scores.get(&m.id).copied(),
                })
                .collect(),
            group_score: per_group_score.get(g.group_id.as_str()).copied(),
        })
        .collect();

    let (chance_single, chance_group) = if n_groups == 0 {
        chance_levels(1, 2)
    } else {
        let single = chance_levels(1, 2).0;
        let group = dataset
            .groups
            .iter()
            .map(|g| chance_levels(g.members.len().max(1), 2).1)
            .sum::<f64>()
            / n_groups as f64;
        (single, group)
    };

    Ok(EvaluationReport {
        meta: None,
        dataset: dataset.name.clone(),
        setup,
        score_function: f.name().to_string(),
        model_id: None,
        n_instances,
        n_scored,
        n_discarded,
        n_groups,
        n_groups_scored,
        single_score,
        group_score: grouped.mean,
        single_score_skips_wrong,
        group_score_skips_wrong,
        chance_single,
        chance_group,
        filter_counts,
        per_group,
    })
}

/// Percentage with two decimals, as printed in result tables.
pub fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

/// Aligned text table: one row per report, Single and Group columns.
pub fn render_table(reports: &[EvaluationReport]) -> String {
    let header = [
        "Dataset", "Setup", "Scored", "Single", "Group", "Single*", "Group*", "Chance",
    ];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.dataset.clone(),
                r.setup.to_string(),
                format!("{}/{}", r.n_scored, r.n_instances),
                pct(r.single_score),
                pct(r.group_score),
                pct(r.single_score_skips_wrong),
                pct(r.group_score_skips_wrong),
                format!("{}/{}", pct(r.chance_single), pct(r.chance_group)),
            ]
        })
        .collect();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    let mut out = render_rows(&header, &rows, 2);
    out.push_str("* discarded instances counted as wrong\n");
    out
}

/// Aligned columns: the first `left` columns left-aligned, the rest
/// right-aligned, two spaces apart, with a dashed rule under the header.
pub(crate) fn render_rows(header: &[String], rows: &[Vec<String>], left: usize) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i < left {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header, &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&rule, &mut out);
    for row in rows {
        line(row, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Source, TargetKind, TwinGroup, WinogradInstance};
    use crate::scoring::Accuracy;
    use crate::text::Span;

    fn dataset(n_pairs: usize) -> Dataset {
        let mk = |id: String, label| WinogradInstance {
            id,
            sentence: "it".into(),
            candidates: ["a".into(), "b".into()],
            target_span: Span::new(0, 2),
            target_kind: TargetKind::Pronoun,
            label,
            source: Source::Wsc,
            group_hint: None,
        };
        let mut ds = Dataset::new("toy", vec![]);
        for p in 0..n_pairs {
            let a = mk(format!("{p}a"), 0);
            let b = mk(format!("{p}b"), 1);
            ds.instances.extend([a.clone(), b.clone()]);
            ds.groups.push(TwinGroup {
                group_id: format!("g{p}"),
                members: vec![a, b],
                special_spans: vec![Span::new(0, 1); 2],
            });
        }
        ds
    }

    fn outcomes(ds: &Dataset, pick: impl Fn(usize) -> usize) -> HashMap<String, Outcome> {
        ds.instances
            .iter()
            .map(|i| {
                (
                    i.id.clone(),
                    Outcome::Scored {
                        prediction: pick(i.label),
                        gold: i.label,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn perfect_predictor() {
        let ds = dataset(5);
        let r = build_report(&ds, Setup::Original, &outcomes(&ds, |g| g), &Accuracy).unwrap();
        assert_eq!((r.single_score, r.group_score), (1.0, 1.0));
        assert_eq!((r.chance_single, r.chance_group), (0.5, 0.25));
    }

    #[test]
    fn constant_predictor_on_opposite_golds() {
        let ds = dataset(7);
        let r = build_report(&ds, Setup::Original, &outcomes(&ds, |_| 0), &Accuracy).unwrap();
        assert_eq!(r.single_score, 0.5);
        assert_eq!(r.group_score, 0.0);
    }

    #[test]
    fn discards_are_counted() {
        let ds = dataset(2);
        let mut o = outcomes(&ds, |g| g);
        o.insert("1b".into(), Outcome::Discarded { reason: "x".into() });
        let r = build_report(&ds, Setup::ZeroShot, &o, &Accuracy).unwrap();
        assert_eq!(r.n_instances, r.n_scored + r.n_discarded);
        assert_eq!(r.n_groups_scored, 1);
        assert_eq!(r.group_score, 1.0);
        assert_eq!(r.group_score_skips_wrong, 0.5);
        assert_eq!(r.single_score_skips_wrong, 0.75);
        assert_eq!(r.filter_counts["x"], 1);
        assert_eq!(r.per_group[1].group_score, None);
    }

    #[test]
    fn missing_outcome_is_error() {
        let ds = dataset(1);
        let mut o = outcomes(&ds, |g| g);
        o.remove("0a");
        assert!(matches!(
            build_report(&ds, Setup::Original, &o, &Accuracy),
            Err(Error::MissingPredictions(_))
        ));
    }

    #[test]
    fn table_has_two_decimals() {
        let ds = dataset(3);
        let r = build_report(&ds, Setup::Original, &outcomes(&ds, |_| 0), &Accuracy).unwrap();
        let t = render_table(&[r]);
        assert!(t.contains("50.00"), "{t}");
        assert!(t.lines().next().unwrap().starts_with("Dataset"));
    }
}
