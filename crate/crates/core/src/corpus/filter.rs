use std::collections::HashSet;

use super::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilterOutcome {
    pub removed: Vec<String>,
    /// Listed ids that matched no instance.
    pub unknown: Vec<String>,
    /// Surviving instances whose twin was removed.
    pub newly_orphaned: Vec<String>,
}

/// Reads an exclusion list: one id per line, `#` starts a comment.
pub fn read_exclusion_list(raw: &str) -> Vec<String> {
    raw.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Drops the listed instances. Groups that lose a member are dissolved and
/// their survivors join the orphan list. Unknown ids are logged and reported.
pub fn filter_associative(mut dataset: Dataset, exclusion_ids: &[String]) -> (Dataset, FilterOutcome) {
    let excluded: HashSet<&str> = exclusion_ids.iter().map(String::as_str).collect();
    let mut outcome = FilterOutcome::default();

    let known: HashSet<&str> = dataset.instances.iter().map(|i| i.id.as_str()).collect();
    for id in exclusion_ids {
        if !known.contains(id.as_str()) && !outcome.unknown.contains(id) {
            log::warn!("exclusion id {id} not found in {}", dataset.name);
            outcome.unknown.push(id.clone());
        }
    }

    let paired = dataset.is_paired();
    let mut survivors_orphaned = Vec::new();
    dataset.groups.retain(|g| {
        let hit = g.members.iter().any(|m| excluded.contains(m.id.as_str()));
        if hit {
            survivors_orphaned.extend(
                g.members
                    .iter()
                    .filter(|m| !excluded.contains(m.id.as_str()))
                    .map(|m| m.id.clone()),
            );
        }
        !hit
    });

    dataset.instances.retain(|inst| {
        let drop = excluded.contains(inst.id.as_str());
        if drop {
            outcome.removed.push(inst.id.clone());
        }
        !drop
    });

    if paired {
        let mut orphans: HashSet<String> = dataset
            .orphans
            .drain(..)
            .filter(|id| !excluded.contains(id.as_str()))
            .collect();
        orphans.extend(survivors_orphaned.iter().cloned());
        dataset.orphans = dataset
            .instances
            .iter()
            .filter(|i| orphans.contains(&i.id))
            .map(|i| i.id.clone())
            .collect();
    }
    outcome.newly_orphaned = survivors_orphaned;
    (dataset, outcome)
}
