//! The normalized interchange format and the pairing manifest.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Dataset, Source, TargetKind, TwinGroup, WinogradInstance};
use crate::artifact::{from_jsonl, to_jsonl, ArtifactMeta};
use crate::error::{Error, Result};
use crate::text::Span;

/// One instance per line. Span offsets count characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedRecord {
    pub id: String,
    pub sentence: String,
    pub option1: String,
    pub option2: String,
    pub target_span_start: usize,
    pub target_span_len: usize,
    pub target_kind: TargetKind,
    pub label: usize,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<String>,
}

impl NormalizedRecord {
    fn from_instance(inst: &WinogradInstance, group_id: Option<String>) -> Self {
        let (start, len) = inst.target_span.to_chars(&inst.sentence);
        NormalizedRecord {
            id: inst.id.clone(),
            sentence: inst.sentence.clone(),
            option1: inst.candidates[0].clone(),
            option2: inst.candidates[1].clone(),
            target_span_start: start,
            target_span_len: len,
            target_kind: inst.target_kind,
            label: inst.label,
            source: inst.source,
            group_id,
        }
    }

    fn into_instance(self, line: usize) -> Result<WinogradInstance> {
        let span = Span::from_chars(&self.sentence, self.target_span_start, self.target_span_len).ok_or_else(|| {
            Error::Line {
                line,
                message: "target span outside sentence".into(),
            }
        })?;
        let inst = WinogradInstance {
            id: self.id,
            sentence: self.sentence,
            candidates: [self.option1, self.option2],
            target_span: span,
            target_kind: self.target_kind,
            label: self.label,
            source: self.source,
            group_hint: self.group_id,
        };
        inst.validate().map_err(|e| Error::Line {
            line,
            message: e.to_string(),
        })?;
        Ok(inst)
    }
}

/// Writes instances in dataset order; grouped instances carry their group id.
pub fn write_normalized(dataset: &Dataset, meta: Option<&ArtifactMeta>) -> Result<String> {
    let group_of: HashMap<&str, &str> = dataset
        .groups
        .iter()
        .flat_map(|g| g.members.iter().map(move |m| (m.id.as_str(), g.group_id.as_str())))
        .collect();
    let records: Vec<NormalizedRecord> = dataset
        .instances
        .iter()
        .map(|inst| {
            let gid = group_of
                .get(inst.id.as_str())
                .map(|g| g.to_string())
                .or_else(|| inst.group_hint.clone());
            NormalizedRecord::from_instance(inst, gid)
        })
        .collect();
    to_jsonl(meta, &records)
}

/// Reads a normalized file; `group_id` comes back as each instance's
/// `group_hint`. Groups are rebuilt with [`PairingManifest::apply`].
pub fn read_normalized(name: &str, raw: &str) -> Result<(Option<ArtifactMeta>, Dataset)> {
    let (meta, records): (_, Vec<NormalizedRecord>) = from_jsonl(raw)?;
    let offset = usize::from(meta.is_some());
    let instances = records
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.into_instance(i + 1 + offset))
        .collect::<Result<Vec<_>>>()?;
    Ok((meta, Dataset::new(name, instances)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairingEntry {
    Group {
        group_id: String,
        members: Vec<String>,
        special_words: Vec<String>,
        /// `[start, len]` in characters, per member.
        special_spans: Vec<(usize, usize)>,
    },
    Orphan {
        id: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairingManifest {
    pub entries: Vec<PairingEntry>,
}

impl PairingManifest {
    pub fn from_dataset(dataset: &Dataset) -> Self {
        let groups = dataset.groups.iter().map(|g| PairingEntry::Group {
            group_id: g.group_id.clone(),
            members: g.members.iter().map(|m| m.id.clone()).collect(),
            special_words: g.special_words().into_iter().map(str::to_string).collect(),
            special_spans: g
                .members
                .iter()
                .zip(&g.special_spans)
                .map(|(m, s)| s.to_chars(&m.sentence))
                .collect(),
        });
        let orphans = dataset.orphans.iter().map(|id| PairingEntry::Orphan { id: id.clone() });
        PairingManifest {
            entries: groups.chain(orphans).collect(),
        }
    }

    pub fn group_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, PairingEntry::Group { .. }))
            .count()
    }

    /// Rebuilds groups and orphans on a dataset read from the normalized file.
    pub fn apply(&self, mut dataset: Dataset) -> Result<Dataset> {
        let by_id: HashMap<&str, &WinogradInstance> = dataset.instances.iter().map(|i| (i.id.as_str(), i)).collect();
        let mut groups = Vec::new();
        let mut orphans = Vec::new();
        for entry in &self.entries {
            match entry {
                PairingEntry::Group {
                    group_id,
                    members,
                    special_spans,
                    ..
                } => {
                    if members.len() != special_spans.len() || members.len() < 2 {
                        return Err(Error::Manifest(format!("group {group_id} is malformed")));
                    }
                    let mut insts = Vec::new();
                    let mut spans = Vec::new();
                    for (id, &(start, len)) in members.iter().zip(special_spans) {
                        let inst = by_id
                            .get(id.as_str())
                            .ok_or_else(|| Error::Manifest(format!("group {group_id} references unknown id {id}")))?;
                        let span = Span::from_chars(&inst.sentence, start, len)
                            .ok_or_else(|| Error::Manifest(format!("group {group_id}: span outside {id}")))?;
                        insts.push((*inst).clone());
                        spans.push(span);
                    }
                    groups.push(TwinGroup {
                        group_id: group_id.clone(),
                        members: insts,
                        special_spans: spans,
                    });
                }
                PairingEntry::Orphan { id } => orphans.push(id.clone()),
            }
        }
        dataset.groups = groups;
        dataset.orphans = orphans;
        dataset.check_partition()?;
        Ok(dataset)
    }
}

pub fn write_pairing_manifest(manifest: &PairingManifest, meta: Option<&ArtifactMeta>) -> Result<String> {
    to_jsonl(meta, &manifest.entries)
}

pub fn read_pairing_manifest(raw: &str) -> Result<(Option<ArtifactMeta>, PairingManifest)> {
    let (meta, entries) = from_jsonl(raw)?;
    Ok((meta, PairingManifest { entries }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{pair_twins, parse_winogrande};

    const LINES: &str = concat!(
        r#"{"qID":"q-1","sentence":"The café _ was hotter than the bar because it was sunny.","option1":"café","option2":"bar","answer":"1"}"#,
        "\n",
        r#"{"qID":"q-2","sentence":"The café _ was hotter than the bar because it was shady.","option1":"café","option2":"bar","answer":"2"}"#,
        "\n",
    );

    #[test]
    fn paired_dataset_round_trip() {
        let ds = pair_twins(parse_winogrande("wg", LINES).unwrap());
        assert_eq!(ds.groups.len(), 1);
        let text = write_normalized(&ds, None).unwrap();
        let manifest = write_pairing_manifest(&PairingManifest::from_dataset(&ds), None).unwrap();
        let (_, back) = read_normalized("wg", &text).unwrap();
        let (_, manifest) = read_pairing_manifest(&manifest).unwrap();
        let back = manifest.apply(back).unwrap();
        assert_eq!(back.groups[0].special_words(), ["sunny", "shady"]);
        assert_eq!(write_normalized(&back, None).unwrap(), text);
        assert_eq!(back.instances[0].target_text(), "_");
    }

    #[test]
    fn unknown_member_rejected() {
        let ds = parse_winogrande("wg", LINES).unwrap();
        let manifest = PairingManifest {
            entries: vec![PairingEntry::Group {
                group_id: "g".into(),
                members: vec!["q-1".into(), "zzz".into()],
                special_words: vec![],
                special_spans: vec![(0, 1), (0, 1)],
            }],
        };
        assert!(manifest.apply(ds).is_err());
    }
}
