use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{no_cands, part_sent, to_zero_shot, Mode, RejectionReason, SkipReason, TransformedInstance, ZeroShotQuery};
use crate::artifact::{to_jsonl, ArtifactMeta};
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::text::Span;

/// Line record of the transform output files. Produced items carry `text`;
/// skipped or rejected items carry `rejection_reason`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub source_id: String,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_span_start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_span_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TransformRecord {
    fn bare(source_id: &str, mode: Mode) -> Self {
        TransformRecord {
            source_id: source_id.to_string(),
            mode,
            text: None,
            label: None,
            target_span_start: None,
            target_span_len: None,
            group_id: None,
            member_index: None,
            candidates: None,
            gold: None,
            rejection_reason: None,
            notes: Vec::new(),
        }
    }

    pub fn from_transformed(t: &TransformedInstance) -> Self {
        let (start, len) = t.target_span.to_chars(&t.text);
        TransformRecord {
            text: Some(t.text.clone()),
            label: Some(t.label),
            target_span_start: Some(start),
            target_span_len: Some(len),
            notes: t.notes.clone(),
            ..Self::bare(&t.source_id, t.mode)
        }
    }

    pub fn skipped(source_id: &str, mode: Mode, reason: &str) -> Self {
        TransformRecord {
            rejection_reason: Some(reason.to_string()),
            ..Self::bare(source_id, mode)
        }
    }

    pub fn from_query(q: &ZeroShotQuery, label: usize) -> Self {
        TransformRecord {
            text: Some(q.text.clone()),
            label: Some(label),
            group_id: Some(q.source_group.clone()),
            member_index: Some(q.member_index),
            candidates: Some(q.candidates.clone()),
            gold: Some(q.gold),
            ..Self::bare(&q.source_id, Mode::ZeroShot)
        }
    }

    pub fn is_produced(&self) -> bool {
        self.rejection_reason.is_none()
    }

    pub fn to_transformed(&self) -> Result<TransformedInstance> {
        let bad = |what: &str| Error::Document(format!("transform record {}: missing {what}", self.source_id));
        let text = self.text.clone().ok_or_else(|| bad("text"))?;
        let span = Span::from_chars(
            &text,
            self.target_span_start.ok_or_else(|| bad("target_span_start"))?,
            self.target_span_len.ok_or_else(|| bad("target_span_len"))?,
        )
        .ok_or_else(|| bad("valid target span"))?;
        Ok(TransformedInstance {
            source_id: self.source_id.clone(),
            mode: self.mode,
            text,
            target_span: span,
            label: self.label.ok_or_else(|| bad("label"))?,
            notes: self.notes.clone(),
        })
    }

    pub fn to_query(&self) -> Result<ZeroShotQuery> {
        let bad = |what: &str| Error::Document(format!("zero-shot record {}: missing {what}", self.source_id));
        Ok(ZeroShotQuery {
            source_id: self.source_id.clone(),
            source_group: self.group_id.clone().ok_or_else(|| bad("group_id"))?,
            member_index: self.member_index.ok_or_else(|| bad("member_index"))?,
            text: self.text.clone().ok_or_else(|| bad("text"))?,
            candidates: self.candidates.clone().ok_or_else(|| bad("candidates"))?,
            gold: self.gold.ok_or_else(|| bad("gold"))?,
        })
    }
}

/// Per-dataset, per-mode production summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCounts {
    pub dataset: String,
    pub mode: Mode,
    /// Instances (ablations) or twin groups (zero-shot) considered.
    pub input: usize,
    pub produced: usize,
    pub skipped: usize,
    pub reasons: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AblationOutcome {
    pub mode: Mode,
    pub produced: Vec<TransformedInstance>,
    pub skipped: Vec<(String, SkipReason)>,
}

impl AblationOutcome {
    pub fn counts(&self, dataset: &str) -> ModeCounts {
        let mut reasons = BTreeMap::new();
        for (_, r) in &self.skipped {
            *reasons.entry(r.code().to_string()).or_insert(0) += 1;
        }
        ModeCounts {
            dataset: dataset.to_string(),
            mode: self.mode,
            input: self.produced.len() + self.skipped.len(),
            produced: self.produced.len(),
            skipped: self.skipped.len(),
            reasons,
        }
    }

    /// Produced and skipped records merged, sorted by source id.
    pub fn records(&self) -> Vec<TransformRecord> {
        let mut out: Vec<TransformRecord> = self
            .produced
            .iter()
            .map(TransformRecord::from_transformed)
            .chain(
                self.skipped
                    .iter()
                    .map(|(id, r)| TransformRecord::skipped(id, self.mode, &r.to_string())),
            )
            .collect();
        out.sort_by(|a, b| a.source_id.cmp(&b.source_id));
        out
    }
}

/// Applies `no-cands` or `part-sent` to every instance of the dataset.
pub fn run_ablation(dataset: &Dataset, mode: Mode, execution: Execution) -> AblationOutcome {
    assert!(
        mode != Mode::ZeroShot,
        "zero-shot runs over twin groups, see run_zero_shot"
    );
    let results = exec::map(execution, &dataset.instances, |inst| match mode {
        Mode::NoCands => no_cands(inst),
        _ => part_sent(inst),
    });
    let mut produced = Vec::new();
    let mut skipped = Vec::new();
    for (inst, res) in dataset.instances.iter().zip(results) {
        match res {
            Ok(t) => produced.push(t),
            Err(reason) => skipped.push((inst.id.clone(), reason)),
        }
    }
    produced.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    skipped.sort();
    AblationOutcome {
        mode,
        produced,
        skipped,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroShotRejection {
    pub group_id: String,
    pub members: Vec<String>,
    pub reason: RejectionReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroShotOutcome {
    pub queries: Vec<ZeroShotQuery>,
    pub rejections: Vec<ZeroShotRejection>,
}

impl ZeroShotOutcome {
    pub fn counts(&self, dataset: &str) -> ModeCounts {
        let mut reasons = BTreeMap::new();
        for r in &self.rejections {
            *reasons.entry(r.reason.code().to_string()).or_insert(0) += r.members.len();
        }
        let skipped = self.rejections.iter().map(|r| r.members.len()).sum();
        ModeCounts {
            dataset: dataset.to_string(),
            mode: Mode::ZeroShot,
            input: self.queries.len() + skipped,
            produced: self.queries.len(),
            skipped,
            reasons,
        }
    }

    pub fn records(&self, dataset: &Dataset) -> Vec<TransformRecord> {
        let label_of = |id: &str| dataset.instance(id).map(|i| i.label).unwrap_or_default();
        let mut out: Vec<TransformRecord> = self
            .queries
            .iter()
            .map(|q| TransformRecord::from_query(q, label_of(&q.source_id)))
            .collect();
        for r in &self.rejections {
            for id in &r.members {
                out.push(TransformRecord {
                    group_id: Some(r.group_id.clone()),
                    ..TransformRecord::skipped(id, Mode::ZeroShot, r.reason.code())
                });
            }
        }
        out.sort_by(|a, b| a.source_id.cmp(&b.source_id));
        out
    }
}

/// Applies the zero-shot reformulation to every twin group.
pub fn run_zero_shot(dataset: &Dataset, execution: Execution) -> ZeroShotOutcome {
    let results = exec::map(execution, &dataset.groups, to_zero_shot);
    let mut queries = Vec::new();
    let mut rejections = Vec::new();
    for (group, res) in dataset.groups.iter().zip(results) {
        match res {
            Ok(pair) => queries.extend(pair),
            Err(reason) => rejections.push(ZeroShotRejection {
                group_id: group.group_id.clone(),
                members: group.members.iter().map(|m| m.id.clone()).collect(),
                reason,
            }),
        }
    }
    queries.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    ZeroShotOutcome { queries, rejections }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSetOutput {
    /// Surviving queries, one record per line.
    pub records: String,
    /// Rejected groups, one record per line.
    pub rejections: String,
    /// Instances with no surviving query, including orphans.
    pub untransformable: Vec<String>,
    pub produced: usize,
}

/// Zero-shot queries with golds, for training on the transformed format,
/// plus the instance ids left out so original-format training can be
/// restricted to the same subset.
pub fn emit_transformed_training_set(
    dataset: &Dataset,
    meta: Option<&ArtifactMeta>,
    execution: Execution,
) -> Result<TrainingSetOutput> {
    let outcome = run_zero_shot(dataset, execution);
    let records: Vec<TransformRecord> = outcome
        .queries
        .iter()
        .map(|q| TransformRecord::from_query(q, dataset.instance(&q.source_id).map_or(0, |i| i.label)))
        .collect();
    let kept: HashSet<&str> = outcome.queries.iter().map(|q| q.source_id.as_str()).collect();
    let untransformable = dataset
        .instances
        .iter()
        .filter(|i| !kept.contains(i.id.as_str()))
        .map(|i| i.id.clone())
        .collect();
    Ok(TrainingSetOutput {
        records: to_jsonl(meta, &records)?,
        rejections: to_jsonl(meta, &outcome.rejections)?,
        untransformable,
        produced: records.len(),
    })
}
