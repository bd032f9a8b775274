//! Normalized data model for Winograd-style corpora and the operations that
//! build it: parsing, twin pairing and exclusion filtering.

mod filter;
mod normalized;
mod pairing;
mod winogrande;
mod wsc;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::Span;

pub use filter::{filter_associative, read_exclusion_list, FilterOutcome};
pub use normalized::{
    read_normalized, read_pairing_manifest, write_normalized, write_pairing_manifest, NormalizedRecord, PairingEntry,
    PairingManifest,
};
pub use pairing::{detect_special_spans, pair_twins, pair_twins_with};
pub use winogrande::parse_winogrande;
pub use wsc::parse_wsc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Pronoun,
    Placeholder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Wsc,
    Winogrande,
}

/// One sentence with two candidate referents and a gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinogradInstance {
    pub id: String,
    pub sentence: String,
    pub candidates: [String; 2],
    /// Pronoun or `_` placeholder, as a byte span into `sentence`.
    pub target_span: Span,
    pub target_kind: TargetKind,
    pub label: usize,
    pub source: Source,
    pub group_hint: Option<String>,
}

impl WinogradInstance {
    pub fn target_text(&self) -> &str {
        self.target_span.slice(&self.sentence).unwrap_or("")
    }

    pub fn gold_candidate(&self) -> &str {
        &self.candidates[self.label]
    }

    /// Order-insensitive, case-insensitive key of the candidate pair.
    pub fn candidate_key(&self) -> (String, String) {
        let a = normalize_candidate(&self.candidates[0]).to_lowercase();
        let b = normalize_candidate(&self.candidates[1]).to_lowercase();
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: &str| Error::Instance {
            id: self.id.clone(),
            message: message.to_string(),
        };
        if self.candidates.iter().any(|c| c.trim().is_empty()) {
            return Err(fail("empty candidate"));
        }
        if self.candidates[0].to_lowercase() == self.candidates[1].to_lowercase() {
            return Err(fail("candidates are not distinct"));
        }
        if self.label > 1 {
            return Err(fail("label outside {0,1}"));
        }
        match self.target_span.slice(&self.sentence) {
            Some(t) if !t.trim().is_empty() => Ok(()),
            _ => Err(fail("target span out of bounds or empty")),
        }
    }
}

pub(crate) fn normalize_candidate(raw: &str) -> String {
    crate::text::normalize_whitespace(raw)
}

/// Instances identical except for their special-word spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinGroup {
    pub group_id: String,
    pub members: Vec<WinogradInstance>,
    /// Special-word span of each member, aligned with `members`.
    pub special_spans: Vec<Span>,
}

impl TwinGroup {
    pub fn special_words(&self) -> Vec<&str> {
        self.members
            .iter()
            .zip(&self.special_spans)
            .map(|(m, s)| s.slice(&m.sentence).unwrap_or(""))
            .collect()
    }

    pub fn member_ids(&self) -> Vec<&str> {
        self.members.iter().map(|m| m.id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub instances: Vec<WinogradInstance>,
    pub groups: Vec<TwinGroup>,
    pub orphans: Vec<String>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, instances: Vec<WinogradInstance>) -> Self {
        Dataset {
            name: name.into(),
            instances,
            groups: Vec::new(),
            orphans: Vec::new(),
        }
    }

    pub fn is_paired(&self) -> bool {
        !self.groups.is_empty() || !self.orphans.is_empty()
    }

    pub fn paired_instance_count(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }

    pub fn instance(&self, id: &str) -> Option<&WinogradInstance> {
        self.instances.iter().find(|i| i.id == id)
    }

    /// Checks that every instance sits in exactly one group or in the orphan
    /// list (only meaningful once paired).
    pub fn check_partition(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let grouped = self.groups.iter().flat_map(|g| g.members.iter().map(|m| m.id.as_str()));
        for id in grouped.chain(self.orphans.iter().map(String::as_str)) {
            if !seen.insert(id) {
                return Err(Error::Instance {
                    id: id.to_string(),
                    message: "appears more than once across groups and orphans".into(),
                });
            }
        }
        for inst in &self.instances {
            if !seen.contains(inst.id.as_str()) {
                return Err(Error::Instance {
                    id: inst.id.clone(),
                    message: "neither grouped nor orphaned".into(),
                });
            }
        }
        if seen.len() != self.instances.len() {
            return Err(Error::Document("groups or orphans reference unknown instances".into()));
        }
        Ok(())
    }
}
