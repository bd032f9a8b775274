//! Artifact-probing ablations (`no-cands`, `part-sent`) and the zero-shot
//! masked special-word reformulation. Every output keeps its provenance, and
//! every skipped input becomes a record with a machine-readable reason.

mod localize;
mod no_cands;
mod output;
mod part_sent;
mod zero_shot;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text::Span;

pub use localize::{locate_candidates, Mention};
pub use no_cands::no_cands;
pub use output::{
    emit_transformed_training_set, run_ablation, run_zero_shot, AblationOutcome, ModeCounts, TrainingSetOutput,
    TransformRecord, ZeroShotOutcome, ZeroShotRejection,
};
pub use part_sent::{part_sent, PUNCT_MARKERS, WORD_MARKERS};
pub use zero_shot::{to_zero_shot, ZeroShotQuery, MASK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    NoCands,
    PartSent,
    ZeroShot,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::NoCands => "no-cands",
            Mode::PartSent => "part-sent",
            Mode::ZeroShot => "zero-shot",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "no-cands" => Ok(Mode::NoCands),
            "part-sent" => Ok(Mode::PartSent),
            "zero-shot" => Ok(Mode::ZeroShot),
            other => Err(format!("unknown transform mode {other:?}")),
        }
    }
}

/// Output of an ablation, tied back to its source instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformedInstance {
    pub source_id: String,
    pub mode: Mode,
    pub text: String,
    pub target_span: Span,
    pub label: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SkipReason {
    CandidateNotFound { candidate: usize },
    TargetNotFound,
}

impl SkipReason {
    pub fn code(&self) -> &'static str {
        match self {
            SkipReason::CandidateNotFound { .. } => "candidate not locatable",
            SkipReason::TargetNotFound => "target not found",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::CandidateNotFound { candidate } => {
                write!(f, "candidate {} not locatable", candidate + 1)
            }
            SkipReason::TargetNotFound => f.write_str("target not found"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RejectionReason {
    #[serde(rename = "multi-word special")]
    MultiWordSpecial,
    #[serde(rename = "empty special")]
    EmptySpecial,
    #[serde(rename = "degenerate twins")]
    DegenerateTwins,
    #[serde(rename = "target not replaceable")]
    TargetNotReplaceable,
    #[serde(rename = "sentinel in source")]
    SentinelInSource,
    #[serde(rename = "group size")]
    GroupSize,
}

impl RejectionReason {
    pub fn code(&self) -> &'static str {
        match self {
            RejectionReason::MultiWordSpecial => "multi-word special",
            RejectionReason::EmptySpecial => "empty special",
            RejectionReason::DegenerateTwins => "degenerate twins",
            RejectionReason::TargetNotReplaceable => "target not replaceable",
            RejectionReason::SentinelInSource => "sentinel in source",
            RejectionReason::GroupSize => "group size",
        }
    }
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}
