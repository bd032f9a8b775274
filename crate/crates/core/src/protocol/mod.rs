//! Contract with the external model scorer: request and response records,
//! batch files, and an HTTP client.

mod batch;
mod http;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transforms::{ZeroShotQuery, MASK};

pub use batch::{read_request_batch, read_response_batch, write_request_batch, write_response_batch};
pub use http::{http_score, HttpScorer, RetryPolicy};

/// A request kind the scorer understands, tied to its response record and
/// HTTP route.
pub trait ScoreRequest: Serialize + DeserializeOwned + Clone + Send + Sync {
    type Response: ScoreResponse;

    const PATH: &'static str;

    fn id(&self) -> &str;

    fn validate(&self) -> Result<()>;
}

pub trait ScoreResponse: Serialize + DeserializeOwned + Clone + PartialEq + Send + Sync + std::fmt::Debug {
    fn id(&self) -> &str;

    fn model_id(&self) -> &str;

    fn validate(&self) -> Result<()>;
}

fn invalid(id: &str, message: impl Into<String>) -> Error {
    Error::Instance {
        id: id.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskScoreRequest {
    pub id: String,
    pub text: String,
    pub candidates: [String; 2],
}

impl MaskScoreRequest {
    pub fn from_query(q: &ZeroShotQuery) -> Self {
        MaskScoreRequest {
            id: q.source_id.clone(),
            text: q.text.clone(),
            candidates: q.candidates.clone(),
        }
    }
}

impl ScoreRequest for MaskScoreRequest {
    type Response = MaskScoreResponse;

    const PATH: &'static str = "/v1/score_mask";

    fn id(&self) -> &str {
        &self.id
    }

    fn validate(&self) -> Result<()> {
        let n = self.text.matches(MASK).count();
        if n != 1 {
            return Err(invalid(&self.id, format!("expected exactly one {MASK}, found {n}")));
        }
        if self.candidates[0] == self.candidates[1] {
            return Err(invalid(&self.id, "candidates are identical"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    /// Log-probability at the mask position; absent for multi-token candidates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_score: Option<f64>,
    pub token_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskScoreResponse {
    pub id: String,
    pub candidates: Vec<CandidateScore>,
    pub model_id: String,
}

impl MaskScoreResponse {
    /// Per-candidate scores, `None` where the candidate is not a single token.
    pub fn log_scores(&self) -> [Option<f64>; 2] {
        let get = |i: usize| self.candidates.get(i).and_then(|c| c.log_score);
        [get(0), get(1)]
    }
}

impl ScoreResponse for MaskScoreResponse {
    fn id(&self) -> &str {
        &self.id
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn validate(&self) -> Result<()> {
        if self.candidates.len() != 2 {
            return Err(invalid(
                &self.id,
                format!("expected 2 candidate scores, got {}", self.candidates.len()),
            ));
        }
        for (i, c) in self.candidates.iter().enumerate() {
            if c.token_count == 0 {
                return Err(invalid(
                    &self.id,
                    format!("candidate {i}: token_count must be positive"),
                ));
            }
            if c.log_score.is_some() != (c.token_count == 1) {
                return Err(invalid(
                    &self.id,
                    format!("candidate {i}: log_score must be present iff token_count is 1"),
                ));
            }
            if c.log_score.is_some_and(|s| !s.is_finite()) {
                return Err(invalid(&self.id, format!("candidate {i}: non-finite log_score")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceScoreRequest {
    pub id: String,
    pub context: String,
    /// Target span in characters.
    pub target_span_start: usize,
    pub target_span_len: usize,
    pub options: [String; 2],
}

impl ScoreRequest for ChoiceScoreRequest {
    type Response = ChoiceScoreResponse;

    const PATH: &'static str = "/v1/score_choice";

    fn id(&self) -> &str {
        &self.id
    }

    fn validate(&self) -> Result<()> {
        let n = self.context.chars().count();
        if self.target_span_start + self.target_span_len > n {
            return Err(invalid(&self.id, "target span outside context"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceScoreResponse {
    pub id: String,
    pub scores: Vec<f64>,
    pub model_id: String,
}

impl ChoiceScoreResponse {
    pub fn option_scores(&self) -> Vec<Option<f64>> {
        self.scores.iter().map(|s| Some(*s)).collect()
    }
}

impl ScoreResponse for ChoiceScoreResponse {
    fn id(&self) -> &str {
        &self.id
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn validate(&self) -> Result<()> {
        if self.scores.len() != 2 {
            return Err(invalid(
                &self.id,
                format!("expected 2 option scores, got {}", self.scores.len()),
            ));
        }
        if self.scores.iter().any(|s| !s.is_finite()) {
            return Err(invalid(&self.id, "non-finite option score"));
        }
        Ok(())
    }
}
