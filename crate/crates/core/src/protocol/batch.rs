use std::collections::{BTreeSet, HashMap, HashSet};

use super::{ScoreRequest, ScoreResponse};
use crate::artifact::{from_jsonl, to_jsonl, ArtifactMeta};
use crate::error::{Error, Result};

pub(crate) fn check_requests<R: ScoreRequest>(requests: &[R]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in requests {
        if !seen.insert(r.id()) {
            return Err(Error::DuplicateId(r.id().to_string()));
        }
        r.validate()?;
    }
    Ok(())
}

/// One request per line. Duplicate ids are rejected before anything is
/// produced.
pub fn write_request_batch<R: ScoreRequest>(requests: &[R], meta: Option<&ArtifactMeta>) -> Result<String> {
    check_requests(requests)?;
    to_jsonl(meta, requests)
}

pub fn read_request_batch<R: ScoreRequest>(raw: &str) -> Result<(Option<ArtifactMeta>, Vec<R>)> {
    let (meta, requests) = from_jsonl::<R>(raw)?;
    check_requests(&requests)?;
    Ok((meta, requests))
}

pub fn write_response_batch<T: ScoreResponse>(responses: &[T], meta: Option<&ArtifactMeta>) -> Result<String> {
    to_jsonl(meta, responses)
}

/// Reads a response file and matches it against `requests`. Every request
/// needs exactly one valid response; extra, duplicate and missing ids are
/// errors naming the offending ids. Responses come back in request order.
pub fn read_response_batch<R: ScoreRequest>(requests: &[R], raw: &str) -> Result<Vec<R::Response>> {
    let (_, responses) = from_jsonl::<R::Response>(raw)?;
    match_responses(requests, responses)
}

pub(crate) fn match_responses<R: ScoreRequest>(
    requests: &[R],
    responses: Vec<R::Response>,
) -> Result<Vec<R::Response>> {
    let mut by_id: HashMap<String, R::Response> = HashMap::with_capacity(responses.len());
    let mut duplicates = BTreeSet::new();
    for r in responses {
        r.validate()?;
        let id = r.id().to_string();
        if by_id.insert(id.clone(), r).is_some() {
            duplicates.insert(id);
        }
    }
    if !duplicates.is_empty() {
        return Err(Error::Unmatched(format!(
            "duplicate responses for {}",
            join(duplicates.iter())
        )));
    }
    let wanted: HashSet<&str> = requests.iter().map(|r| r.id()).collect();
    let extra: BTreeSet<&str> = by_id
        .keys()
        .map(String::as_str)
        .filter(|id| !wanted.contains(id))
        .collect();
    if !extra.is_empty() {
        return Err(Error::Unmatched(format!(
            "responses without a request: {}",
            join(extra.iter())
        )));
    }
    let missing: Vec<&str> = requests
        .iter()
        .map(|r| r.id())
        .filter(|id| !by_id.contains_key(*id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Unmatched(format!(
            "missing responses for {}",
            join(missing.iter())
        )));
    }
    let out: Vec<R::Response> = requests.iter().map(|r| by_id.remove(r.id()).unwrap()).collect();
    let models: BTreeSet<&str> = out.iter().map(|r| r.model_id()).collect();
    if models.len() > 1 {
        return Err(Error::Unmatched(format!(
            "mixed model ids in one batch: {}",
            join(models.iter())
        )));
    }
    Ok(out)
}

fn join<S: AsRef<str>>(ids: impl Iterator<Item = S>) -> String {
    ids.map(|s| s.as_ref().to_string()).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{CandidateScore, MaskScoreRequest, MaskScoreResponse};

    fn req(id: &str) -> MaskScoreRequest {
        MaskScoreRequest {
            id: id.into(),
            text: "too [MASK].".into(),
            candidates: ["large".into(), "small".into()],
        }
    }

    fn resp(id: &str, second: Option<f64>) -> MaskScoreResponse {
        MaskScoreResponse {
            id: id.into(),
            candidates: vec![
                CandidateScore {
                    log_score: Some(-1.0),
                    token_count: 1,
                },
                CandidateScore {
                    log_score: second,
                    token_count: if second.is_some() { 1 } else { 2 },
                },
            ],
            model_id: "m".into(),
        }
    }

    #[test]
    fn request_round_trip() {
        let reqs = vec![req("a"), req("b")];
        let raw = write_request_batch(&reqs, None).unwrap();
        assert_eq!(raw.lines().count(), 2);
        let (_, back) = read_request_batch::<MaskScoreRequest>(&raw).unwrap();
        assert_eq!(back, reqs);
    }

    #[test]
    fn duplicate_request_rejected() {
        match write_request_batch(&[req("a"), req("a")], None) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn responses_matched_in_request_order() {
        let reqs = vec![req("a"), req("b")];
        let raw = write_response_batch(&[resp("b", Some(-2.0)), resp("a", None)], None).unwrap();
        let out = read_response_batch(&reqs, &raw).unwrap();
        assert_eq!(out[0].id, "a");
        assert_eq!(out[0].log_scores(), [Some(-1.0), None]);
    }

    #[test]
    fn missing_and_extra_named() {
        let reqs = vec![req("a"), req("b")];
        let raw = write_response_batch(&[resp("a", Some(-2.0))], None).unwrap();
        let err = read_response_batch(&reqs, &raw).unwrap_err().to_string();
        assert!(err.contains("missing") && err.contains('b'), "{err}");

        let raw = write_response_batch(&[resp("a", Some(-2.0)), resp("b", None), resp("zz", None)], None).unwrap();
        let err = read_response_batch(&reqs, &raw).unwrap_err().to_string();
        assert!(err.contains("zz"), "{err}");

        let raw = write_response_batch(&[resp("a", Some(-2.0)), resp("a", None), resp("b", None)], None).unwrap();
        assert!(read_response_batch(&reqs, &raw).is_err());
    }

    #[test]
    fn mixed_models_rejected() {
        let reqs = vec![req("a"), req("b")];
        let mut other = resp("b", None);
        other.model_id = "n".into();
        let raw = write_response_batch(&[resp("a", None), other], None).unwrap();
        assert!(read_response_batch(&reqs, &raw).is_err());
    }
}
