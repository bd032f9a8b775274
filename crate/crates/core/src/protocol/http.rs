use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use ureq::Agent;

use super::batch::{check_requests, match_responses};
use super::{ScoreRequest, ScoreResponse};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    /// Delay before the second attempt; doubles for each later one.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(200),
        }
    }
}

/// Blocking client for a scorer service. Each request is posted as a single
/// JSON line; up to `max_in_flight` requests run at once.
#[derive(Debug, Clone)]
pub struct HttpScorer {
    endpoint: String,
    agent: Agent,
    max_in_flight: usize,
    retry: RetryPolicy,
}

enum Attempt<T> {
    Done(T),
    Retry(String),
    Fail(Error),
}

impl HttpScorer {
    pub fn new(endpoint: &str, max_in_flight: usize) -> Result<Self> {
        if max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be at least 1".into()));
        }
        let config = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build();
        Ok(HttpScorer {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            agent: config.into(),
            max_in_flight,
            retry: RetryPolicy::default(),
        })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Model identifier reported by `GET /v1/health`.
    pub fn health(&self) -> Result<String> {
        let url = format!("{}/v1/health", self.endpoint);
        let body = self.with_retries(&url, || {
            let resp = self.agent.get(&url).call();
            classify(resp, &[200])
        })?;
        let v: serde_json::Value =
            serde_json::from_str(&body).map_err(|e| Error::Transport(format!("{url}: malformed health body: {e}")))?;
        v.get("model_id")
            .and_then(|m| m.as_str())
            .map(str::to_string)
            .ok_or_else(|| Error::Transport(format!("{url}: health body has no model_id")))
    }

    /// Scores every request and returns responses in request order.
    pub fn score<R: ScoreRequest>(&self, requests: &[R]) -> Result<Vec<R::Response>> {
        check_requests(requests)?;
        let next = AtomicUsize::new(0);
        let failed = AtomicBool::new(false);
        let workers = self.max_in_flight.min(requests.len());
        let mut responses = Vec::with_capacity(requests.len());
        let mut first_error = None;
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut got = Vec::new();
                        while !failed.load(Ordering::Relaxed) {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some(req) = requests.get(i) else { break };
                            match self.score_one(req) {
                                Ok(r) => got.push(r),
                                Err(e) => {
                                    failed.store(true, Ordering::Relaxed);
                                    return Err(e);
                                }
                            }
                        }
                        Ok(got)
                    })
                })
                .collect();
            for h in handles {
                match h.join().expect("scorer worker panicked") {
                    Ok(got) => responses.extend(got),
                    Err(e) => {
                        first_error.get_or_insert(e);
                    }
                }
            }
        });
        if let Some(e) = first_error {
            return Err(e);
        }
        match_responses(requests, responses)
    }

    /// Re-scores up to `sample` requests (smallest ids first) and checks the
    /// answers are identical to `responses`.
    pub fn verify_determinism<R: ScoreRequest>(
        &self,
        requests: &[R],
        responses: &[R::Response],
        sample: usize,
    ) -> Result<()> {
        let mut order: Vec<usize> = (0..requests.len()).collect();
        order.sort_by(|&a, &b| requests[a].id().cmp(requests[b].id()));
        order.truncate(sample);
        let subset: Vec<R> = order.iter().map(|&i| requests[i].clone()).collect();
        let again = self.score(&subset)?;
        for (&i, second) in order.iter().zip(&again) {
            let first = responses
                .iter()
                .find(|r| r.id() == requests[i].id())
                .ok_or_else(|| Error::Unmatched(format!("no response for {}", requests[i].id())))?;
            if first != second {
                return Err(Error::NonDeterministic(requests[i].id().to_string()));
            }
        }
        debug!("determinism check passed on {} request(s)", subset.len());
        Ok(())
    }

    fn score_one<R: ScoreRequest>(&self, request: &R) -> Result<R::Response> {
        let url = format!("{}{}", self.endpoint, R::PATH);
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        let body = self.with_retries(&url, || {
            let resp = self
                .agent
                .post(&url)
                .content_type("application/x-ndjson")
                .send(line.as_str());
            classify(resp, &[200, 422])
        })?;
        let parsed: R::Response = body
            .lines()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::Transport(format!("{url}: empty response for {}", request.id())))
            .and_then(|l| {
                serde_json::from_str(l)
                    .map_err(|e| Error::Transport(format!("{url}: malformed response for {}: {e}", request.id())))
            })?;
        if parsed.id() != request.id() {
            return Err(Error::Unmatched(format!(
                "sent {} but the scorer answered for {}",
                request.id(),
                parsed.id()
            )));
        }
        parsed.validate()?;
        Ok(parsed)
    }

    fn with_retries(&self, url: &str, mut call: impl FnMut() -> Attempt<String>) -> Result<String> {
        let attempts = self.retry.attempts.max(1);
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let delay = self.retry.base_delay * 2u32.pow(attempt - 1);
                warn!("{url}: {last}; retrying in {delay:?}");
                thread::sleep(delay);
            }
            match call() {
                Attempt::Done(body) => return Ok(body),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(why) => last = why,
            }
        }
        Err(Error::Transport(format!("{url}: {last} (after {attempts} attempts)")))
    }
}

fn classify(
    resp: std::result::Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    accepted: &[u16],
) -> Attempt<String> {
    let mut resp = match resp {
        Ok(r) => r,
        Err(e) => return Attempt::Retry(e.to_string()),
    };
    let status = resp.status().as_u16();
    let body = match resp.body_mut().read_to_string() {
        Ok(b) => b,
        Err(e) => return Attempt::Retry(format!("reading body: {e}")),
    };
    if accepted.contains(&status) {
        Attempt::Done(body)
    } else if status == 429 || status >= 500 {
        Attempt::Retry(format!("HTTP {status}"))
    } else {
        Attempt::Fail(Error::Transport(format!("HTTP {status}: {}", body.trim())))
    }
}

/// Scores `requests` against the service at `endpoint`.
pub fn http_score<R: ScoreRequest>(endpoint: &str, requests: &[R], max_in_flight: usize) -> Result<Vec<R::Response>> {
    HttpScorer::new(endpoint, max_in_flight)?.score(requests)
}
