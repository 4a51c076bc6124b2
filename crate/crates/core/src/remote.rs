//! Client side of the model-service wire protocol.
//!
//! The service exposes one scorer and two classifiers over JSON/HTTP:
//!
//! | method | path                      | request                          | response                                   |
//! |--------|---------------------------|----------------------------------|--------------------------------------------|
//! | POST   | `/v1/score`               | `{"pairs":[{"a":..,"b":..}]}`    | `{"scores":[..]}`                          |
//! | POST   | `/v1/classify/background` | `{"sentences":[..]}`             | `{"labels":[bool..],"confidences":[..]}`   |
//! | POST   | `/v1/classify/discourse`  | `{"sentences":[..]}`             | `{"labels":["results"..],"confidences":[..]}` |
//! | GET    | `/v1/health`              |                                  | `{"status":"ok","model":..,"version":..}`  |
//!
//! Batches are capped at [`MAX_BATCH`] items. Requests are retried with
//! exponential backoff; a batch that still fails fails the whole call.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claims::{DiscourseCategory, DiscourseClassifier};
use crate::extract::BackgroundClassifier;
use crate::fidelity::{FidelityScore, Scorer, ScorerId};

pub const MAX_BATCH: usize = 256;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("{url}: failed after {attempts} attempt(s): {message}")]
    Unreachable { url: String, attempts: u32, message: String },
    #[error("{url}: rejected with HTTP {status}: {body}")]
    Rejected { url: String, status: u16, body: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("service unhealthy: {0}")]
    Unhealthy(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextPair {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub pairs: Vec<TextPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencesRequest {
    pub sentences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundResponse {
    pub labels: Vec<bool>,
    pub confidences: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscourseResponse {
    pub labels: Vec<DiscourseCategory>,
    pub confidences: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model: String,
    pub version: String,
}

/// Error body used by the service, e.g. `{"error":"batch_too_large","max":256}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, initial_backoff: Duration::from_millis(250) }
    }
}

#[derive(Debug, Clone)]
pub struct RemoteOptions {
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        RemoteOptions {
            batch_size: MAX_BATCH,
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(60),
        }
    }
}

/// Blocking client for the model service. Shareable across worker threads.
pub struct RemoteClient {
    base_url: String,
    agent: ureq::Agent,
    opts: RemoteOptions,
    id: ScorerId,
    warnings: AtomicU64,
}

impl std::fmt::Debug for RemoteClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteClient").field("base_url", &self.base_url).field("id", &self.id).finish()
    }
}

impl RemoteClient {
    /// Connects and runs the health check; fails unless the service reports
    /// `"status":"ok"`.
    pub fn connect(base_url: &str, mut opts: RemoteOptions) -> Result<Self, TransportError> {
        opts.batch_size = opts.batch_size.clamp(1, MAX_BATCH);
        opts.max_in_flight = opts.max_in_flight.max(1);
        let agent = ureq::AgentBuilder::new().timeout(opts.timeout).build();
        let mut client = RemoteClient {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent,
            opts,
            id: ScorerId::new("remote", "unknown"),
            warnings: AtomicU64::new(0),
        };
        let health = client.health()?;
        if health.status != "ok" {
            return Err(TransportError::Unhealthy(format!("status `{}`", health.status)));
        }
        client.id = ScorerId::new(&health.model, &health.version);
        Ok(client)
    }

    pub fn health(&self) -> Result<HealthResponse, TransportError> {
        self.with_retry("/v1/health", |url| self.agent.get(url).call())
    }

    /// Count of out-of-range values clamped so far.
    pub fn protocol_warnings(&self) -> u64 {
        self.warnings.load(Ordering::Relaxed)
    }

    fn with_retry<R: DeserializeOwned>(
        &self,
        path: &str,
        send: impl Fn(&str) -> Result<ureq::Response, ureq::Error>,
    ) -> Result<R, TransportError> {
        let url = format!("{}{}", self.base_url, path);
        let mut backoff = self.opts.retry.initial_backoff;
        let attempts = self.opts.retry.attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            match send(&url) {
                Ok(resp) => {
                    return resp
                        .into_json::<R>()
                        .map_err(|e| TransportError::Protocol(format!("{url}: undecodable response: {e}")))
                }
                // 4xx means the request itself is wrong; retrying will not help
                Err(ureq::Error::Status(status, resp)) if (400..500).contains(&status) => {
                    return Err(TransportError::Rejected { url, status, body: resp.into_string().unwrap_or_default() })
                }
                Err(e) => last = e.to_string(),
            }
            if attempt < attempts {
                tracing::warn!(%url, attempt, error = %last, "retrying model service request");
                thread::sleep(backoff);
                backoff *= 2;
            }
        }
        Err(TransportError::Unreachable { url, attempts, message: last })
    }

    fn post<Q: Serialize, R: DeserializeOwned>(&self, path: &str, body: &Q) -> Result<R, TransportError> {
        let payload = serde_json::to_value(body).expect("request serialization is infallible");
        self.with_retry(path, |url| self.agent.post(url).send_json(payload.clone()))
    }

    /// Splits `items` into batches, keeps at most `max_in_flight` requests
    /// outstanding and reassembles results in input order.
    fn batched<I: Sync, T: Send>(
        &self,
        items: &[I],
        call: impl Fn(&[I]) -> Result<Vec<T>, TransportError> + Sync,
    ) -> Result<Vec<T>, TransportError> {
        let batches: Vec<&[I]> = items.chunks(self.opts.batch_size).collect();
        let mut out = Vec::with_capacity(items.len());
        for window in batches.chunks(self.opts.max_in_flight) {
            let results: Vec<Result<Vec<T>, TransportError>> = thread::scope(|s| {
                let handles: Vec<_> = window
                    .iter()
                    .map(|batch| {
                        let call = &call;
                        s.spawn(move || {
                            let r = call(batch)?;
                            if r.len() != batch.len() {
                                return Err(TransportError::Protocol(format!(
                                    "sent {} items, received {}",
                                    batch.len(),
                                    r.len()
                                )));
                            }
                            Ok(r)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("batch worker panicked")).collect()
            });
            for r in results {
                out.extend(r?);
            }
        }
        Ok(out)
    }

    fn clamp(&self, v: f64, lo: f64, hi: f64) -> Result<f64, TransportError> {
        if v.is_nan() {
            return Err(TransportError::Protocol("NaN in response".into()));
        }
        if v < lo || v > hi {
            self.warnings.fetch_add(1, Ordering::Relaxed);
            tracing::warn!(value = v, lo, hi, "clamping out-of-range value from model service");
        }
        Ok(v.clamp(lo, hi))
    }
}

impl Scorer for RemoteClient {
    fn id(&self) -> ScorerId {
        self.id.clone()
    }

    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<FidelityScore>, TransportError> {
        self.batched(pairs, |batch| {
            let req = ScoreRequest {
                pairs: batch.iter().map(|(a, b)| TextPair { a: a.to_string(), b: b.to_string() }).collect(),
            };
            let resp: ScoreResponse = self.post("/v1/score", &req)?;
            resp.scores
                .into_iter()
                .map(|s| {
                    self.clamp(s, FidelityScore::MIN, FidelityScore::MAX)
                        .map(|v| FidelityScore::new(v).expect("clamped into range"))
                })
                .collect()
        })
    }
}

impl BackgroundClassifier for RemoteClient {
    fn confidences(&self, sentences: &[&str]) -> Result<Vec<f64>, TransportError> {
        self.batched(sentences, |batch| {
            let req = SentencesRequest { sentences: batch.iter().map(|s| s.to_string()).collect() };
            let resp: BackgroundResponse = self.post("/v1/classify/background", &req)?;
            if resp.labels.len() != resp.confidences.len() {
                return Err(TransportError::Protocol("labels/confidences length mismatch".into()));
            }
            resp.confidences.into_iter().map(|c| self.clamp(c, 0.0, 1.0)).collect()
        })
    }
}

impl DiscourseClassifier for RemoteClient {
    fn classify(&self, sentences: &[&str]) -> Result<Vec<(DiscourseCategory, f64)>, TransportError> {
        self.batched(sentences, |batch| {
            let req = SentencesRequest { sentences: batch.iter().map(|s| s.to_string()).collect() };
            let resp: DiscourseResponse = self.post("/v1/classify/discourse", &req)?;
            if resp.labels.len() != resp.confidences.len() {
                return Err(TransportError::Protocol("labels/confidences length mismatch".into()));
            }
            resp.labels.into_iter().zip(resp.confidences).map(|(l, c)| Ok((l, self.clamp(c, 0.0, 1.0)?))).collect()
        })
    }
}
