//! Blocking client for the annotator HTTP service.
//!
//! Wire format (JSON):
//!
//! - `POST /v1/emotions` `{"texts": [..]}` (at most 64 texts) returns
//!   `{"results": [{"label": "sadness", "score": 0.91}, ..]}` in request order.
//! - `POST /v1/depression` `{"text": ".."}` returns
//!   `{"label": "moderate", "score": 0.8, "truncated": false}`.
//! - `GET /health` returns `{"status": "ok", "model_loaded": true}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Annotator, BackendError};
use crate::emotion::{DepressionClass, DepressionLabel, EmotionLabel};

pub const MAX_EMOTION_BATCH: usize = 64;

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    /// Base URL, e.g. `http://127.0.0.1:8080`.
    pub endpoint: String,
    pub timeout: Duration,
    pub batch_size: usize,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(60),
            batch_size: MAX_EMOTION_BATCH,
        }
    }
}

#[derive(Serialize)]
struct EmotionRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmotionResult {
    label: String,
    score: f64,
}

#[derive(Deserialize)]
struct EmotionResponse {
    results: Vec<EmotionResult>,
}

#[derive(Serialize)]
struct DepressionRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct DepressionResponse {
    label: String,
    score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Health {
    pub status: String,
    pub model_loaded: bool,
}

pub struct RemoteAnnotator {
    agent: ureq::Agent,
    base: String,
    batch_size: usize,
}

impl RemoteAnnotator {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteAnnotator {
            agent,
            base: config.endpoint.trim_end_matches('/').to_string(),
            batch_size: config.batch_size.clamp(1, MAX_EMOTION_BATCH),
        }
    }

    fn post<B: Serialize, R: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<R, BackendError> {
        let url = format!("{}{path}", self.base);
        let mut response = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| BackendError(format!("POST {url}: {e}")))?;
        let status = response.status();
        if !status.is_success() {
            let detail = response.body_mut().read_to_string().unwrap_or_default();
            return Err(BackendError(format!(
                "POST {url}: HTTP {}: {}",
                status.as_u16(),
                detail.trim()
            )));
        }
        response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError(format!("POST {url}: bad response body: {e}")))
    }

    pub fn health(&self) -> Result<Health, BackendError> {
        let url = format!("{}/health", self.base);
        let mut response = self
            .agent
            .get(&url)
            .call()
            .map_err(|e| BackendError(format!("GET {url}: {e}")))?;
        if !response.status().is_success() {
            return Err(BackendError(format!(
                "GET {url}: HTTP {}",
                response.status().as_u16()
            )));
        }
        response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError(format!("GET {url}: bad response body: {e}")))
    }
}

fn check_score(score: f64) -> Result<f64, BackendError> {
    if (0.0..=1.0).contains(&score) {
        Ok(score)
    } else {
        Err(BackendError(format!("score {score} outside [0, 1]")))
    }
}

impl Annotator for RemoteAnnotator {
    fn classify_sentences(
        &self,
        texts: &[String],
    ) -> Result<Vec<(EmotionLabel, f64)>, BackendError> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.batch_size) {
            let response: EmotionResponse =
                self.post("/v1/emotions", &EmotionRequest { texts: batch })?;
            if response.results.len() != batch.len() {
                return Err(BackendError(format!(
                    "sent {} texts, received {} results",
                    batch.len(),
                    response.results.len()
                )));
            }
            for r in response.results {
                let label = r.label.parse().map_err(|e| BackendError(format!("{e}")))?;
                out.push((label, check_score(r.score)?));
            }
        }
        Ok(out)
    }

    fn classify_post(&self, text: &str) -> Result<DepressionLabel, BackendError> {
        let response: DepressionResponse =
            self.post("/v1/depression", &DepressionRequest { text })?;
        let class: DepressionClass = response
            .label
            .parse()
            .map_err(|e| BackendError(format!("{e}")))?;
        Ok(DepressionLabel {
            class,
            confidence: check_score(response.score)?,
        })
    }
}
