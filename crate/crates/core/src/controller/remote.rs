//! Chat-completions HTTP client with retries and a bounded worker pool.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{AssessRequest, ControllerError, TrafficController};

pub const DEFAULT_API_KEY_ENV: &str = "JUNCTION_API_KEY";

const MAX_BACKOFF: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    /// Full URL of the chat-completions route.
    pub endpoint: String,
    pub model: String,
    pub timeout: Duration,
    pub max_concurrency: usize,
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub backoff_base: Duration,
    /// Environment variable holding the bearer token; unset means no auth header.
    pub api_key_env: String,
    pub temperature: f64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "gpt-4o-mini".into(),
            timeout: Duration::from_secs(60),
            max_concurrency: 4,
            max_retries: 3,
            backoff_base: Duration::from_millis(500),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            temperature: 0.0,
        }
    }
}

impl RemoteConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if self.timeout.is_zero() {
            return Err(ControllerError::Config("request timeout must be positive".into()));
        }
        if self.max_concurrency == 0 {
            return Err(ControllerError::Config("max concurrency must be at least 1".into()));
        }
        if reqwest::Url::parse(&self.endpoint).is_err() {
            return Err(ControllerError::Config(format!("endpoint {:?} is not a URL", self.endpoint)));
        }
        Ok(())
    }
}

pub struct RemoteController {
    config: RemoteConfig,
    client: Client,
    api_key: Option<String>,
}

enum Failure {
    Retryable(String),
    Fatal(ControllerError),
}

impl RemoteController {
    pub fn new(config: RemoteConfig) -> Result<RemoteController, ControllerError> {
        config.validate()?;
        let client = Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ControllerError::Config(format!("http client: {e}")))?;
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        Ok(RemoteController { config, client, api_key })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    pub fn request_body(&self, request: &AssessRequest<'_>) -> serde_json::Value {
        json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": request.bundle.system_text},
                {"role": "user", "content": request.bundle.user_text},
            ],
        })
    }

    fn attempt(&self, body: &serde_json::Value, scenario_id: &str) -> Result<String, Failure> {
        let mut req = self.client.post(&self.config.endpoint).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Failure::Retryable(e.to_string()))?;
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            return Err(Failure::Retryable(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(Failure::Fatal(ControllerError::Rejected {
                scenario_id: scenario_id.to_owned(),
                status: status.as_u16(),
                message: truncate(&text, 200),
            }));
        }
        completion_text(&text).map_err(|message| {
            Failure::Fatal(ControllerError::MalformedResponse { scenario_id: scenario_id.to_owned(), message })
        })
    }
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{}…", &s[..i]),
        None => s.to_owned(),
    }
}

/// Pulls `choices[0].message.content` out of a completion body.
pub(crate) fn completion_text(body: &str) -> Result<String, String> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(|e| format!("not JSON: {e}"))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_owned)
        .ok_or_else(|| format!("no choices[0].message.content in {}", truncate(body, 200)))
}

impl TrafficController for RemoteController {
    fn name(&self) -> &str {
        "remote"
    }

    fn assess(&self, request: &AssessRequest<'_>) -> Result<String, ControllerError> {
        let body = self.request_body(request);
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let factor = 1u32.checked_shl(attempt - 1).unwrap_or(u32::MAX);
                thread::sleep(self.config.backoff_base.saturating_mul(factor).min(MAX_BACKOFF));
            }
            match self.attempt(&body, request.scenario_id) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => last = msg,
            }
        }
        Err(ControllerError::Transport {
            scenario_id: request.scenario_id.to_owned(),
            attempts: self.config.max_retries + 1,
            message: last,
        })
    }

    fn assess_batch(&self, requests: &[AssessRequest<'_>]) -> Vec<Result<String, ControllerError>> {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<String, ControllerError>>>> = Mutex::new(vec![None; requests.len()]);
        let workers = self.config.max_concurrency.min(requests.len());
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(req) = requests.get(i) else { break };
                    let result = self.assess(req);
                    slots.lock().unwrap()[i] = Some(result);
                });
            }
        });
        slots.into_inner().unwrap().into_iter().map(|r| r.expect("every request handled")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_completion() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"**Conflict Status**: No"}}]}"#;
        assert_eq!(completion_text(body).unwrap(), "**Conflict Status**: No");
        assert!(completion_text("{}").is_err());
        assert!(completion_text("<html>").is_err());
        assert!(completion_text(r#"{"choices":[{"message":{"content":7}}]}"#).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RemoteConfig::default().validate().is_ok());
        let zero = RemoteConfig { max_concurrency: 0, ..RemoteConfig::default() };
        assert!(zero.validate().is_err());
        let t = RemoteConfig { timeout: Duration::ZERO, ..RemoteConfig::default() };
        assert!(t.validate().is_err());
        let u = RemoteConfig { endpoint: "not a url".into(), ..RemoteConfig::default() };
        assert!(u.validate().is_err());
    }
}
