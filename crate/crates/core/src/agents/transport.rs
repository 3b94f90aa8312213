//! Chat-completion transport with retries and a process-wide throttle.

use std::sync::{Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::mock::MockRules;
use super::{AgentConfig, Backend};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("HTTP {status} after {attempts} attempt(s): {body}")]
    Http { status: u16, body: String, attempts: u32 },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("network error after {attempts} attempt(s): {message}")]
    Network { message: String, attempts: u32 },
    #[error("no credential: set ${0}")]
    MissingCredential(String),
    #[error("unexpected response body: {0}")]
    Decode(String),
}

/// Reply text plus how many HTTP attempts it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub attempts: u32,
}

impl Completion {
    pub fn retries(&self) -> u32 {
        self.attempts.saturating_sub(1)
    }
}

/// Something that can answer a chat conversation for a configured agent.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, messages: &[ChatMessage], config: &AgentConfig) -> Result<String, TransportError>;
}

/// Transport backed by [`llm_complete`].
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpChat;

impl ChatTransport for HttpChat {
    fn complete(&self, messages: &[ChatMessage], config: &AgentConfig) -> Result<String, TransportError> {
        llm_complete(messages, config)
    }
}

pub fn llm_complete(messages: &[ChatMessage], config: &AgentConfig) -> Result<String, TransportError> {
    llm_complete_detailed(messages, config).map(|c| c.text)
}

/// Deterministic reply used when a role runs on the mock backend: a JSON
/// object scoring the last user message with the bundled lexicon.
pub fn mock_chat_reply(messages: &[ChatMessage]) -> String {
    let text = messages
        .iter()
        .rev()
        .find(|m| m.role == "user")
        .map(|m| m.content.as_str())
        .unwrap_or_default();
    let score = MockRules::bundled().lexicon_score(text).clamp(-1.0, 1.0);
    json!({ "stance": null, "score": score, "target": null }).to_string()
}

/// Sends one chat-completion request. Retries 429, 5xx, timeouts and network
/// errors with exponential backoff (`backoff_base_ms * 2^attempt`, capped,
/// or the server's `Retry-After`), up to `max_retries` retries. Other 4xx
/// statuses fail immediately.
pub fn llm_complete_detailed(messages: &[ChatMessage], config: &AgentConfig) -> Result<Completion, TransportError> {
    if config.backend == Backend::Mock {
        return Ok(Completion {
            text: mock_chat_reply(messages),
            attempts: 0,
        });
    }
    let endpoint = &config.endpoint;
    let key = match &endpoint.api_key {
        Some(k) => k.clone(),
        None => std::env::var(&endpoint.api_key_env)
            .map_err(|_| TransportError::MissingCredential(endpoint.api_key_env.clone()))?,
    };
    let body = json!({
        "model": config.model_name,
        "messages": messages,
        "temperature": config.temperature,
    });

    let mut attempt: u32 = 0;
    loop {
        attempt += 1;
        throttle(endpoint.requests_per_minute);
        let outcome = http_client()
            .post(&endpoint.url)
            .bearer_auth(&key)
            .timeout(config.timeout)
            .json(&body)
            .send();

        let mut retry_after = None;
        let err = match outcome {
            Ok(resp) if resp.status().is_success() => {
                let value: serde_json::Value =
                    resp.json().map_err(|e| TransportError::Decode(e.to_string()))?;
                let text = value["choices"][0]["message"]["content"]
                    .as_str()
                    .ok_or_else(|| TransportError::Decode(value.to_string()))?;
                return Ok(Completion {
                    text: text.to_string(),
                    attempts: attempt,
                });
            }
            Ok(resp) => {
                let status = resp.status().as_u16();
                retry_after = resp
                    .headers()
                    .get(reqwest::header::RETRY_AFTER)
                    .and_then(|v| v.to_str().ok())
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .and_then(|s| Duration::try_from_secs_f64(s).ok());
                let body = resp.text().unwrap_or_default();
                let err = TransportError::Http {
                    status,
                    body,
                    attempts: attempt,
                };
                if status != 429 && !(500..600).contains(&status) {
                    return Err(err);
                }
                err
            }
            Err(e) if e.is_timeout() => TransportError::Timeout { attempts: attempt },
            Err(e) => TransportError::Network {
                message: e.to_string(),
                attempts: attempt,
            },
        };

        if attempt > config.max_retries {
            return Err(err);
        }
        let backoff = Duration::from_millis(
            endpoint
                .backoff_base_ms
                .saturating_mul(1u64 << (attempt - 1).min(20))
                .min(endpoint.backoff_max_ms),
        );
        let delay = retry_after
            .map(|d| d.min(Duration::from_millis(endpoint.backoff_max_ms)))
            .unwrap_or(backoff);
        tracing::warn!(attempt, ?delay, error = %err, "chat request failed, retrying");
        thread::sleep(delay);
    }
}

fn http_client() -> &'static reqwest::blocking::Client {
    static CLIENT: OnceLock<reqwest::blocking::Client> = OnceLock::new();
    CLIENT.get_or_init(reqwest::blocking::Client::new)
}

/// Blocks until the process-wide request budget allows another request.
fn throttle(requests_per_minute: Option<u32>) {
    static NEXT_SLOT: Mutex<Option<Instant>> = Mutex::new(None);
    let Some(rpm) = requests_per_minute.filter(|&r| r > 0) else {
        return;
    };
    let interval = Duration::from_secs(60) / rpm;
    let wait = {
        let mut next = NEXT_SLOT.lock().unwrap_or_else(|p| p.into_inner());
        let now = Instant::now();
        let slot = next.map_or(now, |n| n.max(now));
        *next = Some(slot + interval);
        slot - now
    };
    if !wait.is_zero() {
        thread::sleep(wait);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentRole;

    #[test]
    fn mock_reply_is_deterministic_and_offline() {
        let msgs = [ChatMessage::system("anything"), ChatMessage::user("they are heroes")];
        let a = mock_chat_reply(&msgs);
        assert_eq!(a, mock_chat_reply(&msgs));
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["score"], 0.6);

        let cfg = AgentConfig::default_for(AgentRole::SentimentExpert, Backend::Mock);
        let c = llm_complete_detailed(&msgs, &cfg).unwrap();
        assert_eq!(c.text, a);
        assert_eq!(c.attempts, 0);
    }

    #[test]
    fn missing_credential_is_reported() {
        let mut cfg = AgentConfig::default_for(AgentRole::SentimentExpert, Backend::RemoteChat);
        cfg.endpoint.api_key_env = "POLARSCOPE_TEST_UNSET_KEY_VARIABLE".into();
        let err = llm_complete(&[ChatMessage::user("x")], &cfg).unwrap_err();
        assert_eq!(
            err,
            TransportError::MissingCredential("POLARSCOPE_TEST_UNSET_KEY_VARIABLE".into())
        );
    }

    #[test]
    fn throttle_spaces_requests() {
        let start = Instant::now();
        for _ in 0..3 {
            throttle(Some(1200));
        }
        // 1200 rpm = 50 ms spacing; the first slot is free.
        assert!(start.elapsed() >= Duration::from_millis(95));
    }
}
