//! Chat-completions LLM backend.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use textclust_core::oracle::{Oracle, OracleError, Query};

pub const DEFAULT_URL: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "gpt-4o-mini";
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub url: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub temperature: f64,
    pub parallelism: usize,
    pub timeout: Duration,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            url: DEFAULT_URL.into(),
            model: DEFAULT_MODEL.into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            temperature: 0.0,
            parallelism: 4,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [Message<'a>; 1],
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    #[serde(default)]
    content: Option<String>,
}

pub struct HttpOracle {
    client: reqwest::blocking::Client,
    config: HttpConfig,
    api_key: String,
    calls: AtomicUsize,
}

impl HttpOracle {
    /// Fails with a configuration error when the credential variable is
    /// unset or empty, before any request is made.
    pub fn new(config: HttpConfig) -> Result<Self, OracleError> {
        let api_key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| OracleError::Config(format!("environment variable {} is not set", config.api_key_env)))?;
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: HttpConfig, api_key: String) -> Result<Self, OracleError> {
        if config.parallelism == 0 {
            return Err(OracleError::Config("parallelism must be at least 1".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| OracleError::Config(e.to_string()))?;
        Ok(HttpOracle {
            client,
            config,
            api_key,
            calls: AtomicUsize::new(0),
        })
    }

    /// Requests sent so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn request(&self, prompt: &str) -> Result<String, OracleError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let body = ChatRequest {
            model: &self.config.model,
            temperature: self.config.temperature,
            messages: [Message {
                role: "user",
                content: prompt,
            }],
        };
        let resp = self
            .client
            .post(&self.config.url)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| OracleError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(OracleError::Transport(format!("HTTP {status}: {}", text.trim())));
        }
        let parsed: ChatResponse = resp
            .json()
            .map_err(|e| OracleError::Transport(format!("malformed response: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| OracleError::Transport("response has no message content".into()))
    }
}

impl Oracle for HttpOracle {
    fn kind(&self) -> &str {
        "http-llm"
    }

    fn model(&self) -> &str {
        &self.config.model
    }

    fn temperature(&self) -> f64 {
        self.config.temperature
    }

    fn answer(&self, query: &Query) -> Result<String, OracleError> {
        self.request(&query.prompt)
    }

    /// Up to `parallelism` requests in flight; replies stay aligned with
    /// `queries`.
    fn answer_batch(&self, queries: &[Query]) -> Vec<Result<String, OracleError>> {
        let next = AtomicUsize::new(0);
        let workers = self.config.parallelism.min(queries.len()).max(1);
        let mut results: Vec<(usize, Result<String, OracleError>)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some(q) = queries.get(i) else { break };
                            done.push((i, self.request(&q.prompt)));
                        }
                        done
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("request worker panicked"))
                .collect()
        });
        results.sort_by_key(|(i, _)| *i);
        results.into_iter().map(|(_, r)| r).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_credentials_fail_before_dispatch() {
        let config = HttpConfig {
            api_key_env: "TEXTCLUST_TEST_UNSET_KEY".into(),
            ..HttpConfig::default()
        };
        let err = HttpOracle::new(config).err().unwrap();
        assert!(matches!(err, OracleError::Config(m) if m.contains("TEXTCLUST_TEST_UNSET_KEY")));
    }

    #[test]
    fn request_body_has_chat_shape() {
        let body = ChatRequest {
            model: "m",
            temperature: 0.0,
            messages: [Message {
                role: "user",
                content: "hi",
            }],
        };
        assert_eq!(
            serde_json::to_string(&body).unwrap(),
            r#"{"model":"m","temperature":0.0,"messages":[{"role":"user","content":"hi"}]}"#
        );
    }
}
