use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

use super::{ChatProvider, ChatTurn, GatewayError, ProviderConfig};

const MAX_BACKOFF: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub url: String,
    pub bearer: Option<String>,
    pub body: Value,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("{0}")]
    Other(String),
}

/// One POST round trip. Split out so retry logic can be tested without a
/// network.
pub trait Transport: Send + Sync {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| GatewayError::InvalidConfig(format!("http client: {e}")))?;
        Ok(ReqwestTransport { client })
    }
}

impl Transport for ReqwestTransport {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let mut builder = self.client.post(&req.url).timeout(req.timeout).json(&req.body);
        if let Some(key) = &req.bearer {
            builder = builder.bearer_auth(key);
        }
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                TransportError::Timeout
            } else if e.is_connect() {
                TransportError::Connect(e.to_string())
            } else {
                TransportError::Other(e.to_string())
            }
        };
        let resp = builder.send().map_err(classify)?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(classify)?;
        Ok(HttpResponse { status, body })
    }
}

fn is_transient_status(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

/// OpenAI-compatible `/chat/completions` client.
pub struct HttpProvider<T: Transport = ReqwestTransport> {
    cfg: ProviderConfig,
    transport: T,
}

impl HttpProvider<ReqwestTransport> {
    pub fn new(cfg: ProviderConfig) -> Result<Self, GatewayError> {
        Self::with_transport(cfg, ReqwestTransport::new()?)
    }
}

impl<T: Transport> HttpProvider<T> {
    pub fn with_transport(cfg: ProviderConfig, transport: T) -> Result<Self, GatewayError> {
        cfg.validate()?;
        Ok(HttpProvider { cfg, transport })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    fn request(&self, turns: &[ChatTurn]) -> Result<HttpRequest, GatewayError> {
        let key = std::env::var(&self.cfg.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| GatewayError::MissingApiKey(self.cfg.api_key_env.clone()))?;
        let messages: Vec<Value> = turns
            .iter()
            .map(|t| json!({"role": t.role.as_str(), "content": t.content}))
            .collect();
        Ok(HttpRequest {
            url: format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/')),
            bearer: Some(key),
            body: json!({
                "model": self.cfg.model_name,
                "messages": messages,
                "temperature": self.cfg.temperature,
            }),
            timeout: self.cfg.timeout(),
        })
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.cfg.retry_backoff_ms.saturating_mul(1u64 << attempt.min(20));
        Duration::from_millis(ms).min(MAX_BACKOFF)
    }
}

fn extract_content(body: &str) -> Result<String, GatewayError> {
    let v: Value = serde_json::from_str(body).map_err(|e| GatewayError::MalformedResponse(e.to_string()))?;
    let content = v
        .pointer("/choices/0/message/content")
        .ok_or_else(|| GatewayError::MalformedResponse("no choices[0].message.content".into()))?;
    match content {
        Value::String(s) if !s.trim().is_empty() => Ok(s.clone()),
        Value::String(_) | Value::Null => Err(GatewayError::EmptyCompletion),
        _ => Err(GatewayError::MalformedResponse("content is not a string".into())),
    }
}

impl<T: Transport> ChatProvider for HttpProvider<T> {
    fn complete(&self, turns: &[ChatTurn]) -> Result<String, GatewayError> {
        if turns.is_empty() {
            return Err(GatewayError::NoTurns);
        }
        let req = self.request(turns)?;
        let attempts = self.cfg.max_retries + 1;
        let mut last = TransportError::Other("no attempt made".into());
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(self.backoff(attempt - 1));
            }
            match self.transport.send(&req) {
                Ok(resp) if (200..300).contains(&resp.status) => return extract_content(&resp.body),
                Ok(resp) if is_transient_status(resp.status) => {
                    last = TransportError::Other(format!("HTTP {}", resp.status));
                }
                Ok(resp) => {
                    return Err(GatewayError::Status {
                        status: resp.status,
                        body: resp.body,
                    })
                }
                Err(e) => last = e,
            }
        }
        Err(GatewayError::Transport { attempts, last })
    }

    fn describe(&self) -> String {
        format!("http:{}@{}", self.cfg.model_name, self.cfg.base_url)
    }
}

/// One-shot completion against a configured endpoint.
pub fn chat_complete(cfg: &ProviderConfig, turns: &[ChatTurn]) -> Result<String, GatewayError> {
    HttpProvider::new(cfg.clone())?.complete(turns)
}
