//! Chat-completion access: an HTTP client with retries, a deterministic mock,
//! and item-by-item inventory administration.

pub mod http;
pub mod likert;
pub mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TraitProfile;

pub use http::{chat_complete, HttpProvider, HttpRequest, HttpResponse, ReqwestTransport, Transport, TransportError};
pub use likert::{administer_inventory, item_message, parse_likert, LikertAnswer};
pub use mock::MockProvider;

pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_MODEL: &str = "gpt-4o";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid provider config: {0}")]
    InvalidConfig(String),
    #[error("no chat turns to send")]
    NoTurns,
    #[error("environment variable `{0}` holding the API key is not set")]
    MissingApiKey(String),
    #[error("transport failed after {attempts} attempt(s): {last}")]
    Transport { attempts: u32, last: TransportError },
    #[error("endpoint answered HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed completion response: {0}")]
    MalformedResponse(String),
    #[error("completion was empty")]
    EmptyCompletion,
    #[error("no Likert value in 1..={scale_max} found in `{raw}`")]
    Parse { raw: String, scale_max: u8 },
    #[error("item `{item}` could not be administered: {source}")]
    Administration {
        item: String,
        #[source]
        source: Box<GatewayError>,
    },
}

/// Connection and decoding settings for an OpenAI-compatible endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_secs: f64,
    pub api_key_env: String,
    /// First retry delay; doubles per attempt.
    pub retry_backoff_ms: u64,
    /// Upper bound on concurrent requests issued by batch runners.
    pub max_in_flight: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            base_url: DEFAULT_BASE_URL.into(),
            model_name: DEFAULT_MODEL.into(),
            temperature: 1.0,
            max_retries: 3,
            timeout_secs: 60.0,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            retry_backoff_ms: 500,
            max_in_flight: 8,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let bad = |m: String| Err(GatewayError::InvalidConfig(m));
        match reqwest::Url::parse(&self.base_url) {
            Ok(u) if matches!(u.scheme(), "http" | "https") => {}
            Ok(u) => return bad(format!("unsupported URL scheme `{}`", u.scheme())),
            Err(e) => return bad(format!("base_url `{}`: {e}", self.base_url)),
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return bad(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !self.timeout_secs.is_finite() || self.timeout_secs <= 0.0 {
            return bad(format!("timeout must be positive, got {}", self.timeout_secs));
        }
        if self.model_name.trim().is_empty() {
            return bad("model name is empty".into());
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be at least 1".into());
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// Temperature 0 for smoke tests.
    pub fn deterministic(mut self) -> Self {
        self.temperature = 0.0;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: Role,
    pub content: String,
}

impl ChatTurn {
    pub fn system(content: impl Into<String>) -> Self {
        ChatTurn { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatTurn { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatTurn { role: Role::Assistant, content: content.into() }
    }
}

/// Anything that turns a conversation into the next assistant message.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, turns: &[ChatTurn]) -> Result<String, GatewayError>;

    /// Short description recorded as provenance.
    fn describe(&self) -> String;
}

/// Which provider a batch runner should build for each cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Backend {
    Http(ProviderConfig),
    Mock { seed: u64 },
}

impl Backend {
    /// Provider for one `(profile, replicate)` cell. The mock needs the
    /// profile because it plays the steered model directly.
    pub fn provider(&self, profile: TraitProfile, replicate: u32) -> Result<Box<dyn ChatProvider>, GatewayError> {
        match self {
            Backend::Http(cfg) => Ok(Box::new(HttpProvider::new(cfg.clone())?)),
            Backend::Mock { seed } => Ok(Box::new(MockProvider::new(profile, mock::replicate_seed(*seed, replicate)))),
        }
    }

    pub fn max_in_flight(&self) -> usize {
        match self {
            Backend::Http(cfg) => cfg.max_in_flight,
            Backend::Mock { .. } => rayon::current_num_threads(),
        }
    }

    pub fn model_name(&self) -> String {
        match self {
            Backend::Http(cfg) => cfg.model_name.clone(),
            Backend::Mock { .. } => "mock".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ProviderConfig::default().validate().is_ok());
        let mut c = ProviderConfig::default();
        c.base_url = "not a url".into();
        assert!(c.validate().is_err());
        let mut c = ProviderConfig::default();
        c.base_url = "ftp://x".into();
        assert!(c.validate().is_err());
        let mut c = ProviderConfig::default();
        c.temperature = -0.1;
        assert!(c.validate().is_err());
        assert_eq!(ProviderConfig::default().deterministic().temperature, 0.0);
    }
}
